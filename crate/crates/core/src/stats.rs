//! Exact population statistics of a graph and a binary attribute: mean
//! degree, prevalence, differential activity and the two homophily measures.

use crate::error::{Error, Result};
use crate::graph::{AttributeVector, Graph, MixingCounts};

pub fn mean_degree(g: &Graph) -> f64 {
    2.0 * g.edge_count() as f64 / g.node_count() as f64
}

pub fn prevalence(z: &AttributeVector) -> f64 {
    z.count_ones() as f64 / z.len() as f64
}

/// Ratio of group mean degrees from integer degree sums and group sizes.
/// Shared by the population statistic and the sample estimator so that a
/// census reproduces the truth bit for bit.
pub(crate) fn degree_ratio(
    degree_sum_1: u64,
    count_1: u64,
    degree_sum_0: u64,
    count_0: u64,
) -> Result<f64> {
    if count_1 == 0 || count_0 == 0 {
        return Err(Error::Undefined(
            "differential activity needs both attribute groups".into(),
        ));
    }
    if degree_sum_0 == 0 {
        return Err(Error::Undefined(
            "differential activity: z=0 group has no edge ends".into(),
        ));
    }
    let mean_1 = degree_sum_1 as f64 / count_1 as f64;
    let mean_0 = degree_sum_0 as f64 / count_0 as f64;
    Ok(mean_1 / mean_0)
}

/// Mean degree of the `z = 1` group over mean degree of the `z = 0` group.
pub fn differential_activity(g: &Graph, z: &AttributeVector) -> Result<f64> {
    z.check_matches(g)?;
    let (mut sum, mut count) = ([0u64; 2], [0u64; 2]);
    for node in 0..g.node_count() {
        let group = z.get(node) as usize;
        sum[group] += g.degree(node) as u64;
        count[group] += 1;
    }
    degree_ratio(sum[1], count[1], sum[0], count[0])
}

pub fn mixing_counts(g: &Graph, z: &AttributeVector) -> Result<MixingCounts> {
    z.check_matches(g)?;
    Ok(MixingCounts::from_pairs(
        g.edges().iter().map(|&(a, b)| (z.get(a), z.get(b))),
    ))
}

/// `R = p11 / p10`, the ratio of within-1 edges to cross edges.
pub fn homophily_r(m: &MixingCounts) -> Result<f64> {
    if m.cross == 0 {
        return Err(Error::Undefined("R is undefined without cross edges".into()));
    }
    Ok(m.within_1 as f64 / m.cross as f64)
}

/// Newman's categorical assortativity coefficient for a binary attribute on an
/// undirected graph. Cross edges are split evenly between the two off-diagonal
/// cells of the mixing matrix.
pub fn homophily_newman(m: &MixingCounts) -> Result<f64> {
    let total = m.total();
    if total == 0 {
        return Err(Error::Undefined("homophily needs at least one edge".into()));
    }
    if m.cross == 0 && (m.within_0 == 0 || m.within_1 == 0) {
        return Err(Error::Undefined(
            "homophily is undefined when all edge ends share one attribute value".into(),
        ));
    }
    let total = total as f64;
    let e11 = m.within_1 as f64 / total;
    let e00 = m.within_0 as f64 / total;
    let half_cross = m.cross as f64 / (2.0 * total);
    let a1 = e11 + half_cross;
    let a0 = e00 + half_cross;
    let expected = a1 * a1 + a0 * a0;
    let h = (e11 + e00 - expected) / (1.0 - expected);
    Ok(h.clamp(-1.0, 1.0))
}

fn eta(p: f64, diff_activity: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("prevalence {p} must lie in (0, 1)")));
    }
    if !(diff_activity > 0.0) || !diff_activity.is_finite() {
        return Err(Error::Domain(format!(
            "differential activity {diff_activity} must be positive"
        )));
    }
    Ok((1.0 - p) / (p * diff_activity))
}

fn h_from_r_eta(r: f64, eta: f64) -> f64 {
    r / (1.0 + r) - 2.0 / (1.0 + eta * (1.0 + 2.0 * r))
}

/// Maps the ratio measure `R` to Newman's `h` given prevalence and
/// differential activity, with `eta = (1 - p) / (p * D_a)`.
pub fn h_from_r(r: f64, p: f64, diff_activity: f64) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("R = {r} must be finite and >= 0")));
    }
    Ok(h_from_r_eta(r, eta(p, diff_activity)?))
}

/// Numerical inverse of [`h_from_r`] in `R`, by bisection.
pub fn r_from_h(h: f64, p: f64, diff_activity: f64) -> Result<f64> {
    let eta = eta(p, diff_activity)?;
    let floor = h_from_r_eta(0.0, eta);
    if !(h >= floor && h < 1.0) {
        return Err(Error::Domain(format!(
            "h = {h} is outside the attainable range [{floor:.6}, 1) for p = {p}, D_a = {diff_activity}"
        )));
    }
    if h == floor {
        return Ok(0.0);
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while h_from_r_eta(hi, eta) < h {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Domain(format!("h = {h} too close to 1 to invert")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let value = h_from_r_eta(mid, eta);
        if value < h {
            lo = mid;
        } else {
            hi = mid;
        }
        if (value - h).abs() <= 1e-13 && hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn three_node() -> (Graph, AttributeVector) {
        // A(z=1) - B(z=1), A - C(z=0)
        let g = Graph::from_edges(3, [(0, 1), (0, 2)]).unwrap();
        let z = AttributeVector::new("z", vec![1, 1, 0]).unwrap();
        (g, z)
    }

    fn two_cliques(k: usize) -> (Graph, AttributeVector) {
        let mut edges = Vec::new();
        for a in 0..k {
            for b in a + 1..k {
                edges.push((a, b));
                edges.push((a + k, b + k));
            }
        }
        let g = Graph::from_edges(2 * k, edges).unwrap();
        let z = AttributeVector::from_bools("z", (0..2 * k).map(|i| i < k));
        (g, z)
    }

    fn complete_bipartite(k: usize) -> (Graph, AttributeVector) {
        let edges = (0..k).flat_map(|a| (k..2 * k).map(move |b| (a, b)));
        let g = Graph::from_edges(2 * k, edges).unwrap();
        let z = AttributeVector::from_bools("z", (0..2 * k).map(|i| i < k));
        (g, z)
    }

    #[test]
    fn mean_degree_examples() {
        assert_eq!(mean_degree(&Graph::complete(3)), 2.0);
        assert_eq!(mean_degree(&Graph::complete(4)), 3.0);
        let path = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert_abs_diff_eq!(mean_degree(&path), 4.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn prevalence_examples() {
        let z = |v: Vec<u8>| AttributeVector::new("z", v).unwrap();
        assert_eq!(prevalence(&z(vec![0, 0, 0, 0])), 0.0);
        assert_eq!(prevalence(&z(vec![1, 1, 0, 0])), 0.5);
        assert_abs_diff_eq!(prevalence(&z(vec![1, 1, 0])), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn differential_activity_examples() {
        let (g, z) = three_node();
        assert_abs_diff_eq!(differential_activity(&g, &z).unwrap(), 1.5, epsilon = 1e-15);

        // relabelling 0<->1 maps the bipartite graph onto itself
        let (g, z) = complete_bipartite(3);
        assert_eq!(differential_activity(&g, &z).unwrap(), 1.0);

        let g = Graph::from_edges(4, [(2, 3)]).unwrap();
        let z = AttributeVector::new("z", vec![1, 1, 0, 0]).unwrap();
        assert_eq!(differential_activity(&g, &z).unwrap(), 0.0);
    }

    #[test]
    fn differential_activity_undefined_cases() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        let all_one = AttributeVector::new("z", vec![1, 1, 1]).unwrap();
        assert!(differential_activity(&g, &all_one).unwrap_err().is_undefined());
        let zero_isolated = AttributeVector::new("z", vec![1, 1, 0]).unwrap();
        assert!(differential_activity(&g, &zero_isolated)
            .unwrap_err()
            .is_undefined());
    }

    #[test]
    fn mixing_counts_examples() {
        let (g, z) = two_cliques(4);
        assert_eq!(mixing_counts(&g, &z).unwrap().cross, 0);

        let (g, z) = complete_bipartite(3);
        let m = mixing_counts(&g, &z).unwrap();
        assert_eq!((m.within_1, m.within_0, m.cross), (0, 0, 9));

        let (g, z) = three_node();
        let m = mixing_counts(&g, &z).unwrap();
        assert_eq!((m.within_1, m.cross, m.within_0), (1, 1, 0));
    }

    #[test]
    fn homophily_r_examples() {
        let m = MixingCounts { within_1: 7, within_0: 3, cross: 7 };
        assert_eq!(homophily_r(&m).unwrap(), 1.0);
        let (g, z) = three_node();
        assert_eq!(homophily_r(&mixing_counts(&g, &z).unwrap()).unwrap(), 1.0);
        let m = MixingCounts { within_1: 2, within_0: 3, cross: 0 };
        assert!(homophily_r(&m).unwrap_err().is_undefined());
    }

    #[test]
    fn homophily_newman_examples() {
        let (g, z) = two_cliques(4);
        assert_eq!(homophily_newman(&mixing_counts(&g, &z).unwrap()).unwrap(), 1.0);
        let (g, z) = complete_bipartite(4);
        assert_eq!(homophily_newman(&mixing_counts(&g, &z).unwrap()).unwrap(), -1.0);
        let (g, z) = three_node();
        assert_abs_diff_eq!(
            homophily_newman(&mixing_counts(&g, &z).unwrap()).unwrap(),
            -1.0 / 3.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn homophily_newman_degenerate() {
        let m = MixingCounts { within_1: 5, within_0: 0, cross: 0 };
        assert!(homophily_newman(&m).unwrap_err().is_undefined());
        assert!(homophily_newman(&MixingCounts::default()).is_err());
    }

    #[test]
    fn h_from_r_examples() {
        let h = h_from_r(0.40, 0.33, 1.16).unwrap();
        assert_abs_diff_eq!(h, -0.196, epsilon = 5e-4);
        assert_abs_diff_eq!(h_from_r(1.0, 0.5, 1.0).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h_from_r(5.0, 0.5, 1.0).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn h_from_r_domain_errors() {
        assert!(matches!(h_from_r(1.0, 0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(h_from_r(1.0, 1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(h_from_r(1.0, 0.5, 0.0), Err(Error::Domain(_))));
        assert!(matches!(h_from_r(-1.0, 0.5, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn r_from_h_examples() {
        let h = h_from_r(5.0, 0.5, 1.0).unwrap();
        assert_abs_diff_eq!(r_from_h(h, 0.5, 1.0).unwrap(), 5.0, epsilon = 1e-8);
        assert_abs_diff_eq!(r_from_h(-0.196, 0.33, 1.16).unwrap(), 0.40, epsilon = 0.01);
        assert_abs_diff_eq!(r_from_h(0.0, 0.5, 1.0).unwrap(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn r_from_h_rejects_unattainable() {
        assert!(r_from_h(1.0, 0.5, 1.0).is_err());
        // h(R = 0) = -2 / (1 + eta) = -1 at p = 0.5, D_a = 1
        assert!(r_from_h(-1.5, 0.5, 1.0).is_err());
        assert_eq!(r_from_h(-1.0, 0.5, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn h_from_r_is_increasing_with_limit_one() {
        for &(p, da) in &[(0.1, 0.5), (0.5, 1.0), (0.8, 4.0), (0.127, 1.32)] {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..400 {
                let r = i as f64 * 0.05;
                let h = h_from_r(r, p, da).unwrap();
                assert!(h > prev, "not increasing at R = {r}");
                prev = h;
            }
            assert!(1.0 - h_from_r(1e9, p, da).unwrap() < 1e-6);
        }
    }
}
