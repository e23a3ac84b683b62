//! Population networks with target prevalence, mean degree, differential
//! activity and homophily for a single binary attribute.
//!
//! With group sizes fixed, the three targets pin down expected edge counts in
//! the three dyad classes (1-1, 1-0, 0-0). Each class is then an independent
//! Bernoulli graph, which is exactly the dyad-independent exponential family
//! with edges, attribute-match and attribute-activity terms.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dyads;
use crate::error::{Error, Result};
use crate::graph::{AttributeVector, Graph, NodeId};

/// Probabilities above 1 by less than this are rounding, not infeasibility.
const PROBABILITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkTargets {
    pub n: usize,
    pub p: f64,
    pub mean_degree: f64,
    pub diff_activity: f64,
    pub homophily_r: f64,
}

impl NetworkTargets {
    /// `(n1, n0)` with `n1 = round(p * n)`.
    pub fn group_sizes(&self) -> (usize, usize) {
        let n1 = (self.p * self.n as f64).round() as usize;
        (n1, self.n.saturating_sub(n1))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Domain(format!("population size {} must be >= 2", self.n)));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::Domain(format!("prevalence {} must lie in (0, 1)", self.p)));
        }
        let (n1, n0) = self.group_sizes();
        if n1 == 0 || n0 == 0 {
            return Err(Error::Domain(format!(
                "prevalence {} leaves an empty group at n = {} (n1 = {n1}, n0 = {n0})",
                self.p, self.n
            )));
        }
        if !(self.mean_degree > 0.0 && self.mean_degree <= (self.n - 1) as f64) {
            return Err(Error::Domain(format!(
                "mean degree {} must lie in (0, {}]",
                self.mean_degree,
                self.n - 1
            )));
        }
        if !(self.diff_activity > 0.0 && self.diff_activity.is_finite()) {
            return Err(Error::Domain(format!(
                "differential activity {} must be positive",
                self.diff_activity
            )));
        }
        if !(self.homophily_r >= 0.0 && self.homophily_r.is_finite()) {
            return Err(Error::Domain(format!("R = {} must be >= 0", self.homophily_r)));
        }
        Ok(())
    }
}

/// Expected edge counts and per-dyad tie probabilities for the three dyad
/// classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadClassSolution {
    pub n1: usize,
    pub n0: usize,
    pub e11: f64,
    pub e10: f64,
    pub e00: f64,
    pub q11: f64,
    pub q10: f64,
    pub q00: f64,
}

impl DyadClassSolution {
    pub fn expected_edges(&self) -> f64 {
        self.e11 + self.e10 + self.e00
    }

    /// Expected edge ends attached to `z = 1` nodes.
    pub fn group_one_edge_ends(&self) -> f64 {
        2.0 * self.e11 + self.e10
    }
}

fn class_probability(label: &str, expected: f64, dyads: u64) -> Result<f64> {
    if dyads == 0 {
        if expected > 0.0 {
            return Err(Error::Infeasible(format!(
                "{label}: expected {expected:.4} edges but the class has no dyads"
            )));
        }
        return Ok(0.0);
    }
    let q = expected / dyads as f64;
    if q > 1.0 + PROBABILITY_SLACK {
        return Err(Error::Infeasible(format!(
            "{label} = {q:.6} > 1 ({expected:.2} expected edges over {dyads} dyads)"
        )));
    }
    Ok(q.min(1.0))
}

/// Solves the dyad-class moments for explicit group sizes:
///
/// * `e11 + e10 + e00 = n * mean_degree / 2`
/// * `e11 = R * e10`
/// * `(2 e11 + e10) / n1 = D_a * (2 e00 + e10) / n0`
pub fn solve_dyad_classes(
    n: usize,
    n1: usize,
    mean_degree: f64,
    diff_activity: f64,
    homophily_r: f64,
) -> Result<DyadClassSolution> {
    if n1 == 0 || n1 >= n {
        return Err(Error::Domain(format!("group size n1 = {n1} must lie in [1, {n})")));
    }
    let n0 = n - n1;
    let total = n as f64 * mean_degree / 2.0;
    let r = homophily_r;
    // e00 = k * e10 from the activity equation
    let k = ((1.0 + 2.0 * r) * n0 as f64 / (n1 as f64 * diff_activity) - 1.0) / 2.0;
    if k < 0.0 {
        return Err(Error::Infeasible(format!(
            "e00 < 0: D_a = {diff_activity} too large for R = {r} with n1 = {n1}, n0 = {n0}"
        )));
    }
    let e10 = total / (1.0 + r + k);
    let e11 = r * e10;
    let e00 = k * e10;
    let q11 = class_probability("q11", e11, dyads::within_count(n1))?;
    let q10 = class_probability("q10", e10, dyads::between_count(n1, n0))?;
    let q00 = class_probability("q00", e00, dyads::within_count(n0))?;
    Ok(DyadClassSolution {
        n1,
        n0,
        e11,
        e10,
        e00,
        q11,
        q10,
        q00,
    })
}

pub fn solve_edge_targets(t: &NetworkTargets) -> Result<DyadClassSolution> {
    t.validate()?;
    let (n1, _) = t.group_sizes();
    solve_dyad_classes(t.n, n1, t.mean_degree, t.diff_activity, t.homophily_r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GenerationMode {
    /// Independent Bernoulli draw per dyad with its class probability.
    #[default]
    Bernoulli,
    /// Exactly `round(n * mean_degree / 2)` edges, apportioned over classes
    /// by largest remainder and placed uniformly within each class.
    ExactCount,
}

impl std::str::FromStr for GenerationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bernoulli" => Ok(GenerationMode::Bernoulli),
            "exact-count" | "exact_count" => Ok(GenerationMode::ExactCount),
            other => Err(Error::Config(format!(
                "unknown generation mode {other:?} (expected bernoulli or exact-count)"
            ))),
        }
    }
}

impl std::fmt::Display for GenerationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GenerationMode::Bernoulli => "bernoulli",
            GenerationMode::ExactCount => "exact-count",
        })
    }
}

/// Integer edge counts per class summing to `round(total)`.
fn apportion(solution: &DyadClassSolution, total: f64) -> [u64; 3] {
    let expected = [solution.e11, solution.e10, solution.e00];
    let capacity = [
        dyads::within_count(solution.n1),
        dyads::between_count(solution.n1, solution.n0),
        dyads::within_count(solution.n0),
    ];
    let mut counts = [0u64; 3];
    for i in 0..3 {
        counts[i] = (expected[i].floor() as u64).min(capacity[i]);
    }
    let target = total.round() as u64;
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let fa = expected[a] - expected[a].floor();
        let fb = expected[b] - expected[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut assigned: u64 = counts.iter().sum();
    for &i in order.iter().cycle().take(3 * 3) {
        if assigned >= target {
            break;
        }
        if counts[i] < capacity[i] {
            counts[i] += 1;
            assigned += 1;
        }
    }
    counts
}

/// Draws a population network and its attribute. Exactly `n1` randomly
/// chosen nodes carry `z = 1`.
pub fn generate_network<R: Rng + ?Sized>(
    t: &NetworkTargets,
    rng: &mut R,
    mode: GenerationMode,
) -> Result<(Graph, AttributeVector)> {
    let solution = solve_edge_targets(t)?;
    let mut order: Vec<NodeId> = (0..t.n).collect();
    order.shuffle(rng);
    let (ones, zeros) = order.split_at(solution.n1);
    let mut values = vec![0u8; t.n];
    for &v in ones {
        values[v] = 1;
    }

    let mut edges = Vec::with_capacity(solution.expected_edges().ceil() as usize + 16);
    match mode {
        GenerationMode::Bernoulli => {
            dyads::bernoulli_within(ones, solution.q11, rng, &mut edges);
            dyads::bernoulli_between(ones, zeros, solution.q10, rng, &mut edges);
            dyads::bernoulli_within(zeros, solution.q00, rng, &mut edges);
        }
        GenerationMode::ExactCount => {
            let total = t.n as f64 * t.mean_degree / 2.0;
            let [c11, c10, c00] = apportion(&solution, total);
            dyads::exact_within(ones, c11, rng, &mut edges);
            dyads::exact_between(ones, zeros, c10, rng, &mut edges);
            dyads::exact_within(zeros, c00, rng, &mut edges);
        }
    }
    let graph = Graph::from_normalized_unchecked(t.n, edges);
    Ok((graph, AttributeVector::new("z", values)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn base() -> NetworkTargets {
        NetworkTargets {
            n: 1000,
            p: 0.5,
            mean_degree: 10.0,
            diff_activity: 1.0,
            homophily_r: 1.0,
        }
    }

    /// Independent substitution of a solution into the three moment
    /// equations, as relative residuals.
    fn residuals(t: &NetworkTargets, s: &DyadClassSolution) -> [f64; 3] {
        let total = t.n as f64 * t.mean_degree / 2.0;
        let (n1, n0) = (s.n1 as f64, s.n0 as f64);
        let lhs_act = (2.0 * s.e11 + s.e10) / n1;
        let rhs_act = t.diff_activity * (2.0 * s.e00 + s.e10) / n0;
        [
            (s.e11 + s.e10 + s.e00 - total).abs() / total,
            (s.e11 - t.homophily_r * s.e10).abs() / s.e11.max(s.e10),
            (lhs_act - rhs_act).abs() / lhs_act.max(rhs_act),
        ]
    }

    #[test]
    fn symmetric_base_cell() {
        let s = solve_edge_targets(&base()).unwrap();
        for e in [s.e11, s.e10, s.e00] {
            assert_abs_diff_eq!(e, 5000.0 / 3.0, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(s.q11, 0.013_360, epsilon = 1e-6);
        assert_abs_diff_eq!(s.q00, 0.013_360, epsilon = 1e-6);
        assert_abs_diff_eq!(s.q10, 0.006_666_7, epsilon = 1e-7);
    }

    #[test]
    fn zero_homophily_has_no_within_one_edges() {
        let s = solve_edge_targets(&NetworkTargets { homophily_r: 0.0, ..base() }).unwrap();
        assert_eq!(s.e11, 0.0);
        assert_eq!(s.q11, 0.0);
    }

    #[test]
    fn small_illustrative_network_is_feasible() {
        let t = NetworkTargets {
            n: 12,
            p: 0.33,
            mean_degree: 2.16,
            diff_activity: 1.16,
            homophily_r: 0.40,
        };
        let s = solve_edge_targets(&t).unwrap();
        assert_eq!((s.n1, s.n0), (4, 8));
        for q in [s.q11, s.q10, s.q00] {
            assert!((0.0..=1.0).contains(&q));
        }
        assert!(residuals(&t, &s).iter().all(|&r| r <= 1e-9));
    }

    #[test]
    fn residuals_vanish_over_published_grid() {
        for &p in &[0.1, 0.5, 0.8] {
            for &da in &[0.5, 1.0, 4.0] {
                for &r in &[1.0, 5.0] {
                    for &d in &[20.0, 99.9] {
                        let t = NetworkTargets { n: 1000, p, mean_degree: d, diff_activity: da, homophily_r: r };
                        match solve_edge_targets(&t) {
                            Ok(s) => assert!(residuals(&t, &s).iter().all(|&x| x <= 1e-9), "{t:?}"),
                            Err(Error::Infeasible(msg)) => assert!(msg.contains('q') || msg.contains("e00"), "{msg}"),
                            Err(e) => panic!("{e}"),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn infeasibility_names_binding_bound() {
        let t = NetworkTargets { n: 1000, p: 0.1, mean_degree: 99.9, diff_activity: 4.0, homophily_r: 5.0 };
        let msg = solve_edge_targets(&t).unwrap_err().to_string();
        assert!(msg.contains("q11") && msg.contains("> 1"), "{msg}");
    }

    #[test]
    fn invalid_targets_rejected() {
        assert!(solve_edge_targets(&NetworkTargets { p: 0.0, ..base() }).is_err());
        assert!(solve_edge_targets(&NetworkTargets { n: 1, ..base() }).is_err());
        assert!(solve_edge_targets(&NetworkTargets { n: 3, p: 0.1, ..base() }).is_err());
        assert!(solve_edge_targets(&NetworkTargets { diff_activity: -1.0, ..base() }).is_err());
        assert!(solve_edge_targets(&NetworkTargets { mean_degree: 1000.0, ..base() }).is_err());
    }

    #[test]
    fn saturated_targets_give_complete_graph() {
        // complete graph on 10 nodes split 5/5: R = C(5,2) / 25 = 0.4, D_a = 1
        let t = NetworkTargets { n: 10, p: 0.5, mean_degree: 9.0, diff_activity: 1.0, homophily_r: 0.4 };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for mode in [GenerationMode::Bernoulli, GenerationMode::ExactCount] {
            let (g, z) = generate_network(&t, &mut rng, mode).unwrap();
            assert_eq!(g, Graph::complete(10));
            assert_eq!(z.count_ones(), 5);
        }
    }

    #[test]
    fn exact_count_mode_hits_edge_total() {
        let t = NetworkTargets { n: 1000, p: 0.1, mean_degree: 20.0, diff_activity: 4.0, homophily_r: 5.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..5 {
            let (g, z) = generate_network(&t, &mut rng, GenerationMode::ExactCount).unwrap();
            assert_eq!(g.edge_count(), 10_000);
            assert_eq!(z.count_ones(), 100);
        }
        let odd = NetworkTargets { n: 12, p: 0.33, mean_degree: 2.16, diff_activity: 1.16, homophily_r: 0.4 };
        let (g, _) = generate_network(&odd, &mut rng, GenerationMode::ExactCount).unwrap();
        assert_eq!(g.edge_count(), 13);
    }

    #[test]
    fn bernoulli_realisations_concentrate_on_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (mut da, mut r) = (0.0, 0.0);
        let reps = 100;
        for _ in 0..reps {
            let (g, z) = generate_network(&base(), &mut rng, GenerationMode::Bernoulli).unwrap();
            da += stats::differential_activity(&g, &z).unwrap();
            r += stats::homophily_r(&stats::mixing_counts(&g, &z).unwrap()).unwrap();
        }
        let (da, r) = (da / reps as f64, r / reps as f64);
        assert!((0.98..=1.02).contains(&da), "{da}");
        assert!((0.95..=1.05).contains(&r), "{r}");
    }

    #[test]
    fn realised_class_counts_are_unbiased() {
        let t = NetworkTargets { n: 300, p: 0.3, mean_degree: 8.0, diff_activity: 2.0, homophily_r: 3.0 };
        let s = solve_edge_targets(&t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let reps = 400;
        let mut sums = [0.0f64; 3];
        let mut squares = [0.0f64; 3];
        for _ in 0..reps {
            let (g, z) = generate_network(&t, &mut rng, GenerationMode::Bernoulli).unwrap();
            let m = stats::mixing_counts(&g, &z).unwrap();
            for (i, v) in [m.within_1, m.cross, m.within_0].into_iter().enumerate() {
                sums[i] += v as f64;
                squares[i] += (v * v) as f64;
            }
        }
        for (i, want) in [s.e11, s.e10, s.e00].into_iter().enumerate() {
            let mean = sums[i] / reps as f64;
            let var = squares[i] / reps as f64 - mean * mean;
            let se = (var / reps as f64).sqrt();
            assert!((mean - want).abs() <= 3.0 * se, "class {i}: {mean} vs {want} (se {se})");
        }
    }
}
