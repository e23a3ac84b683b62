//! Sample estimates of the network estimands from an RDS recruitment forest.
//!
//! Degree-based estimates use reported degrees. Homophily is estimated from
//! the recruitment edges alone, since that is the only tie information RDS
//! observes.

use crate::error::{Error, Result};
use crate::graph::{Graph, MixingCounts};
use crate::rds::RecruitmentForest;
use crate::stats::{self, degree_ratio};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SampleEstimates {
    pub d_a_hat: Option<f64>,
    pub h_hat: Option<f64>,
    pub r_hat: Option<f64>,
    pub rds2_prevalence: Option<f64>,
    pub crude_prevalence: Option<f64>,
    pub sample_size: usize,
    pub max_wave: u32,
}

/// Ratio of mean reported degrees, `z = 1` over `z = 0`.
pub fn estimate_da(f: &RecruitmentForest, attr: usize) -> Result<f64> {
    let (mut sum, mut count) = ([0u64; 2], [0u64; 2]);
    for e in &f.entries {
        let group = e.attributes[attr] as usize;
        sum[group] += e.reported_degree as u64;
        count[group] += 1;
    }
    degree_ratio(sum[1], count[1], sum[0], count[0])
}

/// Mixing counts over recruiter-recruit pairs.
pub fn recruitment_mixing(f: &RecruitmentForest, attr: usize) -> MixingCounts {
    let mut value = std::collections::HashMap::with_capacity(f.len());
    for e in &f.entries {
        value.insert(e.node, e.attributes[attr]);
    }
    MixingCounts::from_pairs(f.entries.iter().filter_map(|e| {
        e.recruiter.map(|r| (value[&r], e.attributes[attr]))
    }))
}

/// `(h_hat, r_hat)` from recruitment edges. Either may be undefined
/// independently (e.g. `r_hat` without cross recruitments).
pub fn estimate_homophily(f: &RecruitmentForest, attr: usize) -> (Result<f64>, Result<f64>) {
    let m = recruitment_mixing(f, attr);
    if m.total() == 0 {
        let none = || Err(Error::Undefined("forest has no recruitment edges".into()));
        return (none(), none());
    }
    (stats::homophily_newman(&m), stats::homophily_r(&m))
}

/// Homophily of the subgraph induced by the sampled nodes. This needs the
/// population graph, so it is only available inside simulations.
pub fn induced_homophily(f: &RecruitmentForest, g: &Graph, attr: usize) -> Result<f64> {
    let mut value = vec![None; g.node_count()];
    for e in &f.entries {
        value[e.node] = Some(e.attributes[attr]);
    }
    let m = MixingCounts::from_pairs(g.edges().iter().filter_map(|&(a, b)| {
        Some((value[a]?, value[b]?))
    }));
    stats::homophily_newman(&m)
}

/// Inverse-degree weighted (RDS-II) prevalence of `z = 1`.
pub fn rds2_prevalence(f: &RecruitmentForest, attr: usize) -> Result<f64> {
    if f.is_empty() {
        return Err(Error::Undefined("empty sample".into()));
    }
    let (mut weighted, mut total) = (0.0f64, 0.0f64);
    for e in &f.entries {
        if e.reported_degree == 0 {
            return Err(Error::InvalidInput(format!(
                "node {} reports degree 0 and cannot have been recruited",
                e.node
            )));
        }
        let w = 1.0 / e.reported_degree as f64;
        total += w;
        if e.attributes[attr] == 1 {
            weighted += w;
        }
    }
    Ok(weighted / total)
}

pub fn crude_prevalence(f: &RecruitmentForest, attr: usize) -> Result<f64> {
    if f.is_empty() {
        return Err(Error::Undefined("empty sample".into()));
    }
    let ones = f.entries.iter().filter(|e| e.attributes[attr] == 1).count();
    Ok(ones as f64 / f.len() as f64)
}

pub fn relative_bias(estimate: f64, truth: f64) -> Option<f64> {
    if truth == 0.0 || !truth.is_finite() || !estimate.is_finite() {
        return None;
    }
    Some((estimate - truth) / truth)
}

pub fn estimate_all(f: &RecruitmentForest, attr: usize) -> SampleEstimates {
    let (h, r) = estimate_homophily(f, attr);
    SampleEstimates {
        d_a_hat: estimate_da(f, attr).ok(),
        h_hat: h.ok(),
        r_hat: r.ok(),
        rds2_prevalence: rds2_prevalence(f, attr).ok(),
        crude_prevalence: crude_prevalence(f, attr).ok(),
        sample_size: f.len(),
        max_wave: f.max_wave(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rds::ForestEntry;

    fn entry(node: usize, recruiter: Option<usize>, degree: usize, z: u8) -> ForestEntry {
        ForestEntry {
            node,
            recruiter,
            wave: u32::from(recruiter.is_some()),
            seed_id: 0,
            coupon_index: recruiter.map(|_| 0),
            reported_degree: degree,
            attributes: vec![z],
        }
    }

    fn forest(entries: Vec<ForestEntry>) -> RecruitmentForest {
        RecruitmentForest {
            attribute_names: vec!["z".into()],
            entries,
            truncated: false,
            reseeds: 0,
        }
    }

    #[test]
    fn da_examples() {
        let f = forest(vec![entry(0, None, 4, 1), entry(1, Some(0), 2, 1), entry(2, Some(0), 3, 0)]);
        assert_eq!(estimate_da(&f, 0).unwrap(), 1.0);
        let f = forest(vec![entry(0, None, 5, 1), entry(1, Some(0), 5, 0), entry(2, Some(1), 5, 0)]);
        assert_eq!(estimate_da(&f, 0).unwrap(), 1.0);
        let f = forest(vec![entry(0, None, 5, 1), entry(1, Some(0), 3, 1)]);
        assert!(estimate_da(&f, 0).unwrap_err().is_undefined());
    }

    #[test]
    fn homophily_examples() {
        let within = forest(vec![entry(0, None, 3, 1), entry(1, Some(0), 3, 1), entry(2, None, 3, 0), entry(3, Some(2), 3, 0)]);
        assert_eq!(estimate_homophily(&within, 0).0.unwrap(), 1.0);
        assert!(estimate_homophily(&within, 0).1.is_err());

        let cross = forest(vec![entry(0, None, 3, 1), entry(1, Some(0), 3, 0), entry(2, Some(1), 3, 1)]);
        assert_eq!(estimate_homophily(&cross, 0).0.unwrap(), -1.0);

        let mixed = forest(vec![entry(0, None, 3, 1), entry(1, Some(0), 3, 1), entry(2, Some(0), 3, 0)]);
        let (h, r) = estimate_homophily(&mixed, 0);
        assert!((h.unwrap() + 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.unwrap(), 1.0);

        let seeds_only = forest(vec![entry(0, None, 3, 1)]);
        assert!(estimate_homophily(&seeds_only, 0).0.unwrap_err().is_undefined());
    }

    #[test]
    fn rds2_examples() {
        let f = forest(vec![entry(0, None, 4, 1), entry(1, Some(0), 4, 0), entry(2, Some(0), 4, 1)]);
        assert_eq!(rds2_prevalence(&f, 0).unwrap(), crude_prevalence(&f, 0).unwrap());
        let f = forest(vec![entry(0, None, 2, 1), entry(1, Some(0), 1, 0)]);
        assert!((rds2_prevalence(&f, 0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let f = forest(vec![entry(0, None, 7, 1)]);
        assert_eq!(rds2_prevalence(&f, 0).unwrap(), 1.0);
        let f = forest(vec![entry(0, None, 0, 1)]);
        assert!(matches!(rds2_prevalence(&f, 0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn relative_bias_examples() {
        assert_eq!(relative_bias(1.0, 1.0), Some(0.0));
        assert!((relative_bias(1.1, 1.0).unwrap() - 0.1).abs() < 1e-15);
        assert!((relative_bias(0.8, 1.0).unwrap() + 0.2).abs() < 1e-15);
        assert_eq!(relative_bias(0.3, 0.0), None);
    }
}
