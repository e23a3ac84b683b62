//! Respondent-driven sampling over a population graph.
//!
//! Recruitment proceeds breadth-first in coupon-issuance order: sampled nodes
//! wait in a FIFO queue, and each dequeued node hands its coupons to
//! currently unsampled neighbours chosen uniformly without replacement. No
//! node is sampled twice and every recruitment follows a population edge.

use std::collections::VecDeque;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{AttributeVector, Graph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeedSelection {
    #[default]
    Uniform,
    /// Sequential draws without replacement, weighted by degree.
    DegreeProportional,
}

impl std::str::FromStr for SeedSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(SeedSelection::Uniform),
            "degree-proportional" | "degree_proportional" | "degree" => {
                Ok(SeedSelection::DegreeProportional)
            }
            other => Err(Error::Config(format!(
                "unknown seed selection {other:?} (expected uniform or degree-proportional)"
            ))),
        }
    }
}

impl std::fmt::Display for SeedSelection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SeedSelection::Uniform => "uniform",
            SeedSelection::DegreeProportional => "degree-proportional",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub num_seeds: usize,
    /// Coupons per participant; `usize::MAX` means unlimited.
    pub coupons_per_node: usize,
    pub target_sample_size: usize,
    pub seed_selection: SeedSelection,
    pub reseed_on_death: bool,
}

impl SamplerConfig {
    pub fn new(num_seeds: usize, coupons_per_node: usize, target_sample_size: usize) -> Self {
        SamplerConfig {
            num_seeds,
            coupons_per_node,
            target_sample_size,
            seed_selection: SeedSelection::Uniform,
            reseed_on_death: true,
        }
    }

    pub fn validate(&self, population: usize) -> Result<()> {
        if self.num_seeds == 0 {
            return Err(Error::Sampler("at least one seed is required".into()));
        }
        if self.coupons_per_node == 0 {
            return Err(Error::Sampler("coupons per node must be >= 1".into()));
        }
        if self.num_seeds > self.target_sample_size {
            return Err(Error::Sampler(format!(
                "{} seeds exceed the sample size {}",
                self.num_seeds, self.target_sample_size
            )));
        }
        if self.target_sample_size > population {
            return Err(Error::Sampler(format!(
                "sample size {} exceeds population {population}",
                self.target_sample_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestEntry {
    pub node: NodeId,
    pub recruiter: Option<NodeId>,
    pub wave: u32,
    pub seed_id: u32,
    /// Which of the recruiter's coupons brought this node in; `None` for seeds.
    pub coupon_index: Option<u32>,
    pub reported_degree: usize,
    pub attributes: Vec<u8>,
}

impl ForestEntry {
    pub fn is_seed(&self) -> bool {
        self.recruiter.is_none()
    }
}

/// The observed RDS data: participants in recruitment order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RecruitmentForest {
    pub attribute_names: Vec<String>,
    pub entries: Vec<ForestEntry>,
    /// Recruitment stopped before the target size.
    pub truncated: bool,
    /// Seeds added after the initial `num_seeds` because chains died out.
    pub reseeds: usize,
}

impl RecruitmentForest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn attribute_index(&self, name: &str) -> Result<usize> {
        self.attribute_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::InvalidInput(format!("forest has no attribute {name:?}")))
    }

    /// Recruiter -> recruit pairs.
    pub fn recruitment_edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.entries
            .iter()
            .filter_map(|e| e.recruiter.map(|r| (r, e.node)))
    }

    pub fn max_wave(&self) -> u32 {
        self.entries.iter().map(|e| e.wave).max().unwrap_or(0)
    }

    pub fn seed_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_seed()).count()
    }

    /// Checks the structural invariants that hold for every forest, and, when
    /// a graph is given, that each recruitment follows a population edge and
    /// reported degrees are true degrees.
    pub fn check_invariants(&self, graph: Option<&Graph>, coupons: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        let mut position = std::collections::HashMap::with_capacity(self.entries.len());
        let mut recruits = std::collections::HashMap::<NodeId, usize>::new();
        for (i, e) in self.entries.iter().enumerate() {
            if position.insert(e.node, i).is_some() {
                return bad(format!("node {} sampled twice", e.node));
            }
            if e.attributes.len() != self.attribute_names.len() {
                return bad(format!("node {} has {} attributes", e.node, e.attributes.len()));
            }
            match e.recruiter {
                None => {
                    if e.wave != 0 || e.coupon_index.is_some() {
                        return bad(format!("seed {} must have wave 0 and no coupon", e.node));
                    }
                }
                Some(r) => {
                    let Some(&j) = position.get(&r) else {
                        return bad(format!("recruiter {r} of {} not sampled earlier", e.node));
                    };
                    let parent = &self.entries[j];
                    if e.wave != parent.wave + 1 {
                        return bad(format!("node {} wave {} after recruiter wave {}", e.node, e.wave, parent.wave));
                    }
                    if e.seed_id != parent.seed_id {
                        return bad(format!("node {} changes seed id", e.node));
                    }
                    let used = recruits.entry(r).or_insert(0);
                    *used += 1;
                    if *used > coupons {
                        return bad(format!("recruiter {r} exceeds {coupons} coupons"));
                    }
                    if let Some(g) = graph {
                        if !g.has_edge(r, e.node) {
                            return bad(format!("recruitment {r} -> {} is not a population edge", e.node));
                        }
                    }
                }
            }
            if let Some(g) = graph {
                if e.node >= g.node_count() || g.degree(e.node) != e.reported_degree {
                    return bad(format!("node {} reported degree mismatch", e.node));
                }
            }
        }
        Ok(())
    }
}

pub fn select_seeds<R: Rng + ?Sized>(
    g: &Graph,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<Vec<NodeId>> {
    let n = g.node_count();
    if cfg.num_seeds > n {
        return Err(Error::Sampler(format!(
            "{} seeds requested from {n} nodes",
            cfg.num_seeds
        )));
    }
    match cfg.seed_selection {
        SeedSelection::Uniform => Ok(index::sample(rng, n, cfg.num_seeds).into_vec()),
        SeedSelection::DegreeProportional => {
            let mut weights: Vec<u64> = g.degrees().into_iter().map(|d| d as u64).collect();
            let mut total: u64 = weights.iter().sum();
            let mut seeds = Vec::with_capacity(cfg.num_seeds);
            for _ in 0..cfg.num_seeds {
                let chosen = if total == 0 {
                    // only isolated nodes remain: fall back to uniform among them
                    let rest: Vec<NodeId> =
                        (0..n).filter(|v| !seeds.contains(v)).collect();
                    rest[rng.random_range(0..rest.len())]
                } else {
                    let mut ticket = rng.random_range(0..total);
                    let mut pick = 0;
                    for (v, &w) in weights.iter().enumerate() {
                        if ticket < w {
                            pick = v;
                            break;
                        }
                        ticket -= w;
                    }
                    pick
                };
                total -= weights[chosen];
                weights[chosen] = 0;
                seeds.push(chosen);
            }
            Ok(seeds)
        }
    }
}

/// Runs one RDS recruitment process.
pub fn run_rds<R: Rng + ?Sized>(
    g: &Graph,
    attributes: &[AttributeVector],
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<RecruitmentForest> {
    cfg.validate(g.node_count())?;
    for a in attributes {
        a.check_matches(g)?;
    }
    let seeds = select_seeds(g, cfg, rng)?;
    run_rds_from_seeds(g, attributes, cfg, &seeds, rng)
}

/// Runs recruitment from an explicit seed list (used for replaying a study
/// with known seeds).
pub fn run_rds_from_seeds<R: Rng + ?Sized>(
    g: &Graph,
    attributes: &[AttributeVector],
    cfg: &SamplerConfig,
    seeds: &[NodeId],
    rng: &mut R,
) -> Result<RecruitmentForest> {
    let target = cfg.target_sample_size.min(g.node_count());
    let attrs_of = |v: NodeId| attributes.iter().map(|a| a.get(v)).collect::<Vec<u8>>();
    let mut forest = RecruitmentForest {
        attribute_names: attributes.iter().map(|a| a.name().to_owned()).collect(),
        entries: Vec::with_capacity(target),
        truncated: false,
        reseeds: 0,
    };
    let mut sampled = vec![false; g.node_count()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    let mut next_seed_id = 0u32;

    let add_seed = |v: NodeId,
                    forest: &mut RecruitmentForest,
                    sampled: &mut Vec<bool>,
                    queue: &mut VecDeque<usize>,
                    next_seed_id: &mut u32| {
        sampled[v] = true;
        queue.push_back(forest.entries.len());
        forest.entries.push(ForestEntry {
            node: v,
            recruiter: None,
            wave: 0,
            seed_id: *next_seed_id,
            coupon_index: None,
            reported_degree: g.degree(v),
            attributes: attrs_of(v),
        });
        *next_seed_id += 1;
    };

    for &v in seeds {
        if v >= g.node_count() || sampled[v] {
            return Err(Error::Sampler(format!("invalid or repeated seed {v}")));
        }
        if forest.entries.len() == target {
            break;
        }
        add_seed(v, &mut forest, &mut sampled, &mut queue, &mut next_seed_id);
    }

    let mut candidates = Vec::new();
    while forest.entries.len() < target {
        let Some(slot) = queue.pop_front() else {
            if !cfg.reseed_on_death {
                forest.truncated = true;
                break;
            }
            let remaining: Vec<NodeId> = (0..g.node_count()).filter(|&v| !sampled[v]).collect();
            if remaining.is_empty() {
                forest.truncated = true;
                break;
            }
            let v = remaining[rng.random_range(0..remaining.len())];
            add_seed(v, &mut forest, &mut sampled, &mut queue, &mut next_seed_id);
            forest.reseeds += 1;
            continue;
        };
        let (recruiter, wave, seed_id) = {
            let e = &forest.entries[slot];
            (e.node, e.wave, e.seed_id)
        };
        candidates.clear();
        candidates.extend(g.neighbors(recruiter).iter().copied().filter(|&v| !sampled[v]));
        let budget = target - forest.entries.len();
        let take = cfg.coupons_per_node.min(candidates.len()).min(budget);
        if take == 0 {
            continue;
        }
        let chosen = index::sample(rng, candidates.len(), take);
        for (coupon, i) in chosen.into_iter().enumerate() {
            let v = candidates[i];
            sampled[v] = true;
            queue.push_back(forest.entries.len());
            forest.entries.push(ForestEntry {
                node: v,
                recruiter: Some(recruiter),
                wave: wave + 1,
                seed_id,
                coupon_index: Some(coupon as u32),
                reported_degree: g.degree(v),
                attributes: attrs_of(v),
            });
        }
    }
    Ok(forest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn star(leaves: usize) -> Graph {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v))).unwrap()
    }

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (0..n - 1).map(|v| (v, v + 1))).unwrap()
    }

    fn zeros(n: usize) -> Vec<AttributeVector> {
        vec![AttributeVector::new("z", vec![0; n]).unwrap()]
    }

    #[test]
    fn all_nodes_when_seeds_equal_population() {
        let g = path(6);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for mode in [SeedSelection::Uniform, SeedSelection::DegreeProportional] {
            let cfg = SamplerConfig { seed_selection: mode, ..SamplerConfig::new(6, 2, 6) };
            let mut seeds = select_seeds(&g, &cfg, &mut rng).unwrap();
            seeds.sort_unstable();
            assert_eq!(seeds, (0..6).collect::<Vec<_>>());
        }
    }

    #[test]
    fn too_many_seeds_is_an_error() {
        let g = path(3);
        let cfg = SamplerConfig::new(4, 2, 4);
        assert!(select_seeds(&g, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn uniform_seed_frequencies() {
        let g = path(10);
        let cfg = SamplerConfig::new(1, 2, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut counts = [0usize; 10];
        let draws = 100_000;
        for _ in 0..draws {
            counts[select_seeds(&g, &cfg, &mut rng).unwrap()[0]] += 1;
        }
        for c in counts {
            assert!((c as f64 / draws as f64 - 0.1).abs() <= 0.01);
        }
    }

    #[test]
    fn degree_proportional_seed_frequencies() {
        let g = star(4);
        let cfg = SamplerConfig {
            seed_selection: SeedSelection::DegreeProportional,
            ..SamplerConfig::new(1, 2, 1)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws = 100_000;
        let centre = (0..draws)
            .filter(|_| select_seeds(&g, &cfg, &mut rng).unwrap()[0] == 0)
            .count();
        assert!((centre as f64 / draws as f64 - 0.5).abs() <= 0.01);
    }

    #[test]
    fn star_centre_recruits_two_leaves() {
        let g = star(4);
        let cfg = SamplerConfig::new(1, 2, 3);
        let f = run_rds_from_seeds(&g, &zeros(5), &cfg, &[0], &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f.max_wave(), 1);
        assert_eq!(f.recruitment_edges().filter(|&(r, _)| r == 0).count(), 2);
        f.check_invariants(Some(&g), 2).unwrap();
    }

    #[test]
    fn path_forces_a_chain() {
        let g = path(8);
        let cfg = SamplerConfig::new(1, 2, 8);
        let f = run_rds_from_seeds(&g, &zeros(8), &cfg, &[0], &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(f.len(), 8);
        assert_eq!(f.max_wave(), 7);
        assert_eq!(f.reseeds, 0);
    }

    #[test]
    fn capacity_bounds_the_wave_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let g = Graph::complete(30);
        let cfg = SamplerConfig::new(1, 2, 8);
        for _ in 0..50 {
            let f = run_rds(&g, &zeros(30), &cfg, &mut rng).unwrap();
            assert_eq!(f.len(), 8);
            assert!(f.max_wave() >= 3);
        }
    }

    #[test]
    fn chain_death_reseeds_or_truncates() {
        // two disconnected edges
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let cfg = SamplerConfig::new(1, 2, 4);
        let f = run_rds_from_seeds(&g, &zeros(4), &cfg, &[0], &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(f.len(), 4);
        assert_eq!(f.reseeds, 1);
        assert_eq!(f.seed_count(), 2);
        assert!(!f.truncated);
        f.check_invariants(Some(&g), 2).unwrap();

        let cfg = SamplerConfig { reseed_on_death: false, ..cfg };
        let f = run_rds_from_seeds(&g, &zeros(4), &cfg, &[0], &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(f.len(), 2);
        assert!(f.truncated);
    }

    #[test]
    fn unlimited_coupons_give_bfs_prefix() {
        let g = Graph::from_edges(7, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (5, 6)]).unwrap();
        let cfg = SamplerConfig::new(1, usize::MAX, 6);
        let f = run_rds_from_seeds(&g, &zeros(7), &cfg, &[0], &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        let waves: Vec<u32> = f.entries.iter().map(|e| e.wave).collect();
        assert_eq!(waves, vec![0, 1, 1, 2, 2, 2]);
        let mut nodes: Vec<_> = f.entries.iter().map(|e| e.node).collect();
        nodes.sort_unstable();
        assert_eq!(nodes, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn deterministic_given_stream() {
        let g = Graph::complete(40);
        let cfg = SamplerConfig::new(3, 2, 25);
        let a = run_rds(&g, &zeros(40), &cfg, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = run_rds(&g, &zeros(40), &cfg, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_validation() {
        assert!(SamplerConfig::new(0, 2, 5).validate(10).is_err());
        assert!(SamplerConfig::new(1, 0, 5).validate(10).is_err());
        assert!(SamplerConfig::new(6, 2, 5).validate(10).is_err());
        assert!(SamplerConfig::new(1, 2, 11).validate(10).is_err());
        assert!(SamplerConfig::new(5, 2, 5).validate(10).is_ok());
    }
}
