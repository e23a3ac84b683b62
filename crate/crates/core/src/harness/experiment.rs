use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{estimate_all, induced_homophily};
use crate::graph::{AttributeVector, Graph};
use crate::netgen::{generate_network, GenerationMode, NetworkTargets};
use crate::rds::{run_rds, SamplerConfig, SeedSelection};
use crate::stats;

use super::record::{RecordStatus, ReplicateRecord, Targets, Truth};
use super::{stream, StudyOutput};

/// Population side of a sweep: every combination of `p`, `diff_activity` and
/// `homophily_r` is one network configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanNetwork {
    pub population: usize,
    pub mean_degree: f64,
    pub p: Vec<f64>,
    pub diff_activity: Vec<f64>,
    pub homophily_r: Vec<f64>,
    pub mode: GenerationMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanSampler {
    pub seeds: usize,
    pub coupons: usize,
    pub sample_sizes: Vec<usize>,
    pub seed_selection: SeedSelection,
    pub reseed: bool,
}

impl PlanSampler {
    pub fn config(&self, sample_size: usize) -> SamplerConfig {
        SamplerConfig {
            num_seeds: self.seeds,
            coupons_per_node: self.coupons,
            target_sample_size: sample_size,
            seed_selection: self.seed_selection,
            reseed_on_death: self.reseed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub network: PlanNetwork,
    pub sampler: PlanSampler,
    pub replicates: usize,
    pub master_seed: u64,
    /// One population per network configuration, shared by all replicates
    /// and sample sizes; otherwise every replicate draws a fresh one.
    pub fixed_network: bool,
    /// Also compute homophily of the sample-induced subgraph.
    pub induced_oracle: bool,
}

/// One point of the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub p: f64,
    pub diff_activity: f64,
    pub homophily_r: f64,
    pub sample_size: usize,
}

impl Cell {
    pub fn key(&self) -> String {
        format!(
            "p={};da={};r={};n={}",
            self.p, self.diff_activity, self.homophily_r, self.sample_size
        )
    }

    fn network_key(&self) -> String {
        format!("network|p={};da={};r={}", self.p, self.diff_activity, self.homophily_r)
    }
}

impl ExperimentPlan {
    /// Full-size sweep: 1000 nodes, mean degree 99.9, 500 replicates.
    pub fn full_scale() -> Self {
        ExperimentPlan {
            network: PlanNetwork {
                population: 1000,
                mean_degree: 99.9,
                p: vec![0.1, 0.5, 0.8],
                diff_activity: vec![0.5, 1.0, 4.0],
                homophily_r: vec![1.0, 5.0],
                mode: GenerationMode::Bernoulli,
            },
            sampler: PlanSampler {
                seeds: 5,
                coupons: 2,
                sample_sizes: vec![200, 400, 800],
                seed_selection: SeedSelection::Uniform,
                reseed: true,
            },
            replicates: 500,
            master_seed: 20_240_601,
            fixed_network: false,
            induced_oracle: true,
        }
    }

    /// Same grid at mean degree 20 with 100 replicates. The lower degree makes
    /// the p = 0.1, D_a = 4 cells feasible; cells where the targets force a
    /// negative 0-0 edge count stay infeasible at any degree and are skipped.
    pub fn desk_scale() -> Self {
        let mut plan = Self::full_scale();
        plan.network.mean_degree = 20.0;
        plan.replicates = 100;
        plan
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &p in &self.network.p {
            for &diff_activity in &self.network.diff_activity {
                for &homophily_r in &self.network.homophily_r {
                    for &sample_size in &self.sampler.sample_sizes {
                        cells.push(Cell {
                            index: cells.len(),
                            p,
                            diff_activity,
                            homophily_r,
                            sample_size,
                        });
                    }
                }
            }
        }
        cells
    }

    pub fn validate(&self) -> Result<()> {
        let net = &self.network;
        if net.p.is_empty() || net.diff_activity.is_empty() || net.homophily_r.is_empty() {
            return Err(Error::Config("network grid has an empty axis".into()));
        }
        if self.sampler.sample_sizes.is_empty() {
            return Err(Error::Config("no sample sizes given".into()));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be positive".into()));
        }
        for cell in self.cells() {
            self.sampler.config(cell.sample_size).validate(net.population)?;
        }
        Ok(())
    }

    fn network_targets(&self, cell: &Cell) -> NetworkTargets {
        NetworkTargets {
            n: self.network.population,
            p: cell.p,
            mean_degree: self.network.mean_degree,
            diff_activity: cell.diff_activity,
            homophily_r: cell.homophily_r,
        }
    }
}

/// Infeasible targets and fits that fail to converge are reported as skipped
/// replicates; anything else is a hard error.
pub(crate) fn status_for(e: &Error) -> RecordStatus {
    match e {
        Error::Infeasible(_) | Error::NotConverged { .. } => RecordStatus::Skipped(e.to_string()),
        _ => RecordStatus::Error(e.to_string()),
    }
}

pub(crate) fn truth_of(g: &Graph, z: &AttributeVector) -> Result<Truth> {
    let mixing = stats::mixing_counts(g, z)?;
    Ok(Truth {
        p: stats::prevalence(z),
        mean_degree: stats::mean_degree(g),
        d_a: stats::differential_activity(g, z).ok(),
        h: stats::homophily_newman(&mixing).ok(),
        r: stats::homophily_r(&mixing).ok(),
    })
}

/// Samples once from `g` and builds one record per attribute.
pub(crate) fn observe<R: rand::Rng + ?Sized>(
    g: &Graph,
    attributes: &[AttributeVector],
    cfg: &SamplerConfig,
    induced_oracle: bool,
    rng: &mut R,
    blank: impl Fn(usize) -> ReplicateRecord,
) -> Vec<ReplicateRecord> {
    let forest = match run_rds(g, attributes, cfg, rng) {
        Ok(f) => f,
        Err(e) => {
            let status = status_for(&e);
            return (0..attributes.len())
                .map(|i| ReplicateRecord { status: status.clone(), ..blank(i) })
                .collect();
        }
    };
    attributes
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let mut rec = blank(i);
            match truth_of(g, z) {
                Ok(t) => rec.truth = Some(t),
                Err(e) => {
                    rec.status = status_for(&e);
                    return rec;
                }
            }
            rec.estimates = Some(estimate_all(&forest, i));
            if induced_oracle {
                rec.h_induced = induced_homophily(&forest, g, i).ok();
            }
            rec.reseeds = forest.reseeds;
            rec.truncated = forest.truncated;
            rec
        })
        .collect()
}

fn run_replicate(plan: &ExperimentPlan, cell: &Cell, replicate: usize, fixed: Option<&Result<(Graph, AttributeVector)>>) -> ReplicateRecord {
    let targets = Targets {
        n: plan.network.population,
        p: cell.p,
        mean_degree: plan.network.mean_degree,
        diff_activity: cell.diff_activity,
        homophily_r: Some(cell.homophily_r),
        homophily_h: stats::h_from_r(cell.homophily_r, cell.p, cell.diff_activity).ok(),
        sample_size: cell.sample_size,
    };
    let key = cell.key();
    let blank = |_| ReplicateRecord::skipped(&key, cell.index, "z", 0, replicate, targets, RecordStatus::Ok);
    let mut rng = stream(plan.master_seed, &key, replicate as u64);
    let owned;
    let network = match fixed {
        Some(n) => n,
        None => {
            owned = generate_network(&plan.network_targets(cell), &mut rng, plan.network.mode);
            &owned
        }
    };
    let (g, z) = match network {
        Ok(pair) => pair,
        Err(e) => return ReplicateRecord { status: status_for(e), ..blank(0) },
    };
    let cfg = plan.sampler.config(cell.sample_size);
    observe(g, std::slice::from_ref(z), &cfg, plan.induced_oracle, &mut rng, blank)
        .pop()
        .expect("one attribute")
}

/// Runs every (cell, replicate) pair in parallel on the current rayon pool.
/// Records come back ordered by cell, then replicate.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<StudyOutput> {
    plan.validate()?;
    let cells = plan.cells();
    log::info!("{} cells x {} replicates", cells.len(), plan.replicates);

    let fixed: Vec<Option<Result<(Graph, AttributeVector)>>> = cells
        .par_iter()
        .map(|cell| {
            plan.fixed_network.then(|| {
                let mut rng = stream(plan.master_seed, &cell.network_key(), 0);
                generate_network(&plan.network_targets(cell), &mut rng, plan.network.mode)
            })
        })
        .collect();

    let tasks: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..plan.replicates).map(move |r| (c, r)))
        .collect();
    let records: Vec<ReplicateRecord> = tasks
        .par_iter()
        .map(|&(c, r)| run_replicate(plan, &cells[c], r, fixed[c].as_ref()))
        .collect();

    for cell in &cells {
        let skipped = records
            .iter()
            .filter(|r| r.cell_index == cell.index && matches!(r.status, RecordStatus::Skipped(_)))
            .count();
        if skipped > 0 {
            log::warn!("cell {}: {skipped} replicates skipped", cell.key());
        }
    }
    Ok(StudyOutput::from_records(records))
}
