//! Three correlated covariates with per-covariate prevalence, activity and
//! homophily targets, modelled on a large clinic-network study of gay,
//! bisexual and other men who have sex with men.

use rayon::prelude::*;

use crate::covgen::{generate_binary_covariates, CovariateSpec};
use crate::error::{Error, Result};
use crate::model::{fit_theta, generate_from_model, CovariateTarget, HomophilyTarget};
use crate::rds::{SamplerConfig, SeedSelection};
use crate::stats;

use super::experiment::{observe, status_for};
use super::record::{RecordStatus, ReplicateRecord, Targets};
use super::{stream, StudyOutput};

pub const ENGAGE_CELL: &str = "engage";

#[derive(Debug, Clone, PartialEq)]
pub struct EngageCovariate {
    pub name: String,
    pub p: f64,
    pub diff_activity: f64,
    /// Newman assortativity target.
    pub homophily_h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngageScenario {
    pub population: usize,
    pub mean_degree: f64,
    pub covariates: Vec<EngageCovariate>,
    /// Pairwise Pearson correlations between the binary covariates.
    pub correlations: Vec<Vec<f64>>,
    pub seeds: usize,
    pub coupons: usize,
    pub sample_size: usize,
    pub seed_selection: SeedSelection,
    pub reseed: bool,
    pub replicates: usize,
    pub master_seed: u64,
    pub induced_oracle: bool,
}

impl EngageScenario {
    /// Full-size population of 40,400 and sample of 1,179.
    pub fn full_scale() -> Self {
        let cov = |name: &str, p, diff_activity, homophily_h| EngageCovariate {
            name: name.into(),
            p,
            diff_activity,
            homophily_h,
        };
        EngageScenario {
            population: 40_400,
            mean_degree: 16.63,
            covariates: vec![
                cov("CAS", 0.579, 1.18, 0.17),
                cov("CIR", 0.439, 0.95, 0.09),
                cov("HIV+", 0.127, 1.32, 0.38),
            ],
            correlations: vec![
                vec![1.0, 0.104, 0.023],
                vec![0.104, 1.0, 0.046],
                vec![0.023, 0.046, 1.0],
            ],
            seeds: 27,
            coupons: 6,
            sample_size: 1179,
            seed_selection: SeedSelection::Uniform,
            reseed: true,
            replicates: 500,
            master_seed: 20_240_601,
            induced_oracle: true,
        }
    }

    /// One tenth of the population and sample.
    pub fn desk_scale() -> Self {
        EngageScenario {
            population: 4040,
            sample_size: 118,
            replicates: 200,
            ..Self::full_scale()
        }
    }

    pub fn covariate_spec(&self) -> CovariateSpec {
        CovariateSpec {
            names: self.covariates.iter().map(|c| c.name.clone()).collect(),
            marginals: self.covariates.iter().map(|c| c.p).collect(),
            correlations: self.correlations.clone(),
        }
    }

    pub fn targets(&self) -> Vec<CovariateTarget> {
        self.covariates
            .iter()
            .map(|c| CovariateTarget {
                p: c.p,
                diff_activity: c.diff_activity,
                homophily: HomophilyTarget::H(c.homophily_h),
            })
            .collect()
    }

    pub fn sampler(&self) -> SamplerConfig {
        SamplerConfig {
            num_seeds: self.seeds,
            coupons_per_node: self.coupons,
            target_sample_size: self.sample_size,
            seed_selection: self.seed_selection,
            reseed_on_death: self.reseed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.covariates.is_empty() {
            return Err(Error::Config("no covariates".into()));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be positive".into()));
        }
        self.covariate_spec().validate()?;
        for t in self.targets() {
            t.homophily_r()?;
        }
        self.sampler().validate(self.population)
    }

    fn record_targets(&self, c: &EngageCovariate) -> Targets {
        Targets {
            n: self.population,
            p: c.p,
            mean_degree: self.mean_degree,
            diff_activity: c.diff_activity,
            homophily_r: stats::r_from_h(c.homophily_h, c.p, c.diff_activity).ok(),
            homophily_h: Some(c.homophily_h),
            sample_size: self.sample_size,
        }
    }

    fn replicate(&self, replicate: usize) -> Vec<ReplicateRecord> {
        let blank = |i: usize| {
            let c = &self.covariates[i];
            ReplicateRecord::skipped(ENGAGE_CELL, 0, &c.name, i, replicate, self.record_targets(c), RecordStatus::Ok)
        };
        let fail = |e: Error| -> Vec<ReplicateRecord> {
            let status = status_for(&e);
            (0..self.covariates.len())
                .map(|i| ReplicateRecord { status: status.clone(), ..blank(i) })
                .collect()
        };
        let mut rng = stream(self.master_seed, ENGAGE_CELL, replicate as u64);
        let z = match generate_binary_covariates(&self.covariate_spec(), self.population, &mut rng) {
            Ok(z) => z,
            Err(e) => return fail(e),
        };
        let fit = match fit_theta(&self.targets(), self.mean_degree, &z) {
            Ok(f) => f,
            Err(e) => {
                log::warn!("replicate {replicate}: {e}");
                return fail(e);
            }
        };
        let g = generate_from_model(&fit.model, &z, &mut rng);
        observe(&g, z.columns(), &self.sampler(), self.induced_oracle, &mut rng, blank)
    }
}

/// Runs all replicates in parallel. Records are ordered by replicate, then
/// covariate.
pub fn run_engage_mimic(scenario: &EngageScenario) -> Result<StudyOutput> {
    scenario.validate()?;
    log::info!(
        "engage mimic: N={}, n={}, {} replicates",
        scenario.population,
        scenario.sample_size,
        scenario.replicates
    );
    let per_replicate: Vec<Vec<ReplicateRecord>> = (0..scenario.replicates)
        .into_par_iter()
        .map(|r| scenario.replicate(r))
        .collect();
    // summaries want one contiguous block per covariate
    let mut records: Vec<ReplicateRecord> = per_replicate.into_iter().flatten().collect();
    records.sort_by_key(|r| (r.attribute_index, r.replicate));
    Ok(StudyOutput::from_records(records))
}
