//! TOML run configuration with sections `[network]`, `[rds]`, `[experiment]`
//! and `[engage]`. Unknown keys are errors. Anything left out falls back to
//! the full-size or desk-scale preset.
//!
//! ```toml
//! [network]
//! n = 1000
//! mean_degree = 20
//! p = [0.1, 0.5, 0.8]
//! diff_activity = [0.5, 1, 4]
//! homophily_r = [1, 5]
//!
//! [rds]
//! seeds = 5
//! coupons = 2
//! sample_size = [200, 400, 800]
//!
//! [experiment]
//! replicates = 100
//! seed = 7
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::covgen::CovariateSpec;
use crate::error::{Error, Result};
use crate::harness::{EngageCovariate, EngageScenario, ExperimentPlan};
use crate::model::{CovariateTarget, HomophilyTarget};
use crate::netgen::{GenerationMode, NetworkTargets};
use crate::rds::{SamplerConfig, SeedSelection};
use crate::stats;

/// A scalar or a list; lists span a sweep axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn values(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }

    fn single(&self, key: &str) -> Result<T> {
        match self {
            OneOrMany::One(v) => Ok(v.clone()),
            OneOrMany::Many(v) if v.len() == 1 => Ok(v[0].clone()),
            OneOrMany::Many(_) => Err(Error::Config(format!("{key}: expected a single value, got a list"))),
        }
    }
}

impl<T> From<Vec<T>> for OneOrMany<T> {
    fn from(v: Vec<T>) -> Self {
        OneOrMany::Many(v)
    }
}

/// Coupons per recruit: a count or `"unlimited"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coupons {
    Count(u64),
    Named(String),
}

impl Coupons {
    fn resolve(&self) -> Result<usize> {
        match self {
            Coupons::Count(c) => Ok(*c as usize),
            Coupons::Named(s) if s == "unlimited" => Ok(usize::MAX),
            Coupons::Named(s) => Err(Error::Config(format!(
                "rds.coupons: expected a count or \"unlimited\", got {s:?}"
            ))),
        }
    }

    fn from_count(c: usize) -> Self {
        if c == usize::MAX {
            Coupons::Named("unlimited".into())
        } else {
            Coupons::Count(c as u64)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovariateSection {
    pub name: String,
    pub p: f64,
    pub diff_activity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homophily_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homophily_h: Option<f64>,
}

impl CovariateSection {
    fn homophily(&self, section: &str) -> Result<HomophilyTarget> {
        match (self.homophily_r, self.homophily_h) {
            (Some(r), None) => Ok(HomophilyTarget::R(r)),
            (None, Some(h)) => Ok(HomophilyTarget::H(h)),
            _ => Err(Error::Config(format!(
                "{section}.covariate {:?}: give exactly one of homophily_r, homophily_h",
                self.name
            ))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_degree: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<OneOrMany<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diff_activity: Option<OneOrMany<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homophily_r: Option<OneOrMany<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homophily_h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    /// Pairwise correlations between covariates (multi-attribute case).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlations: Option<Vec<Vec<f64>>>,
    #[serde(default, rename = "covariate", skip_serializing_if = "Vec::is_empty")]
    pub covariates: Vec<CovariateSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RdsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupons: Option<Coupons>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_size: Option<OneOrMany<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_selection: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reseed: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_network: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub induced_oracle: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngageSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_degree: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupons: Option<Coupons>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_selection: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reseed: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlations: Option<Vec<Vec<f64>>>,
    #[serde(default, rename = "covariate", skip_serializing_if = "Vec::is_empty")]
    pub covariates: Vec<CovariateSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "is_default")]
    pub network: NetworkSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub rds: RdsSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub experiment: ExperimentSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub engage: EngageSection,
}

fn is_default<T: Default + PartialEq>(value: &T) -> bool {
    *value == T::default()
}

fn required<T: Clone>(value: &Option<T>, key: &str) -> Result<T> {
    value
        .clone()
        .ok_or_else(|| Error::Config(format!("{key} is required")))
}

fn identity(k: usize) -> Vec<Vec<f64>> {
    CovariateSpec::independent(vec![String::new(); k], vec![0.5; k]).correlations
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| Error::Parse {
            path: path.to_owned(),
            message: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn seed(&self) -> Option<u64> {
        self.experiment.seed
    }

    fn mode(&self) -> Result<GenerationMode> {
        self.network
            .mode
            .as_deref()
            .map_or(Ok(GenerationMode::default()), str::parse)
    }

    fn seed_selection(value: &Option<String>, default: SeedSelection) -> Result<SeedSelection> {
        value.as_deref().map_or(Ok(default), str::parse)
    }

    /// Single-attribute generator targets; every value must be a scalar.
    /// `homophily_h` is converted to `R` at the target prevalence and
    /// activity.
    pub fn network_targets(&self) -> Result<NetworkTargets> {
        let net = &self.network;
        let p = required(&net.p, "network.p")?.single("network.p")?;
        let diff_activity = required(&net.diff_activity, "network.diff_activity")?.single("network.diff_activity")?;
        let homophily_r = match (&net.homophily_r, net.homophily_h) {
            (Some(r), None) => r.single("network.homophily_r")?,
            (None, Some(h)) => stats::r_from_h(h, p, diff_activity)
                .map_err(|e| Error::Config(format!("network.homophily_h: {e}")))?,
            _ => {
                return Err(Error::Config(
                    "network: give exactly one of homophily_r, homophily_h".into(),
                ))
            }
        };
        let t = NetworkTargets {
            n: required(&net.n, "network.n")?,
            p,
            mean_degree: required(&net.mean_degree, "network.mean_degree")?,
            diff_activity,
            homophily_r,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn generation_mode(&self) -> Result<GenerationMode> {
        self.mode()
    }

    /// Covariate spec and per-covariate targets from `[[network.covariate]]`
    /// blocks, if any are given.
    pub fn network_covariates(&self) -> Result<Option<(CovariateSpec, Vec<CovariateTarget>)>> {
        let net = &self.network;
        if net.covariates.is_empty() {
            return Ok(None);
        }
        let spec = CovariateSpec {
            names: net.covariates.iter().map(|c| c.name.clone()).collect(),
            marginals: net.covariates.iter().map(|c| c.p).collect(),
            correlations: net.correlations.clone().unwrap_or_else(|| identity(net.covariates.len())),
        };
        spec.validate()?;
        let targets = net
            .covariates
            .iter()
            .map(|c| {
                Ok(CovariateTarget {
                    p: c.p,
                    diff_activity: c.diff_activity,
                    homophily: c.homophily("network")?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Some((spec, targets)))
    }

    /// Sampler for a single run; unset keys come from the full-size plan.
    pub fn sampler_config(&self) -> Result<SamplerConfig> {
        let base = ExperimentPlan::full_scale().sampler;
        let rds = &self.rds;
        Ok(SamplerConfig {
            num_seeds: rds.seeds.unwrap_or(base.seeds),
            coupons_per_node: rds.coupons.as_ref().map_or(Ok(base.coupons), Coupons::resolve)?,
            target_sample_size: match &rds.sample_size {
                Some(v) => v.single("rds.sample_size")?,
                None => base.sample_sizes[0],
            },
            seed_selection: Self::seed_selection(&rds.seed_selection, base.seed_selection)?,
            reseed_on_death: rds.reseed.unwrap_or(base.reseed),
        })
    }

    pub fn experiment_plan(&self, desk_scale: bool) -> Result<ExperimentPlan> {
        let mut plan = if desk_scale {
            ExperimentPlan::desk_scale()
        } else {
            ExperimentPlan::full_scale()
        };
        let net = &self.network;
        if net.homophily_h.is_some() || !net.covariates.is_empty() {
            return Err(Error::Config(
                "experiment sweeps take network.homophily_r; homophily_h and covariate blocks are not supported here".into(),
            ));
        }
        if let Some(n) = net.n {
            plan.network.population = n;
        }
        if let Some(d) = net.mean_degree {
            plan.network.mean_degree = d;
        }
        if let Some(p) = &net.p {
            plan.network.p = p.values();
        }
        if let Some(v) = &net.diff_activity {
            plan.network.diff_activity = v.values();
        }
        if let Some(v) = &net.homophily_r {
            plan.network.homophily_r = v.values();
        }
        plan.network.mode = self.mode()?;
        let rds = &self.rds;
        if let Some(s) = rds.seeds {
            plan.sampler.seeds = s;
        }
        if let Some(c) = &rds.coupons {
            plan.sampler.coupons = c.resolve()?;
        }
        if let Some(n) = &rds.sample_size {
            plan.sampler.sample_sizes = n.values();
        }
        plan.sampler.seed_selection = Self::seed_selection(&rds.seed_selection, plan.sampler.seed_selection)?;
        if let Some(r) = rds.reseed {
            plan.sampler.reseed = r;
        }
        let exp = &self.experiment;
        if let Some(r) = exp.replicates {
            plan.replicates = r;
        }
        if let Some(s) = exp.seed {
            plan.master_seed = s;
        }
        if let Some(f) = exp.fixed_network {
            plan.fixed_network = f;
        }
        if let Some(i) = exp.induced_oracle {
            plan.induced_oracle = i;
        }
        plan.validate()?;
        Ok(plan)
    }

    pub fn engage_scenario(&self, desk_scale: bool) -> Result<EngageScenario> {
        let mut s = if desk_scale {
            EngageScenario::desk_scale()
        } else {
            EngageScenario::full_scale()
        };
        let e = &self.engage;
        if let Some(n) = e.n {
            s.population = n;
        }
        if let Some(d) = e.mean_degree {
            s.mean_degree = d;
        }
        if let Some(n) = e.sample_size {
            s.sample_size = n;
        }
        if let Some(v) = e.seeds {
            s.seeds = v;
        }
        if let Some(c) = &e.coupons {
            s.coupons = c.resolve()?;
        }
        s.seed_selection = Self::seed_selection(&e.seed_selection, s.seed_selection)?;
        if let Some(r) = e.reseed {
            s.reseed = r;
        }
        if !e.covariates.is_empty() {
            s.covariates = e
                .covariates
                .iter()
                .map(|c| {
                    let homophily_h = match c.homophily("engage")? {
                        HomophilyTarget::H(h) => h,
                        HomophilyTarget::R(r) => stats::h_from_r(r, c.p, c.diff_activity)?,
                    };
                    Ok(EngageCovariate {
                        name: c.name.clone(),
                        p: c.p,
                        diff_activity: c.diff_activity,
                        homophily_h,
                    })
                })
                .collect::<Result<_>>()?;
            if e.correlations.is_none() {
                s.correlations = identity(s.covariates.len());
            }
        }
        if let Some(c) = &e.correlations {
            s.correlations = c.clone();
        }
        let exp = &self.experiment;
        if let Some(r) = exp.replicates {
            s.replicates = r;
        }
        if let Some(v) = exp.seed {
            s.master_seed = v;
        }
        if let Some(i) = exp.induced_oracle {
            s.induced_oracle = i;
        }
        if exp.fixed_network.is_some() {
            return Err(Error::Config("experiment.fixed_network does not apply to engage-mimic".into()));
        }
        s.validate()?;
        Ok(s)
    }

    /// Fully explicit config that reproduces `plan`.
    pub fn from_experiment_plan(plan: &ExperimentPlan) -> Self {
        Config {
            network: NetworkSection {
                n: Some(plan.network.population),
                mean_degree: Some(plan.network.mean_degree),
                p: Some(plan.network.p.clone().into()),
                diff_activity: Some(plan.network.diff_activity.clone().into()),
                homophily_r: Some(plan.network.homophily_r.clone().into()),
                mode: Some(plan.network.mode.to_string()),
                ..Default::default()
            },
            rds: RdsSection {
                seeds: Some(plan.sampler.seeds),
                coupons: Some(Coupons::from_count(plan.sampler.coupons)),
                sample_size: Some(plan.sampler.sample_sizes.clone().into()),
                seed_selection: Some(plan.sampler.seed_selection.to_string()),
                reseed: Some(plan.sampler.reseed),
            },
            experiment: ExperimentSection {
                replicates: Some(plan.replicates),
                seed: Some(plan.master_seed),
                fixed_network: Some(plan.fixed_network),
                induced_oracle: Some(plan.induced_oracle),
            },
            engage: EngageSection::default(),
        }
    }

    /// Fully explicit config that reproduces `s`.
    pub fn from_engage_scenario(s: &EngageScenario) -> Self {
        Config {
            engage: EngageSection {
                n: Some(s.population),
                mean_degree: Some(s.mean_degree),
                sample_size: Some(s.sample_size),
                seeds: Some(s.seeds),
                coupons: Some(Coupons::from_count(s.coupons)),
                seed_selection: Some(s.seed_selection.to_string()),
                reseed: Some(s.reseed),
                correlations: Some(s.correlations.clone()),
                covariates: s
                    .covariates
                    .iter()
                    .map(|c| CovariateSection {
                        name: c.name.clone(),
                        p: c.p,
                        diff_activity: c.diff_activity,
                        homophily_r: None,
                        homophily_h: Some(c.homophily_h),
                    })
                    .collect(),
            },
            experiment: ExperimentSection {
                replicates: Some(s.replicates),
                seed: Some(s.master_seed),
                fixed_network: None,
                induced_oracle: Some(s.induced_oracle),
            },
            ..Default::default()
        }
    }

    /// Records a sampler in the `[rds]` section.
    pub fn set_sampler(&mut self, cfg: &SamplerConfig) {
        self.rds = RdsSection {
            seeds: Some(cfg.num_seeds),
            coupons: Some(Coupons::from_count(cfg.coupons_per_node)),
            sample_size: Some(OneOrMany::One(cfg.target_sample_size)),
            seed_selection: Some(cfg.seed_selection.to_string()),
            reseed: Some(cfg.reseed_on_death),
        };
    }
}
