//! Simulation of respondent-driven sampling (RDS) on synthetic populations
//! with binary attributes, and bias studies of the differential-activity,
//! homophily and prevalence estimators.
//!
//! Pipeline: [`netgen`] / [`model`] build a population network, [`rds`]
//! samples it, [`estimators`] works from the recruitment forest alone, and
//! [`harness`] replicates the whole thing over parameter grids.

pub mod config;
pub mod covgen;
mod dyads;
pub mod error;
pub mod estimators;
pub mod graph;
pub mod harness;
pub mod io;
pub mod model;
pub mod netgen;
pub mod normal;
pub mod rds;
pub mod stats;

pub use config::Config;
pub use error::{Error, Result};
pub use graph::{AttributeVector, CovariateMatrix, DegreeDistribution, Graph, MixingCounts, NodeId};
pub use rds::{RecruitmentForest, SamplerConfig, SeedSelection};
