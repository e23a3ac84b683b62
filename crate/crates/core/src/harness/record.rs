use crate::estimators::{relative_bias, SampleEstimates};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimand {
    DiffActivity,
    Homophily,
    HomophilyR,
    Prevalence,
    /// Homophily of the sample-induced subgraph; needs the population graph.
    HomophilyInduced,
}

impl Estimand {
    pub const ALL: [Estimand; 5] = [
        Estimand::DiffActivity,
        Estimand::Homophily,
        Estimand::HomophilyR,
        Estimand::Prevalence,
        Estimand::HomophilyInduced,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Estimand::DiffActivity => "d_a",
            Estimand::Homophily => "h",
            Estimand::HomophilyR => "r",
            Estimand::Prevalence => "prevalence",
            Estimand::HomophilyInduced => "h_induced",
        }
    }
}

impl std::fmt::Display for Estimand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordStatus {
    Ok,
    /// Infeasible targets or a failed model fit; a warning, not a failure.
    Skipped(String),
    Error(String),
}

impl RecordStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RecordStatus::Ok => "ok",
            RecordStatus::Skipped(_) => "skipped",
            RecordStatus::Error(_) => "error",
        }
    }

    pub fn note(&self) -> &str {
        match self {
            RecordStatus::Ok => "",
            RecordStatus::Skipped(m) | RecordStatus::Error(m) => m,
        }
    }
}

/// What the generator was asked for.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Targets {
    pub n: usize,
    pub p: f64,
    pub mean_degree: f64,
    pub diff_activity: f64,
    pub homophily_r: Option<f64>,
    pub homophily_h: Option<f64>,
    pub sample_size: usize,
}

/// Statistics of the realised population network.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Truth {
    pub p: f64,
    pub mean_degree: f64,
    pub d_a: Option<f64>,
    pub h: Option<f64>,
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRecord {
    pub cell: String,
    pub cell_index: usize,
    pub attribute: String,
    pub attribute_index: usize,
    pub replicate: usize,
    pub status: RecordStatus,
    pub targets: Targets,
    pub truth: Option<Truth>,
    pub estimates: Option<SampleEstimates>,
    pub h_induced: Option<f64>,
    pub reseeds: usize,
    pub truncated: bool,
}

impl ReplicateRecord {
    pub fn skipped(
        cell: &str,
        cell_index: usize,
        attribute: &str,
        attribute_index: usize,
        replicate: usize,
        targets: Targets,
        status: RecordStatus,
    ) -> Self {
        ReplicateRecord {
            cell: cell.to_owned(),
            cell_index,
            attribute: attribute.to_owned(),
            attribute_index,
            replicate,
            status,
            targets,
            truth: None,
            estimates: None,
            h_induced: None,
            reseeds: 0,
            truncated: false,
        }
    }

    pub fn truth_of(&self, e: Estimand) -> Option<f64> {
        let t = self.truth.as_ref()?;
        match e {
            Estimand::DiffActivity => t.d_a,
            Estimand::Homophily | Estimand::HomophilyInduced => t.h,
            Estimand::HomophilyR => t.r,
            Estimand::Prevalence => Some(t.p),
        }
    }

    pub fn estimate_of(&self, e: Estimand) -> Option<f64> {
        let s = self.estimates.as_ref()?;
        match e {
            Estimand::DiffActivity => s.d_a_hat,
            Estimand::Homophily => s.h_hat,
            Estimand::HomophilyR => s.r_hat,
            Estimand::Prevalence => s.rds2_prevalence,
            Estimand::HomophilyInduced => self.h_induced,
        }
    }

    /// Relative bias against the realised network's value, when both sides
    /// are defined and the truth is non-zero.
    pub fn relative_bias(&self, e: Estimand) -> Option<f64> {
        relative_bias(self.estimate_of(e)?, self.truth_of(e)?)
    }
}
