use super::record::{Estimand, RecordStatus, ReplicateRecord};

/// Boxplot content of the relative bias for one (cell, attribute, estimand).
#[derive(Debug, Clone, PartialEq)]
pub struct BiasSummary {
    pub cell: String,
    pub attribute: String,
    pub estimand: Estimand,
    pub replicates: usize,
    /// Replicates with a defined relative bias.
    pub count: usize,
    /// Ran, but the estimate or truth was undefined (or the truth was zero).
    pub undefined: usize,
    pub skipped: usize,
    pub min: Option<f64>,
    pub q1: Option<f64>,
    pub median: Option<f64>,
    pub q3: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
}

impl BiasSummary {
    pub fn undefined_rate(&self) -> f64 {
        let ran = self.count + self.undefined;
        if ran == 0 {
            0.0
        } else {
            self.undefined as f64 / ran as f64
        }
    }

    pub fn iqr(&self) -> Option<f64> {
        Some(self.q3? - self.q1?)
    }
}

/// Quantile of sorted data by linear interpolation between order statistics:
/// position `q * (len - 1)`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Summaries per (cell, attribute, estimand), in record order. Records for
/// one (cell, attribute) are expected to be contiguous.
pub fn summarize(records: &[ReplicateRecord]) -> Vec<BiasSummary> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < records.len() {
        let key = (&records[start].cell, &records[start].attribute);
        let end = start
            + records[start..]
                .iter()
                .take_while(|r| (&r.cell, &r.attribute) == key)
                .count();
        let group = &records[start..end];
        let with_oracle = group.iter().any(|r| r.h_induced.is_some());
        for estimand in Estimand::ALL {
            if estimand == Estimand::HomophilyInduced && !with_oracle {
                continue;
            }
            out.push(summarize_group(group, estimand));
        }
        start = end;
    }
    out
}

fn summarize_group(group: &[ReplicateRecord], estimand: Estimand) -> BiasSummary {
    let skipped = group
        .iter()
        .filter(|r| r.status != RecordStatus::Ok)
        .count();
    let mut values: Vec<f64> = group
        .iter()
        .filter(|r| r.status == RecordStatus::Ok)
        .filter_map(|r| r.relative_bias(estimand))
        .collect();
    values.sort_by(f64::total_cmp);
    let count = values.len();
    let stat = |f: &dyn Fn(&[f64]) -> f64| (count > 0).then(|| f(&values));
    BiasSummary {
        cell: group[0].cell.clone(),
        attribute: group[0].attribute.clone(),
        estimand,
        replicates: group.len(),
        count,
        undefined: group.len() - skipped - count,
        skipped,
        min: stat(&|v| v[0]),
        q1: stat(&|v| quantile(v, 0.25)),
        median: stat(&|v| quantile(v, 0.5)),
        q3: stat(&|v| quantile(v, 0.75)),
        max: stat(&|v| v[v.len() - 1]),
        mean: stat(&|v| v.iter().sum::<f64>() / v.len() as f64),
    }
}
