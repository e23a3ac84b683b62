use std::io::Write;

use crate::error::Result;

use super::record::{Estimand, ReplicateRecord};
use super::summary::BiasSummary;

pub const REPLICATE_HEADER: [&str; 33] = [
    "cell",
    "attribute",
    "replicate",
    "status",
    "note",
    "n",
    "target_p",
    "target_mean_degree",
    "target_d_a",
    "target_r",
    "target_h",
    "sample_size",
    "true_p",
    "true_mean_degree",
    "true_d_a",
    "true_h",
    "true_r",
    "d_a_hat",
    "h_hat",
    "r_hat",
    "h_hat_induced",
    "rds2_prevalence",
    "crude_prevalence",
    "rb_d_a",
    "rb_h",
    "rb_r",
    "rb_prevalence",
    "rb_h_induced",
    "realized_sample_size",
    "max_wave",
    "reseeds",
    "truncated",
    "undefined",
];

pub const SUMMARY_HEADER: [&str; 14] = [
    "cell",
    "attribute",
    "estimand",
    "replicates",
    "count",
    "undefined",
    "skipped",
    "undefined_rate",
    "min",
    "q1",
    "median",
    "q3",
    "max",
    "mean",
];

fn num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_replicates<W: Write>(records: &[ReplicateRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPLICATE_HEADER)?;
    for r in records {
        let t = &r.targets;
        let truth = r.truth.as_ref();
        let est = r.estimates.as_ref();
        let undefined: Vec<&str> = Estimand::ALL
            .iter()
            .filter(|&&e| e != Estimand::HomophilyInduced || r.h_induced.is_some() || est.is_none())
            .filter(|&&e| r.truth.is_some() && r.relative_bias(e).is_none())
            .map(|e| e.name())
            .collect();
        let row = [
            r.cell.clone(),
            r.attribute.clone(),
            r.replicate.to_string(),
            r.status.label().to_owned(),
            r.status.note().to_owned(),
            t.n.to_string(),
            t.p.to_string(),
            t.mean_degree.to_string(),
            t.diff_activity.to_string(),
            num(t.homophily_r),
            num(t.homophily_h),
            t.sample_size.to_string(),
            num(truth.map(|x| x.p)),
            num(truth.map(|x| x.mean_degree)),
            num(truth.and_then(|x| x.d_a)),
            num(truth.and_then(|x| x.h)),
            num(truth.and_then(|x| x.r)),
            num(est.and_then(|e| e.d_a_hat)),
            num(est.and_then(|e| e.h_hat)),
            num(est.and_then(|e| e.r_hat)),
            num(r.h_induced),
            num(est.and_then(|e| e.rds2_prevalence)),
            num(est.and_then(|e| e.crude_prevalence)),
            num(r.relative_bias(Estimand::DiffActivity)),
            num(r.relative_bias(Estimand::Homophily)),
            num(r.relative_bias(Estimand::HomophilyR)),
            num(r.relative_bias(Estimand::Prevalence)),
            num(r.relative_bias(Estimand::HomophilyInduced)),
            est.map(|e| e.sample_size.to_string()).unwrap_or_default(),
            est.map(|e| e.max_wave.to_string()).unwrap_or_default(),
            r.reseeds.to_string(),
            r.truncated.to_string(),
            undefined.join(";"),
        ];
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(summary: &[BiasSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for s in summary {
        let row = [
            s.cell.clone(),
            s.attribute.clone(),
            s.estimand.name().to_owned(),
            s.replicates.to_string(),
            s.count.to_string(),
            s.undefined.to_string(),
            s.skipped.to_string(),
            s.undefined_rate().to_string(),
            num(s.min),
            num(s.q1),
            num(s.median),
            num(s.q3),
            num(s.max),
            num(s.mean),
        ];
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
