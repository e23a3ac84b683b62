//! Replicated simulation studies: parameter sweeps over single-attribute
//! networks and the three-covariate clinic-study mimic.
//!
//! Every replicate draws from its own ChaCha8 stream seeded by
//! `stream_seed(master, cell key, replicate)`, so results do not depend on
//! thread count or scheduling, and adding a cell leaves the others untouched.

mod engage;
mod experiment;
mod record;
mod report;
mod summary;

pub use engage::{run_engage_mimic, EngageCovariate, EngageScenario};
pub use experiment::{run_experiment, Cell, ExperimentPlan, PlanNetwork, PlanSampler};
pub use record::{Estimand, RecordStatus, ReplicateRecord, Targets, Truth};
pub use report::{write_replicates, write_summary, REPLICATE_HEADER, SUMMARY_HEADER};
pub use summary::{quantile, summarize, BiasSummary};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Default)]
pub struct StudyOutput {
    pub records: Vec<ReplicateRecord>,
    pub summary: Vec<BiasSummary>,
}

impl StudyOutput {
    pub fn from_records(records: Vec<ReplicateRecord>) -> Self {
        let summary = summarize(&records);
        StudyOutput { records, summary }
    }

    pub fn errored(&self) -> bool {
        self.records
            .iter()
            .any(|r| matches!(r.status, RecordStatus::Error(_)))
    }

    pub fn skipped(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r.status, RecordStatus::Skipped(_)))
            .count()
    }

    pub fn summary_for(&self, cell: &str, attribute: &str, estimand: Estimand) -> Option<&BiasSummary> {
        self.summary
            .iter()
            .find(|s| s.cell == cell && s.attribute == attribute && s.estimand == estimand)
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(mut hash: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Stable per-replicate seed: FNV-1a over (master, key, replicate), finished
/// with a splitmix64 mix.
pub fn stream_seed(master: u64, key: &str, replicate: u64) -> u64 {
    let mut h = fnv1a(FNV_OFFSET, &master.to_le_bytes());
    h = fnv1a(h, key.as_bytes());
    h = fnv1a(h, &[0xff]);
    h = fnv1a(h, &replicate.to_le_bytes());
    splitmix64(h)
}

pub fn stream(master: u64, key: &str, replicate: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, key, replicate))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_seeds_are_stable_and_distinct() {
        let a = stream_seed(1, "p=0.5;da=1;r=1;n=200", 0);
        assert_eq!(a, stream_seed(1, "p=0.5;da=1;r=1;n=200", 0));
        assert_ne!(a, stream_seed(1, "p=0.5;da=1;r=1;n=200", 1));
        assert_ne!(a, stream_seed(2, "p=0.5;da=1;r=1;n=200", 0));
        assert_ne!(a, stream_seed(1, "p=0.5;da=1;r=1;n=400", 0));
        // frozen so that published outputs stay reproducible across releases
        assert_eq!(stream_seed(0, "", 0), STREAM_SEED_ZERO);
    }

    const STREAM_SEED_ZERO: u64 = 9_042_452_649_794_141_844;
}
