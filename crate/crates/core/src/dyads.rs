//! Edge sampling within dyad classes.
//!
//! A class is either all pairs inside one node group or all pairs across two
//! disjoint groups. Dyads in a class are indexed `0..count`; Bernoulli
//! sampling walks that index space with geometric skips so the cost is
//! proportional to the number of edges drawn, not the number of dyads.

use rand::seq::index;
use rand::Rng;

use crate::graph::NodeId;

pub(crate) fn within_count(members: usize) -> u64 {
    let m = members as u64;
    m * m.saturating_sub(1) / 2
}

pub(crate) fn between_count(a: usize, b: usize) -> u64 {
    a as u64 * b as u64
}

/// Maps a pair index in `0..m(m-1)/2` to `(i, j)` with `i < j`, ordered by `j`
/// then `i`.
fn triangle_pair(t: u64) -> (usize, usize) {
    let mut j = ((1.0 + (1.0 + 8.0 * t as f64).sqrt()) / 2.0) as u64;
    while j * (j - 1) / 2 > t {
        j -= 1;
    }
    while (j + 1) * j / 2 <= t {
        j += 1;
    }
    let i = t - j * (j - 1) / 2;
    (i as usize, j as usize)
}

fn normalized(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    (a.min(b), a.max(b))
}

/// Calls `emit` with every index in `0..count` selected independently with
/// probability `q`, in increasing order.
fn bernoulli_indices<R: Rng + ?Sized>(count: u64, q: f64, rng: &mut R, mut emit: impl FnMut(u64)) {
    if count == 0 || q <= 0.0 {
        return;
    }
    if q >= 1.0 {
        (0..count).for_each(emit);
        return;
    }
    let log_miss = (-q).ln_1p();
    let mut next: u64 = 0;
    loop {
        let u: f64 = rng.random();
        let skip = ((-u).ln_1p() / log_miss).floor();
        if skip >= (count - next) as f64 {
            return;
        }
        next += skip as u64;
        emit(next);
        next += 1;
        if next >= count {
            return;
        }
    }
}

pub(crate) fn bernoulli_within<R: Rng + ?Sized>(
    members: &[NodeId],
    q: f64,
    rng: &mut R,
    out: &mut Vec<(NodeId, NodeId)>,
) {
    bernoulli_indices(within_count(members.len()), q, rng, |t| {
        let (i, j) = triangle_pair(t);
        out.push(normalized(members[i], members[j]));
    });
}

pub(crate) fn bernoulli_between<R: Rng + ?Sized>(
    left: &[NodeId],
    right: &[NodeId],
    q: f64,
    rng: &mut R,
    out: &mut Vec<(NodeId, NodeId)>,
) {
    let width = right.len() as u64;
    bernoulli_indices(between_count(left.len(), right.len()), q, rng, |t| {
        out.push(normalized(
            left[(t / width) as usize],
            right[(t % width) as usize],
        ));
    });
}

/// Exactly `edges` distinct dyads, uniformly, from inside `members`.
pub(crate) fn exact_within<R: Rng + ?Sized>(
    members: &[NodeId],
    edges: u64,
    rng: &mut R,
    out: &mut Vec<(NodeId, NodeId)>,
) {
    let count = within_count(members.len());
    debug_assert!(edges <= count);
    for t in index::sample(rng, count as usize, edges as usize) {
        let (i, j) = triangle_pair(t as u64);
        out.push(normalized(members[i], members[j]));
    }
}

pub(crate) fn exact_between<R: Rng + ?Sized>(
    left: &[NodeId],
    right: &[NodeId],
    edges: u64,
    rng: &mut R,
    out: &mut Vec<(NodeId, NodeId)>,
) {
    let count = between_count(left.len(), right.len());
    debug_assert!(edges <= count);
    let width = right.len();
    for t in index::sample(rng, count as usize, edges as usize) {
        out.push(normalized(left[t / width], right[t % width]));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    #[test]
    fn triangle_pairs_enumerate_all_pairs_once() {
        let m = 40;
        let mut seen = HashSet::new();
        for t in 0..within_count(m) {
            let (i, j) = triangle_pair(t);
            assert!(i < j && j < m);
            assert!(seen.insert((i, j)));
        }
        assert_eq!(seen.len() as u64, within_count(m));
        // large indices stay exact
        let t = within_count(40_400) - 1;
        assert_eq!(triangle_pair(t), (40_398, 40_399));
    }

    #[test]
    fn full_and_empty_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let members: Vec<usize> = (0..7).collect();
        let mut out = Vec::new();
        bernoulli_within(&members, 1.0, &mut rng, &mut out);
        assert_eq!(out.len(), 21);
        out.clear();
        bernoulli_within(&members, 0.0, &mut rng, &mut out);
        assert!(out.is_empty());
        bernoulli_between(&[0, 1], &[2, 3, 4], 1.0, &mut rng, &mut out);
        assert_eq!(out.len(), 6);
    }

    #[test]
    fn geometric_skips_have_the_right_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let count = 1_000_000u64;
        let mut hits = 0u64;
        let mut last = None;
        bernoulli_indices(count, 0.013, &mut rng, |t| {
            assert!(last.is_none_or(|l| t > l));
            last = Some(t);
            hits += 1;
        });
        let expected = count as f64 * 0.013;
        let sd = (expected * (1.0 - 0.013)).sqrt();
        assert!((hits as f64 - expected).abs() < 4.0 * sd, "{hits} vs {expected}");
    }

    #[test]
    fn exact_sampling_draws_distinct_dyads() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut out = Vec::new();
        let members: Vec<usize> = (10..30).collect();
        exact_within(&members, 150, &mut rng, &mut out);
        exact_between(&[0, 1, 2], &[5, 6, 7, 8], 12, &mut rng, &mut out);
        let unique: HashSet<_> = out.iter().collect();
        assert_eq!(unique.len(), 162);
    }
}
