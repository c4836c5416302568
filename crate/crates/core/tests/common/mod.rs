//! Brute-force oracles kept independent of the library's metric
//! implementations: explicit partition enumeration for MUC, per-mention
//! scanning for B³, exhaustive alignment search for CEAF-e, and full 2^n
//! enumeration for the randomization test.

use std::collections::BTreeSet;

use bias_kit::metrics::{ClusterSet, MentionKey};
use rand::Rng;

pub fn mention(id: u32) -> MentionKey {
    MentionKey {
        doc_id: "oracle/doc".to_string(),
        part: 0,
        sentence: 0,
        start: id as usize,
        end: id as usize,
    }
}

pub fn cluster_set(spec: &[Vec<u32>]) -> ClusterSet {
    ClusterSet::new(
        spec.iter()
            .map(|c| c.iter().map(|&m| mention(m)).collect::<BTreeSet<_>>())
            .collect(),
    )
    .expect("oracle clusterings are disjoint")
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

fn safe_div(n: f64, d: f64) -> f64 {
    if d == 0.0 {
        0.0
    } else {
        n / d
    }
}

/// MUC by literally materializing the partition of each cluster: one block
/// per intersecting opposite-side cluster, plus a singleton block per
/// unresolved mention.
fn muc_side(from: &ClusterSet, to: &ClusterSet) -> f64 {
    let mut num = 0usize;
    let mut den = 0usize;
    for cluster in from.clusters() {
        let mut blocks: Vec<BTreeSet<MentionKey>> = Vec::new();
        for other in to.clusters() {
            let overlap: BTreeSet<MentionKey> = cluster.intersection(other).cloned().collect();
            if !overlap.is_empty() {
                blocks.push(overlap);
            }
        }
        let covered: BTreeSet<MentionKey> = blocks.iter().flatten().cloned().collect();
        for m in cluster {
            if !covered.contains(m) {
                blocks.push([m.clone()].into_iter().collect());
            }
        }
        num += cluster.len() - blocks.len();
        den += cluster.len() - 1;
    }
    safe_div(num as f64, den as f64)
}

pub fn muc_oracle(key: &ClusterSet, response: &ClusterSet) -> (f64, f64, f64) {
    let recall = muc_side(key, response);
    let precision = muc_side(response, key);
    (precision, recall, f1(precision, recall))
}

/// B³ by per-mention enumeration: every mention's own-cluster and
/// other-side-cluster are found by scanning, and its score is the overlap
/// fraction.
fn b_cubed_side(from: &ClusterSet, to: &ClusterSet) -> f64 {
    let mut total = 0.0;
    let mut mentions = 0usize;
    for cluster in from.clusters() {
        for m in cluster {
            mentions += 1;
            let other = to.clusters().iter().find(|c| c.contains(m));
            if let Some(other) = other {
                let overlap = cluster.intersection(other).count();
                total += overlap as f64 / cluster.len() as f64;
            }
        }
    }
    safe_div(total, mentions as f64)
}

pub fn b_cubed_oracle(key: &ClusterSet, response: &ClusterSet) -> (f64, f64, f64) {
    let recall = b_cubed_side(key, response);
    let precision = b_cubed_side(response, key);
    (precision, recall, f1(precision, recall))
}

fn phi4(a: &BTreeSet<MentionKey>, b: &BTreeSet<MentionKey>) -> f64 {
    let overlap = a.intersection(b).count();
    safe_div(2.0 * overlap as f64, (a.len() + b.len()) as f64)
}

/// Best total phi4 over every injective alignment, by recursion over the
/// key clusters.
fn best_alignment(
    key: &[&BTreeSet<MentionKey>],
    response: &[&BTreeSet<MentionKey>],
    used: &mut Vec<bool>,
    idx: usize,
) -> f64 {
    if idx == key.len() {
        return 0.0;
    }
    // The cluster may stay unaligned.
    let mut best = best_alignment(key, response, used, idx + 1);
    for (j, r) in response.iter().enumerate() {
        if used[j] {
            continue;
        }
        used[j] = true;
        let score = phi4(key[idx], r) + best_alignment(key, response, used, idx + 1);
        used[j] = false;
        if score > best {
            best = score;
        }
    }
    best
}

pub fn ceaf_e_oracle(key: &ClusterSet, response: &ClusterSet) -> (f64, f64, f64) {
    if key.clusters().is_empty() || response.clusters().is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let key_refs: Vec<&BTreeSet<MentionKey>> = key.clusters().iter().collect();
    let response_refs: Vec<&BTreeSet<MentionKey>> = response.clusters().iter().collect();
    let mut used = vec![false; response_refs.len()];
    let total = best_alignment(&key_refs, &response_refs, &mut used, 0);
    let precision = total / response_refs.len() as f64;
    let recall = total / key_refs.len() as f64;
    (precision, recall, f1(precision, recall))
}

/// Exact two-sided randomization p-value by enumerating all 2^n sign
/// patterns (no add-one smoothing).
pub fn exhaustive_randomization_p(diffs: &[f64]) -> f64 {
    let n = diffs.len();
    assert!(n <= 20, "enumeration limited to small n");
    let observed = diffs.iter().sum::<f64>().abs();
    let mut hits = 0u64;
    for pattern in 0u64..(1 << n) {
        let mut sum = 0.0;
        for (i, d) in diffs.iter().enumerate() {
            if pattern >> i & 1 == 1 {
                sum -= d;
            } else {
                sum += d;
            }
        }
        if sum.abs() >= observed {
            hits += 1;
        }
    }
    hits as f64 / (1u64 << n) as f64
}

/// Random clustering pair over a mention universe of at most
/// `max_mentions`: each side covers a random subset (so one-sided mentions
/// occur) partitioned uniformly at random.
pub fn random_clustering_pair<R: Rng>(
    rng: &mut R,
    max_mentions: usize,
) -> (ClusterSet, ClusterSet) {
    let universe = rng.random_range(1..=max_mentions);
    let mut make_side = |rng: &mut R| {
        let mut clusters: Vec<Vec<u32>> = Vec::new();
        for m in 0..universe {
            // ~15% of mentions are absent from this side.
            if rng.random_bool(0.15) {
                continue;
            }
            let new_cluster = clusters.is_empty() || rng.random_bool(0.35);
            if new_cluster {
                clusters.push(vec![m as u32]);
            } else {
                let idx = rng.random_range(0..clusters.len());
                clusters[idx].push(m as u32);
            }
        }
        cluster_set(&clusters)
    };
    let key = make_side(rng);
    let response = make_side(rng);
    (key, response)
}
