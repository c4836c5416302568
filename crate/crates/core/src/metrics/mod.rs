//! Coreference scoring (MUC, B³, CEAF-e, CoNLL average), pro/anti bias
//! gaps, challenge-set accuracy, and the approximate randomization
//! significance test.
//!
//! Metric semantics follow the reference coreference scorer: clusters are
//! scored as given (singletons included), mentions present on only one side
//! contribute nothing to the other side's intersections, and a zero
//! denominator scores zero.

mod assignment;

pub use assignment::max_weight_assignment;

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conll_io::{extract_chains, Corpus};
use crate::num::{fraction, from_count, Real};
use crate::winogen::WinoExample;
use crate::Score;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("clusters are not disjoint: mention {0:?} appears twice")]
    OverlappingClusters(String),
    #[error("empty cluster in cluster set")]
    EmptyCluster,
    #[error("per-document scores are misaligned: {0}")]
    MisalignedUnits(String),
    #[error("duplicate scoring unit id {0:?}")]
    DuplicateUnit(String),
}

/// Identity of one mention across a whole scoring run.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MentionKey {
    pub doc_id: String,
    pub part: u32,
    pub sentence: usize,
    pub start: usize,
    pub end: usize,
}

/// A set of disjoint, nonempty mention clusters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClusterSet {
    clusters: Vec<BTreeSet<MentionKey>>,
}

impl ClusterSet {
    pub fn new(clusters: Vec<BTreeSet<MentionKey>>) -> Result<Self, MetricsError> {
        let mut seen = BTreeSet::new();
        for cluster in &clusters {
            if cluster.is_empty() {
                return Err(MetricsError::EmptyCluster);
            }
            for mention in cluster {
                if !seen.insert(mention.clone()) {
                    return Err(MetricsError::OverlappingClusters(format!("{mention:?}")));
                }
            }
        }
        Ok(ClusterSet { clusters })
    }

    /// Clusters from every chain of every part of a parsed corpus.
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let mut clusters = Vec::new();
        for part in &corpus.parts {
            for chain in extract_chains(part) {
                let cluster: BTreeSet<MentionKey> = chain
                    .mentions
                    .iter()
                    .map(|m| MentionKey {
                        doc_id: part.doc_id.clone(),
                        part: part.part_number,
                        sentence: m.sentence_index,
                        start: m.start_token,
                        end: m.end_token,
                    })
                    .collect();
                if !cluster.is_empty() {
                    clusters.push(cluster);
                }
            }
        }
        ClusterSet { clusters }
    }

    pub fn clusters(&self) -> &[BTreeSet<MentionKey>] {
        &self.clusters
    }

    pub fn mention_count(&self) -> usize {
        self.clusters.iter().map(|c| c.len()).sum()
    }

    /// The sub-clustering restricted to documents accepted by `keep`;
    /// clusters that lose all mentions disappear.
    pub fn filter_docs<F: Fn(&str) -> bool>(&self, keep: F) -> ClusterSet {
        let clusters = self
            .clusters
            .iter()
            .map(|c| {
                c.iter()
                    .filter(|m| keep(&m.doc_id))
                    .cloned()
                    .collect::<BTreeSet<_>>()
            })
            .filter(|c: &BTreeSet<MentionKey>| !c.is_empty())
            .collect();
        ClusterSet { clusters }
    }

    fn mention_to_cluster(&self) -> HashMap<&MentionKey, usize> {
        let mut map = HashMap::new();
        for (i, cluster) in self.clusters.iter().enumerate() {
            for mention in cluster {
                map.insert(mention, i);
            }
        }
        map
    }
}

/// Precision, recall, and their harmonic mean, on the 0–1 scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreTriple<S = Score> {
    pub precision: S,
    pub recall: S,
    pub f1: S,
}

impl<S: Real> ScoreTriple<S> {
    pub fn new(precision: S, recall: S) -> Self {
        let sum = precision + recall;
        let f1 = if sum > S::zero() {
            let two = S::one() + S::one();
            two * precision * recall / sum
        } else {
            S::zero()
        };
        ScoreTriple {
            precision,
            recall,
            f1,
        }
    }
}

/// MUC: link-based scoring via partition counting.
///
/// Recall is Σ(|K| − |p(K)|) / Σ(|K| − 1) over key clusters, where p(K)
/// partitions K by response cluster membership and mentions missing from
/// the response each form their own block; precision swaps the roles.
pub fn muc<S: Real>(key: &ClusterSet, response: &ClusterSet) -> ScoreTriple<S> {
    fn side<S: Real>(from: &ClusterSet, to: &ClusterSet) -> S {
        let to_index = to.mention_to_cluster();
        let mut numerator = 0usize;
        let mut denominator = 0usize;
        for cluster in &from.clusters {
            let mut blocks: BTreeSet<usize> = BTreeSet::new();
            let mut missing = 0usize;
            for mention in cluster {
                match to_index.get(mention) {
                    Some(&idx) => {
                        blocks.insert(idx);
                    }
                    None => missing += 1,
                }
            }
            numerator += cluster.len() - (blocks.len() + missing);
            denominator += cluster.len() - 1;
        }
        fraction(from_count(numerator), from_count(denominator))
    }
    ScoreTriple::new(side(response, key), side(key, response))
}

/// B³: per-mention precision/recall averaged over mentions.
pub fn b_cubed<S: Real>(key: &ClusterSet, response: &ClusterSet) -> ScoreTriple<S> {
    fn side<S: Real>(from: &ClusterSet, to: &ClusterSet) -> S {
        let to_index = to.mention_to_cluster();
        let mut numerator = S::zero();
        for cluster in &from.clusters {
            // Mentions of this cluster grouped by the `to` cluster holding
            // them; each group of size c contributes c * (c / |cluster|).
            let mut counts: HashMap<usize, usize> = HashMap::new();
            for mention in cluster {
                if let Some(&idx) = to_index.get(mention) {
                    *counts.entry(idx).or_insert(0) += 1;
                }
            }
            for &count in counts.values() {
                let overlap = from_count::<S>(count);
                numerator += overlap * overlap / from_count(cluster.len());
            }
        }
        fraction(numerator, from_count(from.mention_count()))
    }
    ScoreTriple::new(side(response, key), side(key, response))
}

/// Similarity used by the entity-based metric: 2|K∩R| / (|K|+|R|).
pub fn phi4<S: Real>(key: &BTreeSet<MentionKey>, response: &BTreeSet<MentionKey>) -> S {
    let overlap = key.intersection(response).count();
    let two = S::one() + S::one();
    fraction(
        two * from_count(overlap),
        from_count(key.len() + response.len()),
    )
}

/// CEAF-e: optimal one-to-one cluster alignment maximizing Σφ4.
pub fn ceaf_e<S: Real>(key: &ClusterSet, response: &ClusterSet) -> ScoreTriple<S> {
    if key.clusters.is_empty() || response.clusters.is_empty() {
        return ScoreTriple::new(S::zero(), S::zero());
    }
    let weights: Vec<Vec<S>> = key
        .clusters
        .iter()
        .map(|k| response.clusters.iter().map(|r| phi4(k, r)).collect())
        .collect();
    let total = max_weight_assignment(&weights);
    ScoreTriple::new(
        fraction(total, from_count(response.clusters.len())),
        fraction(total, from_count(key.clusters.len())),
    )
}

/// The shared-task headline number: arithmetic mean of the three F1s.
pub fn conll_average<S: Real>(
    muc: &ScoreTriple<S>,
    b_cubed: &ScoreTriple<S>,
    ceaf_e: &ScoreTriple<S>,
) -> S {
    let three = S::one() + S::one() + S::one();
    (muc.f1 + b_cubed.f1 + ceaf_e.f1) / three
}

/// Average of and absolute difference between the pro- and
/// anti-stereotypical scores (callers pass values on the 0–100 reporting
/// scale).
pub fn bias_gap<S: Real>(pro_f1: S, anti_f1: S) -> (S, S) {
    let two = S::one() + S::one();
    ((pro_f1 + anti_f1) / two, (pro_f1 - anti_f1).abs())
}

/// Outcome of scoring challenge examples by linking decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WinoAccuracy {
    pub correct: usize,
    pub total: usize,
    /// Examples whose pronoun token sat inside no response mention; they
    /// count as incorrect.
    pub missing_pronoun: usize,
}

impl WinoAccuracy {
    pub fn accuracy(&self) -> Score {
        if self.total == 0 {
            0.0
        } else {
            self.correct as Score / self.total as Score
        }
    }
}

fn pronoun_cluster(response: &ClusterSet, ex: &WinoExample) -> Option<usize> {
    let doc_id = ex.doc_id();
    let mut best: Option<(usize, usize)> = None; // (width, cluster index)
    for (i, cluster) in response.clusters.iter().enumerate() {
        for m in cluster {
            if m.doc_id == doc_id
                && m.sentence == 0
                && m.start <= ex.pronoun_index
                && ex.pronoun_index <= m.end
            {
                let width = m.end - m.start;
                if best.map_or(true, |(w, _)| width < w) {
                    best = Some((width, i));
                }
            }
        }
    }
    best.map(|(_, i)| i)
}

/// Fraction of examples whose pronoun lands in the same response cluster as
/// the gold antecedent entity mention.
pub fn wino_accuracy(examples: &[WinoExample], response: &ClusterSet) -> WinoAccuracy {
    let mut result = WinoAccuracy {
        total: examples.len(),
        ..WinoAccuracy::default()
    };
    for ex in examples {
        let Some(cluster_idx) = pronoun_cluster(response, ex) else {
            result.missing_pronoun += 1;
            continue;
        };
        let (gold_start, gold_end) = ex.gold_span();
        let doc_id = ex.doc_id();
        let linked = response.clusters[cluster_idx].iter().any(|m| {
            m.doc_id == doc_id && m.sentence == 0 && m.start == gold_start && m.end == gold_end
        });
        if linked {
            result.correct += 1;
        }
    }
    result
}

/// Per-unit metric values used as the resampling unit of the significance
/// test.
#[derive(Debug, Clone, PartialEq)]
pub struct PerDocScores<S = Score> {
    entries: Vec<(String, S)>,
}

impl<S: Real> PerDocScores<S> {
    pub fn new(entries: Vec<(String, S)>) -> Result<Self, MetricsError> {
        let mut seen = BTreeSet::new();
        for (id, _) in &entries {
            if !seen.insert(id.clone()) {
                return Err(MetricsError::DuplicateUnit(id.clone()));
            }
        }
        Ok(PerDocScores { entries })
    }

    pub fn entries(&self) -> &[(String, S)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Two-sided approximate randomization test over paired per-unit scores.
///
/// Each iteration swaps every pair independently with probability 1/2;
/// the p-value is `(count of |shuffled mean diff| >= |observed| + 1) /
/// (iterations + 1)`. Deterministic for a given seed.
pub fn approx_randomization<S: Real>(
    scores_a: &PerDocScores<S>,
    scores_b: &PerDocScores<S>,
    iterations: u32,
    seed: u64,
) -> Result<S, MetricsError> {
    if scores_a.len() != scores_b.len() {
        return Err(MetricsError::MisalignedUnits(format!(
            "{} vs {} units",
            scores_a.len(),
            scores_b.len()
        )));
    }
    for ((id_a, _), (id_b, _)) in scores_a.entries.iter().zip(&scores_b.entries) {
        if id_a != id_b {
            return Err(MetricsError::MisalignedUnits(format!(
                "{id_a:?} vs {id_b:?}"
            )));
        }
    }
    let diffs: Vec<S> = scores_a
        .entries
        .iter()
        .zip(&scores_b.entries)
        .map(|((_, a), (_, b))| *a - *b)
        .collect();
    // Comparing |sum| is equivalent to comparing |mean|.
    let observed = diffs.iter().fold(S::zero(), |acc, d| acc + *d).abs();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..iterations {
        let mut sum = S::zero();
        for d in &diffs {
            if rng.random_bool(0.5) {
                sum = sum - *d;
            } else {
                sum += *d;
            }
        }
        if sum.abs() >= observed {
            hits += 1;
        }
    }
    let p = (S::from_u64(hits + 1).expect("count fits scalar"))
        / (S::from_u64(iterations as u64 + 1).expect("count fits scalar"));
    Ok(p)
}
