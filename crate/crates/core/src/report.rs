//! Assembly of the JSON audit report: scorer suite, bias gaps, challenge
//! accuracy, and significance tests.
//!
//! Numbers in reports live on the 0–100 scale rounded half-up to one
//! decimal, matching the usual table formatting; all internal computation
//! is full precision.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conll_io::Corpus;
use crate::metrics::{
    self, approx_randomization, bias_gap, conll_average, wino_accuracy, ClusterSet, MetricsError,
    PerDocScores, ScoreTriple, WinoAccuracy,
};
use crate::winogen::{Condition, TemplateKind, WinoExample};
use crate::Score;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("challenge example {id:?} lacks its twin")]
    MissingTwin { id: String },
}

/// Rounds to one decimal, half-up (values here are nonnegative).
pub fn round1(value: Score) -> Score {
    (value * 10.0).round() / 10.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub precision: Score,
    pub recall: Score,
    pub f1: Score,
}

impl From<ScoreTriple> for MetricReport {
    fn from(t: ScoreTriple) -> Self {
        MetricReport {
            precision: round1(t.precision * 100.0),
            recall: round1(t.recall * 100.0),
            f1: round1(t.f1 * 100.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyPair {
    pub pro: Score,
    pub anti: Score,
}

/// Pro/anti comparison for one challenge type. `pro` and `anti` are CoNLL
/// average F1 on the respective condition subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub pro: Score,
    pub anti: Score,
    pub avg: Score,
    pub diff: Score,
    pub p: Score,
    pub accuracy: AccuracyPair,
    pub examples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t1: Option<ConditionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t2: Option<ConditionReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub metrics: BTreeMap<String, MetricReport>,
    pub conll_avg: Score,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bias: Option<BiasSection>,
}

fn suite(key: &ClusterSet, response: &ClusterSet) -> (BTreeMap<String, MetricReport>, Score) {
    let muc = metrics::muc::<Score>(key, response);
    let b3 = metrics::b_cubed::<Score>(key, response);
    let ceafe = metrics::ceaf_e::<Score>(key, response);
    let avg = conll_average(&muc, &b3, &ceafe);
    let mut map = BTreeMap::new();
    map.insert("muc".to_string(), muc.into());
    map.insert("b_cubed".to_string(), b3.into());
    map.insert("ceaf_e".to_string(), ceafe.into());
    (map, round1(avg * 100.0))
}

fn condition_f1(key: &ClusterSet, response: &ClusterSet, examples: &[&WinoExample]) -> Score {
    let docs: std::collections::BTreeSet<String> =
        examples.iter().map(|e| e.doc_id()).collect();
    let sub_key = key.filter_docs(|d| docs.contains(d));
    let sub_response = response.filter_docs(|d| docs.contains(d));
    let muc = metrics::muc::<Score>(&sub_key, &sub_response);
    let b3 = metrics::b_cubed::<Score>(&sub_key, &sub_response);
    let ceafe = metrics::ceaf_e::<Score>(&sub_key, &sub_response);
    round1(conll_average(&muc, &b3, &ceafe) * 100.0)
}

fn correctness_by_example(
    examples: &[&WinoExample],
    response: &ClusterSet,
) -> BTreeMap<String, Score> {
    examples
        .iter()
        .map(|ex| {
            let acc = wino_accuracy(std::slice::from_ref(*ex), response);
            (ex.id.clone(), acc.correct as Score)
        })
        .collect()
}

/// Twin-paired significance test: for every twin, the pro member's
/// per-example correctness is paired with the anti member's, and pairs are
/// shuffled by the approximate randomization test.
fn condition_p_value(
    examples: &[&WinoExample],
    response: &ClusterSet,
    iterations: u32,
    seed: u64,
) -> Result<Score, ReportError> {
    let correctness = correctness_by_example(examples, response);
    let mut by_twin: BTreeMap<&str, (Option<&WinoExample>, Option<&WinoExample>)> =
        BTreeMap::new();
    for ex in examples {
        let entry = by_twin.entry(ex.twin_id.as_str()).or_default();
        match ex.condition {
            Condition::Pro => entry.0 = Some(ex),
            Condition::Anti => entry.1 = Some(ex),
        }
    }
    let mut pro_scores = Vec::new();
    let mut anti_scores = Vec::new();
    for (twin_id, (pro, anti)) in by_twin {
        let (pro, anti) = match (pro, anti) {
            (Some(p), Some(a)) => (p, a),
            _ => {
                return Err(ReportError::MissingTwin {
                    id: twin_id.to_string(),
                })
            }
        };
        pro_scores.push((twin_id.to_string(), correctness[&pro.id]));
        anti_scores.push((twin_id.to_string(), correctness[&anti.id]));
    }
    let pro = PerDocScores::new(pro_scores)?;
    let anti = PerDocScores::new(anti_scores)?;
    Ok(approx_randomization(&pro, &anti, iterations, seed)?)
}

fn condition_report(
    key: &ClusterSet,
    response: &ClusterSet,
    examples: &[&WinoExample],
    iterations: u32,
    seed: u64,
) -> Result<Option<ConditionReport>, ReportError> {
    if examples.is_empty() {
        return Ok(None);
    }
    let pro: Vec<&WinoExample> = examples
        .iter()
        .filter(|e| e.condition == Condition::Pro)
        .copied()
        .collect();
    let anti: Vec<&WinoExample> = examples
        .iter()
        .filter(|e| e.condition == Condition::Anti)
        .copied()
        .collect();
    let pro_f1 = condition_f1(key, response, &pro);
    let anti_f1 = condition_f1(key, response, &anti);
    let (avg, diff) = bias_gap(pro_f1, anti_f1);
    let acc = |subset: &[&WinoExample]| -> Score {
        let owned: Vec<WinoExample> = subset.iter().map(|e| (*e).clone()).collect();
        let result: WinoAccuracy = wino_accuracy(&owned, response);
        round1(result.accuracy() * 100.0)
    };
    Ok(Some(ConditionReport {
        pro: pro_f1,
        anti: anti_f1,
        avg: round1(avg),
        diff: round1(diff),
        p: condition_p_value(examples, response, iterations, seed)?,
        accuracy: AccuracyPair {
            pro: acc(&pro),
            anti: acc(&anti),
        },
        examples: examples.len(),
    }))
}

/// Scores a response against a key and, when challenge examples are given,
/// adds per-type pro/anti gaps, accuracies, and significance tests.
pub fn score_report(
    key: &Corpus,
    response: &Corpus,
    challenge: Option<&[WinoExample]>,
    iterations: u32,
    seed: u64,
) -> Result<BiasReport, ReportError> {
    let key_set = ClusterSet::from_corpus(key);
    let response_set = ClusterSet::from_corpus(response);
    let (metric_map, conll_avg) = suite(&key_set, &response_set);
    let bias = match challenge {
        None => None,
        Some(examples) => {
            let t1: Vec<&WinoExample> = examples
                .iter()
                .filter(|e| e.kind == TemplateKind::Type1)
                .collect();
            let t2: Vec<&WinoExample> = examples
                .iter()
                .filter(|e| e.kind == TemplateKind::Type2)
                .collect();
            Some(BiasSection {
                t1: condition_report(&key_set, &response_set, &t1, iterations, seed)?,
                t2: condition_report(&key_set, &response_set, &t2, iterations, seed)?,
            })
        }
    };
    Ok(BiasReport {
        metrics: metric_map,
        conll_avg,
        bias,
    })
}

/// Per-(document, part) CoNLL-average scores, the resampling unit for
/// OntoNotes-style significance testing.
pub fn per_part_scores(key: &Corpus, response: &Corpus) -> Result<PerDocScores, MetricsError> {
    let key_set = ClusterSet::from_corpus(key);
    let response_set = ClusterSet::from_corpus(response);
    let mut entries = Vec::new();
    for part in &key.parts {
        let unit = format!("{}#{}", part.doc_id, part.part_number);
        let keep = |doc: &str| doc == part.doc_id;
        let k = key_set.filter_docs(keep);
        let r = response_set.filter_docs(keep);
        let muc = metrics::muc::<Score>(&k, &r);
        let b3 = metrics::b_cubed::<Score>(&k, &r);
        let ceafe = metrics::ceaf_e::<Score>(&k, &r);
        entries.push((unit, conll_average(&muc, &b3, &ceafe)));
    }
    PerDocScores::new(entries)
}
