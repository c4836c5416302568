//! Mining swap rules from (original span, edited span) annotation pairs.
//!
//! Rules come from the positional word difference of equal-length span
//! pairs. When one source word was edited to several different targets, the
//! most frequent target wins (ties break to the lexicographically smallest),
//! except for "her", which always resolves by part-of-speech into a
//! possessive ("his") and an objective ("him") rule.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::gender_swap::{SwapDictionary, SwapError, SwapRule};

/// POS constraint attached to the possessive "her" -> "his" rule.
pub const POSSESSIVE_PRONOUN_TAG: &str = "PRP$";
/// POS constraint attached to the objective "her" -> "him" rule.
pub const PERSONAL_PRONOUN_TAG: &str = "PRP";

#[derive(Debug, Error)]
pub enum MiningError {
    #[error("no annotated span pairs supplied")]
    EmptyInput,
    #[error("pairs line {line}: {message}")]
    PairFormat { line: usize, message: String },
    #[error(transparent)]
    Dictionary(#[from] SwapError),
}

/// One crowd-annotated rewrite: a span and its opposite-gender edit, with
/// optional POS tags aligned to the original tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedSpanPair {
    pub original_tokens: Vec<String>,
    pub edited_tokens: Vec<String>,
    pub original_pos: Option<Vec<String>>,
}

impl AnnotatedSpanPair {
    pub fn new(original: &str, edited: &str) -> Self {
        AnnotatedSpanPair {
            original_tokens: original.split_whitespace().map(str::to_string).collect(),
            edited_tokens: edited.split_whitespace().map(str::to_string).collect(),
            original_pos: None,
        }
    }

    pub fn with_pos(mut self, pos: &str) -> Self {
        self.original_pos = Some(pos.split_whitespace().map(str::to_string).collect());
        self
    }
}

/// Positionally aligned substitutions of one span pair.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WordDiff {
    pub substitutions: Vec<(String, String, Option<String>)>,
    /// True when the spans had different lengths and were not aligned.
    pub skipped: bool,
}

/// Word-level difference between the original and edited span.
///
/// Equal-length spans yield the token pairs that differ (case-insensitive
/// comparison); unequal-length spans are flagged as skipped instead of being
/// aligned heuristically.
pub fn word_difference(pair: &AnnotatedSpanPair) -> WordDiff {
    if pair.original_tokens.len() != pair.edited_tokens.len() {
        return WordDiff {
            substitutions: Vec::new(),
            skipped: true,
        };
    }
    let substitutions = pair
        .original_tokens
        .iter()
        .zip(&pair.edited_tokens)
        .enumerate()
        .filter(|(_, (orig, edit))| orig.to_lowercase() != edit.to_lowercase())
        .map(|(i, (orig, edit))| {
            let pos = pair
                .original_pos
                .as_ref()
                .and_then(|tags| tags.get(i))
                .cloned();
            (orig.clone(), edit.clone(), pos)
        })
        .collect();
    WordDiff {
        substitutions,
        skipped: false,
    }
}

#[derive(Debug, Default)]
struct SurfaceCounts {
    counts: BTreeMap<String, u32>,
}

impl SurfaceCounts {
    fn add(&mut self, surface: &str) {
        *self.counts.entry(surface.to_string()).or_insert(0) += 1;
    }

    /// Most frequent surface; ties break to the lexicographically smallest,
    /// so the result is independent of observation order.
    fn best(&self) -> Option<&str> {
        self.counts
            .iter()
            .max_by(|(wa, ca), (wb, cb)| ca.cmp(cb).then(wb.cmp(wa)))
            .map(|(w, _)| w.as_str())
    }
}

#[derive(Debug, Default)]
struct TargetStats {
    support: u32,
    source_surfaces: SurfaceCounts,
    target_surfaces: SurfaceCounts,
}

/// Aggregates word differences over all pairs and emits a dictionary.
///
/// Candidates group by (lowercased source, POS); within a group the most
/// frequent target wins. Targets below `min_support` are dropped, except the
/// two pinned POS-resolved "her" rules, which are kept whenever observed.
pub fn mine_rules(
    pairs: &[AnnotatedSpanPair],
    min_support: u32,
) -> Result<SwapDictionary, MiningError> {
    if pairs.is_empty() {
        return Err(MiningError::EmptyInput);
    }

    // (source_lower, pos) -> target_lower -> stats
    let mut groups: BTreeMap<(String, Option<String>), BTreeMap<String, TargetStats>> =
        BTreeMap::new();
    // All "her" candidates pool here regardless of annotated POS.
    let mut her_targets: BTreeMap<String, TargetStats> = BTreeMap::new();

    for pair in pairs {
        for (source, target, pos) in word_difference(pair).substitutions {
            let source_lower = source.to_lowercase();
            let target_lower = target.to_lowercase();
            let stats = if source_lower == "her" {
                her_targets.entry(target_lower).or_default()
            } else {
                groups
                    .entry((source_lower, pos))
                    .or_default()
                    .entry(target_lower)
                    .or_default()
            };
            stats.support += 1;
            stats.source_surfaces.add(&source);
            stats.target_surfaces.add(&target);
        }
    }

    let mut rules = Vec::new();
    for ((_, pos), targets) in &groups {
        let (_, best) = targets
            .iter()
            .max_by(|(ta, sa), (tb, sb)| sa.support.cmp(&sb.support).then(tb.cmp(ta)))
            .expect("group is nonempty");
        if best.support < min_support {
            continue;
        }
        let source = best.source_surfaces.best().expect("support >= 1");
        let target = best.target_surfaces.best().expect("support >= 1");
        rules.push(SwapRule::new(source, target, pos.as_deref(), best.support));
    }

    // "her" resolves by part-of-speech, never by frequency.
    for (target, tag) in [("his", POSSESSIVE_PRONOUN_TAG), ("him", PERSONAL_PRONOUN_TAG)] {
        if let Some(stats) = her_targets.get(target) {
            rules.push(SwapRule::new("her", target, Some(tag), stats.support));
        }
    }

    rules.sort_by(|a, b| {
        (&a.source, &a.pos_constraint, &a.target).cmp(&(&b.source, &b.pos_constraint, &b.target))
    });
    Ok(SwapDictionary::new(rules)?)
}

/// Parses the pairs TSV: `original_span<TAB>edited_span[<TAB>pos tags]`.
pub fn parse_pairs_tsv(text: &str) -> Result<Vec<AnnotatedSpanPair>, MiningError> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 2 || cols.len() > 3 {
            return Err(MiningError::PairFormat {
                line: line_no,
                message: format!("expected 2 or 3 tab-separated columns, found {}", cols.len()),
            });
        }
        let mut pair = AnnotatedSpanPair::new(cols[0], cols[1]);
        if pair.original_tokens.is_empty() || pair.edited_tokens.is_empty() {
            return Err(MiningError::PairFormat {
                line: line_no,
                message: "spans must be nonempty".to_string(),
            });
        }
        if let Some(pos) = cols.get(2).filter(|p| !p.trim().is_empty()) {
            pair = pair.with_pos(pos);
            let tags = pair.original_pos.as_ref().unwrap();
            if tags.len() != pair.original_tokens.len() {
                return Err(MiningError::PairFormat {
                    line: line_no,
                    message: format!(
                        "{} POS tags for {} tokens",
                        tags.len(),
                        pair.original_tokens.len()
                    ),
                });
            }
        }
        pairs.push(pair);
    }
    Ok(pairs)
}
