//! Named-entity anonymization and rule-based gender swapping.
//!
//! The augmentation pipeline replaces person names with neutral `E<k>`
//! placeholders (consistently within a document part) and then rewrites
//! gendered tokens with their opposite-gender counterparts from a
//! [`SwapDictionary`], leaving every other column of the file untouched so
//! that all span annotations survive verbatim.

use std::collections::HashMap;

use thiserror::Error;

use crate::conll_io::{Corpus, DocumentPart, Sentence};

#[derive(Debug, Error)]
pub enum SwapError {
    #[error("no named-entity annotation present in {doc_id} part {part}")]
    MissingNEColumn { doc_id: String, part: u32 },
    #[error("ambiguous swap rules for source {word:?} (pos {pos:?})")]
    AmbiguousRule { word: String, pos: Option<String> },
    #[error("dictionary line {line}: {message}")]
    DictionaryFormat { line: usize, message: String },
}

/// A single-token substitution, optionally restricted to one POS tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapRule {
    pub source: String,
    pub target: String,
    pub pos_constraint: Option<String>,
    pub frequency: u32,
}

impl SwapRule {
    pub fn new(source: &str, target: &str, pos: Option<&str>, frequency: u32) -> Self {
        SwapRule {
            source: source.to_string(),
            target: target.to_string(),
            pos_constraint: pos.map(|p| p.to_string()),
            frequency,
        }
    }

    /// A rule whose stored target carries intrinsic capitalization
    /// ("Mrs.") is applied verbatim instead of mirroring the source case.
    pub fn case_locked(&self) -> bool {
        self.target.chars().any(|c| c.is_uppercase())
    }
}

/// How swapped tokens take their surface case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CasePolicy {
    /// The target copies the source's pattern: Title stays Title, ALL-CAPS
    /// stays ALL-CAPS, lowercase stays lowercase.
    #[default]
    MirrorCase,
}

#[derive(Debug, Clone, Default)]
pub struct SwapDictionary {
    pub rules: Vec<SwapRule>,
    pub case_policy: CasePolicy,
}

struct RuleLookup<'a> {
    by_key: HashMap<(String, Option<&'a str>), &'a SwapRule>,
}

impl<'a> RuleLookup<'a> {
    fn build(dict: &'a SwapDictionary) -> Result<Self, SwapError> {
        let mut by_key = HashMap::new();
        for rule in &dict.rules {
            let key = (rule.source.to_lowercase(), rule.pos_constraint.as_deref());
            if by_key.insert(key, rule).is_some() {
                return Err(SwapError::AmbiguousRule {
                    word: rule.source.to_lowercase(),
                    pos: rule.pos_constraint.clone(),
                });
            }
        }
        Ok(RuleLookup { by_key })
    }

    /// POS-constrained match first, unconstrained fallback second.
    fn find(&self, word_lower: &str, pos: &str) -> Option<&'a SwapRule> {
        self.by_key
            .get(&(word_lower.to_string(), Some(pos)))
            .or_else(|| self.by_key.get(&(word_lower.to_string(), None)))
            .copied()
    }
}

impl SwapDictionary {
    pub fn new(rules: Vec<SwapRule>) -> Result<Self, SwapError> {
        let dict = SwapDictionary {
            rules,
            case_policy: CasePolicy::MirrorCase,
        };
        RuleLookup::build(&dict)?;
        Ok(dict)
    }

    /// Parses the TSV dictionary format: `source<TAB>target<TAB>pos<TAB>freq`
    /// with `-` for "no POS constraint"; `#` lines are comments.
    pub fn parse_tsv(text: &str) -> Result<Self, SwapError> {
        let mut rules = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(SwapError::DictionaryFormat {
                    line: line_no,
                    message: format!("expected 4 tab-separated columns, found {}", cols.len()),
                });
            }
            let (source, target, pos, freq) = (cols[0], cols[1], cols[2], cols[3]);
            for (label, value) in [("source", source), ("target", target)] {
                if value.is_empty() || value.split_whitespace().count() != 1 {
                    return Err(SwapError::DictionaryFormat {
                        line: line_no,
                        message: format!("{label} must be a single token, got {value:?}"),
                    });
                }
            }
            if source.to_lowercase() == target.to_lowercase() {
                return Err(SwapError::DictionaryFormat {
                    line: line_no,
                    message: format!("source and target are identical: {source:?}"),
                });
            }
            let frequency: u32 = freq.parse().map_err(|_| SwapError::DictionaryFormat {
                line: line_no,
                message: format!("invalid frequency {freq:?}"),
            })?;
            if frequency == 0 {
                return Err(SwapError::DictionaryFormat {
                    line: line_no,
                    message: "frequency must be >= 1".to_string(),
                });
            }
            let pos = if pos == "-" { None } else { Some(pos) };
            rules.push(SwapRule::new(source, target, pos, frequency));
        }
        Self::new(rules)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# source\ttarget\tpos\tfrequency\n");
        for rule in &self.rules {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                rule.source,
                rule.target,
                rule.pos_constraint.as_deref().unwrap_or("-"),
                rule.frequency
            ));
        }
        out
    }
}

/// Per-document mapping from original entity token to its `E<k>` placeholder,
/// in first-occurrence order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnonymizationMap {
    entries: Vec<(String, String)>,
}

impl AnonymizationMap {
    pub fn placeholder_for(&self, word: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(orig, _)| orig == word)
            .map(|(_, ph)| ph.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

/// True for `E1`, `E2`, ... — tokens introduced by anonymization, which the
/// swapper must never touch.
pub fn is_placeholder(word: &str) -> bool {
    let mut chars = word.chars();
    chars.next() == Some('E') && {
        let rest = chars.as_str();
        !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit())
    }
}

/// Which named-entity types get anonymized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NeFilter {
    /// Person names only.
    #[default]
    Person,
    /// Every labelled entity span.
    All,
}

impl NeFilter {
    fn matches(&self, label: &str) -> bool {
        match self {
            NeFilter::All => true,
            NeFilter::Person => {
                let upper = label.to_uppercase();
                upper == "PERSON" || upper == "PER"
            }
        }
    }
}

fn ne_absent(tag: &str) -> bool {
    tag.is_empty() || tag == "-"
}

/// Per-token mask of tokens inside a matching named-entity span.
///
/// Both the bracketed OntoNotes encoding (`(PERSON*`, `*`, `*)`) and BIO
/// tags (`B-PERSON`, `I-PERSON`, `O`) are understood.
fn entity_mask(sentence: &Sentence, filter: NeFilter) -> Vec<bool> {
    let mut mask = vec![false; sentence.tokens.len()];
    let mut open: Option<bool> = None;
    for (t, token) in sentence.tokens.iter().enumerate() {
        let tag = token.ne_tag.as_str();
        if ne_absent(tag) {
            continue;
        }
        if let Some(inner) = tag.strip_prefix('(') {
            let label = inner.trim_end_matches(['*', ')']);
            let wanted = filter.matches(label);
            if tag.ends_with(')') {
                mask[t] = wanted;
            } else {
                open = Some(wanted);
                mask[t] = wanted;
            }
        } else if tag.starts_with('*') {
            if let Some(wanted) = open {
                mask[t] = wanted;
            }
            if tag.ends_with(')') {
                open = None;
            }
        } else if let Some(label) = tag.strip_prefix("B-") {
            mask[t] = filter.matches(label);
        } else if let Some(label) = tag.strip_prefix("I-") {
            mask[t] = filter.matches(label);
        }
        // "O" and any other value: outside.
    }
    mask
}

/// Replaces every token inside a person-type entity span with a placeholder,
/// identical surface strings getting the same placeholder within the part.
pub fn anonymize_entities(
    part: &DocumentPart,
) -> Result<(DocumentPart, AnonymizationMap), SwapError> {
    anonymize_entities_with(part, NeFilter::Person)
}

pub fn anonymize_entities_with(
    part: &DocumentPart,
    filter: NeFilter,
) -> Result<(DocumentPart, AnonymizationMap), SwapError> {
    let all_absent = part
        .sentences
        .iter()
        .flat_map(|s| &s.tokens)
        .all(|t| ne_absent(&t.ne_tag));
    if all_absent {
        return Err(SwapError::MissingNEColumn {
            doc_id: part.doc_id.clone(),
            part: part.part_number,
        });
    }

    let mut out = part.clone();
    let mut map = AnonymizationMap::default();
    let mut index: HashMap<String, usize> = HashMap::new();
    for sentence in &mut out.sentences {
        let mask = entity_mask(sentence, filter);
        for (t, token) in sentence.tokens.iter_mut().enumerate() {
            if !mask[t] {
                continue;
            }
            let next = map.entries.len() + 1;
            let slot = *index.entry(token.word.clone()).or_insert_with(|| {
                map.entries
                    .push((token.word.clone(), format!("E{next}")));
                map.entries.len() - 1
            });
            token.word = map.entries[slot].1.clone();
            token.raw = None;
        }
    }
    Ok((out, map))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CasePattern {
    Lower,
    Title,
    Upper,
}

fn case_pattern(word: &str) -> CasePattern {
    let letters: Vec<char> = word.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.is_empty() {
        return CasePattern::Lower;
    }
    if letters.len() > 1 && letters.iter().all(|c| c.is_uppercase()) {
        return CasePattern::Upper;
    }
    if letters[0].is_uppercase() {
        return CasePattern::Title;
    }
    CasePattern::Lower
}

fn apply_case(pattern: CasePattern, target: &str) -> String {
    match pattern {
        CasePattern::Lower => target.to_string(),
        CasePattern::Upper => target.to_uppercase(),
        CasePattern::Title => {
            let mut chars = target.chars();
            match chars.next() {
                Some(first) => first.to_uppercase().collect::<String>() + chars.as_str(),
                None => String::new(),
            }
        }
    }
}

/// Rewrites every token that matches a dictionary rule (case-insensitively,
/// honoring POS constraints) with the opposite-gender target. Token count,
/// sentence segmentation, and all non-word columns are unchanged.
pub fn swap_genders(
    part: &DocumentPart,
    dict: &SwapDictionary,
) -> Result<DocumentPart, SwapError> {
    let lookup = RuleLookup::build(dict)?;
    let mut out = part.clone();
    for sentence in &mut out.sentences {
        for token in &mut sentence.tokens {
            if is_placeholder(&token.word) {
                continue;
            }
            let lower = token.word.to_lowercase();
            if let Some(rule) = lookup.find(&lower, &token.pos) {
                let replacement = if rule.case_locked() {
                    rule.target.clone()
                } else {
                    apply_case(case_pattern(&token.word), &rule.target)
                };
                if replacement != token.word {
                    token.word = replacement;
                    token.raw = None;
                }
            }
        }
    }
    Ok(out)
}

/// Builds the union of a corpus with its anonymize-and-swap image; swapped
/// parts keep their part numbers and get `~swapped` appended to the doc id.
pub fn augment_corpus(
    corpus: &Corpus,
    dict: &SwapDictionary,
    anonymize: bool,
) -> Result<Corpus, SwapError> {
    augment_corpus_with(corpus, dict, anonymize, NeFilter::Person)
}

pub fn augment_corpus_with(
    corpus: &Corpus,
    dict: &SwapDictionary,
    anonymize: bool,
    filter: NeFilter,
) -> Result<Corpus, SwapError> {
    let mut parts = corpus.parts.clone();
    for part in &corpus.parts {
        let prepared = if anonymize {
            anonymize_entities_with(part, filter)?.0
        } else {
            part.clone()
        };
        let mut swapped = swap_genders(&prepared, dict)?;
        swapped.doc_id = format!("{}~swapped", part.doc_id);
        parts.push(swapped);
    }
    Ok(Corpus { parts })
}
