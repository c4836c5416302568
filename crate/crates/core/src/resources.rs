//! Auxiliary-resource debiasing (gender count lists) and corpus bias
//! statistics.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conll_io::{extract_chains, Corpus, DocumentPart};

#[derive(Debug, Error)]
pub enum ResourceError {
    #[error("gender list line {line}: {message}")]
    GenderListFormat { line: usize, message: String },
    #[error("duplicate phrase {phrase:?} (case-folded)")]
    DuplicatePhrase { phrase: String },
    #[error("job-title gazetteer is empty")]
    EmptyGazetteer,
}

/// How often a noun phrase was observed in male, female, neutral, and
/// plural contexts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GenderCounts {
    pub male: u64,
    pub female: u64,
    pub neutral: u64,
    pub plural: u64,
}

/// Noun-phrase gender statistics resource, in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenderCountList {
    entries: Vec<(String, GenderCounts)>,
}

impl GenderCountList {
    pub fn new(entries: Vec<(String, GenderCounts)>) -> Result<Self, ResourceError> {
        let mut seen = BTreeSet::new();
        for (phrase, _) in &entries {
            if !seen.insert(phrase.to_lowercase()) {
                return Err(ResourceError::DuplicatePhrase {
                    phrase: phrase.clone(),
                });
            }
        }
        Ok(GenderCountList { entries })
    }

    pub fn entries(&self) -> &[(String, GenderCounts)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses the Bergsma-style format:
    /// `phrase<TAB>male female neutral plural`.
    pub fn parse(text: &str) -> Result<Self, ResourceError> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (phrase, counts_str) =
                line.split_once('\t')
                    .ok_or_else(|| ResourceError::GenderListFormat {
                        line: line_no,
                        message: "expected phrase<TAB>counts".to_string(),
                    })?;
            let counts: Vec<u64> = counts_str
                .split_whitespace()
                .map(|c| c.parse())
                .collect::<Result<_, _>>()
                .map_err(|_| ResourceError::GenderListFormat {
                    line: line_no,
                    message: format!("invalid counts {counts_str:?}"),
                })?;
            if counts.len() != 4 {
                return Err(ResourceError::GenderListFormat {
                    line: line_no,
                    message: format!("expected 4 counts, found {}", counts.len()),
                });
            }
            entries.push((
                phrase.to_string(),
                GenderCounts {
                    male: counts[0],
                    female: counts[1],
                    neutral: counts[2],
                    plural: counts[3],
                },
            ));
        }
        Self::new(entries)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (phrase, c) in &self.entries {
            out.push_str(&format!(
                "{phrase}\t{} {} {} {}\n",
                c.male, c.female, c.neutral, c.plural
            ));
        }
        out
    }
}

/// Sets every phrase's male and female counts to the rounded (half-up) mean
/// of the two; neutral and plural counts pass through untouched.
pub fn balance_gender_list(list: &GenderCountList) -> GenderCountList {
    let entries = list
        .entries
        .iter()
        .map(|(phrase, c)| {
            let balanced = (c.male + c.female + 1) / 2;
            (
                phrase.clone(),
                GenderCounts {
                    male: balanced,
                    female: balanced,
                    neutral: c.neutral,
                    plural: c.plural,
                },
            )
        })
        .collect();
    GenderCountList { entries }
}

const MALE_PRONOUNS: [&str; 3] = ["he", "him", "his"];
const FEMALE_PRONOUNS: [&str; 3] = ["she", "her", "hers"];

/// Gender and job-title statistics for one slice of the corpus.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenderBreakdown {
    pub gendered_entity_total: u64,
    pub male_entities: u64,
    pub female_entities: u64,
    pub male_fraction: f64,
    pub male_jobtitle_rate: f64,
    pub female_jobtitle_rate: f64,
}

#[derive(Debug, Default)]
struct RawCounts {
    male: u64,
    female: u64,
    male_with_title: u64,
    female_with_title: u64,
}

impl RawCounts {
    fn breakdown(&self) -> GenderBreakdown {
        let total = self.male + self.female;
        let rate = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        GenderBreakdown {
            gendered_entity_total: total,
            male_entities: self.male,
            female_entities: self.female,
            male_fraction: rate(self.male, total),
            male_jobtitle_rate: rate(self.male_with_title, self.male),
            female_jobtitle_rate: rate(self.female_with_title, self.female),
        }
    }
}

/// Corpus-wide bias statistics plus a per-genre breakdown (genre = leading
/// path segment of the document id).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusBiasStats {
    #[serde(flatten)]
    pub overall: GenderBreakdown,
    pub per_genre: BTreeMap<String, GenderBreakdown>,
    /// Set when the corpus contains no gendered chains at all.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ChainGender {
    Male,
    Female,
}

/// A mention is "headed by a gendered pronoun" in the approximation used
/// here when it consists of exactly one pronoun-class token whose word is a
/// gendered pronoun; multi-token mentions like "his mother" never qualify.
fn chain_gender(part: &DocumentPart, chain: &crate::conll_io::Chain) -> Option<ChainGender> {
    let mut male = 0u32;
    let mut female = 0u32;
    for m in &chain.mentions {
        if m.start_token != m.end_token {
            continue;
        }
        let token = &part.sentences[m.sentence_index].tokens[m.start_token];
        if !token.pos.starts_with("PRP") {
            continue;
        }
        let word = token.word.to_lowercase();
        if MALE_PRONOUNS.contains(&word.as_str()) {
            male += 1;
        } else if FEMALE_PRONOUNS.contains(&word.as_str()) {
            female += 1;
        }
    }
    // Ties (including 0-0) are excluded.
    match male.cmp(&female) {
        std::cmp::Ordering::Greater => Some(ChainGender::Male),
        std::cmp::Ordering::Less => Some(ChainGender::Female),
        std::cmp::Ordering::Equal => None,
    }
}

fn mention_has_job_title(
    part: &DocumentPart,
    mention: &crate::conll_io::Mention,
    gazetteer: &BTreeSet<Vec<String>>,
    max_phrase_len: usize,
) -> bool {
    let tokens = &part.sentences[mention.sentence_index].tokens;
    let words: Vec<String> = tokens[mention.start_token..=mention.end_token]
        .iter()
        .map(|t| t.word.to_lowercase())
        .collect();
    for start in 0..words.len() {
        for len in 1..=max_phrase_len.min(words.len() - start) {
            if gazetteer.contains(&words[start..start + len].to_vec()) {
                return true;
            }
        }
    }
    false
}

/// Counts gendered entities (chains) and how often each gender's chains
/// mention a job title from the gazetteer.
pub fn analyze_corpus_bias(
    corpus: &Corpus,
    job_gazetteer: &BTreeSet<String>,
) -> Result<CorpusBiasStats, ResourceError> {
    if job_gazetteer.is_empty() {
        return Err(ResourceError::EmptyGazetteer);
    }
    let phrases: BTreeSet<Vec<String>> = job_gazetteer
        .iter()
        .map(|p| {
            p.to_lowercase()
                .split_whitespace()
                .map(str::to_string)
                .collect()
        })
        .collect();
    let max_phrase_len = phrases.iter().map(|p| p.len()).max().unwrap_or(1);

    let mut overall = RawCounts::default();
    let mut genres: HashMap<String, RawCounts> = HashMap::new();
    for part in &corpus.parts {
        let genre = part
            .doc_id
            .split('/')
            .next()
            .unwrap_or(part.doc_id.as_str())
            .to_string();
        let genre_counts = genres.entry(genre).or_default();
        for chain in extract_chains(part) {
            let Some(gender) = chain_gender(part, &chain) else {
                continue;
            };
            let has_title = chain
                .mentions
                .iter()
                .any(|m| mention_has_job_title(part, m, &phrases, max_phrase_len));
            match gender {
                ChainGender::Male => {
                    overall.male += 1;
                    genre_counts.male += 1;
                    if has_title {
                        overall.male_with_title += 1;
                        genre_counts.male_with_title += 1;
                    }
                }
                ChainGender::Female => {
                    overall.female += 1;
                    genre_counts.female += 1;
                    if has_title {
                        overall.female_with_title += 1;
                        genre_counts.female_with_title += 1;
                    }
                }
            }
        }
    }

    let overall = overall.breakdown();
    let warning = if overall.gendered_entity_total == 0 {
        Some("corpus contains no gendered pronoun chains".to_string())
    } else {
        None
    };
    Ok(CorpusBiasStats {
        warning,
        per_genre: genres
            .into_iter()
            .map(|(g, c)| (g, c.breakdown()))
            .collect(),
        overall,
    })
}
