//! Reader/writer for CoNLL-2012-style coreference files and extraction of
//! mention chains.
//!
//! The format is line-oriented: each document part sits between a
//! `#begin document (<id>); part <nnn>` header and an `#end document`
//! footer, sentences are separated by blank lines, and every data line is a
//! whitespace-separated column record with the coreference annotation in the
//! final column. Columns between the word sense and the coreference column
//! that this toolkit does not interpret (predicate lemma, frameset, word
//! sense, predicate arguments) are carried through verbatim.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

/// Minimum number of columns on a data line: doc id, part, token index,
/// word, POS, parse bit, predicate lemma, frameset, word sense, speaker,
/// named entity, coreference.
const MIN_COLUMNS: usize = 12;

#[derive(Debug, Error)]
pub enum ConllError {
    #[error("line {line}: malformed document header: {text:?}")]
    MalformedHeader { line: usize, text: String },
    #[error("line {line}: inconsistent column count (expected {expected}, found {found})")]
    InconsistentColumnCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: malformed coreference item {item:?}")]
    MalformedCorefField { line: usize, item: String },
    #[error("unbalanced coreference brackets in {doc_id} part {part}, sentence {sentence}")]
    UnbalancedCorefBrackets {
        doc_id: String,
        part: u32,
        sentence: usize,
    },
    #[error("line {line}: data line outside a document block")]
    DataOutsideDocument { line: usize },
    #[error("missing #end document for {doc_id} part {part}")]
    MissingEndDocument { doc_id: String, part: u32 },
    #[error("duplicate document part ({doc_id}, {part})")]
    DuplicatePart { doc_id: String, part: u32 },
    #[error("empty sentence in {doc_id} part {part}")]
    EmptySentence { doc_id: String, part: u32 },
}

/// One data line of a CoNLL-2012 file.
///
/// `raw` keeps the original line for the spacing-preserving writer and is
/// ignored by equality: two tokens are structurally equal when every column
/// value matches.
#[derive(Debug, Clone, Default)]
pub struct Token {
    pub word: String,
    pub pos: String,
    pub parse_bit: String,
    pub pred_lemma: String,
    pub frameset: String,
    pub word_sense: String,
    pub speaker: String,
    pub ne_tag: String,
    pub pred_args: Vec<String>,
    pub coref_field: String,
    pub raw: Option<String>,
}

impl PartialEq for Token {
    fn eq(&self, other: &Self) -> bool {
        self.word == other.word
            && self.pos == other.pos
            && self.parse_bit == other.parse_bit
            && self.pred_lemma == other.pred_lemma
            && self.frameset == other.frameset
            && self.word_sense == other.word_sense
            && self.speaker == other.speaker
            && self.ne_tag == other.ne_tag
            && self.pred_args == other.pred_args
            && self.coref_field == other.coref_field
    }
}

impl Eq for Token {}

impl Token {
    /// Token with the given word and POS tag and every other column at its
    /// "unannotated" value.
    pub fn new(word: &str, pos: &str) -> Self {
        Token {
            word: word.to_string(),
            pos: pos.to_string(),
            parse_bit: "*".to_string(),
            pred_lemma: "-".to_string(),
            frameset: "-".to_string(),
            word_sense: "-".to_string(),
            speaker: "-".to_string(),
            ne_tag: "-".to_string(),
            pred_args: Vec::new(),
            coref_field: "-".to_string(),
            raw: None,
        }
    }

    pub fn with_coref(mut self, coref: &str) -> Self {
        self.coref_field = coref.to_string();
        self
    }

    pub fn with_ne(mut self, ne: &str) -> Self {
        self.ne_tag = ne.to_string();
        self
    }
}

/// A sentence and any comment lines that preceded it in the file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub comments: Vec<String>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence {
            tokens,
            comments: Vec::new(),
        }
    }
}

/// One `#begin document`/`#end document` block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentPart {
    pub doc_id: String,
    pub part_number: u32,
    pub sentences: Vec<Sentence>,
    /// Comment lines between the last sentence and `#end document`.
    pub trailing_comments: Vec<String>,
}

impl DocumentPart {
    pub fn new(doc_id: &str, part_number: u32, sentences: Vec<Sentence>) -> Self {
        DocumentPart {
            doc_id: doc_id.to_string(),
            part_number,
            sentences,
            trailing_comments: Vec::new(),
        }
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.tokens.len()).sum()
    }
}

/// A span of tokens within one sentence, annotated with its chain id.
/// `end_token` is inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mention {
    pub sentence_index: usize,
    pub start_token: usize,
    pub end_token: usize,
    pub chain_id: u32,
}

/// All mentions of one entity within a document part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub chain_id: u32,
    pub mentions: Vec<Mention>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    pub parts: Vec<DocumentPart>,
}

impl Corpus {
    pub fn new(parts: Vec<DocumentPart>) -> Self {
        Corpus { parts }
    }

    pub fn sentence_count(&self) -> usize {
        self.parts.iter().map(|p| p.sentences.len()).sum()
    }

    pub fn token_count(&self) -> usize {
        self.parts.iter().map(|p| p.token_count()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CorefItem {
    Open(u32),
    Close(u32),
    Unit(u32),
}

fn parse_coref_items(field: &str) -> Result<Vec<CorefItem>, String> {
    if field == "-" {
        return Ok(Vec::new());
    }
    let mut items = Vec::new();
    for item in field.split('|') {
        let parsed = if let Some(inner) = item.strip_prefix('(') {
            if let Some(id) = inner.strip_suffix(')') {
                id.parse().ok().map(CorefItem::Unit)
            } else {
                inner.parse().ok().map(CorefItem::Open)
            }
        } else if let Some(id) = item.strip_suffix(')') {
            id.parse().ok().map(CorefItem::Close)
        } else {
            None
        };
        match parsed {
            Some(it) => items.push(it),
            None => return Err(item.to_string()),
        }
    }
    Ok(items)
}

/// Checks that every bracket opened in the sentence is closed in it, with
/// per-chain-id stacks (crossing brackets of one id resolve
/// last-open-first-close).
fn check_sentence_balance(sentence: &Sentence) -> Result<(), ()> {
    let mut open: HashMap<u32, usize> = HashMap::new();
    for token in &sentence.tokens {
        // Fields were validated at parse time; a malformed field here means
        // the sentence was built by hand, which balance-checking treats as
        // unbalanced.
        let items = parse_coref_items(&token.coref_field).map_err(|_| ())?;
        for item in items {
            match item {
                CorefItem::Open(id) => *open.entry(id).or_insert(0) += 1,
                CorefItem::Close(id) => {
                    let count = open.entry(id).or_insert(0);
                    if *count == 0 {
                        return Err(());
                    }
                    *count -= 1;
                }
                CorefItem::Unit(_) => {}
            }
        }
    }
    if open.values().any(|&count| count > 0) {
        return Err(());
    }
    Ok(())
}

fn parse_header(line: &str) -> Option<(String, u32)> {
    let rest = line.strip_prefix("#begin document")?.trim_start();
    let rest = rest.strip_prefix('(')?;
    let sep = rest.rfind("); part ")?;
    let doc_id = &rest[..sep];
    let part_str = rest[sep + "); part ".len()..].trim();
    let part = part_str.parse().ok()?;
    Some((doc_id.to_string(), part))
}

/// Parses a CoNLL-2012-style file into a [`Corpus`].
///
/// Comment lines other than the block delimiters are preserved and attach
/// to the sentence that follows them (or to the part's trailing comments).
pub fn parse_conll(text: &str) -> Result<Corpus, ConllError> {
    let mut parts: Vec<DocumentPart> = Vec::new();
    let mut current: Option<DocumentPart> = None;
    let mut pending_comments: Vec<String> = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    let mut sentence_comments: Vec<String> = Vec::new();
    let mut expected_columns: Option<usize> = None;

    fn flush_sentence(
        part: &mut DocumentPart,
        tokens: &mut Vec<Token>,
        comments: &mut Vec<String>,
    ) -> Result<(), ConllError> {
        if tokens.is_empty() {
            return Ok(());
        }
        let sentence = Sentence {
            tokens: std::mem::take(tokens),
            comments: std::mem::take(comments),
        };
        check_sentence_balance(&sentence).map_err(|_| ConllError::UnbalancedCorefBrackets {
            doc_id: part.doc_id.clone(),
            part: part.part_number,
            sentence: part.sentences.len(),
        })?;
        part.sentences.push(sentence);
        Ok(())
    }

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim_end_matches('\r');
        if line.starts_with("#begin document") {
            if current.is_some() {
                return Err(ConllError::MalformedHeader {
                    line: line_no,
                    text: line.to_string(),
                });
            }
            let (doc_id, part) =
                parse_header(line).ok_or_else(|| ConllError::MalformedHeader {
                    line: line_no,
                    text: line.to_string(),
                })?;
            current = Some(DocumentPart::new(&doc_id, part, Vec::new()));
            continue;
        }
        if line.trim() == "#end document" {
            let mut part = current.take().ok_or(ConllError::DataOutsideDocument {
                line: line_no,
            })?;
            flush_sentence(&mut part, &mut tokens, &mut sentence_comments)?;
            part.trailing_comments = std::mem::take(&mut pending_comments);
            parts.push(part);
            expected_columns = None;
            continue;
        }
        let part = match current.as_mut() {
            Some(p) => p,
            None => {
                if line.trim().is_empty() || line.starts_with('#') {
                    if line.starts_with('#') {
                        // Comment outside any block; nothing to attach it to.
                        return Err(ConllError::DataOutsideDocument { line: line_no });
                    }
                    continue;
                }
                return Err(ConllError::DataOutsideDocument { line: line_no });
            }
        };
        if line.trim().is_empty() {
            flush_sentence(part, &mut tokens, &mut sentence_comments)?;
            expected_columns = None;
            continue;
        }
        if line.starts_with('#') {
            pending_comments.push(line.to_string());
            continue;
        }
        // Data line. Comments seen so far belong to this sentence.
        if tokens.is_empty() {
            sentence_comments = std::mem::take(&mut pending_comments);
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() < MIN_COLUMNS {
            return Err(ConllError::InconsistentColumnCount {
                line: line_no,
                expected: expected_columns.unwrap_or(MIN_COLUMNS),
                found: cols.len(),
            });
        }
        match expected_columns {
            Some(expected) if expected != cols.len() => {
                return Err(ConllError::InconsistentColumnCount {
                    line: line_no,
                    expected,
                    found: cols.len(),
                });
            }
            Some(_) => {}
            None => expected_columns = Some(cols.len()),
        }
        let coref_field = cols[cols.len() - 1];
        if let Err(item) = parse_coref_items(coref_field) {
            return Err(ConllError::MalformedCorefField {
                line: line_no,
                item,
            });
        }
        tokens.push(Token {
            word: cols[3].to_string(),
            pos: cols[4].to_string(),
            parse_bit: cols[5].to_string(),
            pred_lemma: cols[6].to_string(),
            frameset: cols[7].to_string(),
            word_sense: cols[8].to_string(),
            speaker: cols[9].to_string(),
            ne_tag: cols[10].to_string(),
            pred_args: cols[11..cols.len() - 1]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            coref_field: coref_field.to_string(),
            raw: Some(line.to_string()),
        });
    }

    if let Some(part) = current {
        return Err(ConllError::MissingEndDocument {
            doc_id: part.doc_id,
            part: part.part_number,
        });
    }

    let mut seen = HashSet::new();
    for part in &parts {
        if !seen.insert((part.doc_id.clone(), part.part_number)) {
            return Err(ConllError::DuplicatePart {
                doc_id: part.doc_id.clone(),
                part: part.part_number,
            });
        }
    }

    Ok(Corpus { parts })
}

/// Output spacing for [`write_conll_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpacingMode {
    /// Single-space column separation (the canonical form this crate emits).
    #[default]
    Canonical,
    /// Re-emit the original line whenever a token still carries one.
    PreserveOriginal,
}

fn canonical_line(part: &DocumentPart, sentence_token: usize, token: &Token) -> String {
    let mut cols: Vec<&str> = Vec::with_capacity(MIN_COLUMNS + token.pred_args.len());
    let part_no = part.part_number.to_string();
    let idx = sentence_token.to_string();
    cols.push(&part.doc_id);
    cols.push(&part_no);
    cols.push(&idx);
    cols.push(&token.word);
    cols.push(&token.pos);
    cols.push(&token.parse_bit);
    cols.push(&token.pred_lemma);
    cols.push(&token.frameset);
    cols.push(&token.word_sense);
    cols.push(&token.speaker);
    cols.push(&token.ne_tag);
    for arg in &token.pred_args {
        cols.push(arg);
    }
    cols.push(&token.coref_field);
    cols.join(" ")
}

/// Serializes a corpus in canonical single-space column form.
///
/// `parse_conll(&write_conll(c))` is structurally equal to `c`, and files
/// already in canonical form round-trip byte-identically.
pub fn write_conll(corpus: &Corpus) -> String {
    write_conll_with(corpus, SpacingMode::Canonical)
}

pub fn write_conll_with(corpus: &Corpus, mode: SpacingMode) -> String {
    let mut out = String::new();
    for part in &corpus.parts {
        out.push_str(&format!(
            "#begin document ({}); part {:03}\n",
            part.doc_id, part.part_number
        ));
        for sentence in &part.sentences {
            for comment in &sentence.comments {
                out.push_str(comment);
                out.push('\n');
            }
            for (t, token) in sentence.tokens.iter().enumerate() {
                let line = match (mode, &token.raw) {
                    (SpacingMode::PreserveOriginal, Some(raw)) => raw.clone(),
                    _ => canonical_line(part, t, token),
                };
                out.push_str(&line);
                out.push('\n');
            }
            out.push('\n');
        }
        for comment in &part.trailing_comments {
            out.push_str(comment);
            out.push('\n');
        }
        out.push_str("#end document\n");
    }
    out
}

/// Extracts the coreference chains of a part.
///
/// Requires balanced brackets (guaranteed for parsed input). Chains are
/// ordered by their first mention's position, then chain id; mentions
/// within a chain are in document order with duplicates removed.
pub fn extract_chains(part: &DocumentPart) -> Vec<Chain> {
    let mut mentions_by_id: HashMap<u32, Vec<Mention>> = HashMap::new();
    for (s, sentence) in part.sentences.iter().enumerate() {
        let mut open_stacks: HashMap<u32, Vec<usize>> = HashMap::new();
        for (t, token) in sentence.tokens.iter().enumerate() {
            let items = parse_coref_items(&token.coref_field).unwrap_or_default();
            for item in items {
                match item {
                    CorefItem::Open(id) => open_stacks.entry(id).or_default().push(t),
                    CorefItem::Close(id) => {
                        if let Some(start) = open_stacks.entry(id).or_default().pop() {
                            mentions_by_id.entry(id).or_default().push(Mention {
                                sentence_index: s,
                                start_token: start,
                                end_token: t,
                                chain_id: id,
                            });
                        }
                    }
                    CorefItem::Unit(id) => {
                        mentions_by_id.entry(id).or_default().push(Mention {
                            sentence_index: s,
                            start_token: t,
                            end_token: t,
                            chain_id: id,
                        });
                    }
                }
            }
        }
    }
    let mut chains: Vec<Chain> = mentions_by_id
        .into_iter()
        .map(|(chain_id, mut mentions)| {
            mentions.sort_by_key(|m| (m.sentence_index, m.start_token, m.end_token));
            mentions.dedup_by_key(|m| (m.sentence_index, m.start_token, m.end_token));
            Chain { chain_id, mentions }
        })
        .collect();
    chains.sort_by_key(|c| {
        let first = c.mentions[0];
        (
            first.sentence_index,
            first.start_token,
            first.end_token,
            c.chain_id,
        )
    });
    chains
}
