//! Challenge-corpus generation: occupation-pair sentences in two template
//! shapes, duplicated across pronoun genders, with exact pro/anti parity.
//!
//! Every sentence exists in a male- and a female-pronoun version (a twin
//! pair sharing a `twin_id`), the occupation pair fills the two entity slots
//! in both orders, and the pronoun's gold antecedent never depends on the
//! pronoun's gender. Linking a pronoun to an occupation dominated by that
//! gender is the pro-stereotypical condition; the reverse is
//! anti-stereotypical.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conll_io::{Corpus, DocumentPart, Sentence, Token};

#[derive(Debug, Error)]
pub enum WinogenError {
    #[error("occupations line {line}: {message}")]
    OccupationFormat { line: usize, message: String },
    #[error("duplicate occupation {name:?}")]
    DuplicateOccupation { name: String },
    #[error("occupation {name:?}: percent female {value} out of range")]
    PercentOutOfRange { name: String, value: i64 },
    #[error("occupation {name:?}: percent female of exactly 50 cannot be classified")]
    Exactly50Percent { name: String },
    #[error("not enough occupations to build pairs: {message}")]
    InsufficientOccupations { message: String },
    #[error("no templates supplied")]
    NoTemplates,
    #[error("template {index}: {message}")]
    TemplateFormat { index: usize, message: String },
    #[error("twin {twin_id:?} has {count} members instead of 2")]
    OddTwinCount { twin_id: String, count: usize },
    #[error("jsonl line {line}: {message}")]
    Jsonl { line: usize, message: String },
}

/// An occupation and the reported share of women working in it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occupation {
    pub name: String,
    pub percent_female: u8,
}

impl Occupation {
    pub fn new(name: &str, percent_female: u8) -> Self {
        Occupation {
            name: name.to_string(),
            percent_female,
        }
    }

    pub fn female_dominated(&self) -> bool {
        self.percent_female > 50
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub fn flipped(self) -> Gender {
        match self {
            Gender::Male => Gender::Female,
            Gender::Female => Gender::Male,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Pro,
    Anti,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityRef {
    Entity1,
    Entity2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PronounCase {
    Nominative,
    Accusative,
    Possessive,
}

impl PronounCase {
    pub fn surface(self, gender: Gender) -> &'static str {
        match (self, gender) {
            (PronounCase::Nominative, Gender::Male) => "he",
            (PronounCase::Nominative, Gender::Female) => "she",
            (PronounCase::Accusative, Gender::Male) => "him",
            (PronounCase::Accusative, Gender::Female) => "her",
            (PronounCase::Possessive, Gender::Male) => "his",
            (PronounCase::Possessive, Gender::Female) => "her",
        }
    }

    fn pos_tag(self) -> &'static str {
        match self {
            PronounCase::Possessive => "PRP$",
            _ => "PRP",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TemplateKind {
    #[serde(rename = "type1")]
    Type1,
    #[serde(rename = "type2")]
    Type2,
}

/// Slot fillers for the two sentence shapes.
///
/// Type 1: `[entity1] [interaction] [entity2] [conjunction] [pronoun]
/// [circumstances]` — resolvable only through world knowledge.
///
/// Type 2: `[entity1] [interaction1] [entity2] and then [interaction2]
/// [pronoun] for [circumstances]` — resolvable through syntax alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TemplatePattern {
    Type1 {
        interaction: String,
        conjunction: String,
        circumstances: String,
    },
    Type2 {
        interaction1: String,
        interaction2: String,
        circumstances: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub pattern: TemplatePattern,
    pub gold_referent: EntityRef,
    pub pronoun_case: PronounCase,
}

impl Template {
    pub fn kind(&self) -> TemplateKind {
        match self.pattern {
            TemplatePattern::Type1 { .. } => TemplateKind::Type1,
            TemplatePattern::Type2 { .. } => TemplateKind::Type2,
        }
    }
}

/// A generated challenge sentence with its gold link and condition label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinoExample {
    pub id: String,
    pub twin_id: String,
    #[serde(rename = "type")]
    pub kind: TemplateKind,
    pub tokens: Vec<String>,
    /// Inclusive token span of the first entity noun phrase.
    pub entity1: (usize, usize),
    pub entity2: (usize, usize),
    pub pronoun_index: usize,
    #[serde(rename = "gold")]
    pub gold_antecedent: EntityRef,
    #[serde(rename = "occupation")]
    pub gold_occupation: Occupation,
    pub entity1_occupation: String,
    pub entity2_occupation: String,
    #[serde(rename = "gender")]
    pub pronoun_gender: Gender,
    pub condition: Condition,
    pub pronoun_case: PronounCase,
    pub template_index: usize,
}

impl WinoExample {
    pub fn gold_span(&self) -> (usize, usize) {
        match self.gold_antecedent {
            EntityRef::Entity1 => self.entity1,
            EntityRef::Entity2 => self.entity2,
        }
    }

    pub fn distractor_span(&self) -> (usize, usize) {
        match self.gold_antecedent {
            EntityRef::Entity1 => self.entity2,
            EntityRef::Entity2 => self.entity1,
        }
    }

    /// Doc id of this example in emitted CoNLL output.
    pub fn doc_id(&self) -> String {
        format!("wino/{}", self.id)
    }
}

/// Parses the occupations CSV (`name,percent_female`). A `name,...` header
/// line and `#` comments are skipped.
pub fn load_occupations(text: &str) -> Result<Vec<Occupation>, WinogenError> {
    let mut occupations: Vec<Occupation> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("name,") {
            continue;
        }
        let (name, percent) = line.rsplit_once(',').ok_or_else(|| {
            WinogenError::OccupationFormat {
                line: line_no,
                message: format!("expected name,percent_female, got {line:?}"),
            }
        })?;
        let name = name.trim();
        if name.is_empty() {
            return Err(WinogenError::OccupationFormat {
                line: line_no,
                message: "empty occupation name".to_string(),
            });
        }
        let value: i64 = percent.trim().parse().map_err(|_| {
            WinogenError::OccupationFormat {
                line: line_no,
                message: format!("invalid percentage {:?}", percent.trim()),
            }
        })?;
        if !(0..=100).contains(&value) {
            return Err(WinogenError::PercentOutOfRange {
                name: name.to_string(),
                value,
            });
        }
        if value == 50 {
            return Err(WinogenError::Exactly50Percent {
                name: name.to_string(),
            });
        }
        if occupations
            .iter()
            .any(|o| o.name.eq_ignore_ascii_case(name))
        {
            return Err(WinogenError::DuplicateOccupation {
                name: name.to_string(),
            });
        }
        occupations.push(Occupation::new(name, value as u8));
    }
    Ok(occupations)
}

/// Pro-stereotypical when the pronoun's gender dominates the occupation,
/// anti-stereotypical otherwise.
pub fn classify(occupation: &Occupation, pronoun_gender: Gender) -> Condition {
    let matches_stereotype = match pronoun_gender {
        Gender::Female => occupation.female_dominated(),
        Gender::Male => !occupation.female_dominated(),
    };
    if matches_stereotype {
        Condition::Pro
    } else {
        Condition::Anti
    }
}

/// How occupations combine into sentence pairs. Every pair crosses the 50%
/// line: one male-dominated occupation with one female-dominated one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairingStrategy {
    /// A seeded one-to-one matching; every occupation appears in exactly one
    /// pair. Requires equally many male- and female-dominated occupations.
    #[default]
    OneToOne,
    /// Every male-dominated x female-dominated combination.
    CrossProduct,
}

fn build_pairs(
    occupations: &[Occupation],
    strategy: PairingStrategy,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(Occupation, Occupation)>, WinogenError> {
    let mut male_dom: Vec<&Occupation> =
        occupations.iter().filter(|o| !o.female_dominated()).collect();
    let mut female_dom: Vec<&Occupation> =
        occupations.iter().filter(|o| o.female_dominated()).collect();
    if male_dom.is_empty() || female_dom.is_empty() {
        return Err(WinogenError::InsufficientOccupations {
            message: format!(
                "{} male-dominated and {} female-dominated occupations",
                male_dom.len(),
                female_dom.len()
            ),
        });
    }
    match strategy {
        PairingStrategy::OneToOne => {
            if male_dom.len() != female_dom.len() {
                return Err(WinogenError::InsufficientOccupations {
                    message: format!(
                        "one-to-one pairing needs equal counts, got {} male-dominated vs {} female-dominated",
                        male_dom.len(),
                        female_dom.len()
                    ),
                });
            }
            male_dom.shuffle(rng);
            female_dom.shuffle(rng);
            Ok(male_dom
                .into_iter()
                .zip(female_dom)
                .map(|(m, f)| (m.clone(), f.clone()))
                .collect())
        }
        PairingStrategy::CrossProduct => Ok(male_dom
            .iter()
            .flat_map(|m| female_dom.iter().map(|f| ((*m).clone(), (*f).clone())))
            .collect()),
    }
}

struct Realization {
    tokens: Vec<String>,
    entity1: (usize, usize),
    entity2: (usize, usize),
    pronoun_index: usize,
}

fn push_words(tokens: &mut Vec<String>, text: &str) {
    tokens.extend(text.split_whitespace().map(str::to_string));
}

fn push_entity(tokens: &mut Vec<String>, determiner: &str, occupation: &str) -> (usize, usize) {
    let start = tokens.len();
    tokens.push(determiner.to_string());
    push_words(tokens, occupation);
    (start, tokens.len() - 1)
}

fn realize(template: &Template, occ1: &str, occ2: &str, gender: Gender) -> Realization {
    let mut tokens = Vec::new();
    let pronoun = template.pronoun_case.surface(gender);
    let (entity1, entity2, pronoun_index) = match &template.pattern {
        TemplatePattern::Type1 {
            interaction,
            conjunction,
            circumstances,
        } => {
            let e1 = push_entity(&mut tokens, "The", occ1);
            push_words(&mut tokens, interaction);
            let e2 = push_entity(&mut tokens, "the", occ2);
            push_words(&mut tokens, conjunction);
            let p = tokens.len();
            tokens.push(pronoun.to_string());
            push_words(&mut tokens, circumstances);
            (e1, e2, p)
        }
        TemplatePattern::Type2 {
            interaction1,
            interaction2,
            circumstances,
        } => {
            let e1 = push_entity(&mut tokens, "The", occ1);
            push_words(&mut tokens, interaction1);
            let e2 = push_entity(&mut tokens, "the", occ2);
            push_words(&mut tokens, "and then");
            push_words(&mut tokens, interaction2);
            let p = tokens.len();
            tokens.push(pronoun.to_string());
            push_words(&mut tokens, "for");
            push_words(&mut tokens, circumstances);
            (e1, e2, p)
        }
    };
    tokens.push(".".to_string());
    Realization {
        tokens,
        entity1,
        entity2,
        pronoun_index,
    }
}

/// Generates the full challenge set.
///
/// For every template and occupation pair, the pair fills the entity slots
/// in both orders and each sentence is duplicated with a male and a female
/// pronoun, so N templates and K pairs yield exactly 4·N·K examples. The
/// result is deterministic for a given seed (the seed drives only the
/// one-to-one pairing shuffle).
pub fn generate(
    templates: &[Template],
    occupations: &[Occupation],
    strategy: PairingStrategy,
    seed: u64,
) -> Result<Vec<WinoExample>, WinogenError> {
    if templates.is_empty() {
        return Err(WinogenError::NoTemplates);
    }
    if occupations.len() < 2 {
        return Err(WinogenError::InsufficientOccupations {
            message: format!("got {}", occupations.len()),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = build_pairs(occupations, strategy, &mut rng)?;

    let mut examples = Vec::with_capacity(templates.len() * pairs.len() * 4);
    let mut twin_seq = 0usize;
    for (t_idx, template) in templates.iter().enumerate() {
        for (male_occ, female_occ) in &pairs {
            for (occ1, occ2) in [(male_occ, female_occ), (female_occ, male_occ)] {
                let twin_id = format!("w{twin_seq:06}");
                twin_seq += 1;
                for gender in [Gender::Male, Gender::Female] {
                    let real = realize(template, &occ1.name, &occ2.name, gender);
                    let gold_occupation = match template.gold_referent {
                        EntityRef::Entity1 => (*occ1).clone(),
                        EntityRef::Entity2 => (*occ2).clone(),
                    };
                    let condition = classify(&gold_occupation, gender);
                    let suffix = match gender {
                        Gender::Male => "m",
                        Gender::Female => "f",
                    };
                    examples.push(WinoExample {
                        id: format!("{twin_id}-{suffix}"),
                        twin_id: twin_id.clone(),
                        kind: template.kind(),
                        tokens: real.tokens,
                        entity1: real.entity1,
                        entity2: real.entity2,
                        pronoun_index: real.pronoun_index,
                        gold_antecedent: template.gold_referent,
                        gold_occupation,
                        entity1_occupation: occ1.name.clone(),
                        entity2_occupation: occ2.name.clone(),
                        pronoun_gender: gender,
                        condition,
                        pronoun_case: template.pronoun_case,
                        template_index: t_idx,
                    });
                }
            }
        }
    }
    Ok(examples)
}

/// Splits examples into development and test halves.
///
/// Twin pairs never straddle the split, so pro/anti parity is preserved in
/// both halves. Units of four examples (one template applied to one
/// occupation pair in both slot orders) are kept whole, and the assignment
/// is stratified by occupation pair so that per-occupation gold counts stay
/// balanced in each half whenever the template count is even.
pub fn split_dev_test(
    examples: &[WinoExample],
    seed: u64,
) -> Result<(Vec<WinoExample>, Vec<WinoExample>), WinogenError> {
    let mut twin_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for ex in examples {
        *twin_counts.entry(ex.twin_id.as_str()).or_insert(0) += 1;
    }
    for (twin_id, count) in twin_counts {
        if count != 2 {
            return Err(WinogenError::OddTwinCount {
                twin_id: twin_id.to_string(),
                count,
            });
        }
    }

    // unit = (occupation pair, template); each holds both slot orders.
    type UnitKey = (String, String, usize);
    let mut units: BTreeMap<UnitKey, Vec<usize>> = BTreeMap::new();
    for (i, ex) in examples.iter().enumerate() {
        let mut occs = [ex.entity1_occupation.clone(), ex.entity2_occupation.clone()];
        occs.sort();
        let [a, b] = occs;
        units.entry((a, b, ex.template_index)).or_default().push(i);
    }

    // stratum = occupation pair
    let mut strata: BTreeMap<(String, String), Vec<Vec<usize>>> = BTreeMap::new();
    for ((a, b, _), unit) in units {
        strata.entry((a, b)).or_default().push(unit);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dev_idx: Vec<usize> = Vec::new();
    let mut test_idx: Vec<usize> = Vec::new();
    for (stratum_no, (_, mut stratum_units)) in strata.into_iter().enumerate() {
        stratum_units.shuffle(&mut rng);
        let half = stratum_units.len() / 2;
        // With an odd unit count, alternate which half receives the extra
        // unit so overall sizes stay as equal as possible.
        let dev_take = half + (stratum_units.len() % 2) * (stratum_no % 2);
        for (i, unit) in stratum_units.into_iter().enumerate() {
            if i < dev_take {
                dev_idx.extend(unit);
            } else {
                test_idx.extend(unit);
            }
        }
    }
    dev_idx.sort_unstable();
    test_idx.sort_unstable();
    let dev = dev_idx.into_iter().map(|i| examples[i].clone()).collect();
    let test = test_idx.into_iter().map(|i| examples[i].clone()).collect();
    Ok((dev, test))
}

fn coref_field_for(
    index: usize,
    spans: &[((usize, usize), u32)],
) -> String {
    let mut items = Vec::new();
    for ((start, end), chain) in spans {
        if start == end {
            if index == *start {
                items.push(format!("({chain})"));
            }
        } else {
            if index == *start {
                items.push(format!("({chain}"));
            }
            if index == *end {
                items.push(format!("{chain})"));
            }
        }
    }
    if items.is_empty() {
        "-".to_string()
    } else {
        items.join("|")
    }
}

fn pos_for(ex: &WinoExample, index: usize) -> String {
    if index == ex.pronoun_index {
        return ex.pronoun_case.pos_tag().to_string();
    }
    for (start, end) in [ex.entity1, ex.entity2] {
        if index == start {
            return "DT".to_string();
        }
        if index > start && index <= end {
            return "NN".to_string();
        }
    }
    if ex.tokens[index] == "." {
        return ".".to_string();
    }
    "XX".to_string()
}

/// Encodes examples as a gold CoNLL corpus: chain 0 links the gold entity to
/// the pronoun, and the distractor entity stands alone as chain 1 so that
/// wrong links are penalized by the scorer.
pub fn to_conll(examples: &[WinoExample]) -> Corpus {
    let parts = examples
        .iter()
        .map(|ex| {
            let spans = vec![
                (ex.gold_span(), 0u32),
                ((ex.pronoun_index, ex.pronoun_index), 0u32),
                (ex.distractor_span(), 1u32),
            ];
            let tokens = ex
                .tokens
                .iter()
                .enumerate()
                .map(|(i, word)| {
                    Token::new(word, &pos_for(ex, i)).with_coref(&coref_field_for(i, &spans))
                })
                .collect();
            DocumentPart::new(&ex.doc_id(), 0, vec![Sentence::new(tokens)])
        })
        .collect();
    Corpus::new(parts)
}

/// One JSON object per line, carrying every example field.
pub fn to_jsonl(examples: &[WinoExample]) -> String {
    let mut out = String::new();
    for ex in examples {
        out.push_str(&serde_json::to_string(ex).expect("example serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_jsonl(text: &str) -> Result<Vec<WinoExample>, WinogenError> {
    let mut examples = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let ex = serde_json::from_str(line).map_err(|e| WinogenError::Jsonl {
            line: idx + 1,
            message: e.to_string(),
        })?;
        examples.push(ex);
    }
    Ok(examples)
}

#[derive(Debug, Deserialize)]
struct TemplatesFile {
    #[serde(rename = "templates")]
    entries: Vec<TemplateEntry>,
}

#[derive(Debug, Deserialize)]
struct TemplateEntry {
    kind: String,
    gold: String,
    pronoun: String,
    interaction: Option<String>,
    conjunction: Option<String>,
    interaction1: Option<String>,
    interaction2: Option<String>,
    circumstances: String,
}

/// Loads templates from the bundled TOML format: an array of `[[templates]]`
/// tables with named slots.
pub fn load_templates(text: &str) -> Result<Vec<Template>, WinogenError> {
    let file: TemplatesFile = toml::from_str(text).map_err(|e| WinogenError::TemplateFormat {
        index: 0,
        message: e.to_string(),
    })?;
    let mut templates = Vec::new();
    for (index, entry) in file.entries.iter().enumerate() {
        let fail = |message: String| WinogenError::TemplateFormat { index, message };
        let gold_referent = match entry.gold.as_str() {
            "entity1" => EntityRef::Entity1,
            "entity2" => EntityRef::Entity2,
            other => return Err(fail(format!("unknown gold referent {other:?}"))),
        };
        let pronoun_case = match entry.pronoun.as_str() {
            "nominative" => PronounCase::Nominative,
            "accusative" => PronounCase::Accusative,
            "possessive" => PronounCase::Possessive,
            other => return Err(fail(format!("unknown pronoun case {other:?}"))),
        };
        let pattern = match entry.kind.as_str() {
            "type1" => TemplatePattern::Type1 {
                interaction: entry
                    .interaction
                    .clone()
                    .ok_or_else(|| fail("type1 requires interaction".to_string()))?,
                conjunction: entry
                    .conjunction
                    .clone()
                    .ok_or_else(|| fail("type1 requires conjunction".to_string()))?,
                circumstances: entry.circumstances.clone(),
            },
            "type2" => TemplatePattern::Type2 {
                interaction1: entry
                    .interaction1
                    .clone()
                    .ok_or_else(|| fail("type2 requires interaction1".to_string()))?,
                interaction2: entry
                    .interaction2
                    .clone()
                    .ok_or_else(|| fail("type2 requires interaction2".to_string()))?,
                circumstances: entry.circumstances.clone(),
            },
            other => return Err(fail(format!("unknown template kind {other:?}"))),
        };
        templates.push(Template {
            pattern,
            gold_referent,
            pronoun_case,
        });
    }
    if templates.is_empty() {
        return Err(WinogenError::NoTemplates);
    }
    Ok(templates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conll_io::extract_chains;
    use std::collections::{BTreeSet, HashMap};

    fn sample_templates() -> Vec<Template> {
        vec![
            Template {
                pattern: TemplatePattern::Type1 {
                    interaction: "yelled at".to_string(),
                    conjunction: "because".to_string(),
                    circumstances: "was late".to_string(),
                },
                gold_referent: EntityRef::Entity2,
                pronoun_case: PronounCase::Nominative,
            },
            Template {
                pattern: TemplatePattern::Type2 {
                    interaction1: "called".to_string(),
                    interaction2: "texted".to_string(),
                    circumstances: "the schedule".to_string(),
                },
                gold_referent: EntityRef::Entity2,
                pronoun_case: PronounCase::Accusative,
            },
        ]
    }

    fn sample_occupations() -> Vec<Occupation> {
        vec![
            Occupation::new("carpenter", 2),
            Occupation::new("driver", 6),
            Occupation::new("nurse", 90),
            Occupation::new("secretary", 95),
        ]
    }

    #[test]
    fn load_occupations_parses_and_validates() {
        let occs = load_occupations("name,percent_female\ncarpenter,2\nnurse,90\n").unwrap();
        assert_eq!(occs.len(), 2);
        assert_eq!(occs[0], Occupation::new("carpenter", 2));
        assert_eq!(occs[1], Occupation::new("nurse", 90));

        assert!(matches!(
            load_occupations("x,50\n"),
            Err(WinogenError::Exactly50Percent { .. })
        ));
        assert!(matches!(
            load_occupations("x,101\n"),
            Err(WinogenError::PercentOutOfRange { .. })
        ));
        assert!(matches!(
            load_occupations("x,9\nx,9\n"),
            Err(WinogenError::DuplicateOccupation { .. })
        ));
    }

    #[test]
    fn classify_follows_dominance() {
        let nurse = Occupation::new("nurse", 90);
        let carpenter = Occupation::new("carpenter", 2);
        assert_eq!(classify(&nurse, Gender::Female), Condition::Pro);
        assert_eq!(classify(&nurse, Gender::Male), Condition::Anti);
        assert_eq!(classify(&carpenter, Gender::Male), Condition::Pro);
        assert_eq!(classify(&carpenter, Gender::Female), Condition::Anti);
    }

    #[test]
    fn type1_realization_is_mechanical() {
        let template = &sample_templates()[0];
        let real = realize(template, "physician", "secretary", Gender::Male);
        assert_eq!(
            real.tokens,
            vec![
                "The",
                "physician",
                "yelled",
                "at",
                "the",
                "secretary",
                "because",
                "he",
                "was",
                "late",
                "."
            ]
        );
        assert_eq!(real.entity1, (0, 1));
        assert_eq!(real.entity2, (4, 5));
        assert_eq!(real.pronoun_index, 7);
    }

    #[test]
    fn generation_count_is_4nk() {
        let examples = generate(
            &sample_templates(),
            &sample_occupations(),
            PairingStrategy::OneToOne,
            0,
        )
        .unwrap();
        // 2 templates x 2 pairs x 2 orders x 2 genders
        assert_eq!(examples.len(), 16);
    }

    #[test]
    fn flipping_all_pronoun_genders_is_an_involution_exchanging_conditions() {
        let examples = generate(
            &sample_templates(),
            &sample_occupations(),
            PairingStrategy::OneToOne,
            7,
        )
        .unwrap();
        let keyed: HashMap<&str, &WinoExample> =
            examples.iter().map(|e| (e.id.as_str(), e)).collect();
        for ex in &examples {
            let twin_suffix = match ex.pronoun_gender.flipped() {
                Gender::Male => "m",
                Gender::Female => "f",
            };
            let twin = keyed[format!("{}-{}", ex.twin_id, twin_suffix).as_str()];
            assert_eq!(twin.pronoun_gender, ex.pronoun_gender.flipped());
            assert_ne!(twin.condition, ex.condition);
            assert_eq!(twin.gold_antecedent, ex.gold_antecedent);
            assert_eq!(twin.gold_occupation, ex.gold_occupation);
            // Twins differ only in the pronoun token.
            let diffs: Vec<usize> = ex
                .tokens
                .iter()
                .zip(&twin.tokens)
                .enumerate()
                .filter(|(_, (a, b))| a != b)
                .map(|(i, _)| i)
                .collect();
            assert!(diffs == vec![ex.pronoun_index] || diffs.is_empty());
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let a = generate(
            &sample_templates(),
            &sample_occupations(),
            PairingStrategy::OneToOne,
            3,
        )
        .unwrap();
        let b = generate(
            &sample_templates(),
            &sample_occupations(),
            PairingStrategy::OneToOne,
            3,
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn one_to_one_requires_balanced_sides() {
        let occs = vec![
            Occupation::new("carpenter", 2),
            Occupation::new("nurse", 90),
            Occupation::new("secretary", 95),
        ];
        assert!(matches!(
            generate(&sample_templates(), &occs, PairingStrategy::OneToOne, 0),
            Err(WinogenError::InsufficientOccupations { .. })
        ));
        // Cross-product pairing accepts unbalanced sides.
        let examples =
            generate(&sample_templates(), &occs, PairingStrategy::CrossProduct, 0).unwrap();
        assert_eq!(examples.len(), 2 * 2 * 2 * 2);
    }

    #[test]
    fn split_keeps_twins_and_parity() {
        let examples = generate(
            &sample_templates(),
            &sample_occupations(),
            PairingStrategy::OneToOne,
            0,
        )
        .unwrap();
        let (dev, test) = split_dev_test(&examples, 0).unwrap();
        assert_eq!(dev.len(), test.len());
        assert_eq!(dev.len() + test.len(), examples.len());
        for half in [&dev, &test] {
            let ids: BTreeSet<&str> = half.iter().map(|e| e.twin_id.as_str()).collect();
            for id in ids {
                assert_eq!(half.iter().filter(|e| e.twin_id == id).count(), 2);
            }
            let pro = half.iter().filter(|e| e.condition == Condition::Pro).count();
            assert_eq!(pro * 2, half.len());
        }
    }

    #[test]
    fn split_is_deterministic() {
        let examples = generate(
            &sample_templates(),
            &sample_occupations(),
            PairingStrategy::OneToOne,
            0,
        )
        .unwrap();
        let once = split_dev_test(&examples, 42).unwrap();
        let twice = split_dev_test(&examples, 42).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn split_rejects_broken_twins() {
        let examples = generate(
            &sample_templates(),
            &sample_occupations(),
            PairingStrategy::OneToOne,
            0,
        )
        .unwrap();
        let broken: Vec<WinoExample> = examples[1..].to_vec();
        assert!(matches!(
            split_dev_test(&broken, 0),
            Err(WinogenError::OddTwinCount { .. })
        ));
    }

    #[test]
    fn conll_emission_round_trips_spans() {
        let examples = generate(
            &sample_templates(),
            &sample_occupations(),
            PairingStrategy::OneToOne,
            0,
        )
        .unwrap();
        let corpus = to_conll(&examples);
        assert_eq!(corpus.parts.len(), examples.len());
        let text = crate::conll_io::write_conll(&corpus);
        let reparsed = crate::conll_io::parse_conll(&text).unwrap();
        for (part, ex) in reparsed.parts.iter().zip(&examples) {
            let chains = extract_chains(part);
            assert_eq!(chains.len(), 2);
            let gold = chains.iter().find(|c| c.chain_id == 0).unwrap();
            let spans: BTreeSet<(usize, usize)> = gold
                .mentions
                .iter()
                .map(|m| (m.start_token, m.end_token))
                .collect();
            assert!(spans.contains(&ex.gold_span()));
            assert!(spans.contains(&(ex.pronoun_index, ex.pronoun_index)));
            let distractor = chains.iter().find(|c| c.chain_id == 1).unwrap();
            assert_eq!(distractor.mentions.len(), 1);
        }
    }

    #[test]
    fn jsonl_round_trip_preserves_fields() {
        let examples = generate(
            &sample_templates(),
            &sample_occupations(),
            PairingStrategy::OneToOne,
            0,
        )
        .unwrap();
        let text = to_jsonl(&examples);
        let reparsed = parse_jsonl(&text).unwrap();
        assert_eq!(reparsed, examples);
    }

    #[test]
    fn templates_load_from_toml() {
        let text = r#"
[[templates]]
kind = "type1"
gold = "entity2"
pronoun = "nominative"
interaction = "yelled at"
conjunction = "because"
circumstances = "was late"

[[templates]]
kind = "type2"
gold = "entity2"
pronoun = "accusative"
interaction1 = "called"
interaction2 = "texted"
circumstances = "the schedule"
"#;
        let templates = load_templates(text).unwrap();
        assert_eq!(templates.len(), 2);
        assert_eq!(templates[0].kind(), TemplateKind::Type1);
        assert_eq!(templates[1].kind(), TemplateKind::Type2);

        let missing = r#"
[[templates]]
kind = "type2"
gold = "entity2"
pronoun = "accusative"
interaction1 = "called"
circumstances = "the schedule"
"#;
        assert!(matches!(
            load_templates(missing),
            Err(WinogenError::TemplateFormat { .. })
        ));
    }
}
