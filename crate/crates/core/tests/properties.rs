//! Property tests for the structural invariants: round-trips, swap span
//! preservation and involution, mining determinism, metric symmetry and
//! oracle agreement, balancing idempotence, and randomization-test
//! invariances.

mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bias_kit::conll_io::{
    extract_chains, parse_conll, write_conll, Corpus, DocumentPart, Sentence, Token,
};
use bias_kit::gender_swap::{swap_genders, SwapDictionary, SwapRule};
use bias_kit::metrics::{approx_randomization, b_cubed, ceaf_e, muc, PerDocScores};
use bias_kit::resources::{balance_gender_list, GenderCountList, GenderCounts};
use bias_kit::rule_mining::{mine_rules, word_difference, AnnotatedSpanPair};
use bias_kit::winogen::{generate, Gender, Occupation, PairingStrategy, WinoExample};

// ---------------------------------------------------------------- corpora

#[derive(Debug, Clone)]
struct MentionPlan {
    start: usize,
    end: usize,
    chain: u32,
}

fn render_coref(len: usize, mentions: &[MentionPlan]) -> Vec<String> {
    let mut fields = vec![Vec::new(); len];
    for m in mentions {
        if m.start == m.end {
            fields[m.start].push(format!("({})", m.chain));
        } else {
            fields[m.start].push(format!("({}", m.chain));
            fields[m.end].push(format!("{})", m.chain));
        }
    }
    fields
        .into_iter()
        .map(|items| {
            if items.is_empty() {
                "-".to_string()
            } else {
                items.join("|")
            }
        })
        .collect()
}

fn sentence_strategy() -> impl Strategy<Value = Sentence> {
    let words = proptest::collection::vec("[a-z]{1,6}", 1..8);
    (words, proptest::collection::vec((0usize..8, 0usize..8, 0u32..4), 0..4)).prop_map(
        |(words, raw_mentions)| {
            let len = words.len();
            let mentions: Vec<MentionPlan> = raw_mentions
                .into_iter()
                .map(|(a, b, chain)| {
                    let (start, end) = if a <= b { (a, b) } else { (b, a) };
                    MentionPlan {
                        start: start.min(len - 1),
                        end: end.min(len - 1),
                        chain,
                    }
                })
                .collect();
            let fields = render_coref(len, &mentions);
            let tokens = words
                .into_iter()
                .zip(fields)
                .map(|(w, coref)| Token::new(&w, "NN").with_coref(&coref))
                .collect();
            Sentence::new(tokens)
        },
    )
}

fn corpus_strategy() -> impl Strategy<Value = Corpus> {
    proptest::collection::vec(proptest::collection::vec(sentence_strategy(), 1..4), 1..3)
        .prop_map(|parts| {
            Corpus::new(
                parts
                    .into_iter()
                    .enumerate()
                    .map(|(i, sentences)| {
                        DocumentPart::new(&format!("gen/doc_{i:02}"), i as u32, sentences)
                    })
                    .collect(),
            )
        })
}

proptest! {
    #[test]
    fn parse_write_round_trip(corpus in corpus_strategy()) {
        let text = write_conll(&corpus);
        let reparsed = parse_conll(&text).unwrap();
        prop_assert_eq!(&reparsed, &corpus);
        // And the canonical form is a fixed point byte-wise.
        prop_assert_eq!(write_conll(&reparsed), text);
    }

    #[test]
    fn bracket_conservation(corpus in corpus_strategy()) {
        let text = write_conll(&corpus);
        for part in &parse_conll(&text).unwrap().parts {
            let mut opens: BTreeMap<u32, i64> = BTreeMap::new();
            for sentence in &part.sentences {
                for token in &sentence.tokens {
                    if token.coref_field == "-" {
                        continue;
                    }
                    for item in token.coref_field.split('|') {
                        if let Some(rest) = item.strip_prefix('(') {
                            let id: u32 = rest.trim_end_matches(')').parse().unwrap();
                            *opens.entry(id).or_default() += 1;
                            if rest.ends_with(')') {
                                *opens.entry(id).or_default() -= 1;
                            }
                        } else {
                            let id: u32 = item.trim_end_matches(')').parse().unwrap();
                            *opens.entry(id).or_default() -= 1;
                        }
                    }
                }
            }
            prop_assert!(opens.values().all(|&v| v == 0));
        }
    }
}

// ------------------------------------------------------------------- swap

fn bijective_dictionary() -> SwapDictionary {
    SwapDictionary::new(vec![
        SwapRule::new("she", "he", None, 10),
        SwapRule::new("he", "she", None, 10),
        SwapRule::new("her", "his", Some("PRP$"), 10),
        SwapRule::new("his", "her", Some("PRP$"), 10),
        SwapRule::new("her", "him", Some("PRP"), 10),
        SwapRule::new("him", "her", Some("PRP"), 10),
        SwapRule::new("mother", "father", None, 10),
        SwapRule::new("father", "mother", None, 10),
        SwapRule::new("queen", "king", None, 10),
        SwapRule::new("king", "queen", None, 10),
    ])
    .unwrap()
}

fn gendered_part_strategy() -> impl Strategy<Value = DocumentPart> {
    // (word choice, case style) per token plus mention plans.
    let vocab = prop_oneof![
        Just(("she", "PRP")),
        Just(("he", "PRP")),
        Just(("her", "PRP$")),
        Just(("his", "PRP$")),
        Just(("her", "PRP")),
        Just(("him", "PRP")),
        Just(("mother", "NN")),
        Just(("father", "NN")),
        Just(("queen", "NN")),
        Just(("king", "NN")),
        Just(("report", "NN")),
        Just(("the", "DT")),
        Just(("spoke", "VBD")),
    ];
    let token = (vocab, 0usize..3).prop_map(|((word, pos), case)| {
        let surface = match case {
            0 => word.to_string(),
            1 => {
                let mut c = word.chars();
                c.next().unwrap().to_uppercase().collect::<String>() + c.as_str()
            }
            _ => word.to_uppercase(),
        };
        (surface, pos.to_string())
    });
    let sentence = (
        proptest::collection::vec(token, 1..8),
        proptest::collection::vec((0usize..8, 0u32..3), 0..3),
    )
        .prop_map(|(words, units)| {
            let len = words.len();
            let mentions: Vec<MentionPlan> = units
                .into_iter()
                .map(|(at, chain)| MentionPlan {
                    start: at.min(len - 1),
                    end: at.min(len - 1),
                    chain,
                })
                .collect();
            let fields = render_coref(len, &mentions);
            Sentence::new(
                words
                    .into_iter()
                    .zip(fields)
                    .map(|((w, pos), coref)| Token::new(&w, &pos).with_coref(&coref))
                    .collect(),
            )
        });
    proptest::collection::vec(sentence, 1..4)
        .prop_map(|sentences| DocumentPart::new("swap/doc", 0, sentences))
}

proptest! {
    #[test]
    fn swap_preserves_spans_and_annotation_columns(part in gendered_part_strategy()) {
        let dict = bijective_dictionary();
        let swapped = swap_genders(&part, &dict).unwrap();
        prop_assert_eq!(extract_chains(&swapped), extract_chains(&part));
        for (s, sentence) in part.sentences.iter().enumerate() {
            prop_assert_eq!(sentence.tokens.len(), swapped.sentences[s].tokens.len());
            for (a, b) in sentence.tokens.iter().zip(&swapped.sentences[s].tokens) {
                prop_assert_eq!(&a.pos, &b.pos);
                prop_assert_eq!(&a.coref_field, &b.coref_field);
                prop_assert_eq!(&a.parse_bit, &b.parse_bit);
                prop_assert_eq!(&a.speaker, &b.speaker);
            }
        }
    }

    #[test]
    fn swap_is_an_involution_under_a_bijective_dictionary(part in gendered_part_strategy()) {
        let dict = bijective_dictionary();
        let once = swap_genders(&part, &dict).unwrap();
        let twice = swap_genders(&once, &dict).unwrap();
        prop_assert_eq!(twice, part);
    }
}

// ------------------------------------------------------------------ mining

fn pair_pool() -> Vec<AnnotatedSpanPair> {
    vec![
        AnnotatedSpanPair::new("she left", "he left"),
        AnnotatedSpanPair::new("she left", "they left"),
        AnnotatedSpanPair::new("his car", "her car").with_pos("PRP$ NN"),
        AnnotatedSpanPair::new("her car", "his car").with_pos("PRP$ NN"),
        AnnotatedSpanPair::new("saw her", "saw him").with_pos("VBD PRP"),
        AnnotatedSpanPair::new("Mr. Wu", "Mrs. Wu"),
        AnnotatedSpanPair::new("mother knows", "father knows"),
        AnnotatedSpanPair::new("the aunt", "the uncle"),
        AnnotatedSpanPair::new("one two three", "one two"),
    ]
}

proptest! {
    #[test]
    fn mining_is_independent_of_pair_order(
        indices in proptest::collection::vec(0usize..9, 1..20),
        shuffled in any::<u64>(),
    ) {
        let pool = pair_pool();
        let pairs: Vec<AnnotatedSpanPair> =
            indices.iter().map(|&i| pool[i].clone()).collect();
        let mut reordered = pairs.clone();
        use rand::seq::SliceRandom;
        reordered.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffled));
        let a = mine_rules(&pairs, 1).unwrap();
        let b = mine_rules(&reordered, 1).unwrap();
        prop_assert_eq!(a.rules, b.rules);
    }

    #[test]
    fn mined_targets_dominate_competitors(
        indices in proptest::collection::vec(0usize..9, 1..20),
    ) {
        let pool = pair_pool();
        let pairs: Vec<AnnotatedSpanPair> =
            indices.iter().map(|&i| pool[i].clone()).collect();
        let dict = mine_rules(&pairs, 1).unwrap();

        // Recount candidate supports independently.
        let mut support: BTreeMap<(String, Option<String>, String), u32> = BTreeMap::new();
        for pair in &pairs {
            for (s, t, pos) in word_difference(pair).substitutions {
                *support
                    .entry((s.to_lowercase(), pos, t.to_lowercase()))
                    .or_default() += 1;
            }
        }
        for rule in &dict.rules {
            // Every mined rule appeared among the candidates (closure).
            let source = rule.source.to_lowercase();
            let observed: u32 = support
                .iter()
                .filter(|((s, _, t), _)| *s == source && *t == rule.target.to_lowercase())
                .map(|(_, &c)| c)
                .sum();
            prop_assert!(observed >= 1);
            if source == "her" {
                continue; // resolved by POS, not frequency
            }
            // Frequency dominance within the rule's (source, pos) group.
            for ((s, pos, _), &count) in &support {
                if *s == source && *pos == rule.pos_constraint {
                    prop_assert!(rule.frequency >= count);
                }
            }
        }
    }
}

// ----------------------------------------------------------------- metrics

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn metrics_match_oracles_and_are_symmetric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (key, response) = common::random_clustering_pair(&mut rng, 8);

        for (triple, oracle) in [
            (muc::<f64>(&key, &response), common::muc_oracle(&key, &response)),
            (b_cubed::<f64>(&key, &response), common::b_cubed_oracle(&key, &response)),
            (ceaf_e::<f64>(&key, &response), common::ceaf_e_oracle(&key, &response)),
        ] {
            prop_assert!((triple.precision - oracle.0).abs() < 1e-9);
            prop_assert!((triple.recall - oracle.1).abs() < 1e-9);
            prop_assert!((triple.f1 - oracle.2).abs() < 1e-9);
        }

        // Swapping key and response swaps precision and recall.
        for (forward, backward) in [
            (muc::<f64>(&key, &response), muc::<f64>(&response, &key)),
            (b_cubed::<f64>(&key, &response), b_cubed::<f64>(&response, &key)),
            (ceaf_e::<f64>(&key, &response), ceaf_e::<f64>(&response, &key)),
        ] {
            prop_assert!((forward.precision - backward.recall).abs() < 1e-12);
            prop_assert!((forward.recall - backward.precision).abs() < 1e-12);
            prop_assert!((forward.f1 - backward.f1).abs() < 1e-12);
        }
    }

    #[test]
    fn randomization_p_is_invariant_under_dyadic_scaling(
        numerators in proptest::collection::vec(-8i32..=8, 2..16),
        seed in any::<u64>(),
    ) {
        // Dyadic scores and a power-of-two scale keep the arithmetic exact,
        // so the p-value must match bit-for-bit.
        let a: Vec<(String, f64)> = numerators
            .iter()
            .enumerate()
            .map(|(i, &n)| (format!("u{i}"), n as f64 / 16.0))
            .collect();
        let b: Vec<(String, f64)> = numerators
            .iter()
            .enumerate()
            .map(|(i, _)| (format!("u{i}"), 0.0))
            .collect();
        let scaled_a: Vec<(String, f64)> =
            a.iter().map(|(id, v)| (id.clone(), v * 4.0)).collect();
        let p_plain = approx_randomization(
            &PerDocScores::new(a).unwrap(),
            &PerDocScores::new(b.clone()).unwrap(),
            2_000,
            seed,
        )
        .unwrap();
        let p_scaled = approx_randomization(
            &PerDocScores::new(scaled_a).unwrap(),
            &PerDocScores::new(b).unwrap(),
            2_000,
            seed,
        )
        .unwrap();
        prop_assert_eq!(p_plain, p_scaled);
    }
}

// ----------------------------------------------------------------- balance

proptest! {
    #[test]
    fn balancing_is_idempotent_and_exact(
        raw in proptest::collection::vec((0u64..1000, 0u64..1000, 0u64..50, 0u64..50), 1..40),
    ) {
        let entries: Vec<(String, GenderCounts)> = raw
            .iter()
            .enumerate()
            .map(|(i, &(m, f, n, p))| {
                (
                    format!("phrase {i}"),
                    GenderCounts { male: m, female: f, neutral: n, plural: p },
                )
            })
            .collect();
        let list = GenderCountList::new(entries).unwrap();
        let once = balance_gender_list(&list);
        for ((_, before), (_, after)) in list.entries().iter().zip(once.entries()) {
            prop_assert_eq!(after.male, after.female);
            prop_assert_eq!(after.neutral, before.neutral);
            prop_assert_eq!(after.plural, before.plural);
            // Rounded half-up mean.
            prop_assert_eq!(after.male, (before.male + before.female).div_ceil(2));
        }
        prop_assert_eq!(&balance_gender_list(&once), &once);
    }
}

// ----------------------------------------------------------------- winogen

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn flipping_genders_maps_the_set_onto_itself(seed in any::<u64>()) {
        let occupations = vec![
            Occupation::new("carpenter", 2),
            Occupation::new("driver", 6),
            Occupation::new("nurse", 90),
            Occupation::new("secretary", 95),
        ];
        let templates = bias_kit::data::default_templates();
        let examples =
            generate(&templates, &occupations, PairingStrategy::OneToOne, seed).unwrap();

        // Key every example by (twin, gender); the flipped counterpart must
        // exist, share everything but the pronoun, and carry the opposite
        // condition.
        let by_key: BTreeMap<(String, bool), &WinoExample> = examples
            .iter()
            .map(|e| ((e.twin_id.clone(), e.pronoun_gender == Gender::Male), e))
            .collect();
        prop_assert_eq!(by_key.len(), examples.len());
        for ex in &examples {
            let twin = by_key[&(ex.twin_id.clone(), ex.pronoun_gender.flipped() == Gender::Male)];
            prop_assert_eq!(twin.gold_antecedent, ex.gold_antecedent);
            prop_assert_ne!(twin.condition, ex.condition);
        }
        let pro = examples
            .iter()
            .filter(|e| e.condition == bias_kit::winogen::Condition::Pro)
            .count();
        prop_assert_eq!(pro * 2, examples.len());
    }
}
