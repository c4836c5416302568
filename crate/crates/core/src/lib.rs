//! Toolkit for detecting and mitigating gender bias in coreference
//! resolution pipelines.
//!
//! The crate covers the full audit loop:
//!
//! * [`conll_io`] — bit-faithful reading and writing of CoNLL-2012-style
//!   coreference files and mention-chain extraction.
//! * [`gender_swap`] — named-entity anonymization and rule-based gender
//!   swapping to build augmented training corpora.
//! * [`rule_mining`] — mining swap rules from annotated span-edit pairs.
//! * [`winogen`] — generation of occupation-pair challenge sentences with
//!   exact pro/anti-stereotype parity.
//! * [`metrics`] — MUC, B³, CEAF-e, the CoNLL average, bias gaps,
//!   challenge accuracy, and an approximate randomization test.
//! * [`resources`] — gender count-list balancing and corpus bias
//!   statistics.
//! * [`report`] — the JSON audit report combining all of the above.
//!
//! Scoring math is generic over the scalar type through [`num::Real`];
//! the [`Score`] alias fixes the default used by reports and the CLI.

pub mod conll_io;
pub mod data;
pub mod gender_swap;
pub mod metrics;
pub mod num;
pub mod report;
pub mod resources;
pub mod rule_mining;
pub mod winogen;

/// Default scalar type for all reported scores.
pub type Score = f64;

pub use conll_io::{parse_conll, write_conll, Corpus, DocumentPart, Sentence, Token};
pub use gender_swap::{augment_corpus, swap_genders, SwapDictionary, SwapRule};
pub use metrics::{approx_randomization, b_cubed, ceaf_e, muc, ClusterSet, ScoreTriple};
pub use report::{score_report, BiasReport};
pub use winogen::{generate, split_dev_test, Occupation, WinoExample};
