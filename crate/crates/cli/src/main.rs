//! Command-line front end for the bias-kit toolkit.
//!
//! Exit codes: 0 = success, 1 = input error (bad files, malformed data),
//! 2 = internal error.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bias_kit::conll_io::{self, Corpus};
use bias_kit::data;
use bias_kit::gender_swap::{self, NeFilter, SwapDictionary};
use bias_kit::report;
use bias_kit::resources::{self, GenderCountList};
use bias_kit::rule_mining;
use bias_kit::winogen::{self, Condition, PairingStrategy, WinoExample};

#[derive(Parser)]
#[command(
    name = "bias-kit",
    version,
    about = "Detect and mitigate gender bias in coreference resolution pipelines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Pairing {
    /// Pair each male-dominated occupation with one female-dominated one.
    #[default]
    OneToOne,
    /// Use every male-dominated x female-dominated combination.
    CrossProduct,
}

impl From<Pairing> for PairingStrategy {
    fn from(p: Pairing) -> Self {
        match p {
            Pairing::OneToOne => PairingStrategy::OneToOne,
            Pairing::CrossProduct => PairingStrategy::CrossProduct,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a CoNLL coreference file and check its invariants.
    Validate {
        /// CoNLL file to check.
        conll: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Write the union of a corpus with its gender-swapped image.
    Augment(AugmentArgs),
    /// Mine swap rules from annotated span-edit pairs.
    MineRules {
        /// TSV of original/edited span pairs.
        pairs: PathBuf,
        /// Output dictionary TSV.
        output: PathBuf,
        /// Drop rules observed fewer than N times.
        #[arg(long, default_value_t = 1)]
        min_support: u32,
    },
    /// Generate a challenge corpus and its dev/test split.
    Generate {
        /// Prefix for the four output files
        /// (<prefix>.{dev,test}.{conll,jsonl}).
        #[arg(long)]
        out_prefix: PathBuf,
        /// Templates TOML (default: bundled set).
        #[arg(long)]
        templates: Option<PathBuf>,
        /// Occupations CSV (default: bundled Labor-statistics table).
        #[arg(long)]
        occupations: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        pairing: Pairing,
    },
    /// Score a response against a key and report bias gaps.
    Score {
        /// Gold CoNLL file.
        #[arg(long)]
        key: PathBuf,
        /// System response CoNLL file.
        #[arg(long)]
        response: PathBuf,
        /// Challenge JSONL emitted by `generate`; enables the bias section.
        #[arg(long)]
        challenge: Option<PathBuf>,
        /// Shuffles for the approximate randomization test.
        #[arg(long, default_value_t = 10_000)]
        iterations: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Balance male/female counts in a gender count list.
    Balance {
        /// Input gender list (phrase<TAB>male female neutral plural).
        input: PathBuf,
        /// Output gender list.
        output: PathBuf,
    },
    /// Report gender statistics of a corpus.
    Analyze {
        /// CoNLL file to analyze.
        conll: PathBuf,
        /// Job-title gazetteer, one phrase per line (default: bundled).
        #[arg(long)]
        gazetteer: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
}

#[derive(Args)]
struct AugmentArgs {
    /// Input CoNLL file.
    input: PathBuf,
    /// Output CoNLL file (2x the input parts).
    output: PathBuf,
    /// Swap dictionary TSV (default: bundled).
    #[arg(long)]
    dict: Option<PathBuf>,
    /// Skip named-entity anonymization.
    #[arg(long)]
    no_anonymize: bool,
    /// Anonymize every entity type, not just persons.
    #[arg(long)]
    all_ne_types: bool,
}

/// Distinguishes bad input (exit 1) from bugs and environment failures
/// inside the toolkit (exit 2).
enum CliError {
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Input(e)
    }
}

fn internal(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Internal(e.into())
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn parse_corpus(path: &Path) -> Result<Corpus> {
    let text = read_file(path)?;
    conll_io::parse_conll(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Flag > BIAS_KIT_DATA directory > bundled default.
fn resolve_data(flag: &Option<PathBuf>, name: &str) -> Result<String> {
    match flag {
        Some(path) => read_file(path),
        None => Ok(data::resolve(name)
            .with_context(|| format!("resolving data file {name}"))?
            .into_owned()),
    }
}

fn load_dictionary(flag: &Option<PathBuf>) -> Result<SwapDictionary> {
    let text = resolve_data(flag, data::SWAP_RULES_FILE)?;
    SwapDictionary::parse_tsv(&text).map_err(|e| anyhow!("loading swap dictionary: {e}"))
}

fn emit_json(value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(internal)?;
    println!("{text}");
    Ok(())
}

fn cmd_validate(conll: &Path, format: Format) -> Result<(), CliError> {
    let text = read_file(conll)?;
    let corpus = match conll_io::parse_conll(&text) {
        Ok(c) => c,
        Err(e) => {
            match format {
                Format::Json => emit_json(&serde_json::json!({
                    "status": "error",
                    "file": conll.display().to_string(),
                    "error": e.to_string(),
                }))?,
                Format::Text => eprintln!("{}: INVALID: {e}", conll.display()),
            }
            return Err(CliError::Input(anyhow!("{e}")));
        }
    };
    if corpus.parts.is_empty() {
        let message = "file contains no document blocks";
        match format {
            Format::Json => emit_json(&serde_json::json!({
                "status": "error",
                "file": conll.display().to_string(),
                "error": message,
            }))?,
            Format::Text => eprintln!("{}: INVALID: {message}", conll.display()),
        }
        return Err(CliError::Input(anyhow!("{message}")));
    }
    let chains: usize = corpus
        .parts
        .iter()
        .map(|p| conll_io::extract_chains(p).len())
        .sum();
    let mentions: usize = corpus
        .parts
        .iter()
        .flat_map(conll_io::extract_chains)
        .map(|c| c.mentions.len())
        .sum();
    match format {
        Format::Json => emit_json(&serde_json::json!({
            "status": "ok",
            "file": conll.display().to_string(),
            "parts": corpus.parts.len(),
            "sentences": corpus.sentence_count(),
            "tokens": corpus.token_count(),
            "chains": chains,
            "mentions": mentions,
        }))?,
        Format::Text => {
            println!("{}: OK", conll.display());
            println!(
                "  parts: {}, sentences: {}, tokens: {}, chains: {}, mentions: {}",
                corpus.parts.len(),
                corpus.sentence_count(),
                corpus.token_count(),
                chains,
                mentions
            );
        }
    }
    Ok(())
}

fn cmd_augment(args: &AugmentArgs) -> Result<(), CliError> {
    let corpus = parse_corpus(&args.input)?;
    let dict = load_dictionary(&args.dict)?;
    let filter = if args.all_ne_types {
        NeFilter::All
    } else {
        NeFilter::Person
    };
    let augmented =
        gender_swap::augment_corpus_with(&corpus, &dict, !args.no_anonymize, filter)
            .map_err(|e| anyhow!("augmenting corpus: {e}"))?;
    write_file(&args.output, &conll_io::write_conll(&augmented))?;
    eprintln!(
        "augmented {} parts -> {} parts ({})",
        corpus.parts.len(),
        augmented.parts.len(),
        args.output.display()
    );
    Ok(())
}

fn cmd_mine_rules(pairs: &Path, output: &Path, min_support: u32) -> Result<(), CliError> {
    let text = read_file(pairs)?;
    let span_pairs =
        rule_mining::parse_pairs_tsv(&text).map_err(|e| anyhow!("parsing pairs: {e}"))?;
    let skipped = span_pairs
        .iter()
        .filter(|p| rule_mining::word_difference(p).skipped)
        .count();
    let dict = rule_mining::mine_rules(&span_pairs, min_support)
        .map_err(|e| anyhow!("mining rules: {e}"))?;
    write_file(output, &dict.to_tsv())?;
    eprintln!(
        "mined {} rules from {} pairs ({} skipped for unequal length) -> {}",
        dict.rules.len(),
        span_pairs.len(),
        skipped,
        output.display()
    );
    Ok(())
}

fn count_conditions(examples: &[WinoExample]) -> (usize, usize) {
    let pro = examples
        .iter()
        .filter(|e| e.condition == Condition::Pro)
        .count();
    (pro, examples.len() - pro)
}

fn cmd_generate(
    out_prefix: &Path,
    templates: &Option<PathBuf>,
    occupations: &Option<PathBuf>,
    seed: u64,
    pairing: Pairing,
) -> Result<(), CliError> {
    let template_text = resolve_data(templates, data::TEMPLATES_FILE)?;
    let templates =
        winogen::load_templates(&template_text).map_err(|e| anyhow!("loading templates: {e}"))?;
    let occupation_text = resolve_data(occupations, data::OCCUPATIONS_FILE)?;
    let occupations = winogen::load_occupations(&occupation_text)
        .map_err(|e| anyhow!("loading occupations: {e}"))?;

    let examples = winogen::generate(&templates, &occupations, pairing.into(), seed)
        .map_err(|e| anyhow!("generating: {e}"))?;
    let (dev, test) =
        winogen::split_dev_test(&examples, seed).map_err(|e| anyhow!("splitting: {e}"))?;

    let prefix = out_prefix.display();
    for (half, name) in [(&dev, "dev"), (&test, "test")] {
        let conll_path = PathBuf::from(format!("{prefix}.{name}.conll"));
        let jsonl_path = PathBuf::from(format!("{prefix}.{name}.jsonl"));
        write_file(&conll_path, &conll_io::write_conll(&winogen::to_conll(half)))?;
        write_file(&jsonl_path, &winogen::to_jsonl(half))?;
    }

    let (pro, anti) = count_conditions(&examples);
    let (dev_pro, dev_anti) = count_conditions(&dev);
    let (test_pro, test_anti) = count_conditions(&test);
    emit_json(&serde_json::json!({
        "total": examples.len(),
        "pro": pro,
        "anti": anti,
        "dev": {"examples": dev.len(), "pro": dev_pro, "anti": dev_anti},
        "test": {"examples": test.len(), "pro": test_pro, "anti": test_anti},
        "templates": templates.len(),
        "occupations": occupations.len(),
        "seed": seed,
    }))?;
    Ok(())
}

fn render_score_text(report: &report::BiasReport) -> String {
    let mut out = String::new();
    for (name, m) in &report.metrics {
        out.push_str(&format!(
            "{name:8} P={:5.1} R={:5.1} F1={:5.1}\n",
            m.precision, m.recall, m.f1
        ));
    }
    out.push_str(&format!("conll_avg {:.1}\n", report.conll_avg));
    if let Some(bias) = &report.bias {
        for (label, section) in [("T1", &bias.t1), ("T2", &bias.t2)] {
            if let Some(s) = section {
                out.push_str(&format!(
                    "{label}: pro={:.1} anti={:.1} avg={:.1} |diff|={:.1} p={:.4} acc(pro)={:.1} acc(anti)={:.1}\n",
                    s.pro, s.anti, s.avg, s.diff, s.p, s.accuracy.pro, s.accuracy.anti
                ));
            }
        }
    }
    out
}

fn cmd_score(
    key: &Path,
    response: &Path,
    challenge: &Option<PathBuf>,
    iterations: u32,
    seed: u64,
    format: Format,
) -> Result<(), CliError> {
    let key_corpus = parse_corpus(key)?;
    let response_corpus = parse_corpus(response)?;
    let examples = match challenge {
        Some(path) => Some(
            winogen::parse_jsonl(&read_file(path)?)
                .map_err(|e| anyhow!("parsing challenge jsonl: {e}"))?,
        ),
        None => None,
    };
    let report = report::score_report(
        &key_corpus,
        &response_corpus,
        examples.as_deref(),
        iterations,
        seed,
    )
    .map_err(|e| anyhow!("scoring: {e}"))?;
    match format {
        Format::Json => {
            let value = serde_json::to_value(&report).map_err(internal)?;
            emit_json(&value)?;
        }
        Format::Text => print!("{}", render_score_text(&report)),
    }
    Ok(())
}

fn cmd_balance(input: &Path, output: &Path) -> Result<(), CliError> {
    let list = GenderCountList::parse(&read_file(input)?)
        .map_err(|e| anyhow!("parsing gender list: {e}"))?;
    let balanced = resources::balance_gender_list(&list);
    write_file(output, &balanced.to_text())?;
    eprintln!(
        "balanced {} phrases -> {}",
        balanced.len(),
        output.display()
    );
    Ok(())
}

fn cmd_analyze(conll: &Path, gazetteer: &Option<PathBuf>, format: Format) -> Result<(), CliError> {
    let corpus = parse_corpus(conll)?;
    let gazetteer_text = resolve_data(gazetteer, data::JOB_TITLES_FILE)?;
    let phrases: BTreeSet<String> = gazetteer_text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect();
    let stats = resources::analyze_corpus_bias(&corpus, &phrases)
        .map_err(|e| anyhow!("analyzing corpus: {e}"))?;
    match format {
        Format::Json => {
            let value = serde_json::to_value(&stats).map_err(internal)?;
            emit_json(&value)?;
        }
        Format::Text => {
            println!(
                "gendered entities: {} (male fraction {:.3})",
                stats.overall.gendered_entity_total, stats.overall.male_fraction
            );
            println!(
                "job-title rate: male {:.3}, female {:.3}",
                stats.overall.male_jobtitle_rate, stats.overall.female_jobtitle_rate
            );
            for (genre, b) in &stats.per_genre {
                println!(
                    "  {genre}: {} gendered, male fraction {:.3}",
                    b.gendered_entity_total, b.male_fraction
                );
            }
            if let Some(warning) = &stats.warning {
                println!("warning: {warning}");
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Validate { conll, format } => cmd_validate(conll, *format),
        Command::Augment(args) => cmd_augment(args),
        Command::MineRules {
            pairs,
            output,
            min_support,
        } => cmd_mine_rules(pairs, output, *min_support),
        Command::Generate {
            out_prefix,
            templates,
            occupations,
            seed,
            pairing,
        } => cmd_generate(out_prefix, templates, occupations, *seed, *pairing),
        Command::Score {
            key,
            response,
            challenge,
            iterations,
            seed,
            format,
        } => cmd_score(key, response, challenge, *iterations, *seed, *format),
        Command::Balance { input, output } => cmd_balance(input, output),
        Command::Analyze {
            conll,
            gazetteer,
            format,
        } => cmd_analyze(conll, gazetteer, *format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(2)
        }
    }
}
