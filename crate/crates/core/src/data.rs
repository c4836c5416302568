//! Bundled default data files and their resolution.
//!
//! Every default can be overridden by placing a file of the same name in
//! the directory named by the `BIAS_KIT_DATA` environment variable.

use std::borrow::Cow;
use std::io;
use std::path::PathBuf;

use crate::gender_swap::SwapDictionary;
use crate::winogen::{self, Occupation, Template};

pub const DATA_DIR_ENV: &str = "BIAS_KIT_DATA";

pub const OCCUPATIONS_FILE: &str = "occupations.csv";
pub const SWAP_RULES_FILE: &str = "swap_rules.tsv";
pub const TEMPLATES_FILE: &str = "templates.toml";
pub const JOB_TITLES_FILE: &str = "job_titles.txt";

pub const DEFAULT_OCCUPATIONS_CSV: &str = include_str!("../data/occupations.csv");
pub const DEFAULT_SWAP_RULES_TSV: &str = include_str!("../data/swap_rules.tsv");
pub const DEFAULT_TEMPLATES_TOML: &str = include_str!("../data/templates.toml");
pub const DEFAULT_JOB_TITLES: &str = include_str!("../data/job_titles.txt");

fn bundled(name: &str) -> Option<&'static str> {
    match name {
        OCCUPATIONS_FILE => Some(DEFAULT_OCCUPATIONS_CSV),
        SWAP_RULES_FILE => Some(DEFAULT_SWAP_RULES_TSV),
        TEMPLATES_FILE => Some(DEFAULT_TEMPLATES_TOML),
        JOB_TITLES_FILE => Some(DEFAULT_JOB_TITLES),
        _ => None,
    }
}

/// Contents of a named data file: the override from `BIAS_KIT_DATA` when
/// present, the bundled default otherwise.
pub fn resolve(name: &str) -> io::Result<Cow<'static, str>> {
    if let Ok(dir) = std::env::var(DATA_DIR_ENV) {
        let path = PathBuf::from(dir).join(name);
        if path.exists() {
            return Ok(Cow::Owned(std::fs::read_to_string(path)?));
        }
    }
    bundled(name).map(Cow::Borrowed).ok_or_else(|| {
        io::Error::new(
            io::ErrorKind::NotFound,
            format!("no bundled data file named {name:?}"),
        )
    })
}

/// The bundled occupation table (always valid; covered by tests).
pub fn default_occupations() -> Vec<Occupation> {
    winogen::load_occupations(DEFAULT_OCCUPATIONS_CSV).expect("bundled occupations are valid")
}

pub fn default_swap_dictionary() -> SwapDictionary {
    SwapDictionary::parse_tsv(DEFAULT_SWAP_RULES_TSV).expect("bundled dictionary is valid")
}

pub fn default_templates() -> Vec<Template> {
    winogen::load_templates(DEFAULT_TEMPLATES_TOML).expect("bundled templates are valid")
}
