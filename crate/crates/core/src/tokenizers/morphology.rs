//! Affix-table segmentation: one prefix and one suffix split off a stem.

use crate::error::{Error, Result};
use crate::splitter::Segmentation;

pub const DEFAULT_PREFIXES: [&str; 12] = [
    "ال", "و", "ف", "ب", "ك", "ل", "لل", "وال", "بال", "فال", "كال", "س",
];

pub const DEFAULT_SUFFIXES: [&str; 16] = [
    "ة", "ات", "ان", "ين", "ون", "ها", "هم", "هن", "كم", "نا", "ني", "ه", "ك", "وا", "تم", "ي",
];

pub const DEFAULT_MIN_STEM_LEN: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffixTables {
    prefixes: Vec<String>,
    suffixes: Vec<String>,
    min_stem_len: usize,
}

impl Default for AffixTables {
    fn default() -> Self {
        Self {
            prefixes: DEFAULT_PREFIXES.iter().map(|s| s.to_string()).collect(),
            suffixes: DEFAULT_SUFFIXES.iter().map(|s| s.to_string()).collect(),
            min_stem_len: DEFAULT_MIN_STEM_LEN,
        }
    }
}

impl AffixTables {
    pub fn new(prefixes: Vec<String>, suffixes: Vec<String>, min_stem_len: usize) -> Result<Self> {
        if min_stem_len == 0 {
            return Err(Error::Config("minimum stem length must be at least 1".into()));
        }
        for a in prefixes.iter().chain(&suffixes) {
            if a.is_empty() || a.chars().any(char::is_whitespace) {
                return Err(Error::Config(format!("invalid affix {a:?}")));
            }
        }
        Ok(Self { prefixes, suffixes, min_stem_len })
    }

    pub fn prefixes(&self) -> &[String] {
        &self.prefixes
    }

    pub fn suffixes(&self) -> &[String] {
        &self.suffixes
    }

    pub fn min_stem_len(&self) -> usize {
        self.min_stem_len
    }

    /// Longest affix from `table` accepted by `fits`, measured in characters.
    fn longest(table: &[String], fits: impl Fn(&str) -> bool) -> Option<&str> {
        table
            .iter()
            .filter(|a| fits(a))
            .max_by_key(|a| a.chars().count())
            .map(String::as_str)
    }
}

/// Greedy prefix first, then suffix, each only if the remaining stem keeps at
/// least `min_stem_len` characters.
pub fn segment_affixes(word: &str, affixes: &AffixTables) -> Segmentation {
    let len = |s: &str| s.chars().count();
    let min = affixes.min_stem_len;
    let prefix = AffixTables::longest(&affixes.prefixes, |p| {
        word.starts_with(p) && len(word) - len(p) >= min
    });
    let rest = &word[prefix.map_or(0, str::len)..];
    let suffix = AffixTables::longest(&affixes.suffixes, |s| {
        rest.ends_with(s) && len(rest) - len(s) >= min
    });
    let stem = &rest[..rest.len() - suffix.map_or(0, str::len)];

    let pieces: Vec<&str> = [prefix, Some(stem), suffix].into_iter().flatten().collect();
    Segmentation::from_pieces(&pieces)
}
