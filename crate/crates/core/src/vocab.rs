//! Trained token dictionary: frequency-ordered entries behind a block of special tokens.
//!
//! On disk a vocabulary is UTF-8 text with one `token<TAB>frequency` line per
//! token. Specials come first with frequency 0, then entries ordered by
//! frequency descending and token ascending. Ids are line indices.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::corpus::FrequencyTable;
use crate::error::{Error, Result};

pub const PAD: &str = "<pad>";
pub const UNK: &str = "<unk>";
pub const DEFAULT_SPECIALS: [&str; 2] = [PAD, UNK];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    specials: Vec<String>,
    entries: Vec<(String, u64)>,
    ids: HashMap<String, u32>,
    unk: u32,
    max_entry_chars: usize,
}

fn validate_token(token: &str) -> std::result::Result<(), String> {
    if token.is_empty() {
        return Err("empty token".into());
    }
    if token.chars().any(char::is_whitespace) {
        return Err(format!("token {token:?} contains whitespace"));
    }
    Ok(())
}

impl Vocabulary {
    /// Keeps the `vocab_size - specials.len()` most frequent tokens of `freqs`.
    /// Ties are broken by token order. Tokens equal to a special are skipped.
    /// A size equal to the number of specials gives a specials-only vocabulary.
    pub fn build<S: AsRef<str>>(
        freqs: &FrequencyTable,
        vocab_size: usize,
        specials: &[S],
    ) -> Result<Self> {
        if vocab_size < specials.len() {
            return Err(Error::Config(format!(
                "vocab size {vocab_size} is smaller than the {} special tokens",
                specials.len()
            )));
        }
        let specials: Vec<String> = specials.iter().map(|s| s.as_ref().to_owned()).collect();
        for s in &specials {
            validate_token(s).map_err(Error::Config)?;
        }
        let keep = vocab_size - specials.len();
        let entries = freqs
            .sorted()
            .into_iter()
            .filter(|(t, _)| !specials.iter().any(|s| s == t))
            .take(keep)
            .map(|(t, f)| (t.to_owned(), f))
            .collect();
        Self::from_parts(specials, entries).map_err(Error::Config)
    }

    fn from_parts(
        specials: Vec<String>,
        entries: Vec<(String, u64)>,
    ) -> std::result::Result<Self, String> {
        if specials.is_empty() {
            return Err("no special tokens declared".into());
        }
        let mut ids = HashMap::with_capacity(specials.len() + entries.len());
        for (i, tok) in specials.iter().chain(entries.iter().map(|(t, _)| t)).enumerate() {
            if ids.insert(tok.clone(), i as u32).is_some() {
                return Err(format!("duplicate token {tok:?}"));
            }
        }
        let unk = *ids.get(UNK).ok_or_else(|| format!("special tokens must include {UNK}"))?;
        let max_entry_chars = entries.iter().map(|(t, _)| t.chars().count()).max().unwrap_or(0);
        Ok(Self { specials, entries, ids, unk, max_entry_chars })
    }

    pub fn specials(&self) -> &[String] {
        &self.specials
    }

    pub fn entries(&self) -> &[(String, u64)] {
        &self.entries
    }

    /// Number of ids, specials included.
    pub fn len(&self) -> usize {
        self.specials.len() + self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn unk_id(&self) -> u32 {
        self.unk
    }

    pub fn get_id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    /// Id of `token`, or the `<unk>` id when absent.
    pub fn id_of(&self, token: &str) -> u32 {
        self.get_id(token).unwrap_or(self.unk)
    }

    pub fn token_of(&self, id: u32) -> Option<&str> {
        let id = id as usize;
        let n = self.specials.len();
        if id < n {
            Some(&self.specials[id])
        } else {
            self.entries.get(id - n).map(|(t, _)| t.as_str())
        }
    }

    pub fn is_special(&self, token: &str) -> bool {
        self.get_id(token).is_some_and(|id| (id as usize) < self.specials.len())
    }

    /// Frequency of a trained entry. Specials are not entries and yield `None`.
    pub fn frequency(&self, token: &str) -> Option<u64> {
        let id = self.get_id(token)? as usize;
        id.checked_sub(self.specials.len()).map(|i| self.entries[i].1)
    }

    pub fn contains_entry(&self, token: &str) -> bool {
        self.frequency(token).is_some()
    }

    /// Character length of the longest entry.
    pub fn max_entry_chars(&self) -> usize {
        self.max_entry_chars
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.specials {
            let _ = writeln!(out, "{s}\t0");
        }
        for (t, f) in &self.entries {
            let _ = writeln!(out, "{t}\t{f}");
        }
        out
    }

    /// Parses the text format. `first_line` is the 1-based file line of the
    /// first line of `text`, so errors point into an enclosing file.
    pub fn from_text(text: &str, first_line: usize) -> Result<Self> {
        let mut specials = Vec::new();
        let mut entries: Vec<(String, u64)> = Vec::new();
        let mut seen: HashMap<&str, usize> = HashMap::new();
        let body = text.strip_suffix('\n').unwrap_or(text);
        if !body.is_empty() {
            for (i, line) in body.split('\n').enumerate() {
                let lineno = first_line + i;
                let (token, freq) = line
                    .split_once('\t')
                    .ok_or_else(|| Error::parse(lineno, "malformed line: expected token<TAB>frequency"))?;
                validate_token(token)
                    .map_err(|m| Error::parse(lineno, format!("malformed line: {m}")))?;
                let freq: u64 = freq
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("malformed frequency {freq:?}")))?;
                if seen.insert(token, lineno).is_some() {
                    return Err(Error::parse(lineno, "duplicate token"));
                }
                if freq == 0 {
                    if !entries.is_empty() {
                        return Err(Error::parse(lineno, "special token after entries"));
                    }
                    specials.push(token.to_owned());
                } else {
                    if let Some((prev, pf)) = entries.last() {
                        if freq > *pf || (freq == *pf && token <= prev.as_str()) {
                            return Err(Error::parse(lineno, "entries out of order"));
                        }
                    }
                    entries.push((token.to_owned(), freq));
                }
            }
        }
        if specials.is_empty() {
            return Err(Error::Format("no special tokens declared".into()));
        }
        Self::from_parts(specials, entries).map_err(Error::Format)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let text = utf8_or_line_error(&bytes)?;
        Self::from_text(text, 1)
    }
}

/// Decodes `bytes`, reporting the 1-based line of the first invalid sequence.
pub(crate) fn utf8_or_line_error(bytes: &[u8]) -> Result<&str> {
    std::str::from_utf8(bytes).map_err(|e| {
        let line = 1 + bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count();
        Error::parse(line, "invalid UTF-8")
    })
}
