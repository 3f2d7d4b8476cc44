//! Model file format.
//!
//! ```text
//! kind = bpe
//! max_word_len = 20
//! strip_diacritics = false
//! strip_tatweel = false
//! collapse_whitespace = true
//! merges = 2
//! vocab = 40
//! ---
//! ا ##ل
//! ال ##م
//! ---
//! <pad><TAB>0
//! <unk><TAB>0
//! ...
//! ```
//!
//! Stochastic models add `seed` and `k_max`. Morphological models add
//! `prefixes`, `suffixes` and `min_stem_len` and an affix section of
//! `prefix<TAB>affix` / `suffix<TAB>affix` lines between the header and the
//! vocabulary. Bpe models carry the merge section shown above.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{AffixTables, KindParams, TokenizerKind, TokenizerModel};
use crate::corpus::NormalizationOptions;
use crate::error::{Error, Result};
use crate::vocab::Vocabulary;

const SEPARATOR: &str = "---";

impl TokenizerModel {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let n = &self.normalization;
        let _ = writeln!(out, "kind = {}", self.kind);
        let _ = writeln!(out, "max_word_len = {}", self.max_word_len);
        let _ = writeln!(out, "strip_diacritics = {}", n.strip_diacritics);
        let _ = writeln!(out, "strip_tatweel = {}", n.strip_tatweel);
        let _ = writeln!(out, "collapse_whitespace = {}", n.collapse_whitespace);
        match &self.params {
            KindParams::None => {}
            KindParams::Stochastic { seed, k_max } => {
                let _ = writeln!(out, "seed = {seed}");
                let _ = writeln!(out, "k_max = {k_max}");
            }
            KindParams::Morphological { affixes } => {
                let _ = writeln!(out, "prefixes = {}", affixes.prefixes().len());
                let _ = writeln!(out, "suffixes = {}", affixes.suffixes().len());
                let _ = writeln!(out, "min_stem_len = {}", affixes.min_stem_len());
            }
            KindParams::Bpe { merges } => {
                let _ = writeln!(out, "merges = {}", merges.len());
            }
        }
        let _ = writeln!(out, "vocab = {}", self.vocab.len());
        match &self.params {
            KindParams::Bpe { merges } => {
                out.push_str(SEPARATOR);
                out.push('\n');
                for (l, r) in merges {
                    let _ = writeln!(out, "{l} {r}");
                }
            }
            KindParams::Morphological { affixes } => {
                out.push_str(SEPARATOR);
                out.push('\n');
                for p in affixes.prefixes() {
                    let _ = writeln!(out, "prefix\t{p}");
                }
                for s in affixes.suffixes() {
                    let _ = writeln!(out, "suffix\t{s}");
                }
            }
            _ => {}
        }
        out.push_str(SEPARATOR);
        out.push('\n');
        out.push_str(&self.vocab.to_text());
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.strip_suffix('\n').unwrap_or(text).split('\n').collect();
        let first = lines.first().copied().unwrap_or("");
        if first.contains('\t') && !first.contains(" = ") {
            return Err(Error::Format(
                "this is a vocabulary file, not a model file: it has no `kind = ...` header".into(),
            ));
        }

        let mut sections: Vec<(usize, &[&str])> = Vec::new();
        let mut start = 0;
        for (i, line) in lines.iter().enumerate() {
            if *line == SEPARATOR {
                sections.push((start + 1, &lines[start..i]));
                start = i + 1;
            }
        }
        sections.push((start + 1, &lines[start..]));

        let header = Header::parse(sections[0].1)?;
        let kind: TokenizerKind = header.require("kind")?.parse()?;
        let expected_sections = match kind {
            TokenizerKind::Bpe | TokenizerKind::Morphological => 3,
            _ => 2,
        };
        if sections.len() != expected_sections {
            return Err(Error::Format(format!(
                "a {kind} model needs {} `---` separators, found {}",
                expected_sections - 1,
                sections.len() - 1
            )));
        }

        let allowed: &[&str] = match kind {
            TokenizerKind::Stochastic => &["seed", "k_max"],
            TokenizerKind::Morphological => &["prefixes", "suffixes", "min_stem_len"],
            TokenizerKind::Bpe => &["merges"],
            _ => &[],
        };
        const COMMON: [&str; 6] =
            ["kind", "max_word_len", "strip_diacritics", "strip_tatweel", "collapse_whitespace", "vocab"];
        for (key, (line, _)) in &header.values {
            if !COMMON.contains(key) && !allowed.contains(key) {
                return Err(Error::parse(*line, format!("key `{key}` does not belong to a {kind} model")));
            }
        }

        let max_word_len = header.number("max_word_len")?;
        let normalization = NormalizationOptions {
            strip_diacritics: header.flag("strip_diacritics")?,
            strip_tatweel: header.flag("strip_tatweel")?,
            collapse_whitespace: header.flag("collapse_whitespace")?,
        };

        let params = match kind {
            TokenizerKind::Stochastic => KindParams::Stochastic {
                seed: header.number("seed").map_err(|e| missing(kind, e))?,
                k_max: header.number::<usize>("k_max").map_err(|e| missing(kind, e))?,
            },
            TokenizerKind::Bpe => {
                let count: usize = header.number("merges").map_err(|e| missing(kind, e))?;
                let (first_line, body) = sections[1];
                if body.len() != count {
                    return Err(Error::Format(format!(
                        "header declares {count} merges but the merge section has {}",
                        body.len()
                    )));
                }
                let merges = body
                    .iter()
                    .enumerate()
                    .map(|(i, line)| {
                        let (l, r) = line
                            .split_once(' ')
                            .filter(|(l, r)| !l.is_empty() && !r.is_empty() && !r.contains(' '))
                            .ok_or_else(|| Error::parse(first_line + i, "malformed merge: expected `left right`"))?;
                        Ok((l.to_owned(), r.to_owned()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                KindParams::Bpe { merges }
            }
            TokenizerKind::Morphological => {
                let n_prefixes: usize = header.number("prefixes").map_err(|e| missing(kind, e))?;
                let n_suffixes: usize = header.number("suffixes").map_err(|e| missing(kind, e))?;
                let min_stem_len: usize = header.number("min_stem_len").map_err(|e| missing(kind, e))?;
                let (first_line, body) = sections[1];
                let mut prefixes = Vec::new();
                let mut suffixes = Vec::new();
                for (i, line) in body.iter().enumerate() {
                    match line.split_once('\t') {
                        Some(("prefix", a)) if suffixes.is_empty() => prefixes.push(a.to_owned()),
                        Some(("suffix", a)) => suffixes.push(a.to_owned()),
                        _ => {
                            return Err(Error::parse(
                                first_line + i,
                                "malformed affix: expected `prefix<TAB>affix` or `suffix<TAB>affix`",
                            ))
                        }
                    }
                }
                if prefixes.len() != n_prefixes || suffixes.len() != n_suffixes {
                    return Err(Error::Format(format!(
                        "header declares {n_prefixes} prefixes and {n_suffixes} suffixes, found {} and {}",
                        prefixes.len(),
                        suffixes.len()
                    )));
                }
                let affixes = AffixTables::new(prefixes, suffixes, min_stem_len)
                    .map_err(|e| Error::Format(e.to_string()))?;
                KindParams::Morphological { affixes }
            }
            _ => KindParams::None,
        };

        let (vocab_line, vocab_body) = sections[expected_sections - 1];
        let vocab_text: String = vocab_body.iter().flat_map(|l| [*l, "\n"]).collect();
        let vocab = Vocabulary::from_text(&vocab_text, vocab_line)?;
        let declared: usize = header.number("vocab")?;
        if declared != vocab.len() {
            return Err(Error::Format(format!(
                "header declares {declared} vocabulary tokens, found {}",
                vocab.len()
            )));
        }
        TokenizerModel::new(kind, vocab, max_word_len, normalization, params)
            .map_err(|e| Error::Format(e.to_string()))
    }
}

fn missing(kind: TokenizerKind, e: Error) -> Error {
    match e {
        Error::Format(m) => Error::Format(format!("{kind} model: {m}")),
        other => other,
    }
}

struct Header<'a> {
    values: BTreeMap<&'a str, (usize, &'a str)>,
}

impl<'a> Header<'a> {
    fn parse(lines: &[&'a str]) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in lines.iter().enumerate() {
            let lineno = i + 1;
            let (key, value) = line
                .split_once(" = ")
                .ok_or_else(|| Error::parse(lineno, "malformed header line: expected `key = value`"))?;
            if values.insert(key, (lineno, value)).is_some() {
                return Err(Error::parse(lineno, format!("duplicate header key `{key}`")));
            }
        }
        if lines.first().is_none_or(|l| !l.starts_with("kind = ")) {
            return Err(Error::Format("model file must start with a `kind = ...` line".into()));
        }
        Ok(Self { values })
    }

    fn require(&self, key: &str) -> Result<&'a str> {
        self.values
            .get(key)
            .map(|&(_, v)| v)
            .ok_or_else(|| Error::Format(format!("missing header key `{key}`")))
    }

    fn number<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let value = self.require(key)?;
        let line = self.values[key].0;
        value
            .parse()
            .map_err(|_| Error::parse(line, format!("`{key}` must be a non-negative integer, got {value:?}")))
    }

    fn flag(&self, key: &str) -> Result<bool> {
        let value = self.require(key)?;
        match value {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(Error::parse(self.values[key].0, format!("`{key}` must be true or false"))),
        }
    }
}
