//! Corpus ingestion: normalization, word splitting and parallel frequency counting.
//!
//! Large files are memory-mapped and cut into byte ranges that are scanned on
//! the rayon pool. Every range is extended forward to the next whitespace
//! character, so a word is never split across two ranges and the merged table
//! is independent of the chunk size and the number of threads.

use std::borrow::Cow;
use std::collections::HashMap;
use std::fs::File;
use std::ops::{Deref, Range};
use std::path::Path;

use memmap2::Mmap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default byte length of one scan range.
pub const DEFAULT_CHUNK_SIZE: usize = 4 << 20;

const TATWEEL: char = '\u{0640}';

/// Arabic harakat, tanween, shadda, sukun and the other combining marks in
/// U+064B..U+065F, plus the superscript alef U+0670.
pub fn is_diacritic(c: char) -> bool {
    matches!(c, '\u{064B}'..='\u{065F}' | '\u{0670}')
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NormalizationOptions {
    pub strip_diacritics: bool,
    pub strip_tatweel: bool,
    /// Turn every whitespace run into one space and trim both ends.
    pub collapse_whitespace: bool,
}

impl NormalizationOptions {
    pub const NONE: Self = Self {
        strip_diacritics: false,
        strip_tatweel: false,
        collapse_whitespace: false,
    };

    pub const ALL: Self = Self {
        strip_diacritics: true,
        strip_tatweel: true,
        collapse_whitespace: true,
    };

    fn drops(&self, c: char) -> bool {
        (self.strip_diacritics && is_diacritic(c)) || (self.strip_tatweel && c == TATWEEL)
    }

    fn is_noop_for(&self, text: &str) -> bool {
        if self.collapse_whitespace {
            return false;
        }
        !text.chars().any(|c| self.drops(c))
    }
}

/// Applies `options` to `text`. Borrows when nothing would change.
pub fn normalize<'a>(text: &'a str, options: &NormalizationOptions) -> Cow<'a, str> {
    if options.is_noop_for(text) {
        return Cow::Borrowed(text);
    }
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        if options.drops(c) {
            continue;
        }
        if options.collapse_whitespace && c.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        out.push(c);
    }
    if out == text {
        Cow::Borrowed(text)
    } else {
        Cow::Owned(out)
    }
}

/// Maximal runs of non-whitespace characters, in order.
pub fn iter_words(text: &str) -> impl Iterator<Item = &str> {
    text.split_whitespace()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    /// Whitespace-delimited words.
    pub word_count: u64,
    pub unique_word_count: u64,
    /// Non-whitespace characters.
    pub char_count: u64,
}

/// Token to frequency mapping. Frequencies are always positive and the empty
/// string is never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    entries: HashMap<String, u64>,
}

impl FrequencyTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `count` occurrences of `token`. Empty tokens and zero counts are ignored.
    pub fn add(&mut self, token: &str, count: u64) {
        if token.is_empty() || count == 0 {
            return;
        }
        match self.entries.get_mut(token) {
            Some(f) => *f += count,
            None => {
                self.entries.insert(token.to_owned(), count);
            }
        }
    }

    pub fn add_owned(&mut self, token: String, count: u64) {
        if token.is_empty() || count == 0 {
            return;
        }
        *self.entries.entry(token).or_insert(0) += count;
    }

    pub fn get(&self, token: &str) -> Option<u64> {
        self.entries.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of all frequencies.
    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.entries.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Entries ordered by frequency descending, then token ascending.
    pub fn sorted(&self) -> Vec<(&str, u64)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }

    /// Entries ordered by token ascending.
    pub fn sorted_by_token(&self) -> Vec<(&str, u64)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_unstable_by(|a, b| a.0.cmp(b.0));
        v
    }

    pub fn merge(&mut self, other: FrequencyTable) {
        if self.entries.len() < other.entries.len() {
            let mine = std::mem::replace(&mut self.entries, other.entries);
            for (k, v) in mine {
                *self.entries.entry(k).or_insert(0) += v;
            }
        } else {
            for (k, v) in other.entries {
                *self.entries.entry(k).or_insert(0) += v;
            }
        }
    }
}

impl<S: AsRef<str>> FromIterator<(S, u64)> for FrequencyTable {
    fn from_iter<I: IntoIterator<Item = (S, u64)>>(iter: I) -> Self {
        let mut table = FrequencyTable::new();
        for (token, count) in iter {
            table.add(token.as_ref(), count);
        }
        table
    }
}

/// A read-only, validated UTF-8 view of a corpus file.
pub struct CorpusText {
    map: Option<Mmap>,
}

impl CorpusText {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let len = file.metadata().map_err(|e| Error::io(path, e))?.len();
        if len == 0 {
            return Ok(Self { map: None });
        }
        // SAFETY: the mapping is read-only and the corpus is not expected to be
        // modified while it is being read.
        let map = unsafe { Mmap::map(&file) }.map_err(|e| Error::io(path, e))?;
        if let Err(e) = std::str::from_utf8(&map) {
            return Err(Error::InvalidUtf8 { path: path.to_owned(), offset: e.valid_up_to() });
        }
        Ok(Self { map: Some(map) })
    }

    pub fn as_str(&self) -> &str {
        match &self.map {
            // SAFETY: validated in `open`.
            Some(map) => unsafe { std::str::from_utf8_unchecked(map) },
            None => "",
        }
    }
}

impl Deref for CorpusText {
    type Target = str;

    fn deref(&self) -> &str {
        self.as_str()
    }
}

/// Cuts `text` into ranges of roughly `chunk_size` bytes. Each range ends at
/// a whitespace character or at the end of the text.
pub fn chunk_ranges(text: &str, chunk_size: usize) -> Vec<Range<usize>> {
    let chunk_size = chunk_size.max(1);
    let bytes = text.len();
    let mut ranges = Vec::with_capacity(bytes / chunk_size + 1);
    let mut start = 0;
    while start < bytes {
        let mut end = (start + chunk_size).min(bytes);
        while !text.is_char_boundary(end) {
            end += 1;
        }
        if let Some(offset) = text[end..].find(char::is_whitespace) {
            end += offset;
        } else {
            end = bytes;
        }
        ranges.push(start..end);
        start = end;
    }
    ranges
}

fn scan_chunk(chunk: &str, options: &NormalizationOptions) -> (FrequencyTable, u64, u64) {
    let text = normalize(chunk, options);
    let mut table = FrequencyTable::new();
    let mut words = 0u64;
    let mut chars = 0u64;
    for word in iter_words(&text) {
        words += 1;
        chars += word.chars().count() as u64;
        table.add(word, 1);
    }
    (table, words, chars)
}

/// Counts the words of an in-memory text using `chunk_size`-byte ranges.
pub fn scan_text(
    text: &str,
    options: &NormalizationOptions,
    chunk_size: usize,
) -> (FrequencyTable, CorpusStats) {
    let (table, word_count, char_count) = chunk_ranges(text, chunk_size)
        .into_par_iter()
        .map(|r| scan_chunk(&text[r], options))
        .reduce(
            || (FrequencyTable::new(), 0, 0),
            |mut a, b| {
                a.0.merge(b.0);
                (a.0, a.1 + b.1, a.2 + b.2)
            },
        );
    let stats = CorpusStats {
        word_count,
        unique_word_count: table.len() as u64,
        char_count,
    };
    (table, stats)
}

pub fn scan_corpus(
    path: impl AsRef<Path>,
    options: &NormalizationOptions,
) -> Result<(FrequencyTable, CorpusStats)> {
    scan_corpus_chunked(path, options, DEFAULT_CHUNK_SIZE)
}

pub fn scan_corpus_chunked(
    path: impl AsRef<Path>,
    options: &NormalizationOptions,
    chunk_size: usize,
) -> Result<(FrequencyTable, CorpusStats)> {
    let text = CorpusText::open(path)?;
    Ok(scan_text(&text, options, chunk_size))
}
