//! Best-split inference shared by the vocabulary-driven tokenizers.
//!
//! A word is cut into contiguous pieces; every piece after the first carries
//! the `##` continuation marker. Among the cuts whose pieces are all trained
//! entries, the one with the largest summed frequency wins, then the one with
//! fewer pieces, then the one whose split-point bitmask is smallest.

use std::collections::HashMap;
use std::sync::RwLock;

use crate::error::{Error, Result};
use crate::vocab::Vocabulary;

pub const MARKER: &str = "##";
pub const DEFAULT_MAX_WORD_LEN: usize = 20;

/// `piece` as it appears at position `first` or later in a word.
pub fn mark(piece: &str, first: bool) -> String {
    if first {
        piece.to_owned()
    } else {
        let mut s = String::with_capacity(MARKER.len() + piece.len());
        s.push_str(MARKER);
        s.push_str(piece);
        s
    }
}

pub fn is_continuation(token: &str) -> bool {
    token.starts_with(MARKER)
}

pub fn strip_marker(token: &str) -> &str {
    token.strip_prefix(MARKER).unwrap_or(token)
}

/// Ordered subword tokens of one word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Segmentation(Vec<String>);

impl Segmentation {
    /// Marks every piece after the first.
    pub fn from_pieces<S: AsRef<str>>(pieces: &[S]) -> Self {
        Self(pieces.iter().enumerate().map(|(i, p)| mark(p.as_ref(), i == 0)).collect())
    }

    /// Wraps tokens that are already in marked form.
    pub fn from_marked(tokens: Vec<String>) -> Self {
        Self(tokens)
    }

    pub fn whole(word: &str) -> Self {
        Self(vec![word.to_owned()])
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The word with markers stripped from continuation tokens.
    pub fn reconstruct(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.0.iter().enumerate() {
            out.push_str(if i == 0 { t } else { strip_marker(t) });
        }
        out
    }

    /// Summed entry frequency, or `None` if some token is not an entry.
    pub fn score(&self, vocab: &Vocabulary) -> Option<u64> {
        self.0.iter().map(|t| vocab.frequency(t)).sum()
    }
}

fn char_offsets(word: &str) -> Vec<usize> {
    word.char_indices().map(|(i, _)| i).chain(std::iter::once(word.len())).collect()
}

/// Every contiguous segmentation of `word`, ordered by split-point bitmask
/// ascending, where bit `i` means a cut after character `i`.
pub fn enumerate_segmentations(word: &str, max_len: usize) -> Result<Vec<Segmentation>> {
    let offsets = char_offsets(word);
    let n = offsets.len() - 1;
    if n > max_len {
        return Err(Error::OverLength { len: n, max: max_len });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let cuts = n - 1;
    let mut out = Vec::with_capacity(1 << cuts);
    for mask in 0u64..(1u64 << cuts) {
        let mut tokens = Vec::with_capacity(mask.count_ones() as usize + 1);
        let mut start = 0;
        for i in 0..cuts {
            if mask & (1 << i) != 0 {
                tokens.push(mark(&word[offsets[start]..offsets[i + 1]], start == 0));
                start = i + 1;
            }
        }
        tokens.push(mark(&word[offsets[start]..], start == 0));
        out.push(Segmentation(tokens));
    }
    Ok(out)
}

#[derive(Clone, Copy)]
struct Cell {
    score: u64,
    count: u32,
    prev: usize,
}

/// Dynamic program over prefix lengths.
///
/// For a fixed start of the last piece, the bitmask order on the whole word
/// reduces to the same order on the prefix, and among different starts the
/// smaller start (longer last piece) has the smaller mask. Scanning starts in
/// ascending order and keeping the first of equal candidates therefore
/// realises the enumeration tie-break exactly.
pub fn best_split_uncached(word: &str, vocab: &Vocabulary, max_len: usize) -> Option<Segmentation> {
    let offsets = char_offsets(word);
    let n = offsets.len() - 1;
    if n == 0 || n > max_len {
        return None;
    }
    let longest = vocab.max_entry_chars().max(1);
    let mut best: Vec<Option<Cell>> = vec![None; n + 1];
    best[0] = Some(Cell { score: 0, count: 0, prev: 0 });
    let mut buf = String::new();
    for j in 1..=n {
        let mut chosen: Option<Cell> = None;
        for i in j.saturating_sub(longest)..j {
            let Some(head) = best[i] else { continue };
            let piece = &word[offsets[i]..offsets[j]];
            let freq = if i == 0 {
                vocab.frequency(piece)
            } else {
                buf.clear();
                buf.push_str(MARKER);
                buf.push_str(piece);
                vocab.frequency(&buf)
            };
            let Some(freq) = freq else { continue };
            let cand = Cell { score: head.score + freq, count: head.count + 1, prev: i };
            let better = match chosen {
                None => true,
                Some(c) => cand.score > c.score || (cand.score == c.score && cand.count < c.count),
            };
            if better {
                chosen = Some(cand);
            }
        }
        best[j] = chosen;
    }
    best[n]?;
    let mut cuts = Vec::new();
    let mut j = n;
    while j > 0 {
        let prev = best[j].expect("reachable cell").prev;
        cuts.push((prev, j));
        j = prev;
    }
    cuts.reverse();
    Some(Segmentation(
        cuts.into_iter()
            .map(|(i, j)| mark(&word[offsets[i]..offsets[j]], i == 0))
            .collect(),
    ))
}

/// Memo of best splits for one vocabulary. Shared readers, exclusive writers.
#[derive(Debug, Default)]
pub struct SplitCache {
    map: RwLock<HashMap<String, Option<Segmentation>>>,
}

impl SplitCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, word: &str) -> Option<Option<Segmentation>> {
        self.map.read().expect("split cache poisoned").get(word).cloned()
    }

    pub fn insert(&self, word: &str, result: Option<Segmentation>) {
        self.map
            .write()
            .expect("split cache poisoned")
            .entry(word.to_owned())
            .or_insert(result);
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("split cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        self.map.write().expect("split cache poisoned").clear();
    }
}

impl Clone for SplitCache {
    fn clone(&self) -> Self {
        let map = self.map.read().expect("split cache poisoned").clone();
        Self { map: RwLock::new(map) }
    }
}

/// Cached [`best_split_uncached`]. `None` means the word is unknown.
pub fn best_split(
    word: &str,
    vocab: &Vocabulary,
    cache: &SplitCache,
    max_len: usize,
) -> Option<Segmentation> {
    if let Some(hit) = cache.get(word) {
        return hit;
    }
    let result = best_split_uncached(word, vocab, max_len);
    cache.insert(word, result.clone());
    result
}
