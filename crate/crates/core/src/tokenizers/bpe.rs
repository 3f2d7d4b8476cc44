//! Frequency-based byte pair encoding over whitespace-delimited words.
//!
//! Words start as character sequences in marked form. The trainer keeps pair
//! counts incrementally with an index from pair to the words containing it and
//! a lazily invalidated max-heap, so a merge only touches the affected words.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};

use crate::corpus::FrequencyTable;
use crate::error::{Error, Result};
use crate::splitter::{mark, strip_marker, Segmentation};
use crate::vocab::{Vocabulary, UNK};

pub type Merge = (String, String);

/// Token produced by merging `left` with the continuation token `right`.
pub fn merged_token(left: &str, right: &str) -> String {
    let mut s = String::with_capacity(left.len() + right.len());
    s.push_str(left);
    s.push_str(strip_marker(right));
    s
}

#[derive(Default)]
struct Interner {
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Interner {
    fn intern(&mut self, token: String) -> (u32, bool) {
        if let Some(&id) = self.ids.get(&token) {
            return (id, false);
        }
        let id = self.tokens.len() as u32;
        self.ids.insert(token.clone(), id);
        self.tokens.push(token);
        (id, true)
    }
}

#[derive(PartialEq, Eq)]
struct Candidate {
    count: u64,
    pair: (u32, u32),
    left: String,
    right: String,
}

impl Ord for Candidate {
    // Highest count first, then the lexicographically smallest pair.
    fn cmp(&self, other: &Self) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| other.left.cmp(&self.left))
            .then_with(|| other.right.cmp(&self.right))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

type PairCounts = HashMap<(u32, u32), u64>;

fn add_pairs(symbols: &[u32], weight: u64, counts: &mut PairCounts, touched: &mut HashSet<(u32, u32)>) {
    for w in symbols.windows(2) {
        *counts.entry((w[0], w[1])).or_insert(0) += weight;
        touched.insert((w[0], w[1]));
    }
}

fn remove_pairs(symbols: &[u32], weight: u64, counts: &mut PairCounts, touched: &mut HashSet<(u32, u32)>) {
    for w in symbols.windows(2) {
        let pair = (w[0], w[1]);
        if let Some(c) = counts.get_mut(&pair) {
            *c -= weight;
            if *c == 0 {
                counts.remove(&pair);
            }
        }
        touched.insert(pair);
    }
}

/// Replaces every non-overlapping occurrence of `pair`, scanning left to right.
fn apply_merge(symbols: &[u32], pair: (u32, u32), product: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(symbols.len());
    let mut i = 0;
    while i < symbols.len() {
        if i + 1 < symbols.len() && symbols[i] == pair.0 && symbols[i + 1] == pair.1 {
            out.push(product);
            i += 2;
        } else {
            out.push(symbols[i]);
            i += 1;
        }
    }
    out
}

/// Learns merges until the vocabulary holds `target_vocab_size` tokens
/// (specials included) or no adjacent pair occurs at least twice.
///
/// The vocabulary holds every character in both marked and unmarked form,
/// weighted by the character's corpus frequency, plus every merge product
/// weighted by the pair count at the time of its merge.
pub fn learn_bpe_merges<S: AsRef<str>>(
    word_freqs: &FrequencyTable,
    target_vocab_size: usize,
    specials: &[S],
) -> Result<(Vec<Merge>, Vocabulary)> {
    if word_freqs.is_empty() {
        return Err(Error::Config("cannot learn merges from an empty frequency table".into()));
    }
    let words_sorted = word_freqs.sorted_by_token();

    let mut char_freq: HashMap<char, u64> = HashMap::new();
    for (word, f) in &words_sorted {
        for c in word.chars() {
            *char_freq.entry(c).or_insert(0) += f;
        }
    }
    let mut alphabet: Vec<(char, u64)> = char_freq.into_iter().collect();
    alphabet.sort_unstable();

    let floor = specials.len() + 2 * alphabet.len();
    if target_vocab_size < floor {
        return Err(Error::Config(format!(
            "vocab size {target_vocab_size} is below the {} specials plus {} alphabet tokens",
            specials.len(),
            2 * alphabet.len()
        )));
    }

    let mut interner = Interner::default();
    let mut freq: Vec<u64> = Vec::new();
    let mut buf = [0u8; 4];
    for &(c, f) in &alphabet {
        for first in [true, false] {
            interner.intern(mark(c.encode_utf8(&mut buf), first));
            freq.push(f);
        }
    }

    let mut words: Vec<(Vec<u32>, u64)> = words_sorted
        .iter()
        .map(|(w, f)| {
            let symbols = w
                .chars()
                .enumerate()
                .map(|(i, c)| interner.ids[&mark(c.encode_utf8(&mut buf), i == 0)])
                .collect();
            (symbols, *f)
        })
        .collect();

    let mut counts: PairCounts = HashMap::new();
    let mut index: HashMap<(u32, u32), HashSet<usize>> = HashMap::new();
    let mut touched = HashSet::new();
    for (wi, (symbols, f)) in words.iter().enumerate() {
        add_pairs(symbols, *f, &mut counts, &mut touched);
        for w in symbols.windows(2) {
            index.entry((w[0], w[1])).or_default().insert(wi);
        }
    }

    let candidate = |pair: (u32, u32), count: u64, interner: &Interner| Candidate {
        count,
        pair,
        left: interner.tokens[pair.0 as usize].clone(),
        right: interner.tokens[pair.1 as usize].clone(),
    };
    let mut heap: BinaryHeap<Candidate> = counts
        .iter()
        .map(|(&pair, &count)| candidate(pair, count, &interner))
        .collect();

    let mut merges = Vec::new();
    let mut vocab_len = specials.len() + interner.tokens.len();
    while vocab_len < target_vocab_size {
        let Some(top) = heap.pop() else { break };
        let current = counts.get(&top.pair).copied().unwrap_or(0);
        if current != top.count {
            if current > 0 {
                heap.push(candidate(top.pair, current, &interner));
            }
            continue;
        }
        if current < 2 {
            break;
        }

        let (product, fresh) = interner.intern(merged_token(&top.left, &top.right));
        if fresh {
            freq.push(current);
            vocab_len += 1;
        } else {
            let f = &mut freq[product as usize];
            *f = (*f).max(current);
        }
        merges.push((top.left, top.right));

        touched.clear();
        let mut affected: Vec<usize> = index.get(&top.pair).map(|s| s.iter().copied().collect()).unwrap_or_default();
        affected.sort_unstable();
        for wi in affected {
            let (symbols, f) = &mut words[wi];
            let merged = apply_merge(symbols, top.pair, product);
            if merged.len() == symbols.len() {
                continue;
            }
            remove_pairs(symbols, *f, &mut counts, &mut touched);
            add_pairs(&merged, *f, &mut counts, &mut touched);
            for w in merged.windows(2) {
                index.entry((w[0], w[1])).or_default().insert(wi);
            }
            *symbols = merged;
        }
        for &pair in &touched {
            if let Some(&c) = counts.get(&pair) {
                heap.push(candidate(pair, c, &interner));
            }
        }
    }

    let table: FrequencyTable = interner
        .tokens
        .iter()
        .zip(&freq)
        .map(|(t, &f)| (t.as_str(), f))
        .collect();
    let vocab = Vocabulary::build(&table, target_vocab_size, specials)?;
    Ok((merges, vocab))
}

/// Applies a learned merge list to single words.
#[derive(Debug, Clone)]
pub struct BpeEncoder {
    ranks: HashMap<(u32, u32), (usize, u32)>,
}

impl BpeEncoder {
    /// Every merge operand and product must be a vocabulary entry.
    pub fn new(merges: &[Merge], vocab: &Vocabulary) -> Result<Self> {
        let mut ranks = HashMap::with_capacity(merges.len());
        for (rank, (left, right)) in merges.iter().enumerate() {
            let lookup = |t: &str| {
                vocab
                    .get_id(t)
                    .filter(|_| vocab.contains_entry(t))
                    .ok_or_else(|| Error::Format(format!("merge {} token {t:?} is not in the vocabulary", rank + 1)))
            };
            let pair = (lookup(left)?, lookup(right)?);
            let product = lookup(&merged_token(left, right))?;
            ranks.entry(pair).or_insert((rank, product));
        }
        Ok(Self { ranks })
    }

    /// Characters missing from the vocabulary become `<unk>` and block merges.
    pub fn encode_word(&self, word: &str, vocab: &Vocabulary) -> Segmentation {
        let mut buf = [0u8; 4];
        let mut symbols: Vec<Option<u32>> = word
            .chars()
            .enumerate()
            .map(|(i, c)| {
                let tok = mark(c.encode_utf8(&mut buf), i == 0);
                vocab.get_id(&tok).filter(|_| vocab.contains_entry(&tok))
            })
            .collect();
        loop {
            let best = symbols
                .windows(2)
                .filter_map(|w| match (w[0], w[1]) {
                    (Some(a), Some(b)) => self.ranks.get(&(a, b)).map(|&(r, p)| (r, (a, b), p)),
                    _ => None,
                })
                .min_by_key(|&(r, _, _)| r);
            let Some((_, pair, product)) = best else { break };
            let mut out = Vec::with_capacity(symbols.len());
            let mut i = 0;
            while i < symbols.len() {
                if i + 1 < symbols.len() && symbols[i] == Some(pair.0) && symbols[i + 1] == Some(pair.1) {
                    out.push(Some(product));
                    i += 2;
                } else {
                    out.push(symbols[i]);
                    i += 1;
                }
            }
            symbols = out;
        }
        Segmentation::from_marked(
            symbols
                .into_iter()
                .map(|s| match s {
                    Some(id) => vocab.token_of(id).expect("id from vocabulary").to_owned(),
                    None => UNK.to_owned(),
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::DEFAULT_SPECIALS;
    use proptest::prelude::*;

    fn table(pairs: &[(&str, u64)]) -> FrequencyTable {
        pairs.iter().copied().collect()
    }

    fn entry_tokens(v: &Vocabulary) -> Vec<&str> {
        let mut t: Vec<&str> = v.entries().iter().map(|(t, _)| t.as_str()).collect();
        t.sort_unstable();
        t
    }

    #[test]
    fn single_dominant_pair() {
        // Alphabet is {ا, ##ا, ب, ##ب}; one more slot allows one merge.
        let (merges, vocab) = learn_bpe_merges(&table(&[("اب", 10)]), 2 + 4 + 1, &DEFAULT_SPECIALS).unwrap();
        assert_eq!(merges, vec![("ا".to_string(), "##ب".to_string())]);
        assert_eq!(vocab.frequency("اب"), Some(10));
    }

    #[test]
    fn alphabet_floor() {
        let t = table(&[("اب", 5), ("اج", 5)]);
        let (merges, vocab) = learn_bpe_merges(&t, 2 + 6, &DEFAULT_SPECIALS).unwrap();
        assert!(merges.is_empty());
        assert_eq!(entry_tokens(&vocab), ["##ا", "##ب", "##ج", "ا", "ب", "ج"]);
        assert!(learn_bpe_merges(&t, 2 + 5, &DEFAULT_SPECIALS).is_err());
    }

    #[test]
    fn empty_table_is_rejected() {
        assert!(learn_bpe_merges(&FrequencyTable::new(), 100, &DEFAULT_SPECIALS).is_err());
    }

    #[test]
    fn ties_break_on_pair_order() {
        // ("ا","##ب") and ("ج","##د") both occur 3 times.
        let t = table(&[("جد", 3), ("اب", 3)]);
        let (merges, _) = learn_bpe_merges(&t, 2 + 8 + 1, &DEFAULT_SPECIALS).unwrap();
        assert_eq!(merges, vec![("ا".to_string(), "##ب".to_string())]);
    }

    #[test]
    fn stops_when_no_pair_repeats() {
        let t = table(&[("abc", 1), ("de", 1)]);
        let (merges, _) = learn_bpe_merges(&t, 1000, &DEFAULT_SPECIALS).unwrap();
        assert!(merges.is_empty());
    }

    #[test]
    fn repeated_symbols_merge_without_overlap() {
        // (##a, ##a) occurs twice per word and goes first; the second merge is
        // a tie between (a, ##aa) and (##aa, ##a), won by "##aa" < "a".
        let t = table(&[("aaaa", 4)]);
        let (merges, vocab) = learn_bpe_merges(&t, 2 + 2 + 2, &DEFAULT_SPECIALS).unwrap();
        assert_eq!(
            merges,
            [("##a".to_string(), "##a".to_string()), ("##aa".to_string(), "##a".to_string())]
        );
        let enc = BpeEncoder::new(&merges, &vocab).unwrap();
        assert_eq!(enc.encode_word("aaaa", &vocab).into_tokens(), ["a", "##aaa"]);
        assert_eq!(enc.encode_word("aaaaa", &vocab).into_tokens(), ["a", "##aa", "##aa"]);
    }

    #[test]
    fn unknown_characters_block_merges() {
        let (merges, vocab) = learn_bpe_merges(&table(&[("اب", 10)]), 7, &DEFAULT_SPECIALS).unwrap();
        let enc = BpeEncoder::new(&merges, &vocab).unwrap();
        assert_eq!(enc.encode_word("اب", &vocab).into_tokens(), ["اب"]);
        assert_eq!(enc.encode_word("اxب", &vocab).into_tokens(), ["ا", UNK, "##ب"]);
        assert_eq!(enc.encode_word("باب", &vocab).into_tokens(), ["ب", "##ا", "##ب"]);
    }

    #[test]
    fn encoder_rejects_foreign_merges() {
        let (_, vocab) = learn_bpe_merges(&table(&[("اب", 10)]), 6, &DEFAULT_SPECIALS).unwrap();
        let merges = vec![("ا".to_string(), "##ب".to_string())];
        assert!(BpeEncoder::new(&merges, &vocab).is_err());
    }

    /// Replays merges one at a time over the whole sequence, the way training
    /// applies them, independently of the rank-driven encoder.
    fn replay(word: &str, merges: &[Merge]) -> Vec<String> {
        let mut seq: Vec<String> =
            word.chars().enumerate().map(|(i, c)| mark(&c.to_string(), i == 0)).collect();
        for (l, r) in merges {
            let mut out = Vec::new();
            let mut i = 0;
            while i < seq.len() {
                if i + 1 < seq.len() && &seq[i] == l && &seq[i + 1] == r {
                    out.push(merged_token(l, r));
                    i += 2;
                } else {
                    out.push(seq[i].clone());
                    i += 1;
                }
            }
            seq = out;
        }
        seq
    }

    proptest! {
        #[test]
        fn merges_close_over_training_words(
            words in proptest::collection::hash_map("[abcd]{1,7}", 1u64..6, 1..25),
            extra in 0usize..40,
        ) {
            let t: FrequencyTable = words.iter().map(|(w, f)| (w.as_str(), *f)).collect();
            let alphabet: HashSet<char> = words.keys().flat_map(|w| w.chars()).collect();
            let target = 2 + 2 * alphabet.len() + extra;
            let (merges, vocab) = learn_bpe_merges(&t, target, &DEFAULT_SPECIALS).unwrap();
            prop_assert!(vocab.len() <= target);
            let enc = BpeEncoder::new(&merges, &vocab).unwrap();
            for w in words.keys() {
                let replayed = replay(w, &merges);
                for tok in &replayed {
                    prop_assert!(vocab.contains_entry(tok), "{} not in vocab", tok);
                }
                let seg = enc.encode_word(w, &vocab);
                prop_assert_eq!(seg.tokens(), &replayed[..]);
                prop_assert_eq!(seg.reconstruct(), w.clone());
            }
        }
    }
}
