//! Random-length n-gram sampling for the stochastic tokenizer.

use rand::Rng;

use crate::splitter::mark;

pub const DEFAULT_K_MAX: usize = 4;

/// All contiguous `k`-grams of `word`, marked after the first position.
pub fn ngrams(word: &str, k: usize) -> Vec<String> {
    let offsets: Vec<usize> = word
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(word.len()))
        .collect();
    let n = offsets.len() - 1;
    if k == 0 || k > n {
        return Vec::new();
    }
    (0..=n - k)
        .map(|i| mark(&word[offsets[i]..offsets[i + k]], i == 0))
        .collect()
}

/// Draws an n-gram length uniformly from `1..=min(|word|, k_max)`.
pub fn draw_ngram_len<R: Rng + ?Sized>(word: &str, k_max: usize, rng: &mut R) -> usize {
    let upper = word.chars().count().min(k_max).max(1);
    rng.gen_range(1..=upper)
}

pub fn generate_stochastic_ngrams<R: Rng + ?Sized>(
    word: &str,
    k_max: usize,
    rng: &mut R,
) -> Vec<String> {
    if word.is_empty() {
        return Vec::new();
    }
    ngrams(word, draw_ngram_len(word, k_max, rng))
}
