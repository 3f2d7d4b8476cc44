//! Unsupervised evaluation: compression factor and training/encoding speed.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{iter_words, normalize, CorpusText};
use crate::error::{Error, Result};
use crate::tokenizers::{train, TokenizerKind, TokenizerModel, TrainOptions, WordTokens};
use crate::vocab::UNK;

/// Tokens charged for one word. An unknown word costs its length plus one.
/// Each `<unk>` standing in for a single character costs two, and no word
/// costs more than it would as a whole unknown.
pub fn token_cost(word: &str, result: &WordTokens) -> u64 {
    let unknown_cost = word.chars().count() as u64 + 1;
    match result {
        WordTokens::Unknown => unknown_cost,
        WordTokens::Pieces(seg) => {
            let unks = seg.tokens().iter().filter(|t| *t == UNK).count() as u64;
            (seg.len() as u64 + unks).min(unknown_cost)
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub total_token_cost: u64,
    /// Non-whitespace characters.
    pub total_chars: u64,
    pub total_words: u64,
}

impl CompressionReport {
    /// `total_token_cost / (total_chars + total_words)`; zero for an empty corpus.
    pub fn factor(&self) -> f64 {
        let denom = self.total_chars + self.total_words;
        if denom == 0 {
            0.0
        } else {
            self.total_token_cost as f64 / denom as f64
        }
    }

    fn add(self, other: Self) -> Self {
        Self {
            total_token_cost: self.total_token_cost + other.total_token_cost,
            total_chars: self.total_chars + other.total_chars,
            total_words: self.total_words + other.total_words,
        }
    }
}

fn line_cost(model: &TokenizerModel, line: &str) -> CompressionReport {
    let line = normalize(line, model.normalization());
    let mut r = CompressionReport::default();
    for word in iter_words(&line) {
        r.total_words += 1;
        r.total_chars += word.chars().count() as u64;
        r.total_token_cost += token_cost(word, &model.tokenize_word(word));
    }
    r
}

/// Streams `text` through the model line by line, in parallel.
pub fn compression_of_text(model: &TokenizerModel, text: &str) -> CompressionReport {
    text.par_lines()
        .map(|line| line_cost(model, line))
        .reduce(CompressionReport::default, CompressionReport::add)
}

pub fn compression_factor(model: &TokenizerModel, corpus_path: impl AsRef<Path>) -> Result<CompressionReport> {
    let text = CorpusText::open(corpus_path)?;
    Ok(compression_of_text(model, &text))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Training,
    Encoding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedReport {
    pub phase: Phase,
    /// Median over `timings`.
    pub wall_seconds: f64,
    pub corpus_bytes: u64,
    pub timings: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct BenchOptions {
    pub repetitions: usize,
    /// Threads available inside the timed region.
    pub threads: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self { repetitions: 3, threads: 1 }
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    match n {
        0 => 0.0,
        _ if n % 2 == 1 => v[n / 2],
        _ => (v[n / 2 - 1] + v[n / 2]) / 2.0,
    }
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))
}

fn check_repetitions(bench: &BenchOptions) -> Result<()> {
    if bench.repetitions == 0 {
        return Err(Error::Config("repetitions must be at least 1".into()));
    }
    Ok(())
}

fn corpus_bytes(path: &Path) -> Result<u64> {
    Ok(std::fs::metadata(path).map_err(|e| Error::io(path, e))?.len())
}

/// Times full training runs, corpus scan included.
pub fn benchmark_train(
    kind: TokenizerKind,
    corpus_path: impl AsRef<Path>,
    vocab_size: usize,
    options: &TrainOptions,
    bench: &BenchOptions,
) -> Result<SpeedReport> {
    check_repetitions(bench)?;
    let path = corpus_path.as_ref();
    let pool = pool(bench.threads)?;
    let mut timings = Vec::with_capacity(bench.repetitions);
    for _ in 0..bench.repetitions {
        let start = Instant::now();
        let model = pool.install(|| train(kind, path, vocab_size, options))?;
        timings.push(start.elapsed().as_secs_f64());
        drop(model);
    }
    Ok(SpeedReport {
        phase: Phase::Training,
        wall_seconds: median(&timings),
        corpus_bytes: corpus_bytes(path)?,
        timings,
    })
}

/// Times encoding every corpus line with a cold split cache. The corpus is
/// mapped before the clock starts.
pub fn benchmark_encode(
    model: &TokenizerModel,
    corpus_path: impl AsRef<Path>,
    bench: &BenchOptions,
) -> Result<SpeedReport> {
    check_repetitions(bench)?;
    let path = corpus_path.as_ref();
    let text = CorpusText::open(path)?;
    let pool = pool(bench.threads)?;
    let mut timings = Vec::with_capacity(bench.repetitions);
    for _ in 0..bench.repetitions {
        model.clear_cache();
        let start = Instant::now();
        let ids: usize = pool.install(|| text.lines().map(|l| model.encode(l).len()).sum());
        timings.push(start.elapsed().as_secs_f64());
        std::hint::black_box(ids);
    }
    Ok(SpeedReport {
        phase: Phase::Encoding,
        wall_seconds: median(&timings),
        corpus_bytes: text.len() as u64,
        timings,
    })
}
