//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use tokseem::corpus::scan_corpus_chunked;
use tokseem::evaluation::{benchmark_encode, benchmark_train, compression_factor, compression_of_text};
use tokseem::splitter::best_split_uncached;
use tokseem::tokenizers::{segment_affixes, segment_character, segment_disjoint};
use tokseem::vocab::DEFAULT_SPECIALS;
use tokseem::{
    detokenize, normalize, scan_corpus, train, train_from_table, AffixTables, BenchOptions, FrequencyTable,
    NormalizationOptions, TokenizerKind, TokenizerModel, TrainOptions, Vocabulary,
};

const ORACLE_INSTANCES: usize = 2_000;
const ORACLE_MAX_CHARS: usize = 8;
const ORACLE_TIME_LIMIT: Duration = Duration::from_secs(60);
const CORPUS_MIN_BYTES: usize = 10 * 1024 * 1024;
const ORDERING_VOCAB: usize = 10_000;
const ORDERING_TIME_LIMIT: Duration = Duration::from_secs(15 * 60);
const SPEED_REPETITIONS: usize = 3;
const ROUND_TRIP_LINES: usize = 10_000;
const DETERMINISM_SEED: u64 = 7;
const SMALL_CHUNK: usize = 1024;
const LARGE_CHUNK: usize = 64 << 20;
const AJGT_WORDS: u64 = 11_689;
const AJGT_UNIQUE: u64 = 6_453;
/// Boundary factors must match exactly.
const FACTOR_EPS: f64 = 0.0;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

struct Suite {
    failed: usize,
}

impl Suite {
    fn report(&mut self, id: usize, name: &str, outcome: Outcome) {
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                self.failed += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("{tag} [{id}] {name}: {detail}");
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

// ---------------------------------------------------------------------------
// 1. DP split versus exhaustive enumeration

/// Best (score, token count) over every segmentation, by brute force.
fn exhaustive_best(chars: &[char], vocab: &Vocabulary) -> Option<(u64, usize)> {
    fn go(chars: &[char], start: usize, vocab: &Vocabulary, acc: (u64, usize), best: &mut Option<(u64, usize)>) {
        if start == chars.len() {
            let better = match *best {
                None => true,
                Some((s, n)) => acc.0 > s || (acc.0 == s && acc.1 < n),
            };
            if better {
                *best = Some(acc);
            }
            return;
        }
        for end in start + 1..=chars.len() {
            let piece: String = chars[start..end].iter().collect();
            let token = if start == 0 { piece } else { format!("##{piece}") };
            if let Some(f) = vocab.frequency(&token) {
                go(chars, end, vocab, (acc.0 + f, acc.1 + 1), best);
            }
        }
    }
    let mut best = None;
    go(chars, 0, vocab, (0, 0), &mut best);
    best
}

fn criterion_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let alphabet: Vec<char> = "ابتثج".chars().collect();
    let start = Instant::now();
    for i in 0..ORACLE_INSTANCES {
        let sigma = rng.gen_range(2..=alphabet.len());
        let mut table = FrequencyTable::new();
        for _ in 0..rng.gen_range(1..30) {
            let len = rng.gen_range(1..=4);
            let piece: String = (0..len).map(|_| alphabet[rng.gen_range(0..sigma)]).collect();
            let token = if rng.gen_bool(0.5) { format!("##{piece}") } else { piece };
            table.add(&token, rng.gen_range(1..50));
        }
        let vocab = Vocabulary::build(&table, table.len() + DEFAULT_SPECIALS.len(), &DEFAULT_SPECIALS).unwrap();
        let len = rng.gen_range(1..=ORACLE_MAX_CHARS);
        let chars: Vec<char> = (0..len).map(|_| alphabet[rng.gen_range(0..sigma)]).collect();
        let word: String = chars.iter().collect();

        let expected = exhaustive_best(&chars, &vocab);
        let got = best_split_uncached(&word, &vocab, ORACLE_MAX_CHARS).map(|seg| {
            assert_eq!(seg.reconstruct(), word);
            (seg.score(&vocab).expect("all pieces in vocab"), seg.len())
        });
        if got != expected {
            return Outcome::Fail(format!("instance {i} word {word:?}: dp {got:?} vs exhaustive {expected:?}"));
        }
    }
    let elapsed = start.elapsed();
    check(
        elapsed < ORACLE_TIME_LIMIT,
        format!("{ORACLE_INSTANCES} instances agree on score and token count in {:.2}s", elapsed.as_secs_f64()),
    )
}

// ---------------------------------------------------------------------------
// 2. Fixed segmentation examples

fn criterion_examples() -> Outcome {
    let affixes = AffixTables::default();
    let cases: [(&str, Vec<String>, &[&str]); 4] = [
        ("disjoint زورق", segment_disjoint("زورق").into_tokens(), &["ز", "##و", "##ر", "##ق"]),
        ("disjoint أحلام", segment_disjoint("أحلام").into_tokens(), &["أ", "##حلا", "##م"]),
        ("affixes الشباب", segment_affixes("الشباب", &affixes).into_tokens(), &["ال", "##شباب"]),
        ("character في", segment_character("في").into_tokens(), &["ف", "##ي"]),
    ];
    let mismatches: Vec<String> = cases
        .iter()
        .filter(|(_, got, want)| got != want)
        .map(|(name, got, want)| format!("{name}: got {got:?}, want {want:?}"))
        .collect();
    check(mismatches.is_empty(), if mismatches.is_empty() { "4/4 exact".into() } else { mismatches.join("; ") })
}

// ---------------------------------------------------------------------------
// Synthetic corpus: root-and-pattern words with clitics, Zipf-distributed.

const LETTERS: &str = "بتثجحخدذرزسشصضطظعغفقكلمنهوي";
const PATTERNS: [&str; 14] = [
    "123", "1ا23", "12ي3", "م123", "12ا3", "ت123", "1ا2و3", "م12و3", "است123", "ي123", "ت1ا23", "ا12ا3", "م1ا23", "ن123",
];
const PREFIXES: [(&str, u32); 9] =
    [("", 40), ("ال", 25), ("و", 8), ("وال", 6), ("ب", 5), ("بال", 5), ("ل", 4), ("لل", 3), ("ف", 2)];
const SUFFIXES: [(&str, u32); 12] = [
    ("", 45), ("ة", 14), ("ات", 7), ("ون", 5), ("ين", 5), ("ها", 5), ("هم", 4), ("ي", 4), ("ك", 3), ("نا", 3),
    ("ان", 3), ("تها", 2),
];
const LEXICON_SIZE: usize = 250_000;
const ROOTS: usize = 4_000;

fn weighted<'a>(items: &'a [(&'a str, u32)], rng: &mut ChaCha8Rng) -> &'a str {
    let total: u32 = items.iter().map(|(_, w)| w).sum();
    let mut x = rng.gen_range(0..total);
    for (s, w) in items {
        if x < *w {
            return s;
        }
        x -= w;
    }
    unreachable!()
}

fn synthetic_corpus(path: &Path) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let letters: Vec<char> = LETTERS.chars().collect();
    let roots: Vec<[char; 3]> = (0..ROOTS).map(|_| [0; 3].map(|_: i32| *letters.choose(&mut rng).unwrap())).collect();
    let mut seen = HashSet::new();
    let mut lexicon = Vec::with_capacity(LEXICON_SIZE);
    while lexicon.len() < LEXICON_SIZE {
        let root = roots[rng.gen_range(0..ROOTS)];
        let pattern = PATTERNS[rng.gen_range(0..PATTERNS.len())];
        let stem: String = pattern
            .chars()
            .map(|c| match c {
                '1' => root[0],
                '2' => root[1],
                '3' => root[2],
                c => c,
            })
            .collect();
        let word = format!("{}{stem}{}", weighted(&PREFIXES, &mut rng), weighted(&SUFFIXES, &mut rng));
        if seen.insert(word.clone()) {
            lexicon.push(word);
        }
    }
    let zipf = WeightedIndex::new((1..=LEXICON_SIZE).map(|r| 1.0 / r as f64)).unwrap();
    let mut text = String::with_capacity(CORPUS_MIN_BYTES + 4096);
    while text.len() < CORPUS_MIN_BYTES {
        let n = rng.gen_range(6..=24);
        for i in 0..n {
            if i > 0 {
                text.push(' ');
            }
            text.push_str(&lexicon[zipf.sample(&mut rng)]);
        }
        text.push('\n');
    }
    std::fs::write(path, &text).unwrap();
    text.len()
}

// ---------------------------------------------------------------------------
// 3. Boundary factors

fn criterion_boundaries(corpus: &Path) -> Outcome {
    let text = std::fs::read_to_string(corpus).unwrap();
    let sample: String = text.lines().take(2_000).collect::<Vec<_>>().join("\n");
    let opts = TrainOptions::default();
    let (table, stats) = tokseem::corpus::scan_text(&sample, &NormalizationOptions::NONE, 1 << 16);

    let mut details = Vec::new();
    let mut ok = true;
    for kind in [TokenizerKind::Word, TokenizerKind::Morphological, TokenizerKind::Stochastic, TokenizerKind::Disjoint] {
        let m = train_from_table(kind, &table, DEFAULT_SPECIALS.len(), &opts).unwrap();
        let f = compression_of_text(&m, &sample).factor();
        ok &= (f - 1.0).abs() <= FACTOR_EPS;
        details.push(format!("{kind} unknown-only = {f}"));
    }

    let full = train_from_table(TokenizerKind::Word, &table, table.len() + DEFAULT_SPECIALS.len(), &opts).unwrap();
    let r = compression_of_text(&full, &sample);
    let (w, c) = (stats.word_count, stats.char_count);
    let expected = w as f64 / (c + w) as f64;
    ok &= r.total_token_cost == w && r.total_chars == c && r.total_words == w;
    ok &= (r.factor() - expected).abs() <= FACTOR_EPS;
    details.push(format!("full coverage = {} (W/(C+W) = {w}/{})", r.factor(), c + w));
    check(ok, details.join(", "))
}

// ---------------------------------------------------------------------------
// 4 and 5. Orderings on the synthetic corpus

fn collapse_options() -> TrainOptions {
    TrainOptions {
        normalization: NormalizationOptions { collapse_whitespace: true, ..NormalizationOptions::NONE },
        ..TrainOptions::default()
    }
}

fn criterion_compression_order(corpus: &Path, models: &[TokenizerModel]) -> Outcome {
    let start = Instant::now();
    let mut factors = Vec::new();
    for m in models {
        factors.push((m.kind(), compression_factor(m, corpus).unwrap().factor()));
    }
    let elapsed = start.elapsed();
    let mut listing = String::new();
    for (k, f) in &factors {
        let _ = write!(listing, "{k}={f:.4} ");
    }
    let of = |kind| factors.iter().find(|(k, _)| *k == kind).unwrap().1;
    let character = of(TokenizerKind::Character);
    let bpe = of(TokenizerKind::Bpe);
    // Character must reach the maximum; ties are reported. Bpe must be strictly lowest.
    let char_max = factors.iter().all(|&(_, f)| f <= character);
    let ties: Vec<String> = factors
        .iter()
        .filter(|&&(k, f)| k != TokenizerKind::Character && f == character)
        .map(|(k, _)| k.to_string())
        .collect();
    let bpe_min = factors.iter().all(|&(k, f)| k == TokenizerKind::Bpe || f > bpe);
    if !ties.is_empty() {
        let _ = write!(listing, "(character tied by {}) ", ties.join(", "));
    }
    check(
        char_max && bpe_min && elapsed < ORDERING_TIME_LIMIT,
        format!("{}(eval {:.1}s)", listing, elapsed.as_secs_f64()),
    )
}

fn bench() -> BenchOptions {
    BenchOptions { repetitions: SPEED_REPETITIONS, threads: 1 }
}

/// Median training times for stochastic, word and morphological. Run before
/// any other model is held in memory.
fn training_times(corpus: &Path) -> [f64; 3] {
    let opts = collapse_options();
    [TokenizerKind::Stochastic, TokenizerKind::Word, TokenizerKind::Morphological]
        .map(|kind| benchmark_train(kind, corpus, ORDERING_VOCAB, &opts, &bench()).unwrap().wall_seconds)
}

fn criterion_speed_order(corpus: &Path, models: &[TokenizerModel], training: [f64; 3]) -> Outcome {
    let model = |kind| models.iter().find(|m| m.kind() == kind).unwrap();
    let encode = |kind| benchmark_encode(model(kind), corpus, &bench()).unwrap().wall_seconds;

    let enc_word = encode(TokenizerKind::Word);
    let enc_bpe = encode(TokenizerKind::Bpe);
    let enc_stoch = encode(TokenizerKind::Stochastic);
    let [tr_stoch, tr_word, tr_morph] = training;
    check(
        enc_word < enc_bpe && enc_word < enc_stoch && tr_stoch > tr_word && tr_stoch > tr_morph,
        format!(
            "encode word={enc_word:.3}s bpe={enc_bpe:.3}s stochastic={enc_stoch:.3}s; \
             train stochastic={tr_stoch:.3}s word={tr_word:.3}s morphological={tr_morph:.3}s"
        ),
    )
}

// ---------------------------------------------------------------------------
// 6. Round trip

fn random_line(rng: &mut ChaCha8Rng, alphabet: &[char]) -> String {
    const GAPS: [&str; 5] = [" ", "  ", "\t", " \t ", "\u{a0}"];
    let mut line = String::new();
    if rng.gen_bool(0.2) {
        line.push_str(GAPS.choose(rng).unwrap());
    }
    for i in 0..rng.gen_range(1..=12) {
        if i > 0 {
            line.push_str(GAPS.choose(rng).unwrap());
        }
        for _ in 0..rng.gen_range(1..=10) {
            line.push(*alphabet.choose(rng).unwrap());
        }
    }
    if rng.gen_bool(0.2) {
        line.push_str(GAPS.choose(rng).unwrap());
    }
    line
}

fn criterion_round_trip(models: &[TokenizerModel]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut details = Vec::new();
    let mut ok = true;
    for kind in [TokenizerKind::Character, TokenizerKind::Bpe] {
        let m = models.iter().find(|m| m.kind() == kind).unwrap();
        // Characters seen in training.
        let alphabet: Vec<char> = m
            .vocab()
            .entries()
            .iter()
            .filter_map(|(t, _)| {
                let mut cs = t.chars();
                cs.next().filter(|_| cs.next().is_none())
            })
            .collect();
        let mut failures = 0;
        let mut first = None;
        for _ in 0..ROUND_TRIP_LINES {
            let line = random_line(&mut rng, &alphabet);
            let back = detokenize(&m.tokenize(&line));
            let want = normalize(&line, m.normalization());
            if back != want {
                failures += 1;
                first.get_or_insert((line, back));
            }
        }
        ok &= failures == 0;
        details.push(match first {
            None => format!("{kind} 0/{ROUND_TRIP_LINES} failures"),
            Some((l, b)) => format!("{kind} {failures}/{ROUND_TRIP_LINES} failures, e.g. {l:?} -> {b:?}"),
        });
    }
    check(ok, details.join(", "))
}

// ---------------------------------------------------------------------------
// 7. Determinism

fn criterion_determinism(corpus: &Path, dir: &Path) -> Outcome {
    let opts = TrainOptions { seed: DETERMINISM_SEED, ..collapse_options() };
    let paths: Vec<PathBuf> = (0..2).map(|i| dir.join(format!("stochastic-{i}.model"))).collect();
    for p in &paths {
        train(TokenizerKind::Stochastic, corpus, ORDERING_VOCAB, &opts).unwrap().save(p).unwrap();
    }
    let a = std::fs::read(&paths[0]).unwrap();
    let b = std::fs::read(&paths[1]).unwrap();
    let models_equal = a == b;

    let norm = NormalizationOptions::NONE;
    let (small, s1) = scan_corpus_chunked(corpus, &norm, SMALL_CHUNK).unwrap();
    let (large, s2) = scan_corpus_chunked(corpus, &norm, LARGE_CHUNK).unwrap();
    let tables_equal = small == large && s1 == s2;
    check(
        models_equal && tables_equal,
        format!(
            "model files identical: {models_equal} ({} bytes); tables at {SMALL_CHUNK} B and {LARGE_CHUNK} B chunks identical: {tables_equal} ({} types)",
            a.len(),
            small.len()
        ),
    )
}

// ---------------------------------------------------------------------------
// 8. Optional dataset statistics

fn criterion_ajgt() -> Outcome {
    let Some(path) = std::env::var_os("AJGT_TRAIN") else {
        return Outcome::Skip("set AJGT_TRAIN to the AJGT training split (one text per line) to run".into());
    };
    match scan_corpus(&path, &NormalizationOptions::NONE) {
        Ok((_, s)) => check(
            s.word_count == AJGT_WORDS && s.unique_word_count == AJGT_UNIQUE,
            format!("words {} (want {AJGT_WORDS}), unique {} (want {AJGT_UNIQUE})", s.word_count, s.unique_word_count),
        ),
        Err(e) => Outcome::Fail(e.to_string()),
    }
}

fn main() {
    let mut suite = Suite { failed: 0 };
    suite.report(1, "split oracle equivalence", criterion_oracle());
    suite.report(2, "segmentation examples", criterion_examples());

    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    let bytes = synthetic_corpus(&corpus);
    println!("corpus: {:.1} MiB synthetic Arabic text", bytes as f64 / (1 << 20) as f64);

    let training = training_times(&corpus);
    suite.report(3, "compression boundary values", criterion_boundaries(&corpus));

    let start = Instant::now();
    let opts = collapse_options();
    let models: Vec<TokenizerModel> =
        TokenizerKind::ALL.iter().map(|&k| train(k, &corpus, ORDERING_VOCAB, &opts).unwrap()).collect();
    println!("trained six tokenizers at {ORDERING_VOCAB} in {:.1}s", start.elapsed().as_secs_f64());

    suite.report(4, "compression ordering (character max, bpe min)", criterion_compression_order(&corpus, &models));
    suite.report(5, "speed orderings", criterion_speed_order(&corpus, &models, training));
    suite.report(6, "round trip", criterion_round_trip(&models));
    suite.report(7, "determinism", criterion_determinism(&corpus, dir.path()));
    suite.report(8, "dataset statistics (optional)", criterion_ajgt());

    if suite.failed > 0 {
        println!("{} criterion(s) failed", suite.failed);
        std::process::exit(1);
    }
}
