//! Command-line front end: train, encode, decode, evaluate, and corpus stats.

mod report;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use tokseem::evaluation::{benchmark_encode, benchmark_train, compression_factor, BenchOptions};
use tokseem::{scan_corpus, train, NormalizationOptions, TokenizerKind, TokenizerModel, TrainOptions};

use report::{emit, Report};

#[derive(Parser)]
#[command(name = "tokseem", version, about = "Train and evaluate Arabic tokenizers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a tokenizer and write a model file.
    Train(TrainArgs),
    /// Encode a text file into one line of ids per input line.
    Encode(CodecArgs),
    /// Decode an ids file back into text.
    Decode(CodecArgs),
    /// Compression factor of a model, or of a vocabulary-size sweep.
    EvalCompression(EvalCompressionArgs),
    /// Median training and encoding wall time.
    EvalSpeed(EvalSpeedArgs),
    /// Word, unique-word and character counts of a corpus.
    Stats(StatsArgs),
}

#[derive(Args, Clone, Copy)]
struct NormArgs {
    /// Remove Arabic diacritics (U+064B..U+065F, U+0670).
    #[arg(long)]
    strip_diacritics: bool,
    /// Remove tatweel (U+0640).
    #[arg(long)]
    strip_tatweel: bool,
    /// Collapse whitespace runs into single spaces and trim line ends.
    #[arg(long)]
    collapse_whitespace: bool,
}

impl From<NormArgs> for NormalizationOptions {
    fn from(a: NormArgs) -> Self {
        NormalizationOptions {
            strip_diacritics: a.strip_diacritics,
            strip_tatweel: a.strip_tatweel,
            collapse_whitespace: a.collapse_whitespace,
        }
    }
}

#[derive(Args)]
struct ModelParams {
    /// Seed for the stochastic tokenizer.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Longest word handed to the split search.
    #[arg(long, default_value_t = tokseem::splitter::DEFAULT_MAX_WORD_LEN)]
    max_word_len: usize,
    /// Largest n-gram length drawn by the stochastic tokenizer.
    #[arg(long, default_value_t = tokseem::tokenizers::DEFAULT_K_MAX)]
    k_max: usize,
    #[command(flatten)]
    norm: NormArgs,
}

impl ModelParams {
    fn train_options(&self) -> TrainOptions {
        TrainOptions {
            normalization: self.norm.into(),
            max_word_len: self.max_word_len,
            seed: self.seed,
            k_max: self.k_max,
            ..TrainOptions::default()
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_parser = parse_kind)]
    tokenizer: TokenizerKind,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    vocab_size: usize,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    params: ModelParams,
}

#[derive(Args)]
struct CodecArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalCompressionArgs {
    /// Corpus to measure.
    #[arg(long)]
    corpus: PathBuf,
    /// Trained model to evaluate.
    #[arg(long, conflicts_with_all = ["tokenizer", "sweep"], required_unless_present = "sweep")]
    model: Option<PathBuf>,
    /// Tokenizer kind to train for each sweep size.
    #[arg(long, value_parser = parse_kind, requires = "sweep")]
    tokenizer: Option<TokenizerKind>,
    /// Comma-separated vocabulary sizes, e.g. 500,1000,5000,10000,20000,30000.
    #[arg(long, value_delimiter = ',', requires = "tokenizer")]
    sweep: Option<Vec<usize>>,
    /// Training corpus for the sweep; defaults to --corpus.
    #[arg(long, requires = "sweep")]
    train_corpus: Option<PathBuf>,
    #[command(flatten)]
    params: ModelParams,
    /// Report path; a TSV mirror is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalSpeedArgs {
    #[arg(long, value_parser = parse_kind)]
    tokenizer: TokenizerKind,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    vocab_size: usize,
    #[arg(long, default_value_t = 3)]
    repetitions: usize,
    /// Threads inside the timed region.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[command(flatten)]
    params: ModelParams,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    norm: NormArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<TokenizerKind, String> {
    s.parse().map_err(|e: tokseem::Error| e.to_string())
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_model(path: &Path) -> Result<TokenizerModel> {
    TokenizerModel::load(path).with_context(|| format!("loading model {}", path.display()))
}

fn run_train(args: TrainArgs) -> Result<()> {
    let model = train(args.tokenizer, &args.corpus, args.vocab_size, &args.params.train_options())?;
    model.save(&args.out)?;
    eprintln!(
        "trained {} model with {} tokens -> {}",
        model.kind(),
        model.vocab().len(),
        args.out.display()
    );
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn run_encode(args: CodecArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let text = read_text(&args.input)?;
    let mut out = create(&args.out)?;
    for line in text.lines() {
        let ids = model.encode(line);
        let mut first = true;
        for id in ids {
            if !first {
                out.write_all(b" ")?;
            }
            write!(out, "{id}")?;
            first = false;
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn run_decode(args: CodecArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let text = read_text(&args.input)?;
    let mut out = create(&args.out)?;
    for (n, line) in text.lines().enumerate() {
        let ids = line
            .split_ascii_whitespace()
            .map(|s| s.parse::<u32>().with_context(|| format!("line {}: invalid id {s:?}", n + 1)))
            .collect::<Result<Vec<_>>>()?;
        let decoded = model.decode(&ids).with_context(|| format!("line {}", n + 1))?;
        writeln!(out, "{decoded}")?;
    }
    out.flush()?;
    Ok(())
}

fn compression_report(model: &TokenizerModel, corpus: &Path) -> Result<Report> {
    let r = compression_factor(model, corpus)?;
    let totals = json!({
        "total_token_cost": r.total_token_cost,
        "total_chars": r.total_chars,
        "total_words": r.total_words,
    });
    Ok(Report::new("compression_factor", r.factor(), totals, corpus)
        .with_tokenizer(model.kind().as_str(), model.vocab().len()))
}

fn run_eval_compression(args: EvalCompressionArgs) -> Result<()> {
    let reports = match (&args.model, &args.sweep, args.tokenizer) {
        (Some(path), None, None) => vec![compression_report(&load_model(path)?, &args.corpus)?],
        (None, Some(sizes), Some(kind)) => {
            if sizes.is_empty() {
                bail!("--sweep needs at least one vocabulary size");
            }
            let train_corpus = args.train_corpus.as_deref().unwrap_or(&args.corpus);
            let opts = args.params.train_options();
            sizes
                .iter()
                .map(|&size| {
                    let model = train(kind, train_corpus, size, &opts)
                        .with_context(|| format!("training {kind} at vocab size {size}"))?;
                    compression_report(&model, &args.corpus)
                })
                .collect::<Result<Vec<_>>>()?
        }
        _ => bail!("pass either --model or --tokenizer with --sweep"),
    };
    emit(&reports, args.out.as_deref())
}

fn run_eval_speed(args: EvalSpeedArgs) -> Result<()> {
    let opts = args.params.train_options();
    let bench = BenchOptions { repetitions: args.repetitions, threads: args.threads };
    let kind = args.tokenizer;
    let training = benchmark_train(kind, &args.corpus, args.vocab_size, &opts, &bench)?;
    let model = train(kind, &args.corpus, args.vocab_size, &opts)?;
    let encoding = benchmark_encode(&model, &args.corpus, &bench)?;
    let reports = [("training_seconds", training), ("encoding_seconds", encoding)]
        .into_iter()
        .map(|(metric, s)| {
            let totals = json!({ "timings": s.timings, "corpus_bytes": s.corpus_bytes });
            Report::new(metric, s.wall_seconds, totals, &args.corpus)
                .with_tokenizer(kind.as_str(), model.vocab().len())
        })
        .collect::<Vec<_>>();
    emit(&reports, args.out.as_deref())
}

fn run_stats(args: StatsArgs) -> Result<()> {
    let (_, stats) = scan_corpus(&args.corpus, &args.norm.into())?;
    let totals = json!({
        "word_count": stats.word_count,
        "unique_word_count": stats.unique_word_count,
        "char_count": stats.char_count,
    });
    emit(
        &[Report::new("corpus_stats", stats.word_count as f64, totals, &args.corpus)],
        args.out.as_deref(),
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => run_train(a),
        Command::Encode(a) => run_encode(a),
        Command::Decode(a) => run_decode(a),
        Command::EvalCompression(a) => run_eval_compression(a),
        Command::EvalSpeed(a) => run_eval_speed(a),
        Command::Stats(a) => run_stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
