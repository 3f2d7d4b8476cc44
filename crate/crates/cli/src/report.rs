use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// One measurement, written as a single JSON object.
#[derive(Debug, Serialize)]
pub struct Report {
    pub tokenizer: Option<String>,
    pub vocab_size: Option<usize>,
    pub metric: String,
    pub value: f64,
    pub totals: Value,
    pub corpus: String,
    pub timestamp: u64,
}

impl Report {
    pub fn new(metric: &str, value: f64, totals: Value, corpus: &Path) -> Self {
        Self {
            tokenizer: None,
            vocab_size: None,
            metric: metric.to_owned(),
            value,
            totals,
            corpus: corpus.display().to_string(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }

    pub fn with_tokenizer(mut self, kind: &str, vocab_size: usize) -> Self {
        self.tokenizer = Some(kind.to_owned());
        self.vocab_size = Some(vocab_size);
        self
    }

    /// Tag used to tell several reports of one run apart in file names.
    fn label(&self) -> String {
        match (&self.tokenizer, self.vocab_size) {
            (Some(t), Some(v)) => format!("{t}-{v}-{}", self.metric),
            _ => self.metric.clone(),
        }
    }
}

const TSV_HEADER: &str = "tokenizer\tvocab_size\tmetric\tvalue\tcorpus\ttimestamp\ttotals";

pub fn to_tsv(reports: &[Report]) -> String {
    let mut out = String::from(TSV_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.tokenizer.as_deref().unwrap_or(""),
            r.vocab_size.map(|v| v.to_string()).unwrap_or_default(),
            r.metric,
            r.value,
            r.corpus,
            r.timestamp,
            r.totals
        );
    }
    out
}

/// Writes each report to its own JSON file plus one TSV mirror next to
/// `out`. With a single report the JSON goes to `out` itself; otherwise the
/// report label is spliced into the file name. Without `out` the reports are
/// printed to stdout, one JSON object per line.
pub fn emit(reports: &[Report], out: Option<&Path>) -> Result<()> {
    let Some(out) = out else {
        for r in reports {
            println!("{}", serde_json::to_string(r)?);
        }
        return Ok(());
    };
    let paths: Vec<PathBuf> = if reports.len() == 1 {
        vec![out.to_owned()]
    } else {
        reports.iter().map(|r| labelled(out, &r.label())).collect()
    };
    for (r, path) in reports.iter().zip(&paths) {
        let mut json = serde_json::to_string_pretty(r)?;
        json.push('\n');
        fs::write(path, json).with_context(|| format!("writing {}", path.display()))?;
    }
    let tsv = out.with_extension("tsv");
    fs::write(&tsv, to_tsv(reports)).with_context(|| format!("writing {}", tsv.display()))?;
    Ok(())
}

fn labelled(out: &Path, label: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = out.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "json".into());
    out.with_file_name(format!("{stem}.{label}.{ext}"))
}
