//! Arabic tokenization toolkit.
//!
//! Six tokenizers share one pipeline: a corpus is scanned into a word
//! frequency table, each tokenizer turns that table into a [`Vocabulary`], and
//! inference segments whitespace-delimited words against it. Continuation
//! pieces carry the `##` marker. [`evaluation`] measures the compression
//! factor and training/encoding speed of trained models.
//!
//! ```
//! use tokseem::{train_from_table, FrequencyTable, TokenizerKind, TrainOptions};
//!
//! let words: FrequencyTable = [("الشباب", 3), ("الجمال", 2)].into_iter().collect();
//! let model = train_from_table(TokenizerKind::Morphological, &words, 50, &TrainOptions::default()).unwrap();
//! assert_eq!(model.tokenize("الجمال"), ["ال", "##جمال"]);
//! ```

pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod splitter;
pub mod tokenizers;
pub mod vocab;

pub use corpus::{
    iter_words, normalize, scan_corpus, scan_corpus_chunked, CorpusStats, FrequencyTable,
    NormalizationOptions,
};
pub use error::{Error, Result};
pub use evaluation::{
    benchmark_encode, benchmark_train, compression_factor, token_cost, BenchOptions,
    CompressionReport, Phase, SpeedReport,
};
pub use splitter::{best_split, enumerate_segmentations, Segmentation, SplitCache, MARKER};
pub use tokenizers::{
    detokenize, train, train_from_table, AffixTables, KindParams, TokenizerKind, TokenizerModel,
    TrainOptions, WordTokens,
};
pub use vocab::{Vocabulary, PAD, UNK};
