//! The six tokenizers: training, tokenization and id encoding.
//!
//! | kind          | trained from                          | unknown fallback    |
//! |---------------|---------------------------------------|---------------------|
//! | character     | characters, both marked forms         | per character       |
//! | word          | whole words                           | whole word          |
//! | morphological | affix-table segments                  | whole word          |
//! | stochastic    | random-length n-grams                 | whole word          |
//! | disjoint      | disjoint-letter segments              | whole word          |
//! | bpe           | merge products over characters        | per character       |

mod bpe;
mod model_file;
mod morphology;
mod script;
mod stochastic;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use bpe::{learn_bpe_merges, merged_token, BpeEncoder, Merge};
pub use morphology::{
    segment_affixes, AffixTables, DEFAULT_MIN_STEM_LEN, DEFAULT_PREFIXES, DEFAULT_SUFFIXES,
};
pub use script::{breaks_after, segment_character, segment_disjoint, NON_JOINING_LETTERS};
pub use stochastic::{draw_ngram_len, generate_stochastic_ngrams, ngrams, DEFAULT_K_MAX};

use crate::corpus::{iter_words, normalize, scan_corpus_chunked, FrequencyTable, NormalizationOptions, DEFAULT_CHUNK_SIZE};
use crate::error::{Error, Result};
use crate::splitter::{
    best_split, is_continuation, mark, strip_marker, Segmentation, SplitCache, DEFAULT_MAX_WORD_LEN,
};
use crate::vocab::{Vocabulary, DEFAULT_SPECIALS, UNK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenizerKind {
    Character,
    Word,
    Morphological,
    Stochastic,
    Disjoint,
    Bpe,
}

impl TokenizerKind {
    pub const ALL: [TokenizerKind; 6] = [
        TokenizerKind::Character,
        TokenizerKind::Word,
        TokenizerKind::Morphological,
        TokenizerKind::Stochastic,
        TokenizerKind::Disjoint,
        TokenizerKind::Bpe,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TokenizerKind::Character => "character",
            TokenizerKind::Word => "word",
            TokenizerKind::Morphological => "morphological",
            TokenizerKind::Stochastic => "stochastic",
            TokenizerKind::Disjoint => "disjoint",
            TokenizerKind::Bpe => "bpe",
        }
    }

    /// Character and bpe replace single unseen characters; the others replace whole words.
    pub fn has_character_fallback(self) -> bool {
        matches!(self, TokenizerKind::Character | TokenizerKind::Bpe)
    }
}

impl fmt::Display for TokenizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TokenizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TokenizerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown tokenizer kind {s:?}")))
    }
}

/// Parameters that only some kinds carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KindParams {
    None,
    Stochastic { seed: u64, k_max: usize },
    Morphological { affixes: AffixTables },
    Bpe { merges: Vec<Merge> },
}

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub specials: Vec<String>,
    pub normalization: NormalizationOptions,
    pub max_word_len: usize,
    pub seed: u64,
    pub k_max: usize,
    pub affixes: AffixTables,
    pub chunk_size: usize,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            specials: DEFAULT_SPECIALS.iter().map(|s| s.to_string()).collect(),
            normalization: NormalizationOptions::NONE,
            max_word_len: DEFAULT_MAX_WORD_LEN,
            seed: 0,
            k_max: DEFAULT_K_MAX,
            affixes: AffixTables::default(),
            chunk_size: DEFAULT_CHUNK_SIZE,
        }
    }
}

/// Tokens produced for one word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WordTokens {
    /// No valid segmentation; rendered as a single `<unk>`.
    Unknown,
    /// Segmented tokens. Character and bpe models may place `<unk>` here for
    /// single unseen characters.
    Pieces(Segmentation),
}

impl WordTokens {
    pub fn into_tokens(self) -> Vec<String> {
        match self {
            WordTokens::Unknown => vec![UNK.to_owned()],
            WordTokens::Pieces(seg) => seg.into_tokens(),
        }
    }

    pub fn for_each_token(&self, mut f: impl FnMut(&str)) {
        match self {
            WordTokens::Unknown => f(UNK),
            WordTokens::Pieces(seg) => seg.tokens().iter().for_each(|t| f(t)),
        }
    }
}

/// A trained tokenizer. Immutable apart from its internal split cache.
#[derive(Debug, Clone)]
pub struct TokenizerModel {
    kind: TokenizerKind,
    vocab: Vocabulary,
    max_word_len: usize,
    normalization: NormalizationOptions,
    params: KindParams,
    encoder: Option<BpeEncoder>,
    cache: SplitCache,
}

impl PartialEq for TokenizerModel {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.vocab == other.vocab
            && self.max_word_len == other.max_word_len
            && self.normalization == other.normalization
            && self.params == other.params
    }
}

impl Eq for TokenizerModel {}

impl TokenizerModel {
    pub fn new(
        kind: TokenizerKind,
        vocab: Vocabulary,
        max_word_len: usize,
        normalization: NormalizationOptions,
        params: KindParams,
    ) -> Result<Self> {
        if max_word_len == 0 {
            return Err(Error::Config("max word length must be positive".into()));
        }
        let params_fit = matches!(
            (kind, &params),
            (TokenizerKind::Character | TokenizerKind::Word | TokenizerKind::Disjoint, KindParams::None)
                | (TokenizerKind::Stochastic, KindParams::Stochastic { .. })
                | (TokenizerKind::Morphological, KindParams::Morphological { .. })
                | (TokenizerKind::Bpe, KindParams::Bpe { .. })
        );
        if !params_fit {
            return Err(Error::Config(format!("parameters {params:?} do not belong to a {kind} model")));
        }
        if let KindParams::Stochastic { k_max: 0, .. } = params {
            return Err(Error::Config("k_max must be positive".into()));
        }
        let encoder = match &params {
            KindParams::Bpe { merges } => Some(BpeEncoder::new(merges, &vocab)?),
            _ => None,
        };
        Ok(Self {
            kind,
            vocab,
            max_word_len,
            normalization,
            params,
            encoder,
            cache: SplitCache::new(),
        })
    }

    pub fn kind(&self) -> TokenizerKind {
        self.kind
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn max_word_len(&self) -> usize {
        self.max_word_len
    }

    pub fn normalization(&self) -> &NormalizationOptions {
        &self.normalization
    }

    pub fn params(&self) -> &KindParams {
        &self.params
    }

    pub fn cache(&self) -> &SplitCache {
        &self.cache
    }

    pub fn clear_cache(&self) {
        self.cache.clear();
    }

    /// The kind's own segmentation if every token is a vocabulary entry,
    /// otherwise the best split over the vocabulary.
    fn canonical_or_split(&self, word: &str, canonical: Option<Segmentation>) -> Option<Segmentation> {
        if let Some(hit) = self.cache.get(word) {
            return hit;
        }
        if let Some(seg) = canonical {
            if seg.tokens().iter().all(|t| self.vocab.contains_entry(t)) {
                self.cache.insert(word, Some(seg.clone()));
                return Some(seg);
            }
        }
        best_split(word, &self.vocab, &self.cache, self.max_word_len)
    }

    pub fn tokenize_word(&self, word: &str) -> WordTokens {
        let result = match (&self.params, self.kind) {
            (_, TokenizerKind::Word) => self
                .vocab
                .contains_entry(word)
                .then(|| Segmentation::whole(word)),
            (_, TokenizerKind::Character) => {
                let seg = segment_character(word);
                Some(Segmentation::from_marked(
                    seg.into_tokens()
                        .into_iter()
                        .map(|t| if self.vocab.contains_entry(&t) { t } else { UNK.to_owned() })
                        .collect(),
                ))
            }
            (KindParams::Morphological { affixes }, _) => {
                self.canonical_or_split(word, Some(segment_affixes(word, affixes)))
            }
            (_, TokenizerKind::Disjoint) => self.canonical_or_split(word, Some(segment_disjoint(word))),
            (_, TokenizerKind::Stochastic) => self.canonical_or_split(word, None),
            (_, TokenizerKind::Bpe) => {
                if let Some(hit) = self.cache.get(word) {
                    hit
                } else {
                    let encoder = self.encoder.as_ref().expect("bpe model has an encoder");
                    let seg = encoder.encode_word(word, &self.vocab);
                    self.cache.insert(word, Some(seg.clone()));
                    Some(seg)
                }
            }
            (_, TokenizerKind::Morphological) => unreachable!("checked in TokenizerModel::new"),
        };
        match result {
            Some(seg) if !seg.is_empty() => WordTokens::Pieces(seg),
            _ => WordTokens::Unknown,
        }
    }

    /// Per-word results after applying the model's normalization.
    pub fn tokenize_words<'a>(&'a self, text: &'a str) -> Vec<(String, WordTokens)> {
        let text = normalize(text, &self.normalization);
        iter_words(&text).map(|w| (w.to_owned(), self.tokenize_word(w))).collect()
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let text = normalize(text, &self.normalization);
        let mut out = Vec::new();
        for word in iter_words(&text) {
            out.extend(self.tokenize_word(word).into_tokens());
        }
        out
    }

    pub fn encode(&self, text: &str) -> Vec<u32> {
        let text = normalize(text, &self.normalization);
        let mut out = Vec::new();
        for word in iter_words(&text) {
            self.tokenize_word(word).for_each_token(|t| out.push(self.vocab.id_of(t)));
        }
        out
    }

    pub fn decode(&self, ids: &[u32]) -> Result<String> {
        let tokens = ids
            .iter()
            .enumerate()
            .map(|(position, &id)| {
                self.vocab.token_of(id).ok_or(Error::IdOutOfRange {
                    position,
                    id,
                    size: self.vocab.len(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(detokenize(&tokens))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let text = crate::vocab::utf8_or_line_error(&bytes)?;
        Self::from_text(text)
    }
}

/// Glues continuation tokens to their predecessor and joins the rest with spaces.
pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    for t in tokens {
        let t = t.as_ref();
        if is_continuation(t) {
            out.push_str(strip_marker(t));
        } else {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(t);
        }
    }
    out
}

fn character_table(words: &FrequencyTable) -> FrequencyTable {
    let mut chars: std::collections::HashMap<char, u64> = std::collections::HashMap::new();
    for (w, f) in words.iter() {
        for c in w.chars() {
            *chars.entry(c).or_insert(0) += f;
        }
    }
    let mut table = FrequencyTable::new();
    let mut buf = [0u8; 4];
    for (c, f) in chars {
        let s = c.encode_utf8(&mut buf);
        table.add(s, f);
        table.add_owned(mark(s, false), f);
    }
    table
}

fn segment_table(words: &FrequencyTable, segment: impl Fn(&str) -> Segmentation) -> FrequencyTable {
    let mut table = FrequencyTable::new();
    for (w, f) in words.iter() {
        for t in segment(w).into_tokens() {
            table.add_owned(t, f);
        }
    }
    table
}

/// Draws one n-gram length per word occurrence. Words are visited in token
/// order so the stream depends only on the table and the seed.
fn stochastic_table(words: &FrequencyTable, seed: u64, k_max: usize) -> FrequencyTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = FrequencyTable::new();
    let mut draws = vec![0u64; k_max + 1];
    for (w, f) in words.sorted_by_token() {
        draws.iter_mut().for_each(|d| *d = 0);
        for _ in 0..f {
            draws[draw_ngram_len(w, k_max, &mut rng)] += 1;
        }
        for (k, &count) in draws.iter().enumerate().skip(1) {
            if count > 0 {
                for g in ngrams(w, k) {
                    table.add_owned(g, count);
                }
            }
        }
    }
    table
}

/// Trains a model from an already counted word table.
pub fn train_from_table(
    kind: TokenizerKind,
    words: &FrequencyTable,
    vocab_size: usize,
    options: &TrainOptions,
) -> Result<TokenizerModel> {
    if vocab_size < options.specials.len() {
        return Err(Error::Config(format!(
            "vocab size {vocab_size} is smaller than the {} special tokens",
            options.specials.len()
        )));
    }
    let specials = &options.specials;
    let (vocab, params) = match kind {
        TokenizerKind::Character => (Vocabulary::build(&character_table(words), vocab_size, specials)?, KindParams::None),
        TokenizerKind::Word => (Vocabulary::build(words, vocab_size, specials)?, KindParams::None),
        TokenizerKind::Disjoint => (
            Vocabulary::build(&segment_table(words, segment_disjoint), vocab_size, specials)?,
            KindParams::None,
        ),
        TokenizerKind::Morphological => {
            let affixes = options.affixes.clone();
            let table = segment_table(words, |w| segment_affixes(w, &affixes));
            (Vocabulary::build(&table, vocab_size, specials)?, KindParams::Morphological { affixes })
        }
        TokenizerKind::Stochastic => {
            if options.k_max == 0 {
                return Err(Error::Config("k_max must be positive".into()));
            }
            let table = stochastic_table(words, options.seed, options.k_max);
            (
                Vocabulary::build(&table, vocab_size, specials)?,
                KindParams::Stochastic { seed: options.seed, k_max: options.k_max },
            )
        }
        TokenizerKind::Bpe => {
            let (merges, vocab) = learn_bpe_merges(words, vocab_size, specials)?;
            (vocab, KindParams::Bpe { merges })
        }
    };
    TokenizerModel::new(kind, vocab, options.max_word_len, options.normalization, params)
}

pub fn train(
    kind: TokenizerKind,
    corpus_path: impl AsRef<Path>,
    vocab_size: usize,
    options: &TrainOptions,
) -> Result<TokenizerModel> {
    let (words, _) = scan_corpus_chunked(corpus_path, &options.normalization, options.chunk_size)?;
    train_from_table(kind, &words, vocab_size, options)
}
