use thiserror::Error;

/// Errors produced by the toolkit's library operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid UTF-8 at byte offset {offset}")]
    Decode { offset: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid triple: {0}")]
    InvalidTriple(String),

    #[error("empty alphabet")]
    EmptyAlphabet,

    #[error("empty n-gram inventory")]
    EmptyNGramInventory,

    #[error("cannot compute length bounds: {0}")]
    LengthBounds(String),

    #[error("invalid split spec: {0}")]
    SplitSpec(String),

    #[error("too few paradigms: {0}")]
    TooFewParadigms(String),

    #[error("invalid stem spans: {0}")]
    InvalidSpans(String),

    #[error("no stem to templatize")]
    NoStem,

    #[error("template expects {expected} stems, got {got}")]
    StemArity { expected: usize, got: usize },

    #[error("invalid augmentation spec: {0}")]
    AugmentationSpec(String),

    #[error("empty lemma list")]
    EmptyLemmaList,

    #[error("empty source pool")]
    EmptySourcePool,

    #[error("no alignable training triples; stem length bounds undefined")]
    NoStemBounds,

    #[error(
        "attempt budget exhausted: {produced} of {requested} items after {attempts} attempts ({skip_rate:.1}% skipped)"
    )]
    BudgetExhausted {
        produced: usize,
        requested: usize,
        attempts: usize,
        skip_rate: f64,
    },

    #[error("prediction count {preds} does not match gold count {gold}")]
    LengthMismatch { gold: usize, preds: usize },

    #[error("empty value list")]
    EmptyValues,

    #[error("empty training set")]
    EmptyTrainingSet,
}

pub type Result<T> = std::result::Result<T, Error>;
