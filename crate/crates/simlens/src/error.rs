//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimlensError {
    #[error("input source is empty after trimming whitespace")]
    EmptyInput,

    #[error("sequence has {len} tokens, maximum is {max}")]
    SequenceTooLong { len: usize, max: usize },

    #[error("failed to load tokenizer: {0}")]
    TokenizerLoad(String),

    #[error("failed to load model: {0}")]
    ModelLoad(String),

    #[error("serialized model graph exports no attention outputs: {0}")]
    AttentionUnavailable(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("embedding row {row} of fragment {fragment_id} has zero norm")]
    ZeroNormEmbedding { fragment_id: String, row: usize },

    #[error("attention head count mismatch: {left} vs {right}")]
    HeadMismatch { left: usize, right: usize },

    #[error("need more than {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("perplexity {perplexity} infeasible for {n} points")]
    PerplexityTooLarge { perplexity: f64, n: usize },

    #[error("model output inconsistent with declared dimension: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("gradient contains non-finite values (backend pathology)")]
    NaNGradient,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("report (de)serialization failed: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, SimlensError>;
