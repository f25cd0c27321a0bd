//! Pluggable backends that turn source text into tokens, contextual
//! embeddings and attention tensors.
//!
//! Two backends exist: a deterministic stub (no files needed, used by the
//! whole test suite and the built-in reproduction driver) and a real model
//! backend that runs a serialized ONNX transformer graph with a HuggingFace
//! tokenizer file. Both expose the same three operations: `tokenize`,
//! `embed`, `attentions`.

mod model;
mod stub;

pub use model::ModelBackend;
pub use stub::{stub_projection_weights, StubBackend};

use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimlensError};

/// Hard cap on sequence length; longer inputs are rejected rather than
/// silently truncated, since truncation would corrupt similarity semantics.
pub const MAX_SEQUENCE_LEN: usize = 512;

/// Env var naming the default directory for model and tokenizer files.
pub const MODEL_DIR_ENV: &str = "SIMLENS_MODEL_DIR";

/// One source-code snippet with identity and language tag.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeFragment {
    pub id: String,
    pub language: String,
    pub source: String,
}

impl CodeFragment {
    pub fn new(id: impl Into<String>, source: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            language: "python".to_string(),
            source: source.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.source.trim().is_empty() {
            return Err(SimlensError::EmptyInput);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// Vocabulary index (stub backend assigns a stable hash-derived id).
    pub token_id: u32,
    pub surface: String,
    /// Byte offsets `[start, end)` into the fragment source.
    pub char_span: (usize, usize),
    pub is_special: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenSequence {
    pub fragment_id: String,
    pub tokens: Vec<Token>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Indices of the non-special tokens, in order.
    pub fn code_token_indices(&self) -> Vec<usize> {
        self.tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.is_special)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn code_surfaces(&self) -> Vec<String> {
        self.tokens
            .iter()
            .filter(|t| !t.is_special)
            .map(|t| t.surface.clone())
            .collect()
    }
}

/// Per-token contextual vectors, one row per token (specials included).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingMatrix {
    pub fragment_id: String,
    pub values: Array2<f64>,
}

impl EmbeddingMatrix {
    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    /// New matrix containing only the given rows.
    pub fn select_rows(&self, indices: &[usize]) -> EmbeddingMatrix {
        let dim = self.dim();
        let mut out = Array2::zeros((indices.len(), dim));
        for (r, &i) in indices.iter().enumerate() {
            out.row_mut(r).assign(&self.values.row(i));
        }
        EmbeddingMatrix {
            fragment_id: self.fragment_id.clone(),
            values: out,
        }
    }
}

/// H x n x n row-stochastic attention probabilities for one fragment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttentionTensor {
    pub fragment_id: String,
    pub values: Array3<f64>,
}

impl AttentionTensor {
    pub fn heads(&self) -> usize {
        self.values.shape()[0]
    }

    pub fn size(&self) -> usize {
        self.values.shape()[1]
    }

    /// Sub-tensor keeping only the given token positions (both axes).
    /// Rows of the result no longer sum to 1; the dropped mass belonged to
    /// the removed positions.
    pub fn restrict(&self, indices: &[usize]) -> AttentionTensor {
        let h = self.heads();
        let m = indices.len();
        let mut out = Array3::zeros((h, m, m));
        for head in 0..h {
            for (r, &i) in indices.iter().enumerate() {
                for (c, &j) in indices.iter().enumerate() {
                    out[[head, r, c]] = self.values[[head, i, j]];
                }
            }
        }
        AttentionTensor {
            fragment_id: self.fragment_id.clone(),
            values: out,
        }
    }
}

/// Backend selection plus everything needed to construct it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum BackendConfig {
    Stub {
        seed: u64,
        dim: usize,
        heads: usize,
    },
    Model {
        model_path: std::path::PathBuf,
        tokenizer_path: std::path::PathBuf,
    },
}

impl BackendConfig {
    pub fn stub(seed: u64) -> Self {
        BackendConfig::Stub {
            seed,
            dim: 64,
            heads: 4,
        }
    }
}

/// The three operations every backend provides.
pub trait Backend {
    fn tokenize(&self, fragment: &CodeFragment) -> Result<TokenSequence>;
    fn embed(&self, seq: &TokenSequence, fragment: &CodeFragment) -> Result<EmbeddingMatrix>;
    fn attentions(&self, seq: &TokenSequence, fragment: &CodeFragment) -> Result<AttentionTensor>;
}

/// Construct the backend described by `config`.
pub fn load_backend(config: &BackendConfig) -> Result<Box<dyn Backend>> {
    match config {
        BackendConfig::Stub { seed, dim, heads } => {
            Ok(Box::new(StubBackend::new(*seed, *dim, *heads)))
        }
        BackendConfig::Model {
            model_path,
            tokenizer_path,
        } => Ok(Box::new(ModelBackend::load(model_path, tokenizer_path)?)),
    }
}

pub(crate) fn check_length(n: usize) -> Result<()> {
    if n > MAX_SEQUENCE_LEN {
        return Err(SimlensError::SequenceTooLong {
            len: n,
            max: MAX_SEQUENCE_LEN,
        });
    }
    Ok(())
}
