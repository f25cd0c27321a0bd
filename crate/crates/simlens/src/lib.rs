//! Interpretable similarity between source-code fragments.
//!
//! The crate tokenizes code, extracts per-token contextual embeddings and
//! attention tensors (from a serialized transformer graph or a
//! deterministic stub), and derives interpretable artifacts from them:
//!
//! - token-level cosine and attention-product similarity matrices,
//! - 2-D projections of token embeddings (PCA, exact t-SNE, UMAP),
//! - per-token gradient saliency for a fragment pair,
//! - SVG renders and a self-contained JSON comparison report.
//!
//! See the `examples/` directory for one runnable example per capability,
//! and the `simlens` binary for the command-line interface.

pub mod dimred;
pub mod embedder;
pub mod error;
pub mod report;
pub mod saliency;
pub mod simcore;

pub use error::{Result, SimlensError};
