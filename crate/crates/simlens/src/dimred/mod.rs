//! From-scratch 2-D projections of token embeddings: PCA, exact t-SNE and
//! UMAP. All three are deterministic given (input, config, seed).

pub mod pca;
pub mod tsne;
pub mod umap;

pub use pca::{pca_full, pca_project, PcaResult};
pub use tsne::{kl_and_grad, tsne_project, TsneConfig, TsneOutput};
pub use umap::{fit_ab, umap_graph, umap_optimize, UmapConfig, UmapGraph, UmapOutput};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMethod {
    Pca,
    Tsne,
    Umap,
}

impl std::fmt::Display for ProjectionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProjectionMethod::Pca => write!(f, "pca"),
            ProjectionMethod::Tsne => write!(f, "tsne"),
            ProjectionMethod::Umap => write!(f, "umap"),
        }
    }
}

/// Label attached to one projected point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointLabel {
    pub fragment_id: String,
    pub surface: String,
}

/// n x 2 layout with provenance metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Projection2D {
    pub points: Array2<f64>,
    pub method: ProjectionMethod,
    pub seed: u64,
    pub source_labels: Vec<PointLabel>,
    /// Set when the input was degenerate (all points identical) and the
    /// layout is all zeros.
    pub degenerate: bool,
}

impl Projection2D {
    pub fn with_labels(mut self, labels: Vec<PointLabel>) -> Self {
        self.source_labels = labels;
        self
    }
}
