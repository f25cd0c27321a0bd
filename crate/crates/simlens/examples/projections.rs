//! Project the stacked token embeddings of two fixtures to 2-D with PCA,
//! exact t-SNE and UMAP, writing one SVG scatter per method.
//!
//! Run with: cargo run --example projections

use std::fs;

use ndarray::Array2;
use simlens::dimred::{
    pca_project, tsne_project, umap_graph, umap_optimize, PointLabel, TsneConfig, UmapConfig,
};
use simlens::embedder::{load_backend, BackendConfig};
use simlens::report::{fixture, render_scatter};

fn main() -> simlens::Result<()> {
    let seed = 7;
    let backend = load_backend(&BackendConfig::stub(seed))?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<PointLabel> = Vec::new();
    for name in ["bubble_sort", "quick_sort"] {
        let fragment = fixture(name).expect("bundled fixture");
        let seq = backend.tokenize(&fragment)?;
        let keep = seq.code_token_indices();
        let emb = backend.embed(&seq, &fragment)?.select_rows(&keep);
        for row in emb.values.rows() {
            rows.push(row.to_vec());
        }
        for surface in seq.code_surfaces() {
            labels.push(PointLabel {
                fragment_id: fragment.id.clone(),
                surface,
            });
        }
    }
    let dim = rows[0].len();
    let stacked = Array2::from_shape_fn((rows.len(), dim), |(i, j)| rows[i][j]);

    let pca = pca_project(&stacked, seed)?.with_labels(labels.clone());
    fs::write("pca.svg", render_scatter(&pca, "PCA: bubble_sort + quick_sort"))?;

    let tsne = tsne_project(&stacked, &TsneConfig::default(), seed)?;
    println!(
        "t-SNE KL: {:.4} -> {:.4} over {} iterations",
        tsne.kl_trace.first().unwrap(),
        tsne.kl_trace.last().unwrap(),
        tsne.kl_trace.len()
    );
    let tsne = tsne.projection.with_labels(labels.clone());
    fs::write("tsne.svg", render_scatter(&tsne, "t-SNE: bubble_sort + quick_sort"))?;

    let config = UmapConfig::default();
    let graph = umap_graph(&stacked, &config)?;
    let umap = umap_optimize(&stacked, &graph, &config, seed)?;
    println!(
        "UMAP cross-entropy: {:.4} -> {:.4} over {} epochs",
        umap.loss_trace.first().unwrap(),
        umap.loss_trace.last().unwrap(),
        umap.loss_trace.len()
    );
    let umap = umap.projection.with_labels(labels);
    fs::write("umap.svg", render_scatter(&umap, "UMAP: bubble_sort + quick_sort"))?;

    println!("wrote pca.svg, tsne.svg, umap.svg");
    Ok(())
}
