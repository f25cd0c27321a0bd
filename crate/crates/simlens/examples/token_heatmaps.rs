//! Token-level similarity between two fixtures: the cosine matrix over
//! per-token embeddings and the attention-product matrix, each rendered as
//! an SVG heatmap.
//!
//! Run with: cargo run --example token_heatmaps

use std::fs;

use simlens::embedder::{load_backend, BackendConfig};
use simlens::report::{fixture, render_heatmap};
use simlens::simcore::{attention_product, cosine_matrix, fragment_similarity, Pooling};

fn main() -> simlens::Result<()> {
    let a = fixture("bubble_sort").expect("bundled fixture");
    let b = fixture("insertion_sort").expect("bundled fixture");
    let backend = load_backend(&BackendConfig::stub(7))?;

    let seq_a = backend.tokenize(&a)?;
    let seq_b = backend.tokenize(&b)?;
    let keep_a = seq_a.code_token_indices();
    let keep_b = seq_b.code_token_indices();

    let emb_a = backend.embed(&seq_a, &a)?.select_rows(&keep_a);
    let emb_b = backend.embed(&seq_b, &b)?.select_rows(&keep_b);
    let att_a = backend.attentions(&seq_a, &a)?.restrict(&keep_a);
    let att_b = backend.attentions(&seq_b, &b)?.restrict(&keep_b);

    let cosine = cosine_matrix(&emb_a, &emb_b)?
        .with_labels(seq_a.code_surfaces(), seq_b.code_surfaces());
    let attention = attention_product(&att_a, &att_b)?
        .with_labels(seq_a.code_surfaces(), seq_b.code_surfaces());

    for pooling in [Pooling::MeanPoolCosine, Pooling::GreedyMatch] {
        let sim = fragment_similarity(&emb_a, &emb_b, pooling)?;
        println!("{:?}: {:.6}", pooling, sim.value);
    }

    fs::write(
        "cosine_heatmap.svg",
        render_heatmap(
            &cosine.values,
            &cosine.row_labels,
            &cosine.col_labels,
            "token cosine: bubble_sort vs insertion_sort",
        ),
    )?;
    fs::write(
        "attention_heatmap.svg",
        render_heatmap(
            &attention.values,
            &attention.row_labels,
            &attention.col_labels,
            "attention product: bubble_sort vs insertion_sort",
        ),
    )?;
    println!("wrote cosine_heatmap.svg and attention_heatmap.svg");
    Ok(())
}
