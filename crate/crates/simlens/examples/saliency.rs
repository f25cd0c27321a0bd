//! Gradient saliency for a fragment pair: which tokens drive the pooled
//! cosine similarity, under both poolings, rendered as paired bar charts.
//!
//! Run with: cargo run --example saliency

use std::fs;

use simlens::embedder::{load_backend, BackendConfig};
use simlens::report::{fixture, render_saliency};
use simlens::saliency::saliency_map;
use simlens::simcore::Pooling;

fn main() -> simlens::Result<()> {
    let a = fixture("merge_sort").expect("bundled fixture");
    let b = fixture("quick_sort").expect("bundled fixture");
    let backend = load_backend(&BackendConfig::stub(7))?;

    let seq_a = backend.tokenize(&a)?;
    let seq_b = backend.tokenize(&b)?;
    let emb_a = backend.embed(&seq_a, &a)?.select_rows(&seq_a.code_token_indices());
    let emb_b = backend.embed(&seq_b, &b)?.select_rows(&seq_b.code_token_indices());
    let tokens_a = seq_a.code_surfaces();
    let tokens_b = seq_b.code_surfaces();

    for (pooling, path) in [
        (Pooling::MeanPoolCosine, "saliency_mean.svg"),
        (Pooling::GreedyMatch, "saliency_greedy.svg"),
    ] {
        let (s_a, s_b) = saliency_map(&emb_a, &emb_b, pooling)?;
        let top = |scores: &[f64], tokens: &[String]| {
            let mut order: Vec<usize> = (0..scores.len()).collect();
            order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]));
            order
                .iter()
                .take(5)
                .map(|&i| format!("{}={:.4}", tokens[i], scores[i]))
                .collect::<Vec<_>>()
                .join(", ")
        };
        println!("{pooling:?} top tokens in {}: {}", a.id, top(&s_a.scores, &tokens_a));
        println!("{pooling:?} top tokens in {}: {}", b.id, top(&s_b.scores, &tokens_b));
        fs::write(path, render_saliency(&s_a, &tokens_a, &s_b, &tokens_b))?;
        println!("wrote {path}");
    }
    Ok(())
}
