//! Property tests for the similarity invariants.

use ndarray::{Array2, Array3};
use proptest::prelude::*;

use simlens::embedder::{AttentionTensor, EmbeddingMatrix};
use simlens::simcore::{attention_product, cosine_matrix, fragment_similarity, Pooling};

fn emb(id: &str, rows: &[Vec<f64>]) -> EmbeddingMatrix {
    let dim = rows[0].len();
    let flat: Vec<f64> = rows.iter().flatten().cloned().collect();
    EmbeddingMatrix {
        fragment_id: id.into(),
        values: Array2::from_shape_vec((rows.len(), dim), flat).unwrap(),
    }
}

/// Rows with norms bounded away from zero.
fn embedding_strategy(rows: usize, dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(
        prop::collection::vec(-10.0..10.0f64, dim),
        rows..=rows,
    )
    .prop_filter("nonzero rows", |rows| {
        rows.iter()
            .all(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt() > 1e-3)
    })
}

/// Row-stochastic attention tensors from raw positive weights.
fn attention_strategy(heads: usize, n: usize) -> impl Strategy<Value = AttentionTensor> {
    prop::collection::vec(0.01..1.0f64, heads * n * n).prop_map(move |raw| {
        let mut values = Array3::from_shape_vec((heads, n, n), raw).unwrap();
        for h in 0..heads {
            for i in 0..n {
                let sum: f64 = (0..n).map(|j| values[[h, i, j]]).sum();
                for j in 0..n {
                    values[[h, i, j]] /= sum;
                }
            }
        }
        AttentionTensor {
            fragment_id: "p".into(),
            values,
        }
    })
}

proptest! {
    #[test]
    fn cosine_scale_invariance(
        rows in embedding_strategy(3, 4),
        other in embedding_strategy(2, 4),
        scale in 0.01..100.0f64,
    ) {
        let e1 = emb("a", &rows);
        let e2 = emb("b", &other);
        let base = cosine_matrix(&e1, &e2).unwrap();
        let scaled_rows: Vec<Vec<f64>> = rows.iter()
            .map(|r| r.iter().map(|x| x * scale).collect())
            .collect();
        let scaled = cosine_matrix(&emb("a", &scaled_rows), &e2).unwrap();
        for (x, y) in base.values.iter().zip(scaled.values.iter()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        for pooling in [Pooling::MeanPoolCosine, Pooling::GreedyMatch] {
            let s = fragment_similarity(&e1, &e2, pooling).unwrap().value;
            let t = fragment_similarity(&emb("a", &scaled_rows), &e2, pooling).unwrap().value;
            prop_assert!((s - t).abs() < 1e-9);
        }
    }

    #[test]
    fn greedy_match_symmetric(
        rows in embedding_strategy(3, 4),
        other in embedding_strategy(5, 4),
    ) {
        let e1 = emb("a", &rows);
        let e2 = emb("b", &other);
        let ab = fragment_similarity(&e1, &e2, Pooling::GreedyMatch).unwrap().value;
        let ba = fragment_similarity(&e2, &e1, Pooling::GreedyMatch).unwrap().value;
        prop_assert!((ab - ba).abs() < 1e-12);
    }

    #[test]
    fn attention_product_unit_interval(
        a1 in attention_strategy(2, 3),
        a2 in attention_strategy(2, 5),
    ) {
        let s = attention_product(&a1, &a2).unwrap();
        for v in s.values.iter() {
            prop_assert!(*v >= 0.0 && *v <= 1.0);
        }
    }

    #[test]
    fn cosine_values_bounded(
        rows in embedding_strategy(2, 3),
        other in embedding_strategy(4, 3),
    ) {
        let s = cosine_matrix(&emb("a", &rows), &emb("b", &other)).unwrap();
        for v in s.values.iter() {
            prop_assert!(*v >= -1.0 - 1e-12 && *v <= 1.0 + 1e-12);
        }
    }
}
