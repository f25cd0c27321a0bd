//! Per-token saliency: the norm of the gradient of the fragment similarity
//! score with respect to each token's embedding, in closed form.
//!
//! Mean-pool cosine distributes one shared gradient across all tokens, so
//! its saliency is constant per fragment (and zero for self-comparison);
//! greedy matching is the default because it actually discriminates.
//! Gradients differentiate the score with respect to the embeddings
//! themselves, never through the transformer.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::embedder::EmbeddingMatrix;
use crate::error::{Result, SimlensError};
use crate::simcore::{cosine_matrix, mean_row, Pooling};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SaliencyVector {
    pub fragment_id: String,
    pub paired_fragment_id: String,
    pub pooling: Pooling,
    /// One non-negative score per (non-special) token row of the input.
    pub scores: Vec<f64>,
}

/// d cos(x, y) / dx = y / (|x||y|) - (x . y) x / (|x|^3 |y|)
fn cosine_grad_wrt_x(x: &Array1<f64>, y: &Array1<f64>) -> Array1<f64> {
    let nx = x.dot(x).sqrt();
    let ny = y.dot(y).sqrt();
    let dot = x.dot(y);
    y / (nx * ny) - &(x * (dot / (nx.powi(3) * ny)))
}

fn check(e: &EmbeddingMatrix) -> Result<()> {
    for (i, row) in e.values.rows().into_iter().enumerate() {
        let n = row.dot(&row);
        if n == 0.0 || !n.is_finite() {
            return Err(SimlensError::ZeroNormEmbedding {
                fragment_id: e.fragment_id.clone(),
                row: i,
            });
        }
    }
    Ok(())
}

fn norms(grads: Array2<f64>) -> Result<Vec<f64>> {
    let out: Vec<f64> = grads
        .rows()
        .into_iter()
        .map(|r| r.dot(&r).sqrt())
        .collect();
    if out.iter().any(|x| !x.is_finite()) {
        return Err(SimlensError::NaNGradient);
    }
    Ok(out)
}

fn mean_pool_grads(e1: &EmbeddingMatrix, e2: &EmbeddingMatrix) -> Array2<f64> {
    let n1 = e1.rows() as f64;
    let u = mean_row(e1);
    let v = mean_row(e2);
    // every token of fragment 1 shares d sim / d u scaled by 1/n1
    let shared = cosine_grad_wrt_x(&u, &v) / n1;
    let mut grads = Array2::zeros((e1.rows(), e1.dim()));
    for mut row in grads.rows_mut() {
        row.assign(&shared);
    }
    grads
}

/// Subgradient of the greedy matching score with respect to the rows of
/// `e1`. Max ties break toward the lowest index.
fn greedy_grads(e1: &EmbeddingMatrix, e2: &EmbeddingMatrix) -> Result<Array2<f64>> {
    let cos = cosine_matrix(e1, e2)?.values;
    let (n1, n2) = cos.dim();
    let mut grads = Array2::zeros((e1.rows(), e1.dim()));

    // forward term: (1 / 2 n1) sum_i max_j cos(e_i, f_j)
    for i in 0..n1 {
        let mut best = 0;
        for j in 1..n2 {
            if cos[[i, j]] > cos[[i, best]] {
                best = j;
            }
        }
        let g = cosine_grad_wrt_x(&e1.values.row(i).to_owned(), &e2.values.row(best).to_owned());
        let mut row = grads.row_mut(i);
        row += &(&g / (2.0 * n1 as f64));
    }

    // backward term: (1 / 2 n2) sum_j max_i cos(e_i, f_j); only the argmax
    // row of e1 receives gradient from each column.
    for j in 0..n2 {
        let mut best = 0;
        for i in 1..n1 {
            if cos[[i, j]] > cos[[best, j]] {
                best = i;
            }
        }
        let g = cosine_grad_wrt_x(&e1.values.row(best).to_owned(), &e2.values.row(j).to_owned());
        let mut row = grads.row_mut(best);
        row += &(&g / (2.0 * n2 as f64));
    }
    Ok(grads)
}

/// Saliency for both fragments of a pair.
pub fn saliency_map(
    e1: &EmbeddingMatrix,
    e2: &EmbeddingMatrix,
    pooling: Pooling,
) -> Result<(SaliencyVector, SaliencyVector)> {
    if e1.dim() != e2.dim() {
        return Err(SimlensError::DimMismatch {
            left: e1.dim(),
            right: e2.dim(),
        });
    }
    check(e1)?;
    check(e2)?;
    let (g1, g2) = match pooling {
        Pooling::MeanPoolCosine => (mean_pool_grads(e1, e2), mean_pool_grads(e2, e1)),
        Pooling::GreedyMatch => (greedy_grads(e1, e2)?, greedy_grads(e2, e1)?),
    };
    Ok((
        SaliencyVector {
            fragment_id: e1.fragment_id.clone(),
            paired_fragment_id: e2.fragment_id.clone(),
            pooling,
            scores: norms(g1)?,
        },
        SaliencyVector {
            fragment_id: e2.fragment_id.clone(),
            paired_fragment_id: e1.fragment_id.clone(),
            pooling,
            scores: norms(g2)?,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simcore::fragment_similarity;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn emb(id: &str, values: Array2<f64>) -> EmbeddingMatrix {
        EmbeddingMatrix {
            fragment_id: id.into(),
            values,
        }
    }

    #[test]
    fn self_comparison_mean_pool_is_zero() {
        let e = emb("a", array![[1.0, 2.0, 0.5], [0.3, -1.0, 2.0]]);
        let (s1, s2) = saliency_map(&e, &e, Pooling::MeanPoolCosine).unwrap();
        for s in s1.scores.iter().chain(s2.scores.iter()) {
            assert!(s.abs() < 1e-9);
        }
    }

    #[test]
    fn mean_pool_scores_uniform() {
        let e1 = emb("a", array![[1.0, 0.0], [0.2, 0.9], [3.0, -1.0]]);
        let e2 = emb("b", array![[0.5, 0.5], [1.0, 2.0]]);
        let (s1, _) = saliency_map(&e1, &e2, Pooling::MeanPoolCosine).unwrap();
        for s in &s1.scores {
            assert!((s - s1.scores[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn mean_pool_scale_covariance() {
        let e1 = emb("a", array![[1.0, 0.3], [0.2, 0.9]]);
        let e2 = emb("b", array![[0.5, 0.5]]);
        let (s, _) = saliency_map(&e1, &e2, Pooling::MeanPoolCosine).unwrap();
        let scaled = emb("a", e1.values.clone() * 3.0);
        let (ss, _) = saliency_map(&scaled, &e2, Pooling::MeanPoolCosine).unwrap();
        for (a, b) in s.scores.iter().zip(ss.scores.iter()) {
            assert!((a / 3.0 - b).abs() < 1e-9);
        }
    }

    #[test]
    fn symmetric_call_order() {
        let e1 = emb("a", array![[1.0, 0.3], [0.2, 0.9], [-1.0, 0.4]]);
        let e2 = emb("b", array![[0.5, 0.5], [1.0, 2.0]]);
        for pooling in [Pooling::MeanPoolCosine, Pooling::GreedyMatch] {
            let (s1, s2) = saliency_map(&e1, &e2, pooling).unwrap();
            let (t2, t1) = saliency_map(&e2, &e1, pooling).unwrap();
            for (a, b) in s1.scores.iter().zip(t1.scores.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
            for (a, b) in s2.scores.iter().zip(t2.scores.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_norm_rejected() {
        let e1 = emb("a", array![[0.0, 0.0]]);
        let e2 = emb("b", array![[1.0, 0.0]]);
        assert!(matches!(
            saliency_map(&e1, &e2, Pooling::GreedyMatch),
            Err(SimlensError::ZeroNormEmbedding { .. })
        ));
    }

    /// Central finite differences of the fragment score, the stated oracle
    /// for the closed-form gradients.
    fn finite_difference_scores(
        e1: &EmbeddingMatrix,
        e2: &EmbeddingMatrix,
        pooling: Pooling,
        h: f64,
    ) -> Vec<f64> {
        let mut out = Vec::new();
        for i in 0..e1.rows() {
            let mut sq = 0.0;
            for k in 0..e1.dim() {
                let mut plus = e1.clone();
                let mut minus = e1.clone();
                plus.values[[i, k]] += h;
                minus.values[[i, k]] -= h;
                let fp = fragment_similarity(&plus, e2, pooling).unwrap().value;
                let fm = fragment_similarity(&minus, e2, pooling).unwrap().value;
                let g = (fp - fm) / (2.0 * h);
                sq += g * g;
            }
            out.push(sq.sqrt());
        }
        out
    }

    #[test]
    fn gradients_match_finite_differences_both_poolings() {
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        let e1 = emb("a", Array2::from_shape_fn((4, 6), |_| rng.gen::<f64>() - 0.5));
        let e2 = emb("b", Array2::from_shape_fn((3, 6), |_| rng.gen::<f64>() - 0.5));
        for pooling in [Pooling::MeanPoolCosine, Pooling::GreedyMatch] {
            let (s1, _) = saliency_map(&e1, &e2, pooling).unwrap();
            let fd = finite_difference_scores(&e1, &e2, pooling, 1e-5);
            for (a, b) in s1.scores.iter().zip(fd.iter()) {
                let rel = (a - b).abs() / b.abs().max(1e-8);
                assert!(rel < 1e-5, "analytic {a} vs fd {b}");
            }
        }
    }
}
