//! Token-level and fragment-level similarity.
//!
//! Three constructions: the cosine matrix between two fragments' token
//! embeddings, the attention-product matrix averaged over heads, and a
//! scalar fragment score (mean-pooled cosine or greedy token matching)
//! that saliency differentiates.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::embedder::{AttentionTensor, EmbeddingMatrix};
use crate::error::{Result, SimlensError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityKind {
    Cosine,
    AttentionProduct,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub kind: SimilarityKind,
    pub values: Array2<f64>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
}

impl SimilarityMatrix {
    pub fn with_labels(mut self, rows: Vec<String>, cols: Vec<String>) -> Self {
        self.row_labels = rows;
        self.col_labels = cols;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    MeanPoolCosine,
    GreedyMatch,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FragmentSimilarity {
    pub value: f64,
    pub pooling: Pooling,
}

fn check_dims(e1: &EmbeddingMatrix, e2: &EmbeddingMatrix) -> Result<()> {
    if e1.dim() != e2.dim() {
        return Err(SimlensError::DimMismatch {
            left: e1.dim(),
            right: e2.dim(),
        });
    }
    Ok(())
}

fn row_norms(e: &EmbeddingMatrix) -> Result<Array1<f64>> {
    let norms: Array1<f64> = e
        .values
        .rows()
        .into_iter()
        .map(|r| r.dot(&r).sqrt())
        .collect();
    for (i, &n) in norms.iter().enumerate() {
        if n == 0.0 || !n.is_finite() {
            return Err(SimlensError::ZeroNormEmbedding {
                fragment_id: e.fragment_id.clone(),
                row: i,
            });
        }
    }
    Ok(norms)
}

/// Cosine of every row of `e1` against every row of `e2`.
pub fn cosine_matrix(e1: &EmbeddingMatrix, e2: &EmbeddingMatrix) -> Result<SimilarityMatrix> {
    check_dims(e1, e2)?;
    let n1 = row_norms(e1)?;
    let n2 = row_norms(e2)?;
    let mut values = e1.values.dot(&e2.values.t());
    for i in 0..values.nrows() {
        for j in 0..values.ncols() {
            values[[i, j]] /= n1[i] * n2[j];
        }
    }
    Ok(SimilarityMatrix {
        kind: SimilarityKind::Cosine,
        values,
        row_labels: Vec::new(),
        col_labels: Vec::new(),
    })
}

/// Per-head product of the two attention matrices, averaged over heads.
///
/// When the fragments differ in length the column dimension of both
/// attentions is zero-padded to max(n1, n2) before the product; rows stay
/// unpadded so the result is n1 x n2. Padding preserves each row's
/// distribution mass and keeps entries in [0, 1] for row-stochastic inputs.
pub fn attention_product(a1: &AttentionTensor, a2: &AttentionTensor) -> Result<SimilarityMatrix> {
    if a1.heads() != a2.heads() {
        return Err(SimlensError::HeadMismatch {
            left: a1.heads(),
            right: a2.heads(),
        });
    }
    let heads = a1.heads();
    let (n1, n2) = (a1.size(), a2.size());
    let shared = n1.max(n2);
    let mut acc = Array2::<f64>::zeros((n1, n2));
    for h in 0..heads {
        for i in 0..n1 {
            for j in 0..n2 {
                let mut dot = 0.0;
                for k in 0..shared {
                    let x = if k < n1 { a1.values[[h, i, k]] } else { 0.0 };
                    let y = if k < n2 { a2.values[[h, j, k]] } else { 0.0 };
                    dot += x * y;
                }
                acc[[i, j]] += dot;
            }
        }
    }
    acc /= heads as f64;
    Ok(SimilarityMatrix {
        kind: SimilarityKind::AttentionProduct,
        values: acc,
        row_labels: Vec::new(),
        col_labels: Vec::new(),
    })
}

pub(crate) fn mean_row(e: &EmbeddingMatrix) -> Array1<f64> {
    let n = e.rows() as f64;
    e.values.sum_axis(ndarray::Axis(0)) / n
}

/// Scalar fragment similarity under the chosen pooling.
pub fn fragment_similarity(
    e1: &EmbeddingMatrix,
    e2: &EmbeddingMatrix,
    pooling: Pooling,
) -> Result<FragmentSimilarity> {
    check_dims(e1, e2)?;
    let value = match pooling {
        Pooling::MeanPoolCosine => {
            row_norms(e1)?;
            row_norms(e2)?;
            let u = mean_row(e1);
            let v = mean_row(e2);
            let nu = u.dot(&u).sqrt();
            let nv = v.dot(&v).sqrt();
            if nu == 0.0 || nv == 0.0 {
                return Err(SimlensError::ZeroNormEmbedding {
                    fragment_id: e1.fragment_id.clone(),
                    row: 0,
                });
            }
            u.dot(&v) / (nu * nv)
        }
        Pooling::GreedyMatch => {
            let cos = cosine_matrix(e1, e2)?.values;
            let forward: f64 = cos
                .rows()
                .into_iter()
                .map(|r| r.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
                .sum::<f64>()
                / cos.nrows() as f64;
            let backward: f64 = cos
                .columns()
                .into_iter()
                .map(|c| c.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
                .sum::<f64>()
                / cos.ncols() as f64;
            0.5 * (forward + backward)
        }
    };
    Ok(FragmentSimilarity { value, pooling })
}

/// Symmetric fragment-by-fragment similarity matrix with unit diagonal.
pub fn fragment_matrix(
    embeddings: &[EmbeddingMatrix],
    pooling: Pooling,
) -> Result<Array2<f64>> {
    let n = embeddings.len();
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        out[[i, i]] = 1.0;
        for j in (i + 1)..n {
            let s = fragment_similarity(&embeddings[i], &embeddings[j], pooling)?.value;
            out[[i, j]] = s;
            out[[j, i]] = s;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array3};

    fn emb(id: &str, values: Array2<f64>) -> EmbeddingMatrix {
        EmbeddingMatrix {
            fragment_id: id.into(),
            values,
        }
    }

    fn att(values: Array3<f64>) -> AttentionTensor {
        AttentionTensor {
            fragment_id: "a".into(),
            values,
        }
    }

    #[test]
    fn cosine_self_single_row() {
        let e = emb("a", array![[1.0, 0.0]]);
        let s = cosine_matrix(&e, &e).unwrap();
        assert!((s.values[[0, 0]] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_orthogonal_and_analytic() {
        let e1 = emb("a", array![[1.0, 0.0], [1.0, 1.0]]);
        let e2 = emb("b", array![[0.0, 1.0], [1.0, 0.0]]);
        let s = cosine_matrix(&e1, &e2).unwrap();
        assert!(s.values[[0, 0]].abs() < 1e-12);
        assert!((s.values[[1, 1]] - 0.70710678).abs() < 1e-8);
    }

    #[test]
    fn cosine_zero_norm_rejected() {
        let e1 = emb("a", array![[0.0, 0.0]]);
        let e2 = emb("b", array![[1.0, 0.0]]);
        assert!(matches!(
            cosine_matrix(&e1, &e2),
            Err(SimlensError::ZeroNormEmbedding { .. })
        ));
    }

    #[test]
    fn cosine_dim_mismatch() {
        let e1 = emb("a", array![[1.0, 0.0]]);
        let e2 = emb("b", array![[1.0, 0.0, 0.0]]);
        assert!(matches!(
            cosine_matrix(&e1, &e2),
            Err(SimlensError::DimMismatch { .. })
        ));
    }

    #[test]
    fn attention_product_identity_case() {
        let a1 = att(Array3::from_shape_vec((1, 2, 2), vec![1.0, 0.0, 0.0, 1.0]).unwrap());
        let a2 = att(Array3::from_shape_vec((1, 2, 2), vec![0.5, 0.5, 0.5, 0.5]).unwrap());
        let s = attention_product(&a1, &a2).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((s.values[[i, j]] - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn attention_product_uniform() {
        let uniform = Array3::from_elem((1, 4, 4), 0.25);
        let a = att(uniform);
        let s = attention_product(&a, &a).unwrap();
        for v in s.values.iter() {
            assert!((v - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_heads_equal_single_head() {
        let single = Array3::from_shape_vec((1, 2, 2), vec![0.7, 0.3, 0.2, 0.8]).unwrap();
        let mut multi = Array3::zeros((3, 2, 2));
        for h in 0..3 {
            for i in 0..2 {
                for j in 0..2 {
                    multi[[h, i, j]] = single[[0, i, j]];
                }
            }
        }
        let s1 = attention_product(&att(single), &att(multi.slice(ndarray::s![0..1, .., ..]).to_owned())).unwrap();
        let s3 = attention_product(&att(multi.clone()), &att(multi)).unwrap();
        for (a, b) in s1.values.iter().zip(s3.values.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn attention_product_head_mismatch() {
        let a1 = att(Array3::from_elem((1, 2, 2), 0.5));
        let a2 = att(Array3::from_elem((2, 2, 2), 0.5));
        assert!(matches!(
            attention_product(&a1, &a2),
            Err(SimlensError::HeadMismatch { .. })
        ));
    }

    #[test]
    fn attention_product_unequal_lengths_in_range() {
        let a1 = att(Array3::from_elem((1, 3, 3), 1.0 / 3.0));
        let a2 = att(Array3::from_elem((1, 5, 5), 0.2));
        let s = attention_product(&a1, &a2).unwrap();
        assert_eq!(s.values.dim(), (3, 5));
        for v in s.values.iter() {
            assert!(*v >= 0.0 && *v <= 1.0);
        }
    }

    #[test]
    fn fragment_self_similarity_is_one() {
        let e = emb("a", array![[1.0, 2.0], [3.0, -1.0]]);
        for pooling in [Pooling::MeanPoolCosine, Pooling::GreedyMatch] {
            let s = fragment_similarity(&e, &e, pooling).unwrap();
            assert!((s.value - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fragment_orthogonal_is_zero() {
        let e1 = emb("a", array![[1.0, 0.0]]);
        let e2 = emb("b", array![[0.0, 1.0]]);
        for pooling in [Pooling::MeanPoolCosine, Pooling::GreedyMatch] {
            let s = fragment_similarity(&e1, &e2, pooling).unwrap();
            assert!(s.value.abs() < 1e-12);
        }
    }

    #[test]
    fn greedy_match_hand_evaluated() {
        // rows {[1,0],[0,1]} vs {[1,0]}: forward (1+0)/2, backward 1
        let e1 = emb("a", array![[1.0, 0.0], [0.0, 1.0]]);
        let e2 = emb("b", array![[1.0, 0.0]]);
        let s = fragment_similarity(&e1, &e2, Pooling::GreedyMatch).unwrap();
        assert!((s.value - 0.75).abs() < 1e-12);
    }

    #[test]
    fn fragment_matrix_symmetric_unit_diagonal() {
        let es = vec![
            emb("a", array![[1.0, 0.0], [0.5, 0.5]]),
            emb("b", array![[0.0, 1.0]]),
            emb("c", array![[1.0, 1.0], [2.0, 0.1]]),
        ];
        let m = fragment_matrix(&es, Pooling::GreedyMatch).unwrap();
        for i in 0..3 {
            assert!((m[[i, i]] - 1.0).abs() < 1e-9);
            for j in 0..3 {
                assert!((m[[i, j]] - m[[j, i]]).abs() < 1e-9);
            }
        }
    }
}
