//! Exact (all-pairs) t-SNE.
//!
//! Gaussian conditional probabilities with per-point bandwidths found by
//! binary search on the conditional entropy, symmetrized joint P, Student-t
//! low-dimensional kernel, and momentum gradient descent with early
//! exaggeration. Exactness is affordable at <= 512 tokens and keeps every
//! quantity checkable against direct formula evaluation.

use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::pca::pca_project;
use super::{Projection2D, ProjectionMethod};
use crate::error::{Result, SimlensError};

#[derive(Debug, Clone)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    /// Iterations of early exaggeration; momentum switches 0.5 -> 0.8 here.
    pub exaggeration_iters: usize,
}

impl Default for TsneConfig {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: 200.0,
            early_exaggeration: 12.0,
            exaggeration_iters: 250,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TsneOutput {
    pub projection: Projection2D,
    /// KL(P || Q) against the unexaggerated P, one entry per iteration.
    pub kl_trace: Vec<f64>,
}

const DIST_FLOOR: f64 = 1e-12;

pub(crate) fn squared_distances(data: &Array2<f64>) -> Array2<f64> {
    let n = data.nrows();
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let mut d2 = 0.0;
            for k in 0..data.ncols() {
                let diff = data[[i, k]] - data[[j, k]];
                d2 += diff * diff;
            }
            out[[i, j]] = d2;
            out[[j, i]] = d2;
        }
    }
    out
}

/// Conditional distribution p_{j|i} for one point, with its precision found
/// by binary search so the Shannon entropy (bits) matches log2(perplexity)
/// within 1e-4. Returns (probabilities over j != i, sigma).
pub fn conditional_row(sq_dists: &[f64], i: usize, perplexity: f64) -> (Vec<f64>, f64) {
    let target = perplexity.log2();
    let mut beta = 1.0; // 1 / (2 sigma^2)
    let mut beta_min = f64::NEG_INFINITY;
    let mut beta_max = f64::INFINITY;
    let mut probs = vec![0.0; sq_dists.len()];
    for _ in 0..200 {
        let mut sum = 0.0;
        for (j, &d2) in sq_dists.iter().enumerate() {
            probs[j] = if j == i { 0.0 } else { (-beta * d2).exp() };
            sum += probs[j];
        }
        let sum = sum.max(DIST_FLOOR);
        let mut entropy_nats = 0.0;
        for p in probs.iter_mut() {
            *p /= sum;
            if *p > 0.0 {
                entropy_nats -= *p * p.ln();
            }
        }
        let entropy_bits = entropy_nats / std::f64::consts::LN_2;
        let diff = entropy_bits - target;
        if diff.abs() < 1e-5 {
            break;
        }
        if diff > 0.0 {
            beta_min = beta;
            beta = if beta_max.is_finite() {
                0.5 * (beta + beta_max)
            } else {
                beta * 2.0
            };
        } else {
            beta_max = beta;
            beta = if beta_min.is_finite() {
                0.5 * (beta + beta_min)
            } else {
                beta * 0.5
            };
        }
    }
    let sigma = (1.0 / (2.0 * beta)).sqrt();
    (probs, sigma)
}

/// Symmetrized joint probabilities P_ij = (p_{j|i} + p_{i|j}) / (2n),
/// together with the calibrated per-point sigmas.
pub fn joint_probabilities(
    data: &Array2<f64>,
    perplexity: f64,
) -> Result<(Array2<f64>, Vec<f64>)> {
    let n = data.nrows();
    if n < 4 {
        return Err(SimlensError::TooFewPoints { needed: 3, got: n });
    }
    let clamped = perplexity.min((n as f64 - 1.0) / 3.0);
    if clamped < 2.0 {
        return Err(SimlensError::PerplexityTooLarge { perplexity, n });
    }
    let sq = squared_distances(data);
    let mut cond = Array2::zeros((n, n));
    let mut sigmas = Vec::with_capacity(n);
    for i in 0..n {
        let row: Vec<f64> = sq.row(i).to_vec();
        let (probs, sigma) = conditional_row(&row, i, clamped);
        for (j, p) in probs.into_iter().enumerate() {
            cond[[i, j]] = p;
        }
        sigmas.push(sigma);
    }
    let mut joint = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            joint[[i, j]] = ((cond[[i, j]] + cond[[j, i]]) / (2.0 * n as f64)).max(DIST_FLOOR);
        }
        joint[[i, i]] = 0.0;
    }
    Ok((joint, sigmas))
}

fn student_t_kernel(y: &Array2<f64>) -> (Array2<f64>, f64) {
    let n = y.nrows();
    let mut num = Array2::zeros((n, n));
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = y[[i, 0]] - y[[j, 0]];
            let dy = y[[i, 1]] - y[[j, 1]];
            let k = 1.0 / (1.0 + dx * dx + dy * dy);
            num[[i, j]] = k;
            num[[j, i]] = k;
            total += 2.0 * k;
        }
    }
    (num, total.max(DIST_FLOOR))
}

/// KL(P || Q) at layout `y` and its analytic gradient,
/// dC/dy_i = 4 sum_j (P_ij - Q_ij) (y_i - y_j) / (1 + |y_i - y_j|^2).
pub fn kl_and_grad(p: &Array2<f64>, y: &Array2<f64>) -> (f64, Array2<f64>) {
    let n = y.nrows();
    let (num, total) = student_t_kernel(y);
    let mut kl = 0.0;
    let mut grad = Array2::zeros((n, 2));
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let q = (num[[i, j]] / total).max(DIST_FLOOR);
            let pij = p[[i, j]];
            if pij > 0.0 {
                kl += pij * (pij / q).ln();
            }
            let coeff = 4.0 * (pij - q) * num[[i, j]];
            grad[[i, 0]] += coeff * (y[[i, 0]] - y[[j, 0]]);
            grad[[i, 1]] += coeff * (y[[i, 1]] - y[[j, 1]]);
        }
    }
    (kl, grad)
}

/// Run exact t-SNE on the rows of `data`.
pub fn tsne_project(data: &Array2<f64>, config: &TsneConfig, seed: u64) -> Result<TsneOutput> {
    let n = data.nrows();
    let (p_true, _sigmas) = joint_probabilities(data, config.perplexity)?;

    // Init from PCA scaled by 1e-4; seeded Gaussian fallback when PCA is
    // degenerate (all input points identical).
    let pca = pca_project(data, seed)?;
    let mut y = if pca.degenerate {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, 2), |_| (rng.gen::<f64>() - 0.5) * 2.0)
    } else {
        pca.points
    };
    y *= 1e-4;

    let mut velocity = Array2::<f64>::zeros((n, 2));
    // Per-parameter adaptive gains, as in the reference optimizer: grown when
    // the gradient opposes the velocity, shrunk when they agree. Without them
    // the fixed learning rate oscillates on small point sets.
    let mut gains = Array2::<f64>::from_elem((n, 2), 1.0);
    const MIN_GAIN: f64 = 0.01;
    let mut kl_trace = Vec::with_capacity(config.iterations);
    for iter in 0..config.iterations {
        let exaggerating = iter < config.exaggeration_iters;
        let momentum = if exaggerating { 0.5 } else { 0.8 };

        // Single kernel evaluation serves both the (possibly exaggerated)
        // gradient and the true-P KL trace. P and the kernel are symmetric,
        // so each unordered pair is visited once and contributes to both
        // gradient rows.
        let mut kernels = Vec::with_capacity(n * (n - 1) / 2);
        let mut total = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = y[[i, 0]] - y[[j, 0]];
                let dy = y[[i, 1]] - y[[j, 1]];
                let k = 1.0 / (1.0 + dx * dx + dy * dy);
                kernels.push(k);
                total += 2.0 * k;
            }
        }
        let total = total.max(DIST_FLOOR);
        let mut grad = Array2::<f64>::zeros((n, 2));
        let mut kl = 0.0;
        let mut idx = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                let k = kernels[idx];
                idx += 1;
                let q = (k / total).max(DIST_FLOOR);
                let pij = p_true[[i, j]];
                if pij > 0.0 {
                    kl += 2.0 * pij * (pij / q).ln();
                }
                let p_eff = if exaggerating {
                    pij * config.early_exaggeration
                } else {
                    pij
                };
                let coeff = 4.0 * (p_eff - q) * k;
                let gx = coeff * (y[[i, 0]] - y[[j, 0]]);
                let gy = coeff * (y[[i, 1]] - y[[j, 1]]);
                grad[[i, 0]] += gx;
                grad[[i, 1]] += gy;
                grad[[j, 0]] -= gx;
                grad[[j, 1]] -= gy;
            }
        }
        kl_trace.push(kl);

        for i in 0..n {
            for k in 0..2 {
                let same_sign = (grad[[i, k]] > 0.0) == (velocity[[i, k]] > 0.0);
                gains[[i, k]] = if same_sign {
                    (gains[[i, k]] * 0.8).max(MIN_GAIN)
                } else {
                    gains[[i, k]] + 0.2
                };
                velocity[[i, k]] = momentum * velocity[[i, k]]
                    - config.learning_rate * gains[[i, k]] * grad[[i, k]];
            }
        }
        y += &velocity;

        let mean = y.mean_axis(Axis(0)).unwrap();
        for mut row in y.rows_mut() {
            row -= &mean;
        }
    }

    Ok(TsneOutput {
        projection: Projection2D {
            points: y,
            method: ProjectionMethod::Tsne,
            seed,
            source_labels: Vec::new(),
            degenerate: false,
        },
        kl_trace,
    })
}
