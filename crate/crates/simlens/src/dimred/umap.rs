//! UMAP: fuzzy k-NN graph construction and stochastic cross-entropy
//! optimization with negative sampling.
//!
//! Graph weights follow w_ij = exp(-(d - rho_i) / sigma_i) with sigma_i
//! calibrated so the total weight over each point's neighborhood is
//! log2(k). The low-dimensional similarity is nu(d) = 1 / (1 + a d^(2b))
//! with (a, b) fitted from min_dist by least squares on the standard
//! target curve.

use std::collections::HashMap;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::pca::pca_project;
use super::{Projection2D, ProjectionMethod};
use crate::error::{Result, SimlensError};

#[derive(Debug, Clone)]
pub struct UmapConfig {
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub epochs: usize,
    pub negative_samples: usize,
    pub learning_rate: f64,
}

impl Default for UmapConfig {
    fn default() -> Self {
        Self {
            n_neighbors: 15,
            min_dist: 0.1,
            epochs: 200,
            negative_samples: 5,
            learning_rate: 1.0,
        }
    }
}

/// Weighted k-NN graph with the per-point calibration quantities.
#[derive(Debug, Clone)]
pub struct UmapGraph {
    pub n: usize,
    /// Symmetrized undirected edges (i < j) with weight in (0, 1].
    pub edges: Vec<(usize, usize, f64)>,
    /// Directed weights before symmetrization, keyed (i, j).
    pub directed: HashMap<(usize, usize), f64>,
    /// k nearest neighbors of each point as (index, distance), ascending.
    pub knn: Vec<Vec<(usize, f64)>>,
    pub rhos: Vec<f64>,
    pub sigmas: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct UmapOutput {
    pub projection: Projection2D,
    /// Full cross-entropy objective evaluated once per epoch.
    pub loss_trace: Vec<f64>,
}

fn euclidean(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Calibrate sigma by binary search so that
/// sum_j exp(-max(0, d_j - rho) / sigma) = log2(k) within 1e-4.
fn calibrate_sigma(dists: &[f64], rho: f64) -> f64 {
    let target = (dists.len() as f64).log2();
    let weight_sum = |sigma: f64| -> f64 {
        dists
            .iter()
            .map(|&d| (-((d - rho).max(0.0)) / sigma).exp())
            .sum()
    };
    let mut hi = 1.0;
    let mut expansions = 0;
    while weight_sum(hi) < target && expansions < 64 {
        hi *= 2.0;
        expansions += 1;
    }
    let mut lo = 1e-12;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if weight_sum(mid) > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Build the fuzzy neighborhood graph over the rows of `data`.
pub fn umap_graph(data: &Array2<f64>, config: &UmapConfig) -> Result<UmapGraph> {
    let n = data.nrows();
    let k = config.n_neighbors.min(n.saturating_sub(1)).max(2);
    if n <= k {
        return Err(SimlensError::TooFewPoints { needed: k, got: n });
    }

    let mut knn = Vec::with_capacity(n);
    for i in 0..n {
        let mut dists: Vec<(usize, f64)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (j, euclidean(data.row(i), data.row(j))))
            .collect();
        // ties broken by point index
        dists.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
        dists.truncate(k);
        knn.push(dists);
    }

    let mut rhos = Vec::with_capacity(n);
    let mut sigmas = Vec::with_capacity(n);
    let mut directed = HashMap::new();
    for i in 0..n {
        let rho = knn[i][0].1;
        let dists: Vec<f64> = knn[i].iter().map(|&(_, d)| d).collect();
        let sigma = calibrate_sigma(&dists, rho);
        for &(j, d) in &knn[i] {
            let w = (-((d - rho).max(0.0)) / sigma).exp();
            directed.insert((i, j), w);
        }
        rhos.push(rho);
        sigmas.push(sigma);
    }

    // w = a + b - a*b over the union of directed edges
    let mut edges = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (&(i, j), &a) in &directed {
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        if !seen.insert((lo, hi)) {
            continue;
        }
        let b = directed.get(&(j, i)).copied().unwrap_or(0.0);
        let (a, b) = if i < j { (a, b) } else { (b, a) };
        edges.push((lo, hi, a + b - a * b));
    }
    edges.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));

    Ok(UmapGraph {
        n,
        edges,
        directed,
        knn,
        rhos,
        sigmas,
    })
}

/// Fit the similarity-curve parameters (a, b) so that
/// 1 / (1 + a x^(2b)) least-squares matches the target
/// psi(x) = 1 for x <= min_dist, exp(-(x - min_dist)) otherwise.
pub fn fit_ab(min_dist: f64) -> (f64, f64) {
    let xs: Vec<f64> = (1..=300).map(|i| i as f64 * 0.01).collect();
    let target: Vec<f64> = xs
        .iter()
        .map(|&x| if x <= min_dist { 1.0 } else { (-(x - min_dist)).exp() })
        .collect();
    let loss = |a: f64, b: f64| -> f64 {
        xs.iter()
            .zip(target.iter())
            .map(|(&x, &t)| {
                let v = 1.0 / (1.0 + a * x.powf(2.0 * b));
                (v - t) * (v - t)
            })
            .sum()
    };
    // Deterministic coarse-to-fine grid search.
    let (mut best_a, mut best_b) = (1.0, 1.0);
    let mut best = loss(best_a, best_b);
    let (mut a_lo, mut a_hi) = (0.01_f64, 20.0_f64);
    let (mut b_lo, mut b_hi) = (0.1_f64, 3.0_f64);
    for _ in 0..4 {
        for ai in 0..60 {
            let a = a_lo * (a_hi / a_lo).powf(ai as f64 / 59.0);
            for bi in 0..60 {
                let b = b_lo + (b_hi - b_lo) * bi as f64 / 59.0;
                let l = loss(a, b);
                if l < best {
                    best = l;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        a_lo = (best_a * 0.5).max(1e-3);
        a_hi = best_a * 2.0;
        b_lo = (best_b - 0.3).max(0.05);
        b_hi = best_b + 0.3;
    }
    (best_a, best_b)
}

/// Optimize the 2-D layout by SGD over positive edges with negative
/// sampling, starting from the PCA projection.
pub fn umap_optimize(
    data: &Array2<f64>,
    graph: &UmapGraph,
    config: &UmapConfig,
    seed: u64,
) -> Result<UmapOutput> {
    let n = graph.n;
    let (a, b) = fit_ab(config.min_dist);

    let pca = pca_project(data, seed)?;
    let mut y = pca.points;
    let max_abs = y.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    if max_abs > 0.0 {
        y *= 10.0 / max_abs;
    }

    let mut weights: HashMap<(usize, usize), f64> = HashMap::new();
    for &(i, j, w) in &graph.edges {
        weights.insert((i, j), w);
    }
    let cross_entropy = |y: &Array2<f64>| -> f64 {
        let mut loss = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let w = weights.get(&(i, j)).copied().unwrap_or(0.0);
                let dx = y[[i, 0]] - y[[j, 0]];
                let dy = y[[i, 1]] - y[[j, 1]];
                let d2 = dx * dx + dy * dy;
                let nu = (1.0 / (1.0 + a * d2.max(1e-12).powf(b))).clamp(1e-12, 1.0 - 1e-12);
                if w > 0.0 {
                    loss += w * (w / nu).ln();
                }
                if w < 1.0 {
                    loss += (1.0 - w) * ((1.0 - w) / (1.0 - nu)).ln();
                }
            }
        }
        loss
    };

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut loss_trace = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let alpha = config.learning_rate * (1.0 - epoch as f64 / config.epochs as f64);
        for &(i, j, w) in &graph.edges {
            if rng.gen::<f64>() >= w {
                continue;
            }
            let dx = y[[i, 0]] - y[[j, 0]];
            let dy = y[[i, 1]] - y[[j, 1]];
            let d2 = dx * dx + dy * dy;
            if d2 > 1e-12 {
                let coeff = (-2.0 * a * b * d2.powf(b - 1.0)) / (1.0 + a * d2.powf(b));
                let gx = (coeff * dx).clamp(-4.0, 4.0);
                let gy = (coeff * dy).clamp(-4.0, 4.0);
                y[[i, 0]] += alpha * gx;
                y[[i, 1]] += alpha * gy;
                y[[j, 0]] -= alpha * gx;
                y[[j, 1]] -= alpha * gy;
            }
            for _ in 0..config.negative_samples {
                let t = rng.gen_range(0..n);
                if t == i {
                    continue;
                }
                let dx = y[[i, 0]] - y[[t, 0]];
                let dy = y[[i, 1]] - y[[t, 1]];
                let d2 = dx * dx + dy * dy;
                if d2 <= 1e-12 {
                    continue;
                }
                let coeff = (2.0 * b) / ((0.001 + d2) * (1.0 + a * d2.powf(b)));
                let gx = (coeff * dx).clamp(-4.0, 4.0);
                let gy = (coeff * dy).clamp(-4.0, 4.0);
                y[[i, 0]] += alpha * gx;
                y[[i, 1]] += alpha * gy;
            }
        }
        loss_trace.push(cross_entropy(&y));
    }

    Ok(UmapOutput {
        projection: Projection2D {
            points: y,
            method: ProjectionMethod::Umap,
            seed,
            source_labels: Vec::new(),
            degenerate: pca.degenerate,
        },
        loss_trace,
    })
}
