//! Affinity graphs, Laplacians, and the ρ separability metric.

use rayon::prelude::*;

use crate::error::{Result, SsrError};
use crate::linalg::{sym_eig, Which};
use crate::mat::{DataMatrix, Mat};

/// Entries smaller than this are flushed to exact zero so that connectivity
/// questions ("is there an edge?") have crisp answers.
const WEIGHT_FLUSH: f64 = 1e-300;

/// Symmetric nonnegative affinity matrix with a zero diagonal.
#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    w: Mat,
}

impl SimilarityMatrix {
    pub fn new(w: Mat) -> Result<Self> {
        if !w.is_square() {
            return Err(SsrError::validation("similarity matrix must be square"));
        }
        if !w.all_finite() {
            return Err(SsrError::validation(
                "similarity matrix contains non-finite entries",
            ));
        }
        if w.max_asymmetry() != 0.0 {
            return Err(SsrError::validation(
                "similarity matrix must be exactly symmetric",
            ));
        }
        for i in 0..w.rows() {
            if w[(i, i)] != 0.0 {
                return Err(SsrError::validation(format!(
                    "diagonal entry {i} must be zero"
                )));
            }
            for j in 0..w.cols() {
                if w[(i, j)] < 0.0 {
                    return Err(SsrError::validation(format!(
                        "negative similarity at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(SimilarityMatrix { w })
    }

    pub fn as_mat(&self) -> &Mat {
        &self.w
    }

    pub fn n(&self) -> usize {
        self.w.rows()
    }
}

/// Unnormalized graph Laplacian L = diag(W·1) − W, with the degrees kept.
#[derive(Debug, Clone)]
pub struct LaplacianMatrix {
    pub matrix: Mat,
    pub degrees: Vec<f64>,
}

/// How kNN neighborhoods are symmetrized into an undirected graph.
///
/// The union rule keeps graphs better connected and is the default; mutual
/// kNN is available for experimentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetrization {
    Union,
    Mutual,
}

/// Self-tuning kNN similarity: Wᵢⱼ = exp(−dᵢⱼ²/(σᵢσⱼ)) with σᵢ the distance
/// from sample i to its k-th nearest neighbor, union-symmetrized.
pub fn build_knn_similarity(points: &DataMatrix, k: usize) -> Result<SimilarityMatrix> {
    build_knn_similarity_with(points, k, Symmetrization::Union)
}

pub fn build_knn_similarity_with(
    points: &DataMatrix,
    k: usize,
    sym: Symmetrization,
) -> Result<SimilarityMatrix> {
    let n = points.n_samples();
    if k < 1 {
        return Err(SsrError::validation("k must be at least 1"));
    }
    if k >= n {
        return Err(SsrError::validation(format!(
            "k = {k} must be smaller than the sample count {n}"
        )));
    }

    // Pairwise distances; rows are independent, so compute them in parallel.
    let dist_rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| points.sample_distance(i, j)).collect())
        .collect();

    // k nearest neighbors per point, ties broken by index for determinism.
    let mut sigma = vec![0.0; n];
    let mut neighbors: Vec<Vec<usize>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| {
            dist_rows[i][a]
                .partial_cmp(&dist_rows[i][b])
                .unwrap()
                .then(a.cmp(&b))
        });
        sigma[i] = dist_rows[i][order[k - 1]];
        order.truncate(k);
        neighbors.push(order);
    }

    // Duplicate points give sigma = 0; fall back to the smallest positive
    // distance in the dataset so the scale stays meaningful.
    if sigma.contains(&0.0) {
        let mut min_pos = f64::INFINITY;
        for (i, row) in dist_rows.iter().enumerate() {
            for &d in &row[i + 1..] {
                if d > 0.0 && d < min_pos {
                    min_pos = d;
                }
            }
        }
        if !min_pos.is_finite() {
            return Err(SsrError::validation(
                "all sample distances are zero; cannot build a similarity graph",
            ));
        }
        for s in sigma.iter_mut() {
            if *s == 0.0 {
                *s = min_pos;
            }
        }
    }

    let mut w = Mat::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let forward = neighbors[i].contains(&j);
            let backward = neighbors[j].contains(&i);
            let keep = match sym {
                Symmetrization::Union => forward || backward,
                Symmetrization::Mutual => forward && backward,
            };
            if keep {
                let d = dist_rows[i][j];
                let mut weight = (-d * d / (sigma[i] * sigma[j])).exp();
                if weight < WEIGHT_FLUSH {
                    weight = 0.0;
                }
                w[(i, j)] = weight;
                w[(j, i)] = weight;
            }
        }
    }
    SimilarityMatrix::new(w)
}

pub fn laplacian(w: &SimilarityMatrix) -> LaplacianMatrix {
    let n = w.n();
    let wm = w.as_mat();
    let degrees: Vec<f64> = (0..n).map(|i| wm.row(i).iter().sum()).collect();
    let mut l = wm.scale(-1.0);
    for i in 0..n {
        l[(i, i)] += degrees[i];
    }
    LaplacianMatrix { matrix: l, degrees }
}

/// Component count and per-node labels (numbered in order of first visit),
/// using strict Wᵢⱼ > 0 as the edge criterion.
pub fn connected_components(w: &SimilarityMatrix) -> (usize, Vec<usize>) {
    let n = w.n();
    let wm = w.as_mat();
    let mut labels = vec![usize::MAX; n];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        if labels[start] != usize::MAX {
            continue;
        }
        labels[start] = count;
        stack.push(start);
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if labels[j] == usize::MAX && wm[(i, j)] > 0.0 {
                    labels[j] = count;
                    stack.push(j);
                }
            }
        }
        count += 1;
    }
    (count, labels)
}

/// Spectral-gap separability report for K clusters.
#[derive(Debug, Clone)]
pub struct RhoReport {
    pub rho: f64,
    pub lambda_k: f64,
    pub lambda_k_plus_1: f64,
    pub k: usize,
}

/// ρ = (λ_{K+1} − λ_K)/λ_{K+1} over the ascending Laplacian spectrum.
///
/// ρ = 1 exactly when the graph splits into K components (λ_K = 0 while
/// λ_{K+1} > 0); ρ = 0 when even λ_{K+1} vanishes (more than K components).
/// Eigenvalues are clamped at zero: a PSD Laplacian's small negative values
/// are roundoff, and clamping keeps ρ inside [0, 1].
pub fn rho(l: &LaplacianMatrix, k: usize) -> Result<RhoReport> {
    let n = l.matrix.rows();
    if k < 1 || k >= n {
        return Err(SsrError::validation(format!(
            "K must be in 1..{n}, got {k}"
        )));
    }
    let basis = sym_eig(&l.matrix, k + 1, Which::Smallest)?;
    let lambda_k = basis.values[k - 1].max(0.0);
    let lambda_k1 = basis.values[k].max(0.0);
    let zero_floor = 1e-12 * l.matrix.max_abs().max(1.0);
    let rho = if lambda_k1 <= zero_floor {
        0.0
    } else {
        (lambda_k1 - lambda_k) / lambda_k1
    };
    Ok(RhoReport {
        rho,
        lambda_k,
        lambda_k_plus_1: lambda_k1,
        k,
    })
}
