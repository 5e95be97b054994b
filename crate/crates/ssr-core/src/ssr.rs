//! The two SSR pipelines — kernel (graph spectrum) and original-data (SVD) —
//! plus the representation-side artifacts: virtual data, dictionaries, code
//! Gram matrices, and the ℓ₂/ℓ₁ sparsity measure.

use crate::error::{Result, SsrError};
use crate::graph::{laplacian, SimilarityMatrix};
use crate::linalg::{compact_svd, sym_eig, EigenBasis, SvdFactors, Which};
use crate::mat::{DataMatrix, Mat};
use crate::nscrt::{nscrt, NscrtOptions, SparseCodes};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsrVariant {
    Kernel,
    Original,
}

/// The spectral factor the codes were derived from.
#[derive(Debug, Clone)]
pub enum SsrBasis {
    Kernel(EigenBasis),
    Original(SvdFactors),
}

#[derive(Debug, Clone)]
pub struct SsrResult {
    pub codes: SparseCodes,
    pub basis: SsrBasis,
    pub variant: SsrVariant,
    pub r: usize,
    pub lambda: f64,
}

/// Kernel-variant SSR: sparse codes from the `r` smallest eigenvectors of
/// the graph Laplacian of `w`. `lambda = None` uses the 0.6/√n default.
pub fn ssrk(w: &SimilarityMatrix, r: usize, lambda: Option<f64>) -> Result<SsrResult> {
    let n = w.n();
    if r < 1 || r > n {
        return Err(SsrError::validation(format!(
            "r must be in 1..={n}, got {r}"
        )));
    }
    let l = laplacian(w);
    let eigen = sym_eig(&l.matrix, r, Which::Smallest)?;
    let opts = NscrtOptions {
        lambda,
        ..Default::default()
    };
    let codes = nscrt(&eigen.vectors, &opts)?;
    let lambda = codes.lambda;
    Ok(SsrResult {
        codes,
        basis: SsrBasis::Kernel(eigen),
        variant: SsrVariant::Kernel,
        r,
        lambda,
    })
}

/// Original-data SSR: sparse codes from the stacked matrix
/// [(1/√n)·𝟙ᵀ ; V₁..V_{r−1}] where V holds the top right singular vectors
/// of the (centered) data. The caller must pass near-centered data; exact
/// centering is applied internally.
pub fn ssro(a: &DataMatrix, r: usize, lambda: Option<f64>) -> Result<SsrResult> {
    let n = a.n_samples();
    if r < 1 || r > n {
        return Err(SsrError::validation(format!(
            "r must be in 1..={n}, got {r}"
        )));
    }
    check_centered(a)?;
    let centered = center_data(a);
    let f = compact_svd(centered.as_mat())?;
    if r - 1 > f.rank() {
        return Err(SsrError::validation(format!(
            "r-1 = {} exceeds the data rank {}",
            r - 1,
            f.rank()
        )));
    }

    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let mut x = Mat::zeros(r, n);
    for j in 0..n {
        x[(0, j)] = inv_sqrt_n;
    }
    for i in 1..r {
        for j in 0..n {
            x[(i, j)] = f.v[(i - 1, j)];
        }
    }

    let opts = NscrtOptions {
        lambda,
        ..Default::default()
    };
    let codes = nscrt(&x, &opts)?;
    let lambda = codes.lambda;
    Ok(SsrResult {
        codes,
        basis: SsrBasis::Original(f),
        variant: SsrVariant::Original,
        r,
        lambda,
    })
}

/// Errors unless every feature mean is ~0 relative to the data scale.
fn check_centered(a: &DataMatrix) -> Result<()> {
    let m = a.as_mat();
    let n = m.cols() as f64;
    let scale = m.frobenius_norm();
    let mut dev = 0.0f64;
    for i in 0..m.rows() {
        let row_sum: f64 = m.row(i).iter().sum();
        dev += (row_sum / n).powi(2);
    }
    if dev.sqrt() * n.sqrt() > 1e-8 * scale {
        return Err(SsrError::validation(
            "data is not mean-removed; subtract the per-feature mean (see center_data) first",
        ));
    }
    Ok(())
}

/// Subtracts the per-feature (row) mean from every sample.
pub fn center_data(a: &DataMatrix) -> DataMatrix {
    let m = a.as_mat();
    let n = m.cols();
    let mut out = m.clone();
    for i in 0..m.rows() {
        let mean: f64 = m.row(i).iter().sum::<f64>() / n as f64;
        for j in 0..n {
            out[(i, j)] -= mean;
        }
    }
    DataMatrix::new(out).expect("centering preserves shape and finiteness")
}

/// Virtual data Ã with ÃᵀÃ = λₙI − L: row i is √(λₙ−λᵢ) times eigenvector i.
/// Requires the full spectrum (all n eigenpairs of L).
pub fn virtual_data(eigen: &EigenBasis) -> Result<Mat> {
    let n = eigen.source_dim;
    if eigen.values.len() != n || eigen.vectors.rows() != n {
        return Err(SsrError::validation(format!(
            "virtual data needs the full spectrum: got {} of {n} eigenpairs",
            eigen.values.len()
        )));
    }
    let lambda_n = eigen.values.last().copied().unwrap_or(0.0);
    let mut out = eigen.vectors.clone();
    for i in 0..n {
        let w = (lambda_n - eigen.values[i]).max(0.0).sqrt();
        for j in 0..n {
            out[(i, j)] *= w;
        }
    }
    Ok(out)
}

/// Learned dictionary D̂ = source·Hᵀ; atom k is the code-weighted combination
/// of the source samples, a scaled cluster mean when H is an indicator.
#[derive(Debug, Clone)]
pub struct Dictionary {
    pub atoms: Mat,
}

impl Dictionary {
    /// max_{i≠j} |dᵢᵀdⱼ| / (‖dᵢ‖‖dⱼ‖) over atom pairs; 0 for r = 1.
    pub fn mutual_coherence(&self) -> f64 {
        let g = self.atoms.tr_matmul(&self.atoms);
        let r = g.rows();
        let mut worst = 0.0f64;
        for i in 0..r {
            for j in (i + 1)..r {
                let denom = (g[(i, i)] * g[(j, j)]).sqrt();
                if denom > 0.0 {
                    worst = worst.max(g[(i, j)].abs() / denom);
                }
            }
        }
        worst
    }

    /// Diagnostic ratio ‖D̂ᵀD̂ − λₙI‖_F / (λₙ√r); near 0 when the atoms are
    /// near-orthogonal with common length √λₙ. Reported, never asserted.
    pub fn gram_deviation(&self, lambda_n: f64) -> f64 {
        let g = self.atoms.tr_matmul(&self.atoms);
        let r = g.rows();
        let mut dev = 0.0;
        for i in 0..r {
            for j in 0..r {
                let target = if i == j { lambda_n } else { 0.0 };
                dev += (g[(i, j)] - target).powi(2);
            }
        }
        dev.sqrt() / (lambda_n * (r as f64).sqrt())
    }
}

pub fn dictionary(source: &Mat, h: &Mat) -> Result<Dictionary> {
    if source.cols() != h.cols() {
        return Err(SsrError::validation(format!(
            "dictionary: source has {} columns but codes have {}",
            source.cols(),
            h.cols()
        )));
    }
    Ok(Dictionary {
        atoms: source.matmul_transb(h),
    })
}

/// HᵀH, the n×n Gram matrix of the codes. Its columns are reconstruction
/// weight vectors and each sums to one.
pub fn code_gram(h: &Mat) -> Mat {
    h.tr_matmul(h)
}

/// ‖x‖₂/‖x‖₁ ∈ [1/√n, 1]: 1 for one-hot, 1/√n for uniform magnitudes.
pub fn sparsity(x: &[f64]) -> Result<f64> {
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    if l1 == 0.0 {
        return Err(SsrError::validation(
            "sparsity is undefined for the zero vector",
        ));
    }
    let l2: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(l2 / l1)
}

/// Mean of `sparsity` over the columns of H.
pub fn mean_code_sparsity(h: &Mat) -> Result<f64> {
    let n = h.cols();
    let mut total = 0.0;
    for j in 0..n {
        total += sparsity(&h.col(j))?;
    }
    Ok(total / n as f64)
}

/// Linear-kernel similarity W = β𝟙𝟙ᵀ + AᵀA with β = −min entry of AᵀA, so
/// all weights are non-negative; the diagonal is zeroed (self-loops cancel
/// inside the Laplacian anyway). Used to report ρ for the original-data
/// pipeline, which otherwise never materializes a graph.
pub fn linear_kernel_similarity(a: &DataMatrix) -> Result<SimilarityMatrix> {
    let gram = a.as_mat().tr_matmul(a.as_mat());
    let n = gram.rows();
    let mut beta = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            beta = beta.min(gram[(i, j)]);
        }
    }
    let beta = -beta;
    let mut w = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                // Exact symmetry: average the two Gram entries, which can
                // differ in the last bit from the accumulation order.
                let g = 0.5 * (gram[(i, j)] + gram[(j, i)]);
                w[(i, j)] = beta + g;
            }
        }
    }
    // Guard against -0.0/rounding producing a tiny negative weight.
    for v in w.data_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    SimilarityMatrix::new(w)
}
