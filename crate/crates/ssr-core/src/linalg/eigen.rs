//! Symmetric eigendecomposition via cyclic Jacobi rotations.
//!
//! Jacobi is dense O(n³) and converges quadratically once the off-diagonal
//! mass is small; at the desk scale this crate targets (n ≤ a few thousand)
//! it is plenty fast and numerically very robust, which matters more here
//! than peak speed: the spectral pipelines feed its output straight into an
//! alternating solver that assumes clean orthonormality.

use crate::error::{Result, SsrError};
use crate::mat::Mat;

const MAX_SWEEPS: usize = 100;

/// Which end of the spectrum `sym_eig` returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Smallest,
    Largest,
}

/// Selected eigenpairs of a symmetric matrix.
///
/// `vectors` holds one eigenvector per row (r×n), matching how the sparse
/// coder consumes them; `values` is ascending and aligned with the rows.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub values: Vec<f64>,
    pub vectors: Mat,
    pub source_dim: usize,
}

/// Computes `r` eigenpairs of symmetric `m`, from the chosen end of the
/// spectrum. Returned values are ascending in both modes.
pub fn sym_eig(m: &Mat, r: usize, which: Which) -> Result<EigenBasis> {
    if !m.is_square() {
        return Err(SsrError::validation(format!(
            "sym_eig requires a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.all_finite() {
        return Err(SsrError::validation(
            "sym_eig input contains non-finite entries",
        ));
    }
    let n = m.rows();
    if r < 1 || r > n {
        return Err(SsrError::validation(format!(
            "r must be in 1..={n}, got {r}"
        )));
    }
    let scale = m.frobenius_norm().max(1.0);
    if m.max_asymmetry() > 1e-10 * scale {
        return Err(SsrError::validation(format!(
            "matrix is not symmetric: max |m_ij - m_ji| = {:.3e} exceeds 1e-10 relative",
            m.max_asymmetry()
        )));
    }

    let (values, vectors) = jacobi(m)?;

    // Ascending order with index tie-break for determinism.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
    let picked: Vec<usize> = match which {
        Which::Smallest => order[..r].to_vec(),
        Which::Largest => order[n - r..].to_vec(),
    };

    let mut out_vals = Vec::with_capacity(r);
    let mut out_vecs = Mat::zeros(r, n);
    for (row, &idx) in picked.iter().enumerate() {
        out_vals.push(values[idx]);
        for j in 0..n {
            out_vecs[(row, j)] = vectors[(j, idx)];
        }
        fix_sign_row(&mut out_vecs, row);
    }

    Ok(EigenBasis {
        values: out_vals,
        vectors: out_vecs,
        source_dim: n,
    })
}

/// Flips a row so its largest-magnitude entry is positive (first index wins
/// ties); keeps golden tests deterministic across sweep orderings.
pub(crate) fn fix_sign_row(m: &mut Mat, row: usize) {
    let r = m.row(row);
    let mut best = 0;
    for j in 1..r.len() {
        if r[j].abs() > r[best].abs() {
            best = j;
        }
    }
    if m[(row, best)] < 0.0 {
        for v in m.row_mut(row) {
            *v = -*v;
        }
    }
}

/// Cyclic Jacobi with the classic threshold schedule: full eigensystem of a
/// symmetric matrix. Returns (diagonal values, column eigenvectors).
fn jacobi(m: &Mat) -> Result<(Vec<f64>, Mat)> {
    let n = m.rows();
    let mut a = m.clone();
    let mut v = Mat::identity(n);
    let scale = m.frobenius_norm();
    if scale == 0.0 || n == 1 {
        return Ok(((0..n).map(|i| a[(i, i)]).collect(), v));
    }

    for sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n - 1 {
            for q in p + 1..n {
                off += a[(p, q)].abs();
            }
        }
        if off <= 1e-14 * scale {
            return Ok(((0..n).map(|i| a[(i, i)]).collect(), v));
        }
        // Early sweeps only rotate the dominant entries; later sweeps take all.
        let tresh = if sweep < 3 {
            0.2 * off / (n * n) as f64
        } else {
            0.0
        };

        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let g = 100.0 * apq.abs();
                // Entry negligible relative to both diagonals: hard-zero it.
                if sweep > 3
                    && a[(p, p)].abs() + g == a[(p, p)].abs()
                    && a[(q, q)].abs() + g == a[(q, q)].abs()
                {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                if apq.abs() <= tresh || apq == 0.0 {
                    continue;
                }

                let h = a[(q, q)] - a[(p, p)];
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let mut t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        t = -t;
                    }
                    t
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let delta = t * apq;

                a[(p, p)] -= delta;
                a[(q, q)] += delta;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for i in 0..n {
                    if i != p && i != q {
                        let aip = a[(i, p)];
                        let aiq = a[(i, q)];
                        a[(i, p)] = aip - s * (aiq + tau * aip);
                        a[(i, q)] = aiq + s * (aip - tau * aiq);
                        a[(p, i)] = a[(i, p)];
                        a[(q, i)] = a[(i, q)];
                    }
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip - s * (viq + tau * vip);
                    v[(i, q)] = viq + s * (vip - tau * viq);
                }
            }
        }
    }

    let mut off = 0.0;
    for p in 0..n - 1 {
        for q in p + 1..n {
            off += a[(p, q)].abs();
        }
    }
    Err(SsrError::numeric(format!(
        "jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps; off-diagonal residual {off:.3e}"
    )))
}
