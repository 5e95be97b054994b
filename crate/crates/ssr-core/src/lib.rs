//! Spectral Sparse Representation (SSR).
//!
//! SSR codes data as sparse noisy cluster indicators: take the r smallest
//! eigenvectors of a graph Laplacian (or the top right singular vectors of
//! centered data), then rotate that orthonormal basis with the NSCrt solver
//! until the codes are nonnegative and sparse. The rotated codes cluster by a
//! plain per-column argmax (Scut) and come with diagnostics such as the ρ
//! spectral-gap metric and code sparsity.
//!
//! Modules mirror the pipeline: [`mat`] and [`linalg`] hold the dense
//! kernels, [`graph`] builds affinities and Laplacians, [`nscrt`] is the
//! rotation-truncation solver, [`ssr`] wires the kernel/original variants,
//! [`cluster`] and [`eval`] cover clustering and scoring, [`data`] provides
//! generators and dataset I/O, and [`sweeps`] reproduces the experiment
//! grids.

pub mod cluster;
pub mod data;
pub mod error;
pub mod eval;
pub mod graph;
pub mod linalg;
pub mod mat;
pub mod nscrt;
pub mod ssr;
pub mod sweeps;

pub use error::{Result, SsrError};
pub use mat::{DataMatrix, Mat};
