//! Dense linear-algebra kernels: symmetric eigensolver, compact SVD, and the
//! orthogonal Procrustes solve.

pub mod eigen;
pub mod procrustes;
pub mod svd;

pub use eigen::{sym_eig, EigenBasis, Which};
pub use procrustes::{procrustes_rotation, RotationMatrix};
pub use svd::{compact_svd, svd_residual, SvdFactors};
