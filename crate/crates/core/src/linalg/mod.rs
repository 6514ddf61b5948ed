//! Symmetric eigendecomposition, PCA and subspace geometry.

mod basis;
mod eigen;

pub use basis::{orthonormalize, pca, principal_cosines, subspace_distance, OrthonormalBasis, ORTHONORMAL_TOL};
pub use eigen::{
    sym_eig, sym_eig_full, sym_eig_ordered, sym_eigenvalues, Eigen, EigenOrder, SymmetricMatrix,
    SYMMETRY_TOL,
};
