//! K-subspaces clustering with thresholded inner-product spectral
//! initialization.
//!
//! The crate is `no_std` and only needs `alloc`. Samples are stored as the
//! columns of a [`Matrix`]; cluster assignments are [`MembershipMatrix`]
//! values. All randomness is drawn from caller-supplied [`rand::Rng`]s.
//!
//! - [`linalg`]: symmetric eigensolver, PCA, orthonormal bases, subspace distance.
//! - [`uos`]: synthetic union-of-subspaces ensembles and datasets.
//! - [`tips`] and [`kmeans`]: thresholded adjacency, spectral embedding, k-means.
//! - [`kss`]: the alternating K-subspaces loop.
//! - [`metrics`]: membership distance, accuracy, affinities, recovery error.

#![no_std]

extern crate alloc;

pub mod error;
pub mod kmeans;
pub mod kss;
pub mod linalg;
pub mod matrix;
pub mod membership;
pub mod metrics;
pub mod tips;
pub mod uos;

pub use error::{Error, ErrorKind, Result};
pub use matrix::Matrix;
pub use membership::MembershipMatrix;
