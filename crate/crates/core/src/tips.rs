//! Thresholded inner-product spectral initialization.
//!
//! Points whose absolute inner product reaches `tau` are joined in a graph;
//! the eigenvectors of its `K` leading adjacency eigenvalues embed the points
//! in `R^K`, and k-means on that embedding gives the initial membership.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::kmeans::{kmeans, KMeansConfig, KMeansResult};
use crate::linalg::{sym_eig_ordered, EigenOrder, SymmetricMatrix};
use crate::matrix::{dot, Matrix};
use crate::membership::MembershipMatrix;
use crate::metrics::affinity;
use crate::uos::SubspaceEnsemble;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdjacencyMode {
    /// `a_ij = 1` iff `|<z_i, z_j>| >= tau`, `i != j`.
    #[default]
    Binary,
    /// Absolute inner products kept when above `tau` or among each point's
    /// two strongest neighbours; symmetrized by the entrywise maximum.
    WeightedTop2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdGraph {
    adjacency: SymmetricMatrix,
    tau: f64,
    mode: AdjacencyMode,
}

impl ThresholdGraph {
    pub fn adjacency(&self) -> &SymmetricMatrix {
        &self.adjacency
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn mode(&self) -> AdjacencyMode {
        self.mode
    }

    pub fn n_points(&self) -> usize {
        self.adjacency.dim()
    }

    /// Number of undirected edges (nonzero off-diagonal pairs).
    pub fn edge_count(&self) -> usize {
        let a = self.adjacency.as_matrix();
        let n = a.rows();
        (0..n)
            .map(|j| a.column(j)[j + 1..].iter().filter(|&&x| x != 0.0).count())
            .sum()
    }
}

/// Absolute Gram matrix `|ZᵀZ|` with a zero diagonal.
fn abs_gram(z: &Matrix) -> Result<SymmetricMatrix> {
    if !z.is_finite() {
        return Err(Error::NonFinite("samples"));
    }
    let n = z.cols();
    Ok(SymmetricMatrix::from_lower_fn(n, |i, j| {
        if i == j {
            0.0
        } else {
            dot(z.column(i), z.column(j)).abs()
        }
    }))
}

pub fn build_adjacency(z: &Matrix, tau: f64) -> Result<ThresholdGraph> {
    if !(tau > 0.0) {
        return Err(Error::invalid(alloc::format!("threshold must be positive, got {tau}")));
    }
    let g = abs_gram(z)?.into_matrix();
    let n = g.rows();
    let adjacency = SymmetricMatrix::from_lower_fn(n, |i, j| {
        if i != j && g[(i, j)] >= tau { 1.0 } else { 0.0 }
    });
    Ok(ThresholdGraph {
        adjacency,
        tau,
        mode: AdjacencyMode::Binary,
    })
}

pub fn build_weighted_adjacency(z: &Matrix, tau: f64) -> Result<ThresholdGraph> {
    let n = z.cols();
    if n < 3 {
        return Err(Error::invalid(alloc::format!(
            "weighted adjacency needs at least 3 points, got {n}"
        )));
    }
    if !(tau >= 0.0) {
        return Err(Error::invalid(alloc::format!("threshold must be non-negative, got {tau}")));
    }
    let g = abs_gram(z)?.into_matrix();
    let mut keep = Matrix::zeros(n, n);
    for i in 0..n {
        // column i of the symmetric |ZᵀZ| is row i
        let row = g.column(i);
        let (mut first, mut second) = (usize::MAX, usize::MAX);
        for j in (0..n).filter(|&j| j != i) {
            if first == usize::MAX || row[j] > row[first] {
                second = first;
                first = j;
            } else if second == usize::MAX || row[j] > row[second] {
                second = j;
            }
        }
        for j in (0..n).filter(|&j| j != i) {
            if row[j] >= tau || j == first || j == second {
                keep[(i, j)] = row[j];
            }
        }
    }
    let adjacency = SymmetricMatrix::from_lower_fn(n, |i, j| keep[(i, j)].max(keep[(j, i)]));
    Ok(ThresholdGraph {
        adjacency,
        tau,
        mode: AdjacencyMode::WeightedTop2,
    })
}

/// Rows of `coordinates` are the embedded points.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEmbedding {
    pub coordinates: Matrix,
    pub eigenvalues: Vec<f64>,
}

pub fn spectral_embedding(graph: &ThresholdGraph, k: usize, order: EigenOrder) -> Result<SpectralEmbedding> {
    if k == 0 || k > graph.n_points() {
        return Err(Error::invalid(alloc::format!(
            "cannot embed {} points into {k} dimensions",
            graph.n_points()
        )));
    }
    let e = sym_eig_ordered(graph.adjacency(), k, order)?;
    Ok(SpectralEmbedding {
        coordinates: e.vectors.into_matrix(),
        eigenvalues: e.values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TipsConfig {
    pub adjacency: AdjacencyMode,
    pub eigen_order: EigenOrder,
    pub kmeans: KMeansConfig,
}

#[derive(Debug, Clone)]
pub struct TipsOutcome {
    pub membership: MembershipMatrix,
    pub edge_count: usize,
    pub eigenvalues: Vec<f64>,
    pub kmeans: KMeansResult,
}

pub fn tips_initialize<R: Rng + ?Sized>(
    z: &Matrix,
    tau: f64,
    k: usize,
    config: &TipsConfig,
    rng: &mut R,
) -> Result<MembershipMatrix> {
    Ok(tips_initialize_detailed(z, tau, k, config, rng)?.membership)
}

pub fn tips_initialize_detailed<R: Rng + ?Sized>(
    z: &Matrix,
    tau: f64,
    k: usize,
    config: &TipsConfig,
    rng: &mut R,
) -> Result<TipsOutcome> {
    let graph = match config.adjacency {
        AdjacencyMode::Binary => build_adjacency(z, tau)?,
        AdjacencyMode::WeightedTop2 => build_weighted_adjacency(z, tau)?,
    };
    let embedding = spectral_embedding(&graph, k, config.eigen_order)?;
    let km = kmeans(&embedding.coordinates, k, &config.kmeans, rng)?;
    Ok(TipsOutcome {
        membership: km.membership.clone(),
        edge_count: graph.edge_count(),
        eigenvalues: embedding.eigenvalues,
        kmeans: km,
    })
}

/// Threshold `√c / √d_max`.
pub fn default_tau(d_max: usize, c: f64) -> f64 {
    debug_assert!(c > 0.0 && d_max >= 1);
    libm::sqrt(c) / libm::sqrt(d_max as f64)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// Approximate edge probabilities
/// `b_kl = 2 - 2Φ(τ √(d_k d_l) / aff(S_k, S_l))`, with `aff(S_k, S_k) = √d_k`.
/// Orthogonal pairs give `b_kl = 0`.
pub fn connection_matrix(ensemble: &SubspaceEnsemble, tau: f64) -> Result<Matrix> {
    if !(tau > 0.0) {
        return Err(Error::invalid(alloc::format!("threshold must be positive, got {tau}")));
    }
    let bases = ensemble.bases();
    let k = bases.len();
    let mut b = Matrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let di = bases[i].dim() as f64;
            let dj = bases[j].dim() as f64;
            let aff = if i == j { libm::sqrt(di) } else { affinity(&bases[i], &bases[j])? };
            // 2 - 2Φ(x) = erfc(x / √2)
            let v = if aff > 0.0 {
                libm::erfc(tau * libm::sqrt(di * dj) / (aff * core::f64::consts::SQRT_2))
            } else {
                0.0
            };
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }
    Ok(b)
}
