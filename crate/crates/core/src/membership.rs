use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Hard assignment of `N` points to `K` clusters.
///
/// Stored as one label per point; the equivalent `N x K` one-hot matrix is
/// available through [`MembershipMatrix::to_dense`] and
/// [`MembershipMatrix::get`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MembershipMatrix {
    labels: Vec<usize>,
    clusters: usize,
}

impl MembershipMatrix {
    /// Zero-based labels, each `< clusters`.
    pub fn new(labels: Vec<usize>, clusters: usize) -> Result<Self> {
        if clusters == 0 {
            return Err(Error::invalid("membership matrix needs at least one cluster"));
        }
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= clusters) {
            return Err(Error::invalid(alloc::format!(
                "point {i} has label {l} but there are only {clusters} clusters"
            )));
        }
        Ok(MembershipMatrix { labels, clusters })
    }

    /// Validates an `N x K` 0/1 matrix with exactly one 1 per row.
    pub fn from_dense(h: &Matrix) -> Result<Self> {
        let mut labels = Vec::with_capacity(h.rows());
        for i in 0..h.rows() {
            let mut hit = None;
            for k in 0..h.cols() {
                match h[(i, k)] {
                    x if x == 0.0 => {}
                    x if x == 1.0 && hit.is_none() => hit = Some(k),
                    _ => {
                        return Err(Error::invalid(alloc::format!(
                            "row {i} is not one-hot"
                        )))
                    }
                }
            }
            labels.push(hit.ok_or_else(|| Error::invalid(alloc::format!("row {i} has no 1")))?);
        }
        Self::new(labels, h.cols())
    }

    pub fn to_dense(&self) -> Matrix {
        let mut h = Matrix::zeros(self.labels.len(), self.clusters);
        for (i, &l) in self.labels.iter().enumerate() {
            h[(i, l)] = 1.0;
        }
        h
    }

    /// Entry `h_ik`.
    pub fn get(&self, i: usize, k: usize) -> u8 {
        u8::from(self.labels[i] == k)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn n_points(&self) -> usize {
        self.labels.len()
    }

    pub fn n_clusters(&self) -> usize {
        self.clusters
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.clusters];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    pub fn members(&self, k: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| (l == k).then_some(i))
            .collect()
    }

    /// Relabels cluster `k` as `perm[k]` (right multiplication by the
    /// corresponding permutation matrix).
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.clusters {
            return Err(Error::DimensionMismatch {
                context: "MembershipMatrix::relabel",
                expected: self.clusters,
                found: perm.len(),
            });
        }
        Self::new(self.labels.iter().map(|&l| perm[l]).collect(), self.clusters)
    }

    /// Reorders points: row `i` of the result is row `order[i]` of `self`.
    pub fn reorder_points(&self, order: &[usize]) -> Self {
        MembershipMatrix {
            labels: order.iter().map(|&i| self.labels[i]).collect(),
            clusters: self.clusters,
        }
    }
}
