//! Clustering and subspace-geometry diagnostics: membership distance under
//! the best label permutation, accuracy, affinities, the basin-of-attraction
//! radius and subspace recovery error.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{principal_cosines, subspace_distance, OrthonormalBasis};
use crate::matrix::Matrix;
use crate::membership::MembershipMatrix;
use crate::uos::SubspaceEnsemble;

/// A bijection `[K] -> [K]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationMap {
    map: Vec<usize>,
}

impl PermutationMap {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &t in &map {
            if t >= map.len() || seen[t] {
                return Err(Error::invalid("mapping is not a bijection"));
            }
            seen[t] = true;
        }
        Ok(PermutationMap { map })
    }

    pub fn identity(k: usize) -> Self {
        PermutationMap {
            map: (0..k).collect(),
        }
    }

    pub fn apply(&self, k: usize) -> usize {
        self.map[k]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (k, &t) in self.map.iter().enumerate() {
            inv[t] = k;
        }
        PermutationMap { map: inv }
    }
}

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with row potentials, `O(K^3)`). Row `k` is matched to column `perm(k)`.
pub fn linear_assignment(cost: &Matrix) -> Result<(PermutationMap, f64)> {
    if !cost.is_square() {
        return Err(Error::DimensionMismatch {
            context: "linear_assignment (square)",
            expected: cost.rows(),
            found: cost.cols(),
        });
    }
    if !cost.is_finite() {
        return Err(Error::NonFinite("linear_assignment"));
    }
    let n = cost.rows();
    // 1-based potentials; index 0 is the virtual root
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut map = vec![0; n];
    for j in 1..=n {
        map[owner[j] - 1] = j - 1;
    }
    let total = map.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum();
    Ok((PermutationMap { map }, total))
}

fn check_pair(a: &MembershipMatrix, b: &MembershipMatrix) -> Result<()> {
    if a.n_points() != b.n_points() {
        return Err(Error::DimensionMismatch {
            context: "membership matrices (points)",
            expected: a.n_points(),
            found: b.n_points(),
        });
    }
    if a.n_clusters() != b.n_clusters() {
        return Err(Error::DimensionMismatch {
            context: "membership matrices (clusters)",
            expected: a.n_clusters(),
            found: b.n_clusters(),
        });
    }
    Ok(())
}

/// `counts[k][l]` = number of points labelled `k` in `a` and `l` in `b`.
pub fn confusion(a: &MembershipMatrix, b: &MembershipMatrix) -> Result<Vec<Vec<usize>>> {
    check_pair(a, b)?;
    let k = a.n_clusters();
    let mut counts = vec![vec![0usize; k]; k];
    for (&x, &y) in a.labels().iter().zip(b.labels()) {
        counts[x][y] += 1;
    }
    Ok(counts)
}

/// Returns `pi` such that cluster `pi(k)` of `estimate` best matches cluster
/// `k` of `reference`, plus the number of points on which they agree.
pub fn match_labels(reference: &MembershipMatrix, estimate: &MembershipMatrix) -> Result<(PermutationMap, usize)> {
    let counts = confusion(reference, estimate)?;
    let k = counts.len();
    let cost = Matrix::from_fn(k, k, |r, c| -(counts[r][c] as f64));
    let (pi, _) = linear_assignment(&cost)?;
    let agree = (0..k).map(|r| counts[r][pi.apply(r)]).sum();
    Ok((pi, agree))
}

/// `d_F(H, H')²`, an even integer: each point that disagrees under the best
/// relabelling contributes 2.
pub fn membership_distance_sq(h: &MembershipMatrix, other: &MembershipMatrix) -> Result<usize> {
    Ok(2 * misclassified_count(h, other)?)
}

/// `d_F(H, H') = min over permutations Q of ‖H - H'Q‖_F`.
pub fn membership_distance(h: &MembershipMatrix, other: &MembershipMatrix) -> Result<f64> {
    Ok(libm::sqrt(membership_distance_sq(h, other)? as f64))
}

/// Points of `h` misclassified with respect to `truth`, i.e. `d_F²/2`.
pub fn misclassified_count(h: &MembershipMatrix, truth: &MembershipMatrix) -> Result<usize> {
    let (_, agree) = match_labels(truth, h)?;
    Ok(h.n_points() - agree)
}

/// Fraction of points correctly clustered under the best relabelling. A
/// cluster left empty by the estimate simply matches with zero overlap.
pub fn clustering_accuracy(h: &MembershipMatrix, truth: &MembershipMatrix) -> Result<f64> {
    let n = h.n_points();
    if n == 0 {
        return Ok(1.0);
    }
    Ok(1.0 - misclassified_count(h, truth)? as f64 / n as f64)
}

/// `‖UᵀV‖_F`: root of the summed squared principal cosines. Identical bases
/// give exactly `√d`.
pub fn affinity(u: &OrthonormalBasis, v: &OrthonormalBasis) -> Result<f64> {
    if u == v {
        return Ok(libm::sqrt(u.dim() as f64));
    }
    let cos = principal_cosines(u, v)?;
    Ok(libm::sqrt(cos.iter().map(|c| c * c).sum()))
}

/// Affinity divided by `min(√d_u, √d_v)`, in `[0, 1]`.
pub fn normalized_affinity(u: &OrthonormalBasis, v: &OrthonormalBasis) -> Result<f64> {
    let min_dim = u.dim().min(v.dim());
    if min_dim == 0 {
        return Ok(0.0);
    }
    Ok((affinity(u, v)? / libm::sqrt(min_dim as f64)).min(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffinityReport {
    /// `aff(S_k, S_l)`; the diagonal holds the self-affinity `√d_k`.
    pub pairwise: Matrix,
    /// Normalized affinities; unit diagonal.
    pub normalized: Matrix,
    /// Largest off-diagonal normalized affinity; `None` when `K = 1`.
    pub kappa: Option<f64>,
    pub kappa_d: f64,
    pub kappa_n: f64,
}

pub fn affinity_report(ensemble: &SubspaceEnsemble, cluster_sizes: &[usize]) -> Result<AffinityReport> {
    let bases = ensemble.bases();
    let k = bases.len();
    if cluster_sizes.len() != k {
        return Err(Error::DimensionMismatch {
            context: "affinity_report cluster sizes",
            expected: k,
            found: cluster_sizes.len(),
        });
    }
    if cluster_sizes.iter().any(|&s| s == 0) {
        return Err(Error::invalid("cluster sizes must be positive"));
    }
    let mut pairwise = Matrix::zeros(k, k);
    let mut normalized = Matrix::zeros(k, k);
    let mut kappa: Option<f64> = None;
    for i in 0..k {
        pairwise[(i, i)] = libm::sqrt(bases[i].dim() as f64);
        normalized[(i, i)] = 1.0;
        for j in (i + 1)..k {
            let a = affinity(&bases[i], &bases[j])?;
            let min_dim = bases[i].dim().min(bases[j].dim()) as f64;
            let na = (a / libm::sqrt(min_dim)).min(1.0);
            pairwise[(i, j)] = a;
            pairwise[(j, i)] = a;
            normalized[(i, j)] = na;
            normalized[(j, i)] = na;
            kappa = Some(kappa.map_or(na, |m: f64| m.max(na)));
        }
    }
    let dims: Vec<usize> = bases.iter().map(OrthonormalBasis::dim).collect();
    let ratio = |v: &[usize]| {
        let max = v.iter().copied().max().unwrap_or(1) as f64;
        let min = v.iter().copied().min().unwrap_or(1) as f64;
        max / min
    };
    Ok(AffinityReport {
        pairwise,
        normalized,
        kappa,
        kappa_d: ratio(&dims),
        kappa_n: ratio(cluster_sizes),
    })
}

/// Radius `(1-κ) N_min / (5 κ_d √N)` of the region of initial memberships
/// from which convergence to the truth is guaranteed.
pub fn basin_radius(kappa: f64, kappa_d: f64, n_min: usize, n: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&kappa) {
        return Err(Error::invalid(alloc::format!("kappa = {kappa} is outside [0, 1)")));
    }
    if !(kappa_d >= 1.0) {
        return Err(Error::invalid(alloc::format!("kappa_d = {kappa_d} is below 1")));
    }
    if n_min == 0 || n < n_min {
        return Err(Error::invalid(alloc::format!(
            "need 1 <= N_min <= N, got N_min = {n_min}, N = {n}"
        )));
    }
    Ok((1.0 - kappa) * n_min as f64 / (5.0 * kappa_d * libm::sqrt(n as f64)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryError {
    /// `Σ_k d(U_{π(k)}, U_k*)`.
    pub total: f64,
    pub per_cluster: Vec<f64>,
    /// True cluster indices whose matched estimate has a different dimension.
    pub dim_mismatch: Vec<usize>,
}

/// Sum of subspace distances between each true basis and its matched
/// estimate `recovered[pi(k)]`.
pub fn subspace_recovery_error(
    recovered: &[OrthonormalBasis],
    truth: &[OrthonormalBasis],
    pi: &PermutationMap,
) -> Result<RecoveryError> {
    if recovered.len() != truth.len() || pi.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            context: "subspace_recovery_error",
            expected: truth.len(),
            found: recovered.len().min(pi.len()),
        });
    }
    let mut per_cluster = Vec::with_capacity(truth.len());
    let mut dim_mismatch = Vec::new();
    for (k, t) in truth.iter().enumerate() {
        let est = &recovered[pi.apply(k)];
        if est.dim() != t.dim() {
            dim_mismatch.push(k);
        }
        per_cluster.push(subspace_distance(est, t)?);
    }
    Ok(RecoveryError {
        total: per_cluster.iter().sum(),
        per_cluster,
        dim_mismatch,
    })
}
