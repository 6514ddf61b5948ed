//! Semi-random union-of-subspaces data.
//!
//! Points of cluster `k` are `z = U_k a` with `a` uniform on the unit sphere
//! of `R^{d_k}`. Ensembles with a common `s`-dimensional intersection are
//! carved out of a single random orthogonal matrix: its last `s` columns are
//! shared, and each subspace draws its remaining `d_k - s` columns from the
//! first `n - s` without reuse across subspaces.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{orthonormalize, principal_cosines, OrthonormalBasis};
use crate::matrix::{norm, Matrix};
use crate::membership::MembershipMatrix;

/// Tolerance for a principal cosine to count as an exact shared direction.
pub const SHARED_DIRECTION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceEnsemble {
    ambient_dim: usize,
    bases: Vec<OrthonormalBasis>,
    shared_dim: usize,
}

impl SubspaceEnsemble {
    /// Validates a common ambient dimension and, when `shared_dim > 0`, that
    /// every pair of subspaces shares at least that many directions.
    pub fn new(bases: Vec<OrthonormalBasis>, shared_dim: usize) -> Result<Self> {
        let ambient_dim = match bases.first() {
            Some(b) => b.ambient_dim(),
            None => return Err(Error::invalid("ensemble has no subspaces")),
        };
        for b in &bases {
            if b.ambient_dim() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    context: "SubspaceEnsemble ambient dimension",
                    expected: ambient_dim,
                    found: b.ambient_dim(),
                });
            }
            if b.dim() < shared_dim {
                return Err(Error::invalid(alloc::format!(
                    "subspace of dimension {} cannot contain a {shared_dim}-dimensional intersection",
                    b.dim()
                )));
            }
        }
        if shared_dim > 0 {
            for k in 0..bases.len() {
                for l in (k + 1)..bases.len() {
                    let ones = principal_cosines(&bases[k], &bases[l])?
                        .iter()
                        .filter(|&&c| c >= 1.0 - SHARED_DIRECTION_TOL)
                        .count();
                    if ones < shared_dim {
                        return Err(Error::invalid(alloc::format!(
                            "subspaces {k} and {l} share {ones} directions, expected at least {shared_dim}"
                        )));
                    }
                }
            }
        }
        Ok(SubspaceEnsemble {
            ambient_dim,
            bases,
            shared_dim,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn bases(&self) -> &[OrthonormalBasis] {
        &self.bases
    }

    pub fn n_subspaces(&self) -> usize {
        self.bases.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.bases.iter().map(OrthonormalBasis::dim).collect()
    }

    pub fn shared_dim(&self) -> usize {
        self.shared_dim
    }
}

/// Samples plus the ground truth that generated them.
#[derive(Debug, Clone, PartialEq)]
pub struct UoSDataset {
    /// `n x N`, one unit-norm sample per column.
    pub samples: Matrix,
    pub truth: MembershipMatrix,
    pub ensemble: SubspaceEnsemble,
    /// Sphere coefficients `a_i`, aligned with the sample columns.
    pub coefficients: Option<Vec<Vec<f64>>>,
}

/// Parameters of the overlapping-ensemble construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleParams {
    pub ambient_dim: usize,
    pub clusters: usize,
    pub dim_lo: usize,
    pub dim_hi: usize,
    pub shared_dim: usize,
}

impl EnsembleParams {
    pub fn validate(&self) -> Result<()> {
        let EnsembleParams {
            ambient_dim: n,
            clusters: k,
            dim_lo,
            dim_hi,
            shared_dim: s,
        } = *self;
        if k == 0 {
            return Err(Error::invalid("need at least one subspace"));
        }
        if dim_lo == 0 {
            return Err(Error::invalid("subspace dimensions must be positive"));
        }
        if !(s <= dim_lo && dim_lo <= dim_hi) {
            return Err(Error::invalid(alloc::format!(
                "need s <= d_lo <= d_hi, got s = {s}, d_lo = {dim_lo}, d_hi = {dim_hi}"
            )));
        }
        if dim_hi > n {
            return Err(Error::invalid(alloc::format!(
                "d_hi = {dim_hi} exceeds the ambient dimension {n}"
            )));
        }
        if k * (dim_hi - s) > n - s {
            return Err(Error::invalid(alloc::format!(
                "infeasible: K*(d_hi - s) = {} > n - s = {}",
                k * (dim_hi - s),
                n - s
            )));
        }
        Ok(())
    }
}

/// Uniform point on the unit sphere of `R^d` (normalized Gaussian vector).
pub fn sample_unit_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(Error::invalid("sphere dimension must be at least 1"));
    }
    loop {
        let mut a: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let r = norm(&a);
        if r > 0.0 && r.is_finite() {
            a.iter_mut().for_each(|x| *x /= r);
            return Ok(a);
        }
    }
}

/// Orthonormalized `n x n` standard Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Matrix> {
    loop {
        let g = Matrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
        match orthonormalize(&g) {
            Ok(q) => return Ok(q.into_matrix()),
            // probability zero; draw again
            Err(Error::RankDeficient { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// Random orthonormal basis of a `d`-dimensional subspace of `R^n`.
pub fn random_subspace<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<OrthonormalBasis> {
    if d > n {
        return Err(Error::invalid(alloc::format!("subspace dimension {d} exceeds {n}")));
    }
    loop {
        let g = Matrix::from_fn(n, d, |_, _| rng.sample(StandardNormal));
        match orthonormalize(&g) {
            Ok(q) => return Ok(q),
            Err(Error::RankDeficient { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// Subspaces with a common `s`-dimensional intersection.
///
/// Random stream consumption order: the `K` dimensions, then the orthogonal
/// matrix, then the column shuffle.
pub fn generate_overlapping_ensemble<R: Rng + ?Sized>(
    params: &EnsembleParams,
    rng: &mut R,
) -> Result<SubspaceEnsemble> {
    params.validate()?;
    let n = params.ambient_dim;
    let s = params.shared_dim;
    let dims: Vec<usize> = (0..params.clusters)
        .map(|_| rng.random_range(params.dim_lo..=params.dim_hi))
        .collect();
    let u = random_orthogonal(n, rng)?;
    let mut pool: Vec<usize> = (0..n - s).collect();
    pool.shuffle(rng);
    let shared: Vec<usize> = (n - s..n).collect();

    let mut next = 0;
    let mut bases = Vec::with_capacity(dims.len());
    for &d in &dims {
        let mut cols: Vec<usize> = pool[next..next + d - s].to_vec();
        next += d - s;
        cols.extend_from_slice(&shared);
        bases.push(OrthonormalBasis::new(u.select_columns(&cols))?);
    }
    SubspaceEnsemble::new(bases, s)
}

/// `N_k` points per subspace, uniform on each unit sphere, emitted in a
/// seeded random order.
pub fn generate_dataset<R: Rng + ?Sized>(
    ensemble: &SubspaceEnsemble,
    cluster_sizes: &[usize],
    rng: &mut R,
) -> Result<UoSDataset> {
    let k = ensemble.n_subspaces();
    if cluster_sizes.len() != k {
        return Err(Error::DimensionMismatch {
            context: "generate_dataset cluster sizes",
            expected: k,
            found: cluster_sizes.len(),
        });
    }
    if let Some(c) = cluster_sizes.iter().position(|&s| s == 0) {
        return Err(Error::invalid(alloc::format!("cluster {c} has no points")));
    }
    let n = ensemble.ambient_dim();
    let total: usize = cluster_sizes.iter().sum();

    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(total);
    let mut coefficients = Vec::with_capacity(total);
    let mut labels = Vec::with_capacity(total);
    for (c, (&size, basis)) in cluster_sizes.iter().zip(ensemble.bases()).enumerate() {
        for _ in 0..size {
            let a = sample_unit_sphere(basis.dim(), rng)?;
            columns.push(basis.as_matrix().matvec(&a));
            coefficients.push(a);
            labels.push(c);
        }
    }
    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(rng);

    let mut data = Vec::with_capacity(n * total);
    for &i in &order {
        data.extend_from_slice(&columns[i]);
    }
    let samples = Matrix::from_column_major(n, total, data)?;
    let truth = MembershipMatrix::new(labels, k)?.reorder_points(&order);
    let coefficients = order.iter().map(|&i| coefficients[i].clone()).collect();
    Ok(UoSDataset {
        samples,
        truth,
        ensemble: ensemble.clone(),
        coefficients: Some(coefficients),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::affinity;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(n: usize, k: usize, lo: usize, hi: usize, s: usize) -> EnsembleParams {
        EnsembleParams {
            ambient_dim: n,
            clusters: k,
            dim_lo: lo,
            dim_hi: hi,
            shared_dim: s,
        }
    }

    #[test]
    fn sphere_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let a = sample_unit_sphere(1, &mut rng).unwrap();
            assert!(a[0] == 1.0 || a[0] == -1.0);
        }
        let a = sample_unit_sphere(5, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = sample_unit_sphere(5, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
        assert!((norm(&a) - 1.0).abs() < 1e-12);
        assert!(sample_unit_sphere(0, &mut rng).is_err());
    }

    #[test]
    fn sphere_is_centered() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut mean = [0.0; 3];
        let m = 10_000;
        for _ in 0..m {
            let a = sample_unit_sphere(3, &mut rng).unwrap();
            for (acc, x) in mean.iter_mut().zip(&a) {
                *acc += x / m as f64;
            }
        }
        assert!(mean.iter().all(|x| x.abs() < 0.05), "{mean:?}");
    }

    #[test]
    fn overlapping_ensemble_shares_directions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = generate_overlapping_ensemble(&params(300, 3, 25, 30, 6), &mut rng).unwrap();
        assert_eq!(e.n_subspaces(), 3);
        for d in e.dims() {
            assert!((25..=30).contains(&d));
        }
        for k in 0..3 {
            for l in (k + 1)..3 {
                let ones = principal_cosines(&e.bases()[k], &e.bases()[l])
                    .unwrap()
                    .iter()
                    .filter(|&&c| c >= 1.0 - 1e-8)
                    .count();
                assert!(ones >= 6);
            }
        }
    }

    #[test]
    fn full_overlap_and_disjoint_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let e = generate_overlapping_ensemble(&params(10, 3, 4, 4, 4), &mut rng).unwrap();
        for b in e.bases() {
            assert!((affinity(b, &e.bases()[0]).unwrap() - 2.0).abs() < 1e-12);
        }
        let e = generate_overlapping_ensemble(&params(2, 2, 1, 1, 0), &mut rng).unwrap();
        assert!(affinity(&e.bases()[0], &e.bases()[1]).unwrap() < 1e-12);
    }

    #[test]
    fn infeasible_ensemble_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let err = generate_overlapping_ensemble(&params(20, 3, 5, 9, 2), &mut rng).unwrap_err();
        assert!(alloc::format!("{err}").contains("K*(d_hi - s)"));
        assert!(generate_overlapping_ensemble(&params(20, 2, 5, 4, 0), &mut rng).is_err());
        assert!(generate_overlapping_ensemble(&params(20, 2, 3, 4, 4), &mut rng).is_err());
    }

    #[test]
    fn dataset_invariants_and_determinism() {
        let p = params(40, 3, 4, 6, 1);
        let make = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e = generate_overlapping_ensemble(&p, &mut rng).unwrap();
            generate_dataset(&e, &[10, 12, 8], &mut rng).unwrap()
        };
        let ds = make(9);
        assert_eq!(ds.samples.shape(), (40, 30));
        assert_eq!(ds.truth.cluster_sizes(), vec![10, 12, 8]);
        for i in 0..30 {
            let z = ds.samples.column(i);
            assert!((norm(z) - 1.0).abs() <= 1e-10);
            let proj = ds.ensemble.bases()[ds.truth.label(i)].project(z);
            let resid: f64 = proj.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
            assert!(libm::sqrt(resid) <= 1e-10);
        }
        assert_eq!(make(9), ds);
        assert_ne!(make(10).samples, ds.samples);
        // points are not emitted in cluster blocks
        assert_ne!(ds.truth.labels()[..10], [0; 10]);
    }

    #[test]
    fn single_cluster_dataset() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let e = SubspaceEnsemble::new(vec![random_subspace(5, 2, &mut rng).unwrap()], 0).unwrap();
        let ds = generate_dataset(&e, &[3], &mut rng).unwrap();
        assert_eq!(ds.truth.labels(), &[0, 0, 0]);
        assert!(generate_dataset(&e, &[0], &mut rng).is_err());
        assert!(generate_dataset(&e, &[1, 1], &mut rng).is_err());
        assert!(SubspaceEnsemble::new(Vec::new(), 0).is_err());
    }
}
