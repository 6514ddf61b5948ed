//! K-subspaces by alternating minimization.
//!
//! Each iteration refits every cluster's subspace by PCA on its scatter matrix
//! (optionally choosing the rank at the largest eigengap) and then moves every
//! point to the subspace with the smallest projection residual.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{sym_eig, OrthonormalBasis, SymmetricMatrix};
use crate::matrix::{axpy, dot, Matrix};
use crate::membership::MembershipMatrix;
use crate::metrics::{match_labels, membership_distance_sq, subspace_recovery_error};
use crate::uos::sample_unit_sphere;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DimMode {
    /// Rank chosen per cluster and iteration by the largest eigengap among the
    /// `d_upper` leading scatter eigenvalues.
    Adaptive,
    /// One fixed rank per cluster.
    Fixed(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KssConfig {
    /// Upper bound on the subspace dimensions; must exceed every true `d_k`.
    pub d_upper: usize,
    pub max_iters: usize,
    pub dim_mode: DimMode,
    pub stop_on_fixed_point: bool,
}

impl KssConfig {
    /// Adaptive ranks, default iteration budget for `n_points`, stop at a
    /// fixed point.
    pub fn adaptive(d_upper: usize, n_points: usize) -> Self {
        KssConfig {
            d_upper,
            max_iters: default_max_iters(n_points),
            dim_mode: DimMode::Adaptive,
            stop_on_fixed_point: true,
        }
    }

    pub fn validate(&self, ambient_dim: usize, clusters: usize) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        match &self.dim_mode {
            DimMode::Adaptive => {
                if self.d_upper < 2 {
                    return Err(Error::invalid(alloc::format!(
                        "adaptive rank selection needs d_upper >= 2, got {}",
                        self.d_upper
                    )));
                }
                if self.d_upper > ambient_dim {
                    return Err(Error::invalid(alloc::format!(
                        "d_upper = {} exceeds the ambient dimension {ambient_dim}",
                        self.d_upper
                    )));
                }
            }
            DimMode::Fixed(dims) => {
                if dims.len() != clusters {
                    return Err(Error::DimensionMismatch {
                        context: "fixed subspace dimensions",
                        expected: clusters,
                        found: dims.len(),
                    });
                }
                if let Some(&d) = dims.iter().find(|&&d| d == 0 || d > ambient_dim) {
                    return Err(Error::invalid(alloc::format!(
                        "fixed dimension {d} outside 1..={ambient_dim}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `max(10, ceil(3 log2 log2 N))`.
pub fn default_max_iters(n_points: usize) -> usize {
    if n_points < 4 {
        return 10;
    }
    let ll = libm::log2(libm::log2(n_points as f64));
    (libm::ceil(3.0 * ll) as usize).max(10)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KssState {
    pub iteration: usize,
    pub membership: MembershipMatrix,
    /// Bases used to compute `membership`.
    pub bases: Vec<OrthonormalBasis>,
    pub dims: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub t: usize,
    /// `objective(Z, H^t, U^t)`; at `t = 0` the best-fit objective of `H^0`,
    /// i.e. `objective(Z, H^0, U^1)`.
    pub objective: f64,
    /// `objective(Z, H^{t-1}, U^t)`, between the two half steps.
    pub pre_assignment_objective: Option<f64>,
    pub dims: Vec<usize>,
    /// `d_F(H^t, H*)²` when the truth is known.
    pub membership_distance_sq: Option<usize>,
    /// `Σ_k d(U_{π(k)}, U_k*)` with `π` matching `H^t` to `H*`.
    pub subspace_error: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KssWarning {
    pub t: usize,
    pub cluster: usize,
    /// `true` when there was no earlier basis and a random direction was used.
    pub reseeded: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    /// Empty clusters met during subspace updates.
    pub warnings: Vec<KssWarning>,
}

#[derive(Debug, Clone, Copy)]
pub struct GroundTruth<'a> {
    pub membership: &'a MembershipMatrix,
    pub bases: Option<&'a [OrthonormalBasis]>,
}

#[derive(Debug, Clone)]
pub struct KssOutcome {
    pub state: KssState,
    pub trace: IterationTrace,
    /// Whether `H^t = H^{t-1}` was observed.
    pub reached_fixed_point: bool,
}

fn check_shapes(z: &Matrix, h: &MembershipMatrix) -> Result<()> {
    if z.cols() != h.n_points() {
        return Err(Error::DimensionMismatch {
            context: "samples vs membership",
            expected: z.cols(),
            found: h.n_points(),
        });
    }
    Ok(())
}

fn check_bases(z: &Matrix, bases: &[OrthonormalBasis]) -> Result<()> {
    for b in bases {
        if b.ambient_dim() != z.rows() {
            return Err(Error::DimensionMismatch {
                context: "basis ambient dimension",
                expected: z.rows(),
                found: b.ambient_dim(),
            });
        }
    }
    Ok(())
}

/// `Σ_k Σ_{i ∈ C_k} ‖z_i - U_k U_kᵀ z_i‖²`, from explicit residuals.
pub fn objective(z: &Matrix, h: &MembershipMatrix, bases: &[OrthonormalBasis]) -> Result<f64> {
    check_shapes(z, h)?;
    check_bases(z, bases)?;
    if bases.len() != h.n_clusters() {
        return Err(Error::DimensionMismatch {
            context: "objective bases",
            expected: h.n_clusters(),
            found: bases.len(),
        });
    }
    Ok((0..z.cols())
        .map(|i| {
            let zi = z.column(i);
            let mut r = bases[h.label(i)].project(zi);
            r.iter_mut().zip(zi).for_each(|(p, x)| *p = x - *p);
            dot(&r, &r)
        })
        .sum())
}

/// `Σ_{i ∈ C_k} z_i z_iᵀ`, or `None` for an empty cluster.
pub fn scatter_matrix(z: &Matrix, h: &MembershipMatrix, k: usize) -> Result<Option<SymmetricMatrix>> {
    check_shapes(z, h)?;
    if k >= h.n_clusters() {
        return Err(Error::invalid(alloc::format!("cluster {k} out of range")));
    }
    let members = h.members(k);
    if members.is_empty() {
        return Ok(None);
    }
    let n = z.rows();
    let mut s = Matrix::zeros(n, n);
    for &i in &members {
        let zi = z.column(i);
        for j in 0..n {
            if zi[j] != 0.0 {
                axpy(zi[j], &zi[j..], &mut s.column_mut(j)[j..]);
            }
        }
    }
    for j in 0..n {
        for i in (j + 1)..n {
            s[(j, i)] = s[(i, j)];
        }
    }
    Ok(Some(SymmetricMatrix::from_matrix_unchecked(s)))
}

/// One-based index of the largest gap `λ_i - λ_{i+1}`, `i < d`; ties go to
/// the smallest index.
pub fn estimate_dim(eigenvalues: &[f64]) -> Result<usize> {
    if eigenvalues.len() < 2 {
        return Err(Error::invalid(alloc::format!(
            "eigengap needs at least 2 eigenvalues, got {}",
            eigenvalues.len()
        )));
    }
    let mut best = (1, f64::NEG_INFINITY);
    for (i, w) in eigenvalues.windows(2).enumerate() {
        let gap = w[0] - w[1];
        if !(gap >= 0.0) {
            return Err(Error::invalid(alloc::format!(
                "eigenvalues must be non-increasing: λ_{} = {} < λ_{} = {}",
                i + 1,
                w[0],
                i + 2,
                w[1]
            )));
        }
        if gap > best.1 {
            best = (i + 1, gap);
        }
    }
    Ok(best.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceFit {
    pub dim: usize,
    pub basis: OrthonormalBasis,
    /// Leading scatter eigenvalues that were inspected.
    pub eigenvalues: Vec<f64>,
}

/// Refits cluster `k`. Returns `None` when the cluster is empty.
pub fn update_subspace(
    z: &Matrix,
    h: &MembershipMatrix,
    k: usize,
    config: &KssConfig,
) -> Result<Option<SubspaceFit>> {
    config.validate(z.rows(), h.n_clusters())?;
    let Some(scatter) = scatter_matrix(z, h, k)? else {
        return Ok(None);
    };
    let fit = match &config.dim_mode {
        DimMode::Adaptive => {
            let e = sym_eig(&scatter, config.d_upper)?;
            let dim = estimate_dim(&e.values)?;
            SubspaceFit {
                dim,
                basis: e.vectors.leading(dim)?,
                eigenvalues: e.values,
            }
        }
        DimMode::Fixed(dims) => {
            let e = sym_eig(&scatter, dims[k])?;
            SubspaceFit {
                dim: dims[k],
                basis: e.vectors,
                eigenvalues: e.values,
            }
        }
    };
    Ok(Some(fit))
}

/// `G[i, k] = ‖z_i‖² - ‖U_kᵀ z_i‖²`.
pub fn assignment_cost_matrix(z: &Matrix, bases: &[OrthonormalBasis]) -> Result<Matrix> {
    check_bases(z, bases)?;
    let n = z.cols();
    let mut g = Matrix::zeros(n, bases.len());
    let norms: Vec<f64> = z.columns().map(|c| dot(c, c)).collect();
    for (k, b) in bases.iter().enumerate() {
        let coeffs = b.as_matrix().t_matmul(z)?;
        let col = g.column_mut(k);
        for i in 0..n {
            let c = coeffs.column(i);
            col[i] = norms[i] - dot(c, c);
        }
    }
    Ok(g)
}

/// Row-wise argmin of `G`, ties to the smallest cluster index.
pub fn assign_clusters(g: &Matrix) -> Result<MembershipMatrix> {
    if !g.is_finite() {
        return Err(Error::NonFinite("assignment costs"));
    }
    let labels = (0..g.rows())
        .map(|i| {
            (0..g.cols()).fold(0, |best, k| if g[(i, k)] < g[(i, best)] { k } else { best })
        })
        .collect();
    MembershipMatrix::new(labels, g.cols())
}

fn truth_metrics(
    truth: Option<&GroundTruth<'_>>,
    h: &MembershipMatrix,
    bases: &[OrthonormalBasis],
) -> Result<(Option<usize>, Option<f64>)> {
    let Some(truth) = truth else {
        return Ok((None, None));
    };
    let dist = membership_distance_sq(h, truth.membership)?;
    let err = match truth.bases {
        Some(tb) => {
            let (pi, _) = match_labels(truth.membership, h)?;
            Some(subspace_recovery_error(bases, tb, &pi)?.total)
        }
        None => None,
    };
    Ok((Some(dist), err))
}

/// Runs the alternation from `h0` until a fixed point (when
/// `stop_on_fixed_point`) or `max_iters` iterations.
///
/// An empty cluster keeps its previous basis; if it has none yet it gets a
/// random unit direction drawn from `rng`. Both cases are recorded in
/// [`IterationTrace::warnings`].
pub fn run_kss<R: Rng + ?Sized>(
    z: &Matrix,
    h0: &MembershipMatrix,
    config: &KssConfig,
    truth: Option<GroundTruth<'_>>,
    rng: &mut R,
) -> Result<KssOutcome> {
    check_shapes(z, h0)?;
    let k = h0.n_clusters();
    config.validate(z.rows(), k)?;
    if !z.is_finite() {
        return Err(Error::NonFinite("samples"));
    }
    if let Some(t) = &truth {
        if t.membership.n_points() != h0.n_points() || t.membership.n_clusters() != k {
            return Err(Error::invalid("ground truth shape does not match the initial membership"));
        }
        if let Some(b) = t.bases {
            if b.len() != k {
                return Err(Error::DimensionMismatch {
                    context: "ground-truth bases",
                    expected: k,
                    found: b.len(),
                });
            }
        }
    }

    let mut trace = IterationTrace::default();
    let mut h = h0.clone();
    let mut fits: Vec<Option<(usize, OrthonormalBasis)>> = vec![None; k];
    let mut reached_fixed_point = false;
    let mut iteration = 0;

    for t in 1..=config.max_iters {
        for c in 0..k {
            match update_subspace(z, &h, c, config)? {
                Some(fit) => fits[c] = Some((fit.dim, fit.basis)),
                None => {
                    let reseeded = fits[c].is_none();
                    if reseeded {
                        let u = sample_unit_sphere(z.rows(), rng)?;
                        let basis = OrthonormalBasis::from_matrix_unchecked(Matrix::from_columns(z.rows(), &[u])?);
                        fits[c] = Some((1, basis));
                    }
                    trace.warnings.push(KssWarning { t, cluster: c, reseeded });
                }
            }
        }
        let (dims, bases): (Vec<usize>, Vec<OrthonormalBasis>) =
            fits.iter().map(|f| f.clone().expect("every cluster fitted")).unzip();

        let g = assignment_cost_matrix(z, &bases)?;
        let cost_of = |m: &MembershipMatrix| -> f64 { (0..z.cols()).map(|i| g[(i, m.label(i))]).sum() };
        let pre = cost_of(&h);
        if t == 1 {
            let (d, e) = truth_metrics(truth.as_ref(), &h, &bases)?;
            trace.records.push(IterationRecord {
                t: 0,
                objective: pre,
                pre_assignment_objective: None,
                dims: dims.clone(),
                membership_distance_sq: d,
                subspace_error: e,
            });
        }
        let next = assign_clusters(&g)?;
        let obj = cost_of(&next);
        let fixed = next == h;
        h = next;
        iteration = t;

        let (d, e) = truth_metrics(truth.as_ref(), &h, &bases)?;
        trace.records.push(IterationRecord {
            t,
            objective: obj,
            pre_assignment_objective: Some(pre),
            dims,
            membership_distance_sq: d,
            subspace_error: e,
        });
        if fixed {
            reached_fixed_point = true;
            if config.stop_on_fixed_point {
                break;
            }
        }
    }

    let (dims, bases) = fits.into_iter().map(|f| f.expect("every cluster fitted")).unzip();
    Ok(KssOutcome {
        state: KssState {
            iteration,
            membership: h,
            bases,
            dims,
        },
        trace,
        reached_fixed_point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::subspace_distance;
    use crate::metrics::membership_distance;
    use crate::uos::{generate_dataset, generate_overlapping_ensemble, random_subspace, EnsembleParams, SubspaceEnsemble};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cross() -> (Matrix, MembershipMatrix) {
        let z = Matrix::from_columns(2, &[[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]).unwrap();
        (z, MembershipMatrix::new(vec![0, 1, 0, 1], 2).unwrap())
    }

    #[test]
    fn objective_examples() {
        let z = Matrix::from_columns(2, &[[1.0, 0.0]]).unwrap();
        let h = MembershipMatrix::new(vec![0], 1).unwrap();
        let off = [OrthonormalBasis::coordinate(2, &[1]).unwrap()];
        assert!((objective(&z, &h, &off).unwrap() - 1.0).abs() < 1e-15);
        let on = [OrthonormalBasis::coordinate(2, &[0]).unwrap()];
        assert_eq!(objective(&z, &h, &on).unwrap(), 0.0);
    }

    #[test]
    fn objective_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let z = Matrix::from_fn(7, 30, |_, _| rng.random_range(-1.0..1.0));
        let h = MembershipMatrix::new((0..30).map(|i| i % 3).collect(), 3).unwrap();
        let bases: Vec<_> = [2, 3, 1].iter().map(|&d| random_subspace(7, d, &mut rng).unwrap()).collect();
        let direct = objective(&z, &h, &bases).unwrap();
        let g = assignment_cost_matrix(&z, &bases).unwrap();
        let via_costs: f64 = (0..30).map(|i| g[(i, h.label(i))]).sum();
        assert!((direct - via_costs).abs() <= 1e-9);
    }

    #[test]
    fn scatter_examples() {
        let z = Matrix::from_columns(3, &[[0.6, 0.8, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]]).unwrap();
        let h = MembershipMatrix::new(vec![0, 1, 1], 3).unwrap();
        let s0 = scatter_matrix(&z, &h, 0).unwrap().unwrap();
        let want = Matrix::from_fn(3, 3, |i, j| z[(i, 0)] * z[(j, 0)]);
        assert!(s0.as_matrix().sub(&want).unwrap().max_abs() < 1e-15);
        let s1 = scatter_matrix(&z, &h, 1).unwrap().unwrap();
        assert!((s1.trace() - 2.0).abs() < 1e-15);
        let brute = Matrix::from_fn(3, 3, |i, j| z[(i, 1)] * z[(j, 1)] + z[(i, 2)] * z[(j, 2)]);
        assert!(s1.as_matrix().sub(&brute).unwrap().max_abs() < 1e-15);
        assert!(scatter_matrix(&z, &h, 2).unwrap().is_none());
    }

    #[test]
    fn estimate_dim_examples() {
        assert_eq!(estimate_dim(&[10.0, 9.5, 9.0, 0.1, 0.05]).unwrap(), 3);
        assert_eq!(estimate_dim(&[5.0, 1.0, 1.0, 1.0]).unwrap(), 1);
        assert_eq!(estimate_dim(&[2.0, 1.0, 0.0]).unwrap(), 1);
        assert!(estimate_dim(&[1.0, 2.0]).is_err());
        assert!(estimate_dim(&[1.0]).is_err());
    }

    #[test]
    fn update_recovers_exact_subspace() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let truth = random_subspace(10, 3, &mut rng).unwrap();
        let e = SubspaceEnsemble::new(vec![truth.clone()], 0).unwrap();
        let ds = generate_dataset(&e, &[20], &mut rng).unwrap();
        let cfg = KssConfig::adaptive(6, 20);
        let fit = update_subspace(&ds.samples, &ds.truth, 0, &cfg).unwrap().unwrap();
        assert_eq!(fit.dim, 3);
        assert!(subspace_distance(&fit.basis, &truth).unwrap() <= 1e-8);

        let z = Matrix::from_columns(10, &[ds.samples.column(0)]).unwrap();
        let h = MembershipMatrix::new(vec![0], 1).unwrap();
        let fit = update_subspace(&z, &h, 0, &cfg).unwrap().unwrap();
        assert_eq!(fit.dim, 1);
        let point = OrthonormalBasis::new(z.clone()).unwrap();
        assert!(subspace_distance(&fit.basis, &point).unwrap() < 1e-12);

        let fixed = KssConfig { dim_mode: DimMode::Fixed(vec![2]), ..cfg };
        assert_eq!(update_subspace(&ds.samples, &ds.truth, 0, &fixed).unwrap().unwrap().dim, 2);
    }

    #[test]
    fn cost_matrix_examples() {
        let z = Matrix::from_columns(3, &[[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let b = [OrthonormalBasis::coordinate(3, &[0, 1]).unwrap()];
        let g = assignment_cost_matrix(&z, &b).unwrap();
        assert_eq!(g[(0, 0)], 0.0);
        assert_eq!(g[(1, 0)], 1.0);
    }

    #[test]
    fn assignment_examples() {
        let g = Matrix::from_rows(&[[0.2, 0.5, 0.9], [0.9, 0.5, 0.2]]).unwrap();
        assert_eq!(assign_clusters(&g).unwrap().labels(), &[0, 2]);
        let tie = Matrix::from_rows(&[[0.3, 0.3]]).unwrap();
        assert_eq!(assign_clusters(&tie).unwrap().labels(), &[0]);
        let perm = [2usize, 0, 1];
        // column k of G moves to column perm[k]
        let gq = Matrix::from_fn(2, 3, |i, j| g[(i, perm.iter().position(|&p| p == j).unwrap())]);
        let base = assign_clusters(&g).unwrap();
        assert_eq!(assign_clusters(&gq).unwrap(), base.relabel(&perm).unwrap());
    }

    #[test]
    fn separable_instance_stops_after_one_iteration() {
        let (z, h) = cross();
        let truth = GroundTruth { membership: &h, bases: None };
        let cfg = KssConfig::adaptive(2, 4);
        let out = run_kss(&z, &h, &cfg, Some(truth), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(out.reached_fixed_point);
        assert_eq!(out.state.iteration, 1);
        let last = out.trace.records.last().unwrap();
        assert_eq!(last.membership_distance_sq, Some(0));
        assert_eq!(last.objective, 0.0);
    }

    #[test]
    fn fixed_point_is_absorbing() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let p = EnsembleParams { ambient_dim: 20, clusters: 3, dim_lo: 3, dim_hi: 4, shared_dim: 0 };
        let e = generate_overlapping_ensemble(&p, &mut rng).unwrap();
        let ds = generate_dataset(&e, &[30, 30, 30], &mut rng).unwrap();
        let h0 = MembershipMatrix::new((0..90).map(|_| rng.random_range(0..3)).collect(), 3).unwrap();
        let cfg = KssConfig { d_upper: 6, max_iters: 30, dim_mode: DimMode::Adaptive, stop_on_fixed_point: false };
        let out = run_kss(&ds.samples, &h0, &cfg, Some(GroundTruth { membership: &ds.truth, bases: None }), &mut rng).unwrap();
        assert!(out.reached_fixed_point);
        assert_eq!(out.trace.records.len(), 31);
        let stop = KssConfig { stop_on_fixed_point: true, ..cfg };
        let halted = run_kss(&ds.samples, &h0, &stop, None, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        // after halting, the free-running trace never changes again
        let ht = halted.state.iteration;
        for r in &out.trace.records[ht..] {
            assert_eq!(r.membership_distance_sq, out.trace.records[ht].membership_distance_sq);
            assert_eq!(r.objective, out.trace.records[ht].objective);
        }
        assert_eq!(halted.trace.records.len(), ht + 1);
    }

    #[test]
    fn relabeled_start_gives_relabeled_iterates() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        // generic subspaces: carving from one orthogonal matrix creates exact cost ties
        let bases = (2..5).map(|d| random_subspace(15, d, &mut rng).unwrap()).collect();
        let e = SubspaceEnsemble::new(bases, 0).unwrap();
        let ds = generate_dataset(&e, &[20, 20, 20], &mut rng).unwrap();
        let h0 = MembershipMatrix::new((0..60).map(|_| rng.random_range(0..3)).collect(), 3).unwrap();
        let perm = [1usize, 2, 0];
        let cfg = KssConfig { d_upper: 5, max_iters: 8, dim_mode: DimMode::Adaptive, stop_on_fixed_point: false };
        let a = run_kss(&ds.samples, &h0, &cfg, None, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = run_kss(&ds.samples, &h0.relabel(&perm).unwrap(), &cfg, None, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(b.state.membership, a.state.membership.relabel(&perm).unwrap());
        for (ra, rb) in a.trace.records.iter().zip(&b.trace.records) {
            assert!((ra.objective - rb.objective).abs() < 1e-9);
            for k in 0..3 {
                assert_eq!(ra.dims[k], rb.dims[perm[k]]);
            }
        }
    }

    #[test]
    fn empty_cluster_is_reseeded_and_flagged() {
        let (z, _) = cross();
        let h0 = MembershipMatrix::new(vec![0, 0, 0, 0], 2).unwrap();
        let cfg = KssConfig::adaptive(2, 4);
        let out = run_kss(&z, &h0, &cfg, None, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(out.trace.warnings[0], KssWarning { t: 1, cluster: 1, reseeded: true });
        assert_eq!(out.state.bases.len(), 2);
    }

    #[test]
    fn invalid_configurations() {
        let (z, h) = cross();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(run_kss(&z, &h, &KssConfig::adaptive(1, 4), None, &mut rng).is_err());
        assert!(run_kss(&z, &h, &KssConfig::adaptive(3, 4), None, &mut rng).is_err());
        let fixed = KssConfig { dim_mode: DimMode::Fixed(vec![1]), ..KssConfig::adaptive(2, 4) };
        assert!(run_kss(&z, &h, &fixed, None, &mut rng).is_err());
        let short = MembershipMatrix::new(vec![0, 1], 2).unwrap();
        assert!(run_kss(&z, &short, &KssConfig::adaptive(2, 4), None, &mut rng).is_err());
        let zero = KssConfig { max_iters: 0, ..KssConfig::adaptive(2, 4) };
        assert!(run_kss(&z, &h, &zero, None, &mut rng).is_err());
    }

    #[test]
    fn default_iteration_budget() {
        assert_eq!(default_max_iters(1500), 11);
        assert_eq!(default_max_iters(10), 10);
        assert_eq!(default_max_iters(1), 10);
        assert!(membership_distance(&cross().1, &cross().1).unwrap() == 0.0);
    }
}
