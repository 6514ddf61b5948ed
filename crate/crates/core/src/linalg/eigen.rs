//! Dense symmetric eigendecomposition.
//!
//! The matrix is reduced to tridiagonal form with Householder reflections.
//! All eigenvalues of the tridiagonal matrix come from implicit QL. When only
//! a few eigenvectors are requested they are obtained by inverse iteration on
//! the tridiagonal matrix and mapped back through the reflectors, which keeps
//! the cost at roughly `4/3 n^3` instead of the `~9 n^3` needed to accumulate
//! every rotation. Every truncated result is verified against the original
//! matrix; if the check fails the full QL route is used instead.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::OrthonormalBasis;
use crate::matrix::{axpy, dot, norm, Matrix};

const EPS: f64 = f64::EPSILON;
const MAX_QL_SWEEPS: usize = 60;
const INVERSE_ITERATIONS: usize = 4;

/// Relative tolerance used to accept a symmetric input.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// A real square matrix that is symmetric up to [`SYMMETRY_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(Matrix);

impl SymmetricMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                context: "SymmetricMatrix::new (square)",
                expected: m.rows(),
                found: m.cols(),
            });
        }
        if !m.is_finite() {
            return Err(Error::NonFinite("SymmetricMatrix::new"));
        }
        let n = m.rows();
        for j in 0..n {
            for i in (j + 1)..n {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                let diff = (a - b).abs();
                if diff > SYMMETRY_TOL * a.abs().max(1.0) {
                    return Err(Error::NotSymmetric {
                        row: i,
                        col: j,
                        diff,
                    });
                }
            }
        }
        Ok(SymmetricMatrix(m))
    }

    /// Evaluates `f` on the lower triangle and mirrors it, so the result is
    /// exactly symmetric.
    pub fn from_lower_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(n, n);
        for j in 0..n {
            for i in j..n {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymmetricMatrix(m)
    }

    /// Wraps a matrix the caller guarantees to be exactly symmetric.
    pub(crate) fn from_matrix_unchecked(m: Matrix) -> Self {
        debug_assert!(m.is_square());
        SymmetricMatrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }
}

/// Which end of the spectrum counts as "leading".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenOrder {
    /// Algebraically largest first.
    #[default]
    Algebraic,
    /// Largest absolute value first.
    Magnitude,
}

/// Selected eigenpairs: `values[i]` belongs to column `i` of `vectors`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: OrthonormalBasis,
}

/// The `m` algebraically largest eigenpairs, eigenvalues non-increasing.
pub fn sym_eig(a: &SymmetricMatrix, m: usize) -> Result<Eigen> {
    sym_eig_ordered(a, m, EigenOrder::Algebraic)
}

/// The `m` leading eigenpairs under `order`.
pub fn sym_eig_ordered(a: &SymmetricMatrix, m: usize, order: EigenOrder) -> Result<Eigen> {
    let n = a.dim();
    if m == 0 || m > n {
        return Err(Error::invalid(alloc::format!(
            "requested {m} eigenpairs of a {n}x{n} matrix"
        )));
    }
    let tri = Tridiagonal::reduce(a.as_matrix());
    let mut values = tri.diag.clone();
    let mut off = tri.off.clone();
    ql_implicit(&mut values, &mut off, None, tri.norm)?;

    let mut order_idx: Vec<usize> = (0..n).collect();
    sort_indices(&mut order_idx, &values, order);
    let selected: Vec<f64> = order_idx[..m].iter().map(|&i| values[i]).collect();

    if 2 * m <= n {
        if let Some(vectors) = tri.selected_vectors(&values, &selected) {
            if verified(a.as_matrix(), &selected, &vectors) {
                return Ok(Eigen {
                    values: selected,
                    vectors: OrthonormalBasis::from_matrix_unchecked(vectors),
                });
            }
        }
    }
    let full = full_decomposition(a.as_matrix(), &tri)?;
    let mut idx: Vec<usize> = (0..n).collect();
    sort_indices(&mut idx, &full.0, order);
    idx.truncate(m);
    Ok(Eigen {
        values: idx.iter().map(|&i| full.0[i]).collect(),
        vectors: OrthonormalBasis::from_matrix_unchecked(full.1.select_columns(&idx)),
    })
}

/// All eigenvalues in non-increasing order.
pub fn sym_eigenvalues(a: &SymmetricMatrix) -> Result<Vec<f64>> {
    let tri = Tridiagonal::reduce(a.as_matrix());
    let mut values = tri.diag.clone();
    let mut off = tri.off.clone();
    ql_implicit(&mut values, &mut off, None, tri.norm)?;
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(values)
}

/// Complete eigendecomposition by QL with accumulated rotations, sorted
/// non-increasing. Slower than [`sym_eig`] for few eigenpairs.
pub fn sym_eig_full(a: &SymmetricMatrix) -> Result<Eigen> {
    let tri = Tridiagonal::reduce(a.as_matrix());
    let (values, vectors) = full_decomposition(a.as_matrix(), &tri)?;
    let mut idx: Vec<usize> = (0..values.len()).collect();
    sort_indices(&mut idx, &values, EigenOrder::Algebraic);
    Ok(Eigen {
        values: idx.iter().map(|&i| values[i]).collect(),
        vectors: OrthonormalBasis::from_matrix_unchecked(vectors.select_columns(&idx)),
    })
}

fn sort_indices(idx: &mut [usize], values: &[f64], order: EigenOrder) {
    match order {
        EigenOrder::Algebraic => idx.sort_by(|&i, &j| values[j].total_cmp(&values[i])),
        EigenOrder::Magnitude => {
            idx.sort_by(|&i, &j| values[j].abs().total_cmp(&values[i].abs()))
        }
    }
}

fn full_decomposition(a: &Matrix, tri: &Tridiagonal) -> Result<(Vec<f64>, Matrix)> {
    let n = a.rows();
    let mut values = tri.diag.clone();
    let mut off = tri.off.clone();
    let mut z = Matrix::identity(n);
    ql_implicit(&mut values, &mut off, Some(&mut z), tri.norm)?;
    for j in 0..n {
        tri.apply_q(z.column_mut(j));
    }
    Ok((values, z))
}

/// Residual and orthogonality check of a truncated result against `a`.
fn verified(a: &Matrix, values: &[f64], vectors: &Matrix) -> bool {
    let anorm = a.frobenius_norm().max(f64::MIN_POSITIVE);
    for (j, &lambda) in values.iter().enumerate() {
        let v = vectors.column(j);
        let mut r = a.matvec(v);
        axpy(-lambda, v, &mut r);
        if !(norm(&r) <= 1e-10 * anorm) {
            return false;
        }
        for i in 0..j {
            if dot(vectors.column(i), v).abs() > 1e-11 {
                return false;
            }
        }
    }
    true
}

/// Householder reduction `A = Q T Qᵀ`. `off[i]` couples rows `i` and `i+1`;
/// the last entry is zero.
struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
    /// `(v, beta)` for each reflector `I - beta v vᵀ`, acting on rows `k+1..`.
    reflectors: Vec<(Vec<f64>, f64)>,
    norm: f64,
}

impl Tridiagonal {
    fn reduce(a: &Matrix) -> Self {
        let n = a.rows();
        let mut w = a.clone();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n];
        let mut reflectors = Vec::with_capacity(n.saturating_sub(2));

        for k in 0..n.saturating_sub(2) {
            let m = n - k - 1;
            let x = &w.column(k)[k + 1..];
            let tail = norm(&x[1..]);
            diag[k] = w[(k, k)];
            if tail == 0.0 {
                off[k] = x[0];
                reflectors.push((Vec::new(), 0.0));
                continue;
            }
            let xnorm = libm::hypot(x[0], tail);
            let alpha = if x[0] >= 0.0 { -xnorm } else { xnorm };
            let mut v = x.to_vec();
            v[0] -= alpha;
            let beta = 2.0 / dot(&v, &v);
            off[k] = alpha;

            // p = beta * A22 v from the lower triangle
            let mut p = vec![0.0; m];
            for jj in 0..m {
                let c = &w.column(k + 1 + jj)[k + 1 + jj..];
                p[jj] += c[0] * v[jj] + dot(&c[1..], &v[jj + 1..]);
                axpy(v[jj], &c[1..], &mut p[jj + 1..]);
            }
            p.iter_mut().for_each(|x| *x *= beta);
            let half = 0.5 * beta * dot(&p, &v);
            axpy(-half, &v, &mut p);

            // A22 -= v pᵀ + p vᵀ on the lower triangle
            for jj in 0..m {
                let (vj, pj) = (v[jj], p[jj]);
                let c = &mut w.column_mut(k + 1 + jj)[k + 1 + jj..];
                for (t, cij) in c.iter_mut().enumerate() {
                    *cij -= v[jj + t] * pj + p[jj + t] * vj;
                }
            }
            reflectors.push((v, beta));
        }
        match n {
            0 => {}
            1 => diag[0] = w[(0, 0)],
            _ => {
                diag[n - 2] = w[(n - 2, n - 2)];
                diag[n - 1] = w[(n - 1, n - 1)];
                off[n - 2] = w[(n - 1, n - 2)];
            }
        }
        let norm = (0..n)
            .map(|i| {
                let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
                diag[i].abs() + off[i].abs() + left
            })
            .fold(0.0, f64::max);
        Tridiagonal {
            diag,
            off,
            reflectors,
            norm,
        }
    }

    /// `y <- Q y`.
    fn apply_q(&self, y: &mut [f64]) {
        for (k, (v, beta)) in self.reflectors.iter().enumerate().rev() {
            if *beta == 0.0 {
                continue;
            }
            let seg = &mut y[k + 1..];
            let s = beta * dot(v, seg);
            axpy(-s, v, seg);
        }
    }

    /// Eigenvectors of `A` for the `wanted` eigenvalues (all taken from
    /// `spectrum`) by inverse iteration. Close eigenvalues are processed as a
    /// cluster with reorthogonalization; any unrequested spectrum member of such
    /// a cluster is computed too and then dropped.
    fn selected_vectors(&self, spectrum: &[f64], wanted: &[f64]) -> Option<Matrix> {
        let n = self.diag.len();
        let cluster_tol = 1e-3 * self.norm;
        let mut sorted: Vec<f64> = spectrum.to_vec();
        sorted.sort_by(|x, y| y.total_cmp(x));

        // mark every spectrum entry within a chain of cluster_tol of a wanted value
        let mut take = vec![false; n];
        for &w in wanted {
            let pos = sorted.iter().position(|&s| s == w)?;
            take[pos] = true;
        }
        loop {
            let mut changed = false;
            for i in 0..n {
                if take[i] {
                    if i > 0 && !take[i - 1] && sorted[i - 1] - sorted[i] <= cluster_tol {
                        take[i - 1] = true;
                        changed = true;
                    }
                    if i + 1 < n && !take[i + 1] && sorted[i] - sorted[i + 1] <= cluster_tol {
                        take[i + 1] = true;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }

        let pertol = 10.0 * EPS * self.norm.max(f64::MIN_POSITIVE);
        let mut computed: Vec<(f64, Vec<f64>)> = Vec::new();
        let mut cluster_start = 0usize;
        let mut prev_shift = f64::INFINITY;
        for (i, &lambda) in sorted.iter().enumerate() {
            if !take[i] {
                continue;
            }
            let joined = computed
                .last()
                .is_some_and(|(last, _)| *last - lambda <= cluster_tol);
            if !joined {
                cluster_start = computed.len();
                prev_shift = f64::INFINITY;
            }
            let mut shift = lambda;
            if prev_shift - shift < pertol {
                shift = prev_shift - pertol;
            }
            prev_shift = shift;

            let lu = TridiagonalLu::factor(&self.diag, &self.off, shift, self.norm);
            let mut x: Vec<f64> = (0..n).map(|r| start_entry(i, r)).collect();
            for _ in 0..INVERSE_ITERATIONS {
                lu.solve(&mut x);
                let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if !scale.is_finite() || scale == 0.0 {
                    return None;
                }
                x.iter_mut().for_each(|v| *v /= scale);
                for _ in 0..2 {
                    for (_, q) in &computed[cluster_start..] {
                        let s = dot(q, &x);
                        axpy(-s, q, &mut x);
                    }
                }
                let nx = norm(&x);
                if nx == 0.0 || !nx.is_finite() {
                    return None;
                }
                x.iter_mut().for_each(|v| *v /= nx);
            }
            computed.push((lambda, x));
        }

        // pair each wanted value with a distinct computed vector
        let mut used = vec![false; computed.len()];
        let mut out = Matrix::zeros(n, wanted.len());
        for (j, &w) in wanted.iter().enumerate() {
            let pos = computed
                .iter()
                .enumerate()
                .position(|(c, (l, _))| !used[c] && *l == w)?;
            used[pos] = true;
            let col = out.column_mut(j);
            col.copy_from_slice(&computed[pos].1);
            self.apply_q(col);
        }
        Some(out)
    }
}

/// Deterministic pseudo-random start vector entries in `[-1, 1)`.
fn start_entry(seed: usize, r: usize) -> f64 {
    let mut z = (seed as u64)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((r as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9))
        .wrapping_add(0x94D0_49BB_1331_11EB);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 52) as f64 - 1.0
}

/// LU factorization with partial pivoting of `T - shift I`.
struct TridiagonalLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(diag: &[f64], off: &[f64], shift: f64, tnorm: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|x| x - shift).collect();
        let mut dl: Vec<f64> = off[..n.saturating_sub(1)].to_vec();
        let mut du = dl.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                } else {
                    dl[i] = 0.0;
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        let tiny = EPS * tnorm.max(f64::MIN_POSITIVE);
        for p in d.iter_mut() {
            if p.abs() < tiny {
                *p = if *p < 0.0 { -tiny } else { tiny };
            }
        }
        TridiagonalLu {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= self.du[i] * b[i + 1];
            }
            if i + 2 < n {
                s -= self.du2[i] * b[i + 2];
            }
            b[i] = s / self.d[i];
        }
    }
}

/// Implicit QL with Wilkinson-style shifts on a symmetric tridiagonal matrix.
/// Eigenvalues overwrite `diag` (unsorted); when `z` is supplied its columns
/// receive the corresponding rotations.
fn ql_implicit(diag: &mut [f64], off: &mut [f64], mut z: Option<&mut Matrix>, tnorm: f64) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Ok(());
    }
    off[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                // the absolute floor splits off clusters of (near-)zero eigenvalues
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= EPS * dd || off[m].abs() <= EPS * tnorm {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_SWEEPS {
                return Err(Error::NoConvergence {
                    dim: n,
                    index: l,
                    iterations: iter - 1,
                    norm: tnorm,
                });
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = libm::hypot(g, 1.0);
            g = diag[m] - diag[l] + off[l] / (g + if g >= 0.0 { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut early = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = libm::hypot(f, g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    let rows = z.rows();
                    let data = z.as_mut_slice();
                    let (left, right) = data.split_at_mut((i + 1) * rows);
                    let zi = &mut left[i * rows..];
                    let zi1 = &mut right[..rows];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if early {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    if diag.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("ql_implicit"));
    }
    Ok(())
}
