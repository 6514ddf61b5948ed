use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::eigen::{sym_eig, sym_eigenvalues, SymmetricMatrix};
use crate::matrix::{axpy, dot, norm, Matrix};

/// Bound on `‖UᵀU - I‖_F` accepted by [`OrthonormalBasis::new`].
pub const ORTHONORMAL_TOL: f64 = 1e-8;

/// An `n x d` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    columns: Matrix,
}

impl OrthonormalBasis {
    pub fn new(columns: Matrix) -> Result<Self> {
        if columns.cols() > columns.rows() {
            return Err(Error::invalid(alloc::format!(
                "basis with {} columns in ambient dimension {}",
                columns.cols(),
                columns.rows()
            )));
        }
        let gram = columns.t_matmul(&columns)?;
        let err = gram.sub(&Matrix::identity(columns.cols()))?.frobenius_norm();
        if !(err <= ORTHONORMAL_TOL) {
            return Err(Error::invalid(alloc::format!(
                "columns are not orthonormal: |UᵀU - I|_F = {err:e}"
            )));
        }
        Ok(OrthonormalBasis { columns })
    }

    pub(crate) fn from_matrix_unchecked(columns: Matrix) -> Self {
        OrthonormalBasis { columns }
    }

    /// The coordinate basis `span{e_i : i in idx}` of `R^n`.
    pub fn coordinate(n: usize, idx: &[usize]) -> Result<Self> {
        let mut m = Matrix::zeros(n, idx.len());
        for (j, &i) in idx.iter().enumerate() {
            if i >= n {
                return Err(Error::invalid(alloc::format!("coordinate {i} outside R^{n}")));
            }
            m[(i, j)] = 1.0;
        }
        Self::new(m)
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.rows()
    }

    pub fn dim(&self) -> usize {
        self.columns.cols()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.columns
    }

    pub fn into_matrix(self) -> Matrix {
        self.columns
    }

    /// Coordinates `Uᵀz`.
    pub fn coefficients(&self, z: &[f64]) -> Vec<f64> {
        self.columns.t_matvec(z)
    }

    /// `‖Uᵀz‖²`.
    pub fn projected_norm_sq(&self, z: &[f64]) -> f64 {
        self.columns.columns().map(|u| {
            let c = dot(u, z);
            c * c
        }).sum()
    }

    /// `UUᵀz`.
    pub fn project(&self, z: &[f64]) -> Vec<f64> {
        self.columns.matvec(&self.coefficients(z))
    }

    /// `U O` for a square `O` of matching size. The result is re-validated.
    pub fn rotate(&self, o: &Matrix) -> Result<Self> {
        Self::new(self.columns.matmul(o)?)
    }

    /// First `d` columns.
    pub fn leading(&self, d: usize) -> Result<Self> {
        if d > self.dim() {
            return Err(Error::invalid(alloc::format!(
                "cannot take {d} columns of a {}-dimensional basis",
                self.dim()
            )));
        }
        Ok(Self::from_matrix_unchecked(self.columns.clone().truncate_columns(d)))
    }
}

/// Orthonormal basis of the column span of `m` (Gram-Schmidt with one round
/// of reorthogonalization). Rejects columns whose residual after projection
/// falls below `1e-10` times the largest column norm.
pub fn orthonormalize(m: &Matrix) -> Result<OrthonormalBasis> {
    let (n, d) = m.shape();
    if d > n {
        return Err(Error::RankDeficient {
            column: n,
            residual: 0.0,
            scale: 0.0,
        });
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("orthonormalize"));
    }
    let scale = m.columns().map(norm).fold(0.0, f64::max);
    let mut q = Matrix::zeros(n, d);
    for j in 0..d {
        let mut v = m.column(j).to_vec();
        for _ in 0..2 {
            for p in 0..j {
                let qp = q.column(p);
                let s = dot(qp, &v);
                axpy(-s, qp, &mut v);
            }
        }
        let r = norm(&v);
        if !(r > 1e-10 * scale) {
            return Err(Error::RankDeficient {
                column: j,
                residual: r,
                scale,
            });
        }
        v.iter_mut().for_each(|x| *x /= r);
        q.column_mut(j).copy_from_slice(&v);
    }
    Ok(OrthonormalBasis::from_matrix_unchecked(q))
}

/// Basis for the `d` leading eigenvectors of a positive semidefinite matrix.
pub fn pca(a: &SymmetricMatrix, d: usize) -> Result<OrthonormalBasis> {
    let n = a.dim();
    if d == 0 || d > n {
        return Err(Error::invalid(alloc::format!(
            "pca rank {d} outside 1..={n}"
        )));
    }
    let values = sym_eigenvalues(a)?;
    let scale = a.as_matrix().frobenius_norm();
    let min = values.last().copied().unwrap_or(0.0);
    if min < -1e-8 * scale {
        return Err(Error::invalid(alloc::format!(
            "matrix is not positive semidefinite: smallest eigenvalue {min:e}"
        )));
    }
    Ok(sym_eig(a, d)?.vectors)
}

fn check_ambient(u: &OrthonormalBasis, v: &OrthonormalBasis) -> Result<()> {
    if u.ambient_dim() != v.ambient_dim() {
        return Err(Error::DimensionMismatch {
            context: "subspace ambient dimension",
            expected: u.ambient_dim(),
            found: v.ambient_dim(),
        });
    }
    Ok(())
}

/// Cosines of the principal angles (singular values of `UᵀV`), clamped to
/// `[0, 1]`, non-increasing. Length is `min(dim U, dim V)`.
pub fn principal_cosines(u: &OrthonormalBasis, v: &OrthonormalBasis) -> Result<Vec<f64>> {
    check_ambient(u, v)?;
    let r = u.dim().min(v.dim());
    if r == 0 {
        return Ok(Vec::new());
    }
    let m = u.as_matrix().t_matmul(v.as_matrix())?;
    // smaller Gram matrix of M
    let g = if u.dim() <= v.dim() {
        SymmetricMatrix::from_lower_fn(u.dim(), |i, j| {
            (0..m.cols()).map(|k| m[(i, k)] * m[(j, k)]).sum()
        })
    } else {
        SymmetricMatrix::from_lower_fn(v.dim(), |i, j| dot(m.column(i), m.column(j)))
    };
    let values = sym_eigenvalues(&g)?;
    Ok(values
        .into_iter()
        .map(|s2| libm::sqrt(s2.clamp(0.0, 1.0)))
        .collect())
}

/// Spectral norm of `UUᵀ - VVᵀ`.
///
/// For equal dimensions this is `‖(I - UUᵀ)V‖₂`, the sine of the largest
/// principal angle, evaluated directly on the residual so that identical
/// spans give a distance near machine precision. Spans of different
/// dimension are always at distance 1.
pub fn subspace_distance(u: &OrthonormalBasis, v: &OrthonormalBasis) -> Result<f64> {
    check_ambient(u, v)?;
    if u.dim() != v.dim() {
        return Ok(1.0);
    }
    if u.dim() == 0 {
        return Ok(0.0);
    }
    let coeffs = u.as_matrix().t_matmul(v.as_matrix())?;
    let mut resid = v.as_matrix().clone();
    for j in 0..resid.cols() {
        for p in 0..u.dim() {
            let c = coeffs[(p, j)];
            axpy(-c, u.as_matrix().column(p), resid.column_mut(j));
        }
    }
    let gram = SymmetricMatrix::from_lower_fn(resid.cols(), |i, j| {
        dot(resid.column(i), resid.column(j))
    });
    let top = sym_eigenvalues(&gram)?[0];
    Ok(libm::sqrt(top.clamp(0.0, 1.0)))
}
