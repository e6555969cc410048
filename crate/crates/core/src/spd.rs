//! Symmetric positive-definite matrices with lazily cached factorizations.
//!
//! An [`SpdMatrix`] is validated at construction (Cholesky with a relative
//! pivot threshold) and afterwards immutable. The Cholesky factor, the
//! eigendecomposition, the inverse and the symmetric square root are computed
//! on first use and cached. Caches use [`OnceLock`], so concurrent first use
//! from several threads only duplicates work.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative threshold for positive definiteness: every squared Cholesky pivot
/// must exceed this factor times the largest diagonal entry.
pub const PD_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone)]
struct Eigen {
    values: DVector<f64>,
    vectors: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct SpdMatrix {
    matrix: DMatrix<f64>,
    chol: DMatrix<f64>,
    eigen: OnceLock<Eigen>,
    inverse: OnceLock<DMatrix<f64>>,
    sqrt: OnceLock<DMatrix<f64>>,
    inv_sqrt: OnceLock<DMatrix<f64>>,
}

/// Lower Cholesky factor of `m`, or `None` if `m` is not positive definite at
/// the [`PD_THRESHOLD`] level.
pub fn checked_cholesky(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n || m.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let max_diag = (0..n).map(|i| m[(i, i)]).fold(f64::NEG_INFINITY, f64::max);
    if max_diag <= 0.0 {
        return None;
    }
    let threshold = PD_THRESHOLD * max_diag;
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > threshold) {
            return None;
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(l)
}

impl SpdMatrix {
    /// Symmetrizes `matrix` as `(M + Mᵀ)/2` and validates positive definiteness.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        let chol = checked_cholesky(&sym).ok_or(Error::NotPositiveDefinite)?;
        Ok(Self::from_parts(sym, chol))
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0).expect("identity is SPD")
    }

    /// `scale · I`, for `scale > 0`.
    pub fn scaled_identity(dim: usize, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() || dim == 0 {
            return Err(Error::NotPositiveDefinite);
        }
        let m = DMatrix::from_diagonal_element(dim, dim, scale);
        let l = DMatrix::from_diagonal_element(dim, dim, scale.sqrt());
        Ok(Self::from_parts(m, l))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    fn from_parts(matrix: DMatrix<f64>, chol: DMatrix<f64>) -> Self {
        Self {
            matrix,
            chol,
            eigen: OnceLock::new(),
            inverse: OnceLock::new(),
            sqrt: OnceLock::new(),
            inv_sqrt: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Lower-triangular `L` with `L Lᵀ = A`.
    pub fn cholesky(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn log_det(&self) -> f64 {
        2.0 * self.chol.diagonal().iter().map(|v| v.ln()).sum::<f64>()
    }

    /// Solves `L z = v` for the Cholesky factor `L`.
    pub fn whiten(&self, v: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let mut z = v.clone();
        for i in 0..n {
            let mut s = z[i];
            for k in 0..i {
                s -= self.chol[(i, k)] * z[k];
            }
            z[i] = s / self.chol[(i, i)];
        }
        z
    }

    /// `vᵀ A⁻¹ v`.
    pub fn inv_quad_form(&self, v: &DVector<f64>) -> f64 {
        self.whiten(v).norm_squared()
    }

    /// `(x - μ)ᵀ M⁻¹ (x - μ)` using `buf` as scratch space.
    pub fn mahalanobis_sq(&self, x: &DVector<f64>, mu: &DVector<f64>, buf: &mut Vec<f64>) -> f64 {
        let n = self.dim();
        buf.clear();
        let mut total = 0.0;
        for i in 0..n {
            let mut s = x[i] - mu[i];
            for k in 0..i {
                s -= self.chol[(i, k)] * buf[k];
            }
            let z = s / self.chol[(i, i)];
            buf.push(z);
            total += z * z;
        }
        total
    }

    fn eigen(&self) -> &Eigen {
        self.eigen.get_or_init(|| {
            let se = nalgebra::SymmetricEigen::new(self.matrix.clone());
            Eigen {
                values: se.eigenvalues.map(|v| v.max(0.0)),
                vectors: se.eigenvectors,
            }
        })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigen().values
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigen().values.max()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen().values.min()
    }

    fn spectral(&self, h: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let e = self.eigen();
        let scaled = DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            e.vectors[(i, j)] * h(e.values[j])
        });
        let out = &scaled * e.vectors.transpose();
        (&out + out.transpose()) * 0.5
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        self.inverse.get_or_init(|| {
            let n = self.dim();
            let mut inv = DMatrix::<f64>::identity(n, n);
            for j in 0..n {
                let col = self.whiten(&inv.column(j).into_owned());
                inv.set_column(j, &col);
            }
            // inv now holds L⁻¹; A⁻¹ = L⁻ᵀ L⁻¹
            let out = inv.transpose() * &inv;
            (&out + out.transpose()) * 0.5
        })
    }

    /// Symmetric square root `A^{1/2}` from the eigendecomposition.
    pub fn sqrt(&self) -> &DMatrix<f64> {
        self.sqrt.get_or_init(|| self.spectral(f64::sqrt))
    }

    pub fn inv_sqrt(&self) -> &DMatrix<f64> {
        self.inv_sqrt.get_or_init(|| self.spectral(|v| 1.0 / v.sqrt()))
    }

    /// `c · A` for `c > 0`, carrying over any factorization already cached.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let sc = c.sqrt();
        let out = Self::from_parts(&self.matrix * c, &self.chol * sc);
        if let Some(e) = self.eigen.get() {
            let _ = out.eigen.set(Eigen {
                values: &e.values * c,
                vectors: e.vectors.clone(),
            });
        }
        if let Some(m) = self.inverse.get() {
            let _ = out.inverse.set(m / c);
        }
        if let Some(m) = self.sqrt.get() {
            let _ = out.sqrt.set(m * sc);
        }
        if let Some(m) = self.inv_sqrt.get() {
            let _ = out.inv_sqrt.set(m / sc);
        }
        Ok(out)
    }
}

impl PartialEq for SpdMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

/// Relative Frobenius distance `||a - b||_F / ||b||_F`.
pub fn rel_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}
