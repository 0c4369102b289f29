//! Dense symmetric-matrix kernels.
//!
//! Every covariance-like quantity in this crate is a [`SymMatrix`]: a square
//! matrix symmetrized at construction (`M ← (M + Mᵀ)/2`), so that downstream
//! Cholesky factorizations stay stable even after floating-point products
//! like `P⁻¹ D P⁻¹` lose symmetry in the last bits.

use nalgebra::{Cholesky, DMatrix, Dyn};
use std::ops::{Add, Sub};

use crate::error::SplitCiError;
use crate::rng::NormalStream;
use crate::Result;

/// Square symmetric matrix with explicit dimension `n ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    data: DMatrix<f64>,
}

impl SymMatrix {
    /// Build from `n*n` row-major entries; the matrix is symmetrized.
    pub fn new(n: usize, row_major: &[f64]) -> Result<Self> {
        if n == 0 {
            return Err(SplitCiError::DimensionMismatch(
                "dimension must be at least 1".into(),
            ));
        }
        if row_major.len() != n * n {
            return Err(SplitCiError::DimensionMismatch(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                row_major.len()
            )));
        }
        Ok(Self::from_matrix_unchecked(DMatrix::from_row_slice(
            n, n, row_major,
        )))
    }

    /// Build from a square `DMatrix`, symmetrizing it.
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(SplitCiError::DimensionMismatch(format!(
                "expected a nonempty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self::from_matrix_unchecked(m.clone()))
    }

    /// Symmetrize and wrap; `m` must be square. Halving before the sum keeps
    /// entries near the top of the double range from overflowing.
    pub(crate) fn from_matrix_unchecked(m: DMatrix<f64>) -> Self {
        let sym = &m * 0.5 + m.transpose() * 0.5;
        Self { data: sym }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            data: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            data: DMatrix::identity(n, n),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self {
            data: DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(diag)),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// Borrow the underlying dense matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.data[(i, j)]);
            }
        }
        out
    }

    /// Largest absolute entry (zero matrix gives 0).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, &x| m.max(x.abs()))
    }

    pub fn trace(&self) -> f64 {
        self.data.trace()
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        Self {
            data: &self.data * c,
        }
    }

    /// Eigenvalues of the symmetric matrix, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.data.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.data
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Positive semidefiniteness test: true iff the minimum eigenvalue is
    /// at least `-tol * (1 + max|entry|)`.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol * (1.0 + self.max_abs())
    }

    /// Cholesky factor, or `NotPositiveDefinite` (context names the matrix).
    pub(crate) fn cholesky(&self, context: &str) -> Result<Cholesky<f64, Dyn>> {
        let chol = Cholesky::new(self.data.clone())
            .ok_or_else(|| SplitCiError::NotPositiveDefinite(context.to_string()))?;
        // nalgebra only rejects non-positive pivots; rule out NaN/Inf too.
        if chol.l_dirty().diagonal().iter().any(|d| !d.is_finite()) {
            return Err(SplitCiError::NotPositiveDefinite(format!(
                "{context} (non-finite Cholesky pivot)"
            )));
        }
        Ok(chol)
    }

    /// `ln det` of a positive definite matrix via its Cholesky factor:
    /// `2 Σ ln L_kk`.
    pub fn chol_logdet(&self) -> Result<f64> {
        self.chol_logdet_ctx("chol_logdet operand")
    }

    /// As [`Self::chol_logdet`], with the given context naming the matrix in
    /// a `NotPositiveDefinite` error.
    pub(crate) fn chol_logdet_ctx(&self, context: &str) -> Result<f64> {
        let chol = self.cholesky(context)?;
        let logdet: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
        Ok(2.0 * logdet)
    }

    /// Log-determinant and explicit inverse from a single factorization.
    pub(crate) fn chol_logdet_and_inverse(&self, context: &str) -> Result<(f64, SymMatrix)> {
        let chol = self.cholesky(context)?;
        let logdet: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
        Ok((2.0 * logdet, Self::from_matrix_unchecked(chol.inverse())))
    }

    /// Solve `M X = B` for symmetric positive definite `M` (backward-stable
    /// Cholesky solve; `B` has `n` rows and any number of columns).
    pub fn spd_solve(&self, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.spd_solve_ctx(b, "spd_solve operand")
    }

    pub(crate) fn spd_solve_ctx(&self, b: &DMatrix<f64>, context: &str) -> Result<DMatrix<f64>> {
        if b.nrows() != self.dim() {
            return Err(SplitCiError::DimensionMismatch(format!(
                "right-hand side has {} rows, matrix is {n}x{n}",
                b.nrows(),
                n = self.dim()
            )));
        }
        let chol = self.cholesky(context)?;
        Ok(chol.solve(b))
    }

    /// Explicit inverse of a positive definite matrix, symmetrized.
    ///
    /// Used only where the inverse is reused several times in one evaluation;
    /// one-shot applications go through [`SymMatrix::spd_solve`].
    pub fn spd_inverse(&self) -> Result<SymMatrix> {
        self.spd_inverse_ctx("spd_inverse operand")
    }

    pub(crate) fn spd_inverse_ctx(&self, context: &str) -> Result<SymMatrix> {
        let chol = self.cholesky(context)?;
        Ok(Self::from_matrix_unchecked(chol.inverse()))
    }

    /// `tr{A B}` for symmetric `A`, `B` of equal dimension, computed as
    /// `Σ_ij A_ij B_ij`; commutes exactly (same summation both ways).
    pub fn trace_product(&self, other: &SymMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(SplitCiError::DimensionMismatch(format!(
                "trace_product of {a}x{a} and {b}x{b}",
                a = self.dim(),
                b = other.dim()
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Seeded random PSD matrix `G Gᵀ` where `G` is `n × rank` filled
    /// row-by-row with `scale`-scaled standard normals from
    /// [`NormalStream`]. Identical seeds give bit-identical output.
    pub fn random_psd(n: usize, rank: usize, scale: f64, seed: u64) -> Result<SymMatrix> {
        if rank > n {
            return Err(SplitCiError::InvalidRank { rank, dim: n });
        }
        let mut stream = NormalStream::new(seed);
        let mut g = DMatrix::zeros(n, rank);
        for i in 0..n {
            for j in 0..rank {
                g[(i, j)] = scale * stream.next_normal();
            }
        }
        let prod = &g * g.transpose();
        Ok(Self::from_matrix_unchecked(prod))
    }

    /// Symmetric square root of a PSD matrix (eigenvalues clamped at zero).
    pub fn symmetric_sqrt(&self) -> SymMatrix {
        let eig = self.data.clone().symmetric_eigen();
        let sqrt_vals = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        let root =
            &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose();
        Self::from_matrix_unchecked(root)
    }

    /// Reconstruction with every eigenvalue clamped into `[lo, hi]`;
    /// returns the clamped matrix and how many eigenvalues moved.
    pub fn clamp_eigenvalues(&self, lo: f64, hi: f64) -> (SymMatrix, usize) {
        let eig = self.data.clone().symmetric_eigen();
        let mut moved = 0;
        let clamped = eig.eigenvalues.map(|l| {
            let c = l.clamp(lo, hi);
            if c != l {
                moved += 1;
            }
            c
        });
        let m = &eig.eigenvectors * DMatrix::from_diagonal(&clamped) * eig.eigenvectors.transpose();
        (Self::from_matrix_unchecked(m), moved)
    }
}

/// `tr{A B} = Σ_ij A_ij B_ji` for general (not necessarily symmetric)
/// factors, without forming the product.
pub(crate) fn trace_of_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    debug_assert_eq!(a.nrows(), b.ncols());
    debug_assert_eq!(a.ncols(), b.nrows());
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

impl Add for &SymMatrix {
    type Output = SymMatrix;

    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in add");
        SymMatrix {
            data: &self.data + &rhs.data,
        }
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;

    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in sub");
        SymMatrix {
            data: &self.data - &rhs.data,
        }
    }
}
