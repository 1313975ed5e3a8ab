//! Dense complex linear algebra for Hermitian operators.
//!
//! Everything here is sized for desk-scale Hilbert spaces (dimension up to a
//! few dozen): matrices are dense row-major vectors, the eigensolver is a
//! cyclic complex Jacobi iteration chosen for robustness over speed.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Sub};

// Inherent std float methods shadow the trait in test builds.
#[allow(unused_imports)]
use num_traits::Float;
use num_complex::Complex;

use crate::error::Error;
use crate::tolerances::{Tolerances, MAX_JACOBI_SWEEPS};

/// Complex scalar used throughout the crate.
pub type Complex64 = Complex<f64>;

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Zero matrix of the given dimension. Panics on `dim == 0`.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        ComplexMatrix { dim, entries: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    /// Identity matrix.
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Builds a matrix from rows, checking squareness and finiteness.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, Error> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::BadDimension { dim: 0 });
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimMismatch { expected: dim, found: row.len() });
            }
            for z in row {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite);
                }
                entries.push(*z);
            }
        }
        Ok(ComplexMatrix { dim, entries })
    }

    /// Real diagonal matrix.
    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m.set(i, i, Complex64::new(x, 0.0));
        }
        m
    }

    /// Rank-one matrix `u v†`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        assert_eq!(u.len(), v.len(), "outer product needs equal lengths");
        let dim = u.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, u[i] * v[j].conj());
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.dim + col] = value;
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.set(j, i, self.get(i, j).conj());
            }
        }
        m
    }

    /// Matrix product `self * rhs`. Panics on dimension mismatch.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix product needs equal dimensions");
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..d {
                    let cur = out.get(i, j);
                    out.set(i, j, cur + a * rhs.get(k, j));
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len(), "matrix-vector product needs equal dimensions");
        let d = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); d];
        for i in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..d {
                acc += self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// `⟨ψ| self |ψ⟩` for an amplitude vector.
    pub fn expectation(&self, psi: &[Complex64]) -> Complex64 {
        let mv = self.mul_vec(psi);
        psi.iter().zip(mv.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        let entries = self.entries.iter().map(|z| z * factor).collect();
        ComplexMatrix { dim: self.dim, entries }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `tr(self · other)` without forming the product.
    pub fn product_trace(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim, other.dim);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += self.get(i, j) * other.get(j, i);
            }
        }
        acc
    }

    /// Real part of the trace; for Hermitian matrices this is the trace.
    pub fn real_trace(&self) -> f64 {
        self.trace().re
    }

    /// Largest entry magnitude, the max-norm used by all residual checks.
    pub fn max_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Hermitian symmetry defect `‖M − M†‖_max`.
    pub fn hermitian_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let r = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(r);
            }
        }
        worst
    }

    /// Max-norm distance to another matrix.
    pub fn max_norm_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        let entries = self.entries.iter().zip(rhs.entries.iter()).map(|(a, b)| a + b).collect();
        ComplexMatrix { dim: self.dim, entries }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        let entries = self.entries.iter().zip(rhs.entries.iter()).map(|(a, b)| a - b).collect();
        ComplexMatrix { dim: self.dim, entries }
    }
}

/// Hermitian matrix. Construction symmetrizes, so the wrapped matrix satisfies
/// `M == M†` exactly up to floating-point addition.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    /// Checks the symmetry residual against `tol.herm`, then symmetrizes.
    pub fn new(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self, Error> {
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        let residual = matrix.hermitian_residual();
        if residual > tol.herm {
            return Err(Error::NonHermitian { residual });
        }
        Ok(Self::symmetrized(matrix))
    }

    /// `new` with default tolerances.
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self, Error> {
        Self::new(matrix, &Tolerances::default())
    }

    /// Replaces the matrix by its Hermitian part without a residual check.
    /// For results of sums like `Σ K† T K` that are Hermitian by construction.
    pub(crate) fn symmetrized(matrix: ComplexMatrix) -> Self {
        let d = matrix.dim();
        let mut m = ComplexMatrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let z = (matrix.get(i, j) + matrix.get(j, i).conj()) * 0.5;
                m.set(i, j, z);
            }
        }
        HermitianOperator { matrix: m }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        HermitianOperator { matrix: ComplexMatrix::from_real_diag(diag) }
    }

    pub fn identity(dim: usize) -> Self {
        HermitianOperator { matrix: ComplexMatrix::identity(dim) }
    }

    pub fn zero(dim: usize) -> Self {
        HermitianOperator { matrix: ComplexMatrix::zeros(dim) }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `1 − self`.
    pub fn complement(&self) -> Self {
        HermitianOperator { matrix: &ComplexMatrix::identity(self.dim()) - &self.matrix }
    }

    pub fn add(&self, other: &Self) -> Self {
        HermitianOperator { matrix: &self.matrix + &other.matrix }
    }

    pub fn scale(&self, factor: f64) -> Self {
        HermitianOperator { matrix: self.matrix.scale(factor) }
    }

    pub fn trace(&self) -> f64 {
        self.matrix.real_trace()
    }

    pub fn max_norm(&self) -> f64 {
        self.matrix.max_norm()
    }

    pub fn max_norm_diff(&self, other: &Self) -> f64 {
        self.matrix.max_norm_diff(&other.matrix)
    }

    /// Whether `‖self² − self‖_max` is at or below `tol`.
    pub fn is_projection(&self, tol: f64) -> bool {
        let sq = self.matrix.mul(&self.matrix);
        sq.max_norm_diff(&self.matrix) <= tol
    }
}

/// Eigensystem of a Hermitian operator: real eigenvalues ascending, unitary
/// eigenvector matrix with eigenvectors in the columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// `V f(Λ) V†` as a Hermitian operator.
    pub fn map_eigenvalues(&self, mut f: impl FnMut(f64) -> f64) -> HermitianOperator {
        let d = self.eigenvectors.dim();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(d);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            for i in 0..d {
                let vik = v.get(i, k);
                for j in 0..d {
                    let cur = out.get(i, j);
                    out.set(i, j, cur + vik * v.get(j, k).conj() * w);
                }
            }
        }
        HermitianOperator::symmetrized(out)
    }

    /// `V Λ V†`, for residual checks.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_eigenvalues(|x| x).matrix().clone()
    }

    /// `‖V†V − 1‖_max`.
    pub fn orthonormality_residual(&self) -> f64 {
        let v = &self.eigenvectors;
        let gram = v.adjoint().mul(v);
        gram.max_norm_diff(&ComplexMatrix::identity(v.dim()))
    }

    /// Column `k` as an amplitude vector.
    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        let d = self.eigenvectors.dim();
        (0..d).map(|i| self.eigenvectors.get(i, k)).collect()
    }
}

/// Eigendecomposition by cyclic complex Jacobi rotations.
///
/// Each rotation annihilates one off-diagonal entry with a unitary plane
/// rotation; sweeps repeat until the largest off-diagonal magnitude falls
/// below `1e-14 * max(1, ‖M‖_max)`. Deterministic for identical input.
pub fn eigh(op: &HermitianOperator) -> Result<EigenDecomposition, Error> {
    let d = op.dim();
    let mut a = op.matrix().clone();
    let mut v = ComplexMatrix::identity(d);

    let scale = a.max_norm().max(1.0);
    let stop = 1e-14 * scale;
    let skip = stop * 1e-3;

    let mut converged = false;
    for _sweep in 0..MAX_JACOBI_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..d {
            for q in (p + 1)..d {
                off = off.max(a.get(p, q).norm());
            }
        }
        if off <= stop {
            converged = true;
            break;
        }

        for p in 0..d {
            for q in (p + 1)..d {
                let beta = a.get(p, q);
                let b = beta.norm();
                if b <= skip {
                    continue;
                }
                let u = beta / b;
                let alpha = a.get(p, p).re;
                let gamma = a.get(q, q).re;
                let tau = (gamma - alpha) / (2.0 * b);
                let t = if tau.abs() > 1e100 {
                    0.5 / tau
                } else {
                    let sign = if tau >= 0.0 { 1.0 } else { -1.0 };
                    sign / (tau.abs() + (tau * tau + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // A <- A·G with G_pp = u·c, G_pq = u·s, G_qp = -s, G_qq = c.
                for k in 0..d {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, u * akp * c - akq * s);
                    a.set(k, q, u * akp * s + akq * c);
                }
                // A <- G†·A.
                for k in 0..d {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, u.conj() * apk * c - aqk * s);
                    a.set(q, k, u.conj() * apk * s + aqk * c);
                }
                // The rotated 2x2 block is known analytically; writing it
                // directly keeps the annihilated entries exactly zero.
                a.set(p, p, Complex64::new(alpha - t * b, 0.0));
                a.set(q, q, Complex64::new(gamma + t * b, 0.0));
                a.set(p, q, Complex64::new(0.0, 0.0));
                a.set(q, p, Complex64::new(0.0, 0.0));

                // V <- V·G.
                for k in 0..d {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, u * vkp * c - vkq * s);
                    v.set(k, q, u * vkp * s + vkq * c);
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_JACOBI_SWEEPS });
    }

    // Sort ascending, carrying eigenvector columns along.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a.get(i, i).re.total_cmp(&a.get(j, j).re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a.get(i, i).re).collect();
    let mut vectors = ComplexMatrix::zeros(d);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..d {
            vectors.set(row, new_col, v.get(row, old_col));
        }
    }
    Ok(EigenDecomposition { eigenvalues, eigenvectors: vectors })
}

/// Principal square root of a PSD operator.
///
/// Eigenvalues within `tol.psd` of zero are clamped to zero — the square root
/// would amplify that noise band far above it — and anything below `-tol.psd`
/// is `NotPsd`.
pub fn sqrt_psd(op: &HermitianOperator, tol: &Tolerances) -> Result<HermitianOperator, Error> {
    let eigen = eigh(op)?;
    let min = eigen.min_eigenvalue();
    if min < -tol.psd {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    Ok(eigen.map_eigenvalues(|x| if x > tol.psd { x.sqrt() } else { 0.0 }))
}

/// Whether the smallest eigenvalue is at least `-tol`.
pub fn is_psd(op: &HermitianOperator, tol: f64) -> Result<bool, Error> {
    let eigen = eigh(op)?;
    Ok(eigen.min_eigenvalue() >= -tol)
}

/// Whether `0 ≤ op ≤ 1` within `tol.psd` on both ends.
pub fn is_effect(op: &HermitianOperator, tol: &Tolerances) -> Result<bool, Error> {
    let eigen = eigh(op)?;
    Ok(eigen.min_eigenvalue() >= -tol.psd && eigen.max_eigenvalue() <= 1.0 + tol.psd)
}
