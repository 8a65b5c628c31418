//! Dense square complex matrices and the Hermitian / density-operator
//! newtypes built on top of them.

use std::ops::{Index, IndexMut};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::qcore::eigen::{eig_hermitian, Eigen};
use crate::scalar::{tol, Real};

/// Dense row-major `n x n` complex matrix with no structural invariant.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex::new(T::zero(), T::zero()); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Builds a matrix from row-major data; `data.len()` must be a square.
    pub fn from_vec(n: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(x, T::zero());
        }
        m
    }

    /// Rank-one projector `|psi><psi|` (not normalized).
    pub fn outer(psi: &[Complex<T>]) -> Self {
        Self::from_fn(psi.len(), |i, j| psi[i] * psi[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "matmul dimension mismatch");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "add dimension mismatch");
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "sub dimension mismatch");
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn scale(&self, x: T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&a| a * x).collect(),
        }
    }

    /// `self += x * other`
    pub fn axpy(&mut self, x: Complex<T>, other: &Self) {
        assert_eq!(self.n, other.n, "axpy dimension mismatch");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += x * b;
        }
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.n).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + self[(i, i)])
    }

    /// `tr[self * other]` without forming the product.
    pub fn trace_mul(&self, other: &Self) -> Complex<T> {
        assert_eq!(self.n, other.n, "trace_mul dimension mismatch");
        let n = self.n;
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        acc
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (a, b) = (self.n, other.n);
        let n = a * b;
        let mut out = Self::zeros(n);
        for i in 0..a {
            for j in 0..a {
                let x = self.data[i * a + j];
                if x.re == T::zero() && x.im == T::zero() {
                    continue;
                }
                for k in 0..b {
                    let row = (i * b + k) * n + j * b;
                    for l in 0..b {
                        out.data[row + l] = x * other.data[k * b + l];
                    }
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.n, other.n, "diff dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in i..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, eps: T) -> bool {
        self.dagger().matmul(self).max_abs_diff(&Self::identity(self.n)) <= eps
    }

    /// `(A + A^dagger) / 2`, used to scrub rounding asymmetry.
    pub fn hermitian_part(&self) -> HermitianMatrix<T> {
        let half = T::lit(0.5);
        let m = Self::from_fn(self.n, |i, j| (self[(i, j)] + self[(j, i)].conj()) * half);
        HermitianMatrix(m)
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.n + j]
    }
}

/// Hermitian operator of dimension at least two.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix<T>(Matrix<T>);

impl<T: Real> HermitianMatrix<T> {
    /// Validates Hermiticity to `1e-12` entrywise and `dim >= 2`.
    pub fn new(m: Matrix<T>) -> Result<Self> {
        if m.dim() < 2 {
            return Err(Error::InvalidDimension(m.dim()));
        }
        let defect = m.hermiticity_defect();
        if defect > tol::<T>(1e-12) {
            return Err(Error::NotHermitian(defect.as_f64()));
        }
        Ok(m.hermitian_part())
    }

    /// Wraps a matrix the caller knows to be Hermitian.
    pub(crate) fn new_unchecked(m: Matrix<T>) -> Self {
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(Matrix::zeros(n))
    }

    pub fn diagonal(diag: &[T]) -> Self {
        Self(Matrix::diagonal(diag))
    }

    pub fn from_real_diag_and_upper(n: usize, f: impl Fn(usize, usize) -> Complex<T>) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex::new(f(i, i).re, T::zero());
            for j in i + 1..n {
                let z = f(i, j);
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        Self(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &Matrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.0
    }

    pub fn trace(&self) -> T {
        self.0.trace().re
    }

    /// `tr[self * other]`, real because both factors are Hermitian.
    pub fn trace_product(&self, other: &Self) -> T {
        self.0.trace_mul(&other.0).re
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.sub(&other.0))
    }

    pub fn scale(&self, x: T) -> Self {
        Self(self.0.scale(x))
    }

    pub fn axpy(&mut self, x: T, other: &Self) {
        self.0.axpy(Complex::new(x, T::zero()), &other.0);
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kron(&other.0))
    }

    /// Product of Hermitian matrices; Hermitian only when they commute,
    /// so the raw matrix is returned.
    pub fn matmul(&self, other: &Self) -> Matrix<T> {
        self.0.matmul(&other.0)
    }

    /// `U self U^dagger`
    pub fn conjugate_by(&self, u: &Matrix<T>) -> Self {
        u.matmul(&self.0).matmul(&u.dagger()).hermitian_part()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.0.max_abs_diff(&other.0)
    }

    pub fn eig(&self) -> Result<Eigen<T>> {
        eig_hermitian(self)
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        Ok(self.eig()?.values[0])
    }

    pub fn max_eigenvalue(&self) -> Result<T> {
        let e = self.eig()?;
        Ok(e.values[e.values.len() - 1])
    }

    /// Spectral norm `max |lambda|`.
    pub fn operator_norm(&self) -> Result<T> {
        let e = self.eig()?;
        Ok(e.values.iter().fold(T::zero(), |a, &x| a.max(x.abs())))
    }

    pub fn trace_norm(&self) -> Result<T> {
        Ok(self.eig()?.values.iter().map(|x| x.abs()).sum())
    }

    pub fn is_psd(&self, eps: T) -> Result<bool> {
        Ok(self.min_eigenvalue()? >= -eps)
    }

    /// Applies `f` to the spectrum: `U f(Lambda) U^dagger`.
    pub fn map_spectrum(&self, f: impl Fn(T) -> T) -> Result<Self> {
        let e = self.eig()?;
        Ok(e.reconstruct_with(|x| f(x)))
    }

    /// Orthogonal projector onto the eigenspaces with eigenvalue `> threshold`.
    pub fn positive_projector(&self, threshold: T) -> Result<Self> {
        self.map_spectrum(|x| if x > threshold { T::one() } else { T::zero() })
    }
}

/// Unit-trace positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T>(HermitianMatrix<T>);

impl<T: Real> DensityMatrix<T> {
    /// Validates unit trace (1e-10) and positivity (min eigenvalue >= -1e-10).
    pub fn new(h: HermitianMatrix<T>) -> Result<Self> {
        let tr = h.trace();
        if (tr - T::one()).abs() > tol::<T>(1e-10) {
            return Err(Error::InvalidTrace(tr.as_f64()));
        }
        let lmin = h.min_eigenvalue()?;
        if lmin < -tol::<T>(1e-10) {
            return Err(Error::NotPsd(lmin.as_f64()));
        }
        Ok(Self(h))
    }

    pub fn from_matrix(m: Matrix<T>) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    pub(crate) fn new_unchecked(h: HermitianMatrix<T>) -> Self {
        Self(h)
    }

    /// Projects a nearly-valid operator onto the state space by clipping
    /// negative eigenvalues and renormalizing the trace.
    pub fn clip_to_state(h: &HermitianMatrix<T>) -> Result<Self> {
        let clipped = h.map_spectrum(|x| x.max(T::zero()))?;
        let tr = clipped.trace();
        if tr <= T::zero() {
            return Err(Error::NotPsd(h.min_eigenvalue()?.as_f64()));
        }
        Ok(Self(clipped.scale(T::one() / tr)))
    }

    pub fn maximally_mixed(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        Ok(Self(HermitianMatrix::identity(d).scale(T::one() / T::count(d))))
    }

    /// Pure state from an (unnormalized) vector.
    pub fn pure(psi: &[Complex<T>]) -> Result<Self> {
        if psi.len() < 2 {
            return Err(Error::InvalidDimension(psi.len()));
        }
        let norm: T = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm <= T::zero() {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        let m = Matrix::outer(psi).scale(T::one() / norm);
        Ok(Self(m.hermitian_part()))
    }

    /// Computational basis projector `|i><i|`.
    pub fn basis(d: usize, i: usize) -> Result<Self> {
        if i >= d {
            return Err(Error::InvalidArgument(format!("basis index {i} out of range for d={d}")));
        }
        let mut p = vec![T::zero(); d];
        p[i] = T::one();
        Self::from_probabilities(&p)
    }

    /// Diagonal state with the given probability vector.
    pub fn from_probabilities(p: &[T]) -> Result<Self> {
        Self::new(HermitianMatrix::diagonal(p))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    #[inline]
    pub fn as_hermitian(&self) -> &HermitianMatrix<T> {
        &self.0
    }

    #[inline]
    pub fn matrix(&self) -> &Matrix<T> {
        self.0.matrix()
    }

    pub fn into_hermitian(self) -> HermitianMatrix<T> {
        self.0
    }

    pub fn purity(&self) -> T {
        self.0.trace_product(&self.0)
    }

    /// Convex combination `sum_i w_i states_i`; weights must be a
    /// probability vector.
    pub fn mixture(states: &[Self], weights: &[T]) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        if states.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                found: weights.len(),
            });
        }
        let mut acc = HermitianMatrix::zeros(first.dim());
        for (s, &w) in states.iter().zip(weights) {
            if s.dim() != first.dim() {
                return Err(Error::DimensionMismatch {
                    expected: first.dim(),
                    found: s.dim(),
                });
            }
            acc.axpy(w, s.as_hermitian());
        }
        Self::new(acc)
    }
}

impl<T: Real> AsRef<HermitianMatrix<T>> for DensityMatrix<T> {
    fn as_ref(&self) -> &HermitianMatrix<T> {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn rejects_non_hermitian_and_small() {
        let m = Matrix::from_vec(2, vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NotHermitian(_))));
        assert!(matches!(
            HermitianMatrix::new(Matrix::<f64>::identity(1)),
            Err(Error::InvalidDimension(1))
        ));
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::from_probabilities(&[0.2, 0.8]).is_ok());
        assert!(matches!(
            DensityMatrix::from_probabilities(&[0.5, 0.6]),
            Err(Error::InvalidTrace(_))
        ));
        assert!(matches!(
            DensityMatrix::from_probabilities(&[1.2, -0.2]),
            Err(Error::NotPsd(_))
        ));
    }

    #[test]
    fn kron_of_identities() {
        let i2 = Matrix::<f64>::identity(2);
        let i3 = Matrix::<f64>::identity(3);
        assert_eq!(i2.kron(&i3), Matrix::identity(6));
    }

    #[test]
    fn trace_mul_matches_product() {
        let a = Matrix::from_fn(3, |i, j| c(i as f64 + 0.5, j as f64 - 1.0));
        let b = Matrix::from_fn(3, |i, j| c((i * j) as f64, 0.25));
        let direct = a.matmul(&b).trace();
        assert!((direct - a.trace_mul(&b)).norm() < 1e-12);
    }
}
