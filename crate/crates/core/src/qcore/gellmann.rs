//! Generalized Gell-Mann basis and Bloch coordinates.
//!
//! Basis order is fixed and serialized coefficients depend on it:
//! symmetric off-diagonal elements `E_jk + E_kj` for `j < k` in row-major
//! order, then the antisymmetric ones `-i E_jk + i E_kj` in the same order,
//! then the `d - 1` diagonal elements. For `d = 2` this is `(X, Y, Z)`.
//!
//! A state is written `eta = (I + kappa * sum_j x_j lambda_j) / d` with
//! `kappa = sqrt(d (d - 1) / 2)`, so pure states sit on the unit sphere.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::qcore::matrix::{DensityMatrix, HermitianMatrix, Matrix};
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct GellMannBasis<T> {
    dim: usize,
    elements: Vec<HermitianMatrix<T>>,
}

impl<T: Real> GellMannBasis<T> {
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn elements(&self) -> &[HermitianMatrix<T>] {
        &self.elements
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `kappa = sqrt(d (d - 1) / 2)`
    pub fn bloch_scale(&self) -> T {
        let d = T::count(self.dim);
        (d * (d - T::one()) / T::lit(2.0)).sqrt()
    }

    /// Factor `sqrt(d / (2 (d - 1)))` with `x_j = tr[eta lambda_j] * factor`.
    pub fn coordinate_factor(&self) -> T {
        let d = T::count(self.dim);
        (d / (T::lit(2.0) * (d - T::one()))).sqrt()
    }

    /// Operators `Q_j` with `x_j = tr[eta Q_j]` for unit-trace `eta`.
    pub fn coordinate_operators(&self) -> Vec<HermitianMatrix<T>> {
        let f = self.coordinate_factor();
        self.elements.iter().map(|l| l.scale(f)).collect()
    }

    /// Gram matrix `G_ij = tr[lambda_i lambda_j]`, row-major.
    pub fn gram(&self) -> Vec<Vec<T>> {
        self.elements
            .iter()
            .map(|a| self.elements.iter().map(|b| a.trace_product(b)).collect())
            .collect()
    }
}

/// Standard ordered Gell-Mann basis for `C^d`.
pub fn gell_mann_basis<T: Real>(d: usize) -> Result<GellMannBasis<T>> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut elements = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in j + 1..d {
            let mut m = Matrix::zeros(d);
            m[(j, k)] = Complex::new(T::one(), T::zero());
            m[(k, j)] = Complex::new(T::one(), T::zero());
            elements.push(HermitianMatrix::new_unchecked(m));
        }
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut m = Matrix::zeros(d);
            m[(j, k)] = Complex::new(T::zero(), -T::one());
            m[(k, j)] = Complex::new(T::zero(), T::one());
            elements.push(HermitianMatrix::new_unchecked(m));
        }
    }
    for l in 1..d {
        let lf = T::count(l);
        let norm = (T::lit(2.0) / (lf * (lf + T::one()))).sqrt();
        let mut m = Matrix::zeros(d);
        for i in 0..l {
            m[(i, i)] = Complex::new(norm, T::zero());
        }
        m[(l, l)] = Complex::new(-lf * norm, T::zero());
        for i in l + 1..d {
            m[(i, i)] = zero;
        }
        elements.push(HermitianMatrix::new_unchecked(m));
    }
    Ok(GellMannBasis { dim: d, elements })
}

/// Generalized Bloch vector of length `d^2 - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochVector<T> {
    pub dim: usize,
    pub coords: Vec<T>,
}

impl<T: Real> BlochVector<T> {
    pub fn new(dim: usize, coords: Vec<T>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if coords.len() != dim * dim - 1 {
            return Err(Error::DimensionMismatch {
                expected: dim * dim - 1,
                found: coords.len(),
            });
        }
        Ok(Self { dim, coords })
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::new(dim, vec![T::zero(); dim.saturating_mul(dim).saturating_sub(1)])
    }

    pub fn norm(&self) -> T {
        self.coords.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    pub fn dot(&self, other: &Self) -> T {
        self.coords.iter().zip(&other.coords).map(|(&a, &b)| a * b).sum()
    }
}

/// `x_j = tr[rho lambda_j] * sqrt(d / (2 (d - 1)))`
pub fn bloch_from_state<T: Real>(rho: &DensityMatrix<T>) -> BlochVector<T> {
    bloch_from_hermitian(rho.as_hermitian())
}

/// Bloch coordinates of any Hermitian operator (trace is ignored).
pub fn bloch_from_hermitian<T: Real>(a: &HermitianMatrix<T>) -> BlochVector<T> {
    let basis = gell_mann_basis::<T>(a.dim()).expect("HermitianMatrix has dim >= 2");
    let f = basis.coordinate_factor();
    let coords = basis.elements().iter().map(|l| a.trace_product(l) * f).collect();
    BlochVector { dim: a.dim(), coords }
}

/// Unit-trace Hermitian operator with the given Bloch vector. The result is
/// a state only when it is also positive semidefinite.
pub fn state_from_bloch<T: Real>(x: &BlochVector<T>) -> HermitianMatrix<T> {
    let basis = gell_mann_basis::<T>(x.dim).expect("BlochVector has dim >= 2");
    state_from_bloch_in(&basis, &x.coords)
}

pub(crate) fn state_from_bloch_in<T: Real>(basis: &GellMannBasis<T>, coords: &[T]) -> HermitianMatrix<T> {
    let d = basis.dim();
    let inv_d = T::one() / T::count(d);
    let kappa = basis.bloch_scale();
    let mut acc = HermitianMatrix::identity(d).scale(inv_d);
    for (l, &x) in basis.elements().iter().zip(coords) {
        if x != T::zero() {
            acc.axpy(x * kappa * inv_d, l);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::random::random_density;

    #[test]
    fn qubit_basis_is_pauli() {
        let b = gell_mann_basis::<f64>(2).unwrap();
        let e = b.elements();
        assert_eq!(e.len(), 3);
        assert_eq!(e[0].matrix()[(0, 1)], Complex::new(1.0, 0.0));
        assert_eq!(e[1].matrix()[(0, 1)], Complex::new(0.0, -1.0));
        assert_eq!(e[1].matrix()[(1, 0)], Complex::new(0.0, 1.0));
        assert_eq!(e[2].matrix()[(0, 0)], Complex::new(1.0, 0.0));
        assert_eq!(e[2].matrix()[(1, 1)], Complex::new(-1.0, 0.0));
    }

    #[test]
    fn gram_is_twice_identity() {
        for d in 2..=4 {
            let b = gell_mann_basis::<f64>(d).unwrap();
            assert_eq!(b.len(), d * d - 1);
            for (i, row) in b.gram().iter().enumerate() {
                assert!(b.elements()[i].trace().abs() < 1e-12);
                for (j, &g) in row.iter().enumerate() {
                    let want = if i == j { 2.0 } else { 0.0 };
                    assert!((g - want).abs() < 1e-10, "d={d} ({i},{j}) = {g}");
                }
            }
        }
    }

    #[test]
    fn invalid_dimension() {
        assert!(matches!(gell_mann_basis::<f64>(1), Err(Error::InvalidDimension(1))));
    }

    #[test]
    fn qubit_ground_state_bloch() {
        let rho = DensityMatrix::<f64>::basis(2, 0).unwrap();
        let x = bloch_from_state(&rho);
        assert!(x.coords[0].abs() < 1e-15 && x.coords[1].abs() < 1e-15);
        assert!((x.coords[2] - 1.0).abs() < 1e-15);
        let back = state_from_bloch(&x);
        assert!(back.max_abs_diff(rho.as_hermitian()) < 1e-15);
    }

    #[test]
    fn maximally_mixed_is_origin() {
        for d in 2..=4 {
            let x = bloch_from_state(&DensityMatrix::<f64>::maximally_mixed(d).unwrap());
            assert!(x.norm() < 1e-15);
            let back = state_from_bloch(&BlochVector::<f64>::zero(d).unwrap());
            assert!((back.trace() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn outside_ball_is_not_a_state() {
        let h = state_from_bloch(&BlochVector::<f64>::new(2, vec![0.0, 0.0, 2.0]).unwrap());
        assert!((h.trace() - 1.0).abs() < 1e-15);
        assert!(h.min_eigenvalue().unwrap() < 0.0);
    }

    #[test]
    fn round_trip_random_states() {
        for d in 2..=4 {
            for seed in 0..10 {
                let rho = random_density::<f64>(d, 1 + (seed as usize) % d, seed).unwrap();
                let back = state_from_bloch(&bloch_from_state(&rho));
                assert!(back.max_abs_diff(rho.as_hermitian()) < 1e-12);
            }
        }
    }
}
