//! Free sets as finite unions of closed convex pieces.
//!
//! Each piece exposes three oracles: membership, exact linear maximization
//! and its extreme points. Two kinds ship: polytopes given by vertex states,
//! and the states diagonal in a fixed orthonormal basis.

pub mod lp;

use num_complex::Complex;
use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::qcore::matrix::{DensityMatrix, HermitianMatrix, Matrix};
use crate::qcore::random::seeded_rng;
use crate::scalar::{tol, Real};

/// Default membership tolerance.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub enum ConvexKind<T> {
    /// Convex hull of the listed states.
    Polytope { vertices: Vec<DensityMatrix<T>> },
    /// `{ U diag(p) U^dagger : p a probability vector }`
    IncoherentInBasis { basis: Matrix<T> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexFreeSet<T> {
    dim: usize,
    kind: ConvexKind<T>,
    label: String,
}

impl<T: Real> ConvexFreeSet<T> {
    pub fn polytope(label: impl Into<String>, vertices: Vec<DensityMatrix<T>>) -> Result<Self> {
        let first = vertices
            .first()
            .ok_or_else(|| Error::InvalidArgument("polytope needs at least one vertex".into()))?;
        let dim = first.dim();
        if let Some(v) = vertices.iter().find(|v| v.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.dim(),
            });
        }
        Ok(Self {
            dim,
            kind: ConvexKind::Polytope { vertices },
            label: label.into(),
        })
    }

    pub fn incoherent(label: impl Into<String>, basis: Matrix<T>) -> Result<Self> {
        let dim = basis.dim();
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        let defect = basis.dagger().matmul(&basis).max_abs_diff(&Matrix::identity(dim));
        if defect > tol::<T>(1e-10) {
            return Err(Error::NotUnitary(defect.as_f64()));
        }
        Ok(Self {
            dim,
            kind: ConvexKind::IncoherentInBasis { basis },
            label: label.into(),
        })
    }

    /// Diagonal states in the computational basis.
    pub fn incoherent_computational(label: impl Into<String>, d: usize) -> Result<Self> {
        Self::incoherent(label, Matrix::identity(d))
    }

    /// Qubit states diagonal in the eigenbasis of the Pauli operator along
    /// `axis` (0 = x, 1 = y, 2 = z).
    pub fn qubit_axis(label: impl Into<String>, axis: usize) -> Result<Self> {
        let h = T::FRAC_1_SQRT_2();
        let z = Complex::new(T::zero(), T::zero());
        let r = |x: T| Complex::new(x, T::zero());
        let data = match axis {
            0 => vec![r(h), r(h), r(h), r(-h)],
            1 => vec![r(h), r(h), Complex::new(T::zero(), h), Complex::new(T::zero(), -h)],
            2 => vec![r(T::one()), z, z, r(T::one())],
            _ => return Err(Error::InvalidArgument(format!("axis {axis} not in 0..3"))),
        };
        Self::incoherent(label, Matrix::from_vec(2, data)?)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn kind(&self) -> &ConvexKind<T> {
        &self.kind
    }

    #[inline]
    pub fn label(&self) -> &str {
        &self.label
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: d,
            });
        }
        Ok(())
    }

    /// Vertex list, or the basis projectors `U|i><i|U^dagger`.
    pub fn extreme_points(&self) -> Vec<DensityMatrix<T>> {
        match &self.kind {
            ConvexKind::Polytope { vertices } => vertices.clone(),
            ConvexKind::IncoherentInBasis { basis } => (0..self.dim)
                .map(|i| DensityMatrix::pure(&basis.column(i)).expect("unitary columns are unit vectors"))
                .collect(),
        }
    }

    /// Decides `sigma in K` up to `tol`.
    pub fn membership(&self, sigma: &DensityMatrix<T>, tol: T) -> Result<bool> {
        self.check_dim(sigma.dim())?;
        Ok(self.membership_residual(sigma) <= tol)
    }

    /// Polytope: least L1 residual of `sum c_i omega_i = sigma` over the
    /// simplex. Incoherent: Frobenius norm of the off-diagonal part of
    /// `U^dagger sigma U`.
    pub fn membership_residual(&self, sigma: &DensityMatrix<T>) -> T {
        match &self.kind {
            ConvexKind::IncoherentInBasis { basis } => {
                let rotated = basis.dagger().matmul(sigma.matrix()).matmul(basis);
                let mut off = T::zero();
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        if i != j {
                            off += rotated[(i, j)].norm_sqr();
                        }
                    }
                }
                off.sqrt()
            }
            ConvexKind::Polytope { vertices } => {
                let (a, b) = polytope_system(vertices, sigma.as_hermitian());
                lp::min_l1_residual(b.len(), vertices.len(), &a, &b).residual
            }
        }
    }

    /// Exact `max_{sigma in K} tr[X sigma]` and a maximizer.
    pub fn max_linear(&self, x: &HermitianMatrix<T>) -> Result<(T, DensityMatrix<T>)> {
        self.check_dim(x.dim())?;
        match &self.kind {
            ConvexKind::Polytope { vertices } => {
                let (best, val) = vertices
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (i, x.trace_product(v.as_hermitian())))
                    .fold((0, T::neg_infinity()), |b, c| if c.1 > b.1 { c } else { b });
                Ok((val, vertices[best].clone()))
            }
            ConvexKind::IncoherentInBasis { basis } => {
                let rotated = basis.dagger().matmul(x.matrix()).matmul(basis);
                let (best, val) = (0..self.dim)
                    .map(|i| (i, rotated[(i, i)].re))
                    .fold((0, T::neg_infinity()), |b, c| if c.1 > b.1 { c } else { b });
                Ok((val, DensityMatrix::pure(&basis.column(best))?))
            }
        }
    }
}

/// Real linear system `[1; vec(omega_i)] c = [1; vec(sigma)]` with Hermitian
/// matrices flattened to diagonal, real-upper and imaginary-upper parts.
fn polytope_system<T: Real>(vertices: &[DensityMatrix<T>], sigma: &HermitianMatrix<T>) -> (Vec<T>, Vec<T>) {
    let d = sigma.dim();
    let k = vertices.len();
    let flat = |h: &HermitianMatrix<T>| {
        let m = h.matrix();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            out.push(m[(i, i)].re);
        }
        for i in 0..d {
            for j in i + 1..d {
                out.push(m[(i, j)].re);
                out.push(m[(i, j)].im);
            }
        }
        out
    };
    let cols: Vec<Vec<T>> = vertices.iter().map(|v| flat(v.as_hermitian())).collect();
    let mut b = vec![T::one()];
    b.extend(flat(sigma));
    let rows = b.len();
    let mut a = vec![T::zero(); rows * k];
    for (c, col) in cols.iter().enumerate() {
        a[c] = T::one();
        for (r, &v) in col.iter().enumerate() {
            a[(r + 1) * k + c] = v;
        }
    }
    (a, b)
}

/// Finite union of convex pieces of a common dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeSet<T> {
    dim: usize,
    subsets: Vec<ConvexFreeSet<T>>,
}

impl<T: Real> FreeSet<T> {
    pub fn new(subsets: Vec<ConvexFreeSet<T>>) -> Result<Self> {
        let dim = subsets
            .first()
            .ok_or_else(|| Error::InvalidArgument("free set needs at least one subset".into()))?
            .dim();
        if let Some(s) = subsets.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: s.dim(),
            });
        }
        Ok(Self { dim, subsets })
    }

    pub fn single(subset: ConvexFreeSet<T>) -> Self {
        Self {
            dim: subset.dim(),
            subsets: vec![subset],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn subsets(&self) -> &[ConvexFreeSet<T>] {
        &self.subsets
    }

    /// Index of the first subset containing `sigma`.
    pub fn containing_subset(&self, sigma: &DensityMatrix<T>, tol: T) -> Result<Option<usize>> {
        for (k, s) in self.subsets.iter().enumerate() {
            if s.membership(sigma, tol)? {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }
}

/// A sampled free state tagged with the subset it was drawn from.
#[derive(Clone, Debug)]
pub struct FreeSample<T> {
    pub subset: usize,
    pub state: DensityMatrix<T>,
}

/// Draws `n` free states: a uniformly chosen subset, then a flat Dirichlet
/// mixture of its extreme points.
pub fn sample_free<T: Real>(f: &FreeSet<T>, n: usize, seed: u64) -> Result<Vec<FreeSample<T>>> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let mut rng = seeded_rng(seed);
    let extremes: Vec<Vec<DensityMatrix<T>>> = f.subsets().iter().map(|s| s.extreme_points()).collect();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let k = rng.random_range(0..extremes.len());
        let pts = &extremes[k];
        let state = dirichlet_mixture(&mut rng, pts);
        out.push(FreeSample { subset: k, state });
    }
    Ok(out)
}

pub(crate) fn dirichlet_mixture<T: Real, R: Rng + ?Sized>(rng: &mut R, pts: &[DensityMatrix<T>]) -> DensityMatrix<T> {
    let w: Vec<T> = (0..pts.len()).map(|_| T::lit(rng.sample::<f64, _>(Exp1))).collect();
    let total: T = w.iter().copied().sum();
    mix(pts, &w.iter().map(|&x| x / total).collect::<Vec<_>>())
}

/// `sum_i w_i pts_i` for weights already on the simplex.
pub(crate) fn mix<T: Real>(pts: &[DensityMatrix<T>], w: &[T]) -> DensityMatrix<T> {
    let mut acc = HermitianMatrix::zeros(pts[0].dim());
    for (p, &x) in pts.iter().zip(w) {
        acc.axpy(x, p.as_hermitian());
    }
    DensityMatrix::new_unchecked(acc)
}
