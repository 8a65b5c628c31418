//! Seeded random operators: Hilbert-Schmidt (Ginibre) states and GUE-like
//! Hermitian matrices.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::qcore::matrix::{DensityMatrix, HermitianMatrix, Matrix};
use crate::scalar::Real;

/// Deterministic generator used everywhere a seed is accepted.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    Complex::new(gaussian(rng), gaussian(rng))
}

/// Hilbert-Schmidt distributed state of the given rank, `G G^dagger / tr`,
/// with `G` a `d x rank` complex Ginibre matrix.
pub fn random_density_with<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    rank: usize,
) -> Result<DensityMatrix<T>> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    if rank == 0 || rank > d {
        return Err(Error::InvalidArgument(format!("rank {rank} outside 1..={d}")));
    }
    let g: Vec<Complex<T>> = (0..d * rank).map(|_| complex_gaussian(rng)).collect();
    let mut m = Matrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let mut acc = Complex::new(T::zero(), T::zero());
            for k in 0..rank {
                acc += g[i * rank + k] * g[j * rank + k].conj();
            }
            m[(i, j)] = acc;
        }
    }
    let h = m.hermitian_part();
    let tr = h.trace();
    Ok(DensityMatrix::new_unchecked(h.scale(T::one() / tr)))
}

/// Seeded Hilbert-Schmidt state; identical seeds give identical matrices.
pub fn random_density<T: Real>(d: usize, rank: usize, seed: u64) -> Result<DensityMatrix<T>> {
    random_density_with(&mut seeded_rng(seed), d, rank)
}

/// Full-rank Hilbert-Schmidt state.
pub fn random_state<T: Real, R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityMatrix<T> {
    random_density_with(rng, d, d).expect("d >= 2 checked by caller")
}

/// Haar-random pure state.
pub fn random_pure<T: Real, R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityMatrix<T> {
    random_density_with(rng, d, 1).expect("d >= 2 checked by caller")
}

/// Hermitian matrix with independent Gaussian entries (GUE up to scale).
pub fn random_hermitian<T: Real, R: Rng + ?Sized>(rng: &mut R, d: usize) -> HermitianMatrix<T> {
    let m = Matrix::from_fn(d, |_, _| complex_gaussian(rng));
    m.hermitian_part()
}

/// Haar-ish unitary from the eigenvectors of a random Hermitian matrix.
pub fn random_unitary<T: Real, R: Rng + ?Sized>(rng: &mut R, d: usize) -> Matrix<T> {
    random_hermitian::<T, R>(rng, d)
        .eig()
        .expect("Jacobi converges on small random matrices")
        .vectors
}
