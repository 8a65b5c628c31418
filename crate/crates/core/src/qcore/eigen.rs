//! Cyclic Jacobi eigensolver for small dense Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a
//! diagonal unitary and then applies the classical real Jacobi rotation on
//! the `(p, q)` plane, so the whole update is a single 2x2 unitary acting
//! on two rows and two columns. Sweeps stop once the off-diagonal mass is
//! below `eps^2` of the total Frobenius mass.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::qcore::matrix::{HermitianMatrix, Matrix};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 64;

/// Spectral decomposition `A = V diag(values) V^dagger`, values ascending.
#[derive(Clone, Debug)]
pub struct Eigen<T> {
    pub values: Vec<T>,
    /// Column `j` is the eigenvector for `values[j]`.
    pub vectors: Matrix<T>,
}

impl<T: Real> Eigen<T> {
    pub fn vector(&self, j: usize) -> Vec<Complex<T>> {
        self.vectors.column(j)
    }

    /// `V diag(f(values)) V^dagger`
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> HermitianMatrix<T> {
        let n = self.values.len();
        let fv: Vec<T> = self.values.iter().map(|&x| f(x)).collect();
        let v = &self.vectors;
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex::new(T::zero(), T::zero());
                for (k, &w) in fv.iter().enumerate() {
                    if w != T::zero() {
                        acc += v[(i, k)] * v[(j, k)].conj() * w;
                    }
                }
                m[(i, j)] = acc;
                if i != j {
                    m[(j, i)] = acc.conj();
                } else {
                    m[(i, i)] = Complex::new(acc.re, T::zero());
                }
            }
        }
        HermitianMatrix::new_unchecked(m)
    }
}

fn off_diagonal_sq<T: Real>(a: &Matrix<T>) -> T {
    let n = a.dim();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s
}

/// Eigen-decomposition of a Hermitian matrix by cyclic Jacobi sweeps.
pub fn eig_hermitian<T: Real>(h: &HermitianMatrix<T>) -> Result<Eigen<T>> {
    let n = h.dim();
    let mut a = h.matrix().clone();
    let mut v = Matrix::<T>::identity(n);
    let total = a.frobenius_norm().powi(2);
    let eps = T::epsilon();
    let target = total * eps * eps;

    let mut converged = total == T::zero();
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off = off_diagonal_sq(&a);
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        let off = off_diagonal_sq(&a);
        if off > target * T::lit(1e4) {
            return Err(Error::NoConvergence(off.sqrt().as_f64()));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = Matrix::from_fn(n, |r, c| v[(r, order[c])]);
    Ok(Eigen { values, vectors })
}

fn rotate<T: Real>(a: &mut Matrix<T>, v: &mut Matrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == T::zero() {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Skip pivots that are negligible relative to their diagonal.
    let small = T::epsilon() * T::lit(0.01);
    if mag <= small * (app.abs() + aqq.abs()) {
        a[(p, q)] = Complex::new(T::zero(), T::zero());
        a[(q, p)] = Complex::new(T::zero(), T::zero());
        return;
    }
    let phase = apq / mag;
    let theta = (aqq - app) / (mag + mag);
    let t = {
        let r = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
        if theta < T::zero() {
            -r
        } else {
            r
        }
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    let pc = phase.conj();
    let n = a.dim();

    // A <- A G, with G = diag-phase * rotation acting on columns p, q.
    let g_qp = pc * (-s);
    let g_qq = pc * c;
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c + akq * g_qp;
        a[(k, q)] = akp * s + akq * g_qq;
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * g_qp;
        v[(k, q)] = vkp * s + vkq * g_qq;
    }
    // A <- G^dagger A
    let h_qp = phase * (-s);
    let h_qq = phase * c;
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c + aqk * h_qp;
        a[(q, k)] = apk * s + aqk * h_qq;
    }
    a[(p, q)] = Complex::new(T::zero(), T::zero());
    a[(q, p)] = Complex::new(T::zero(), T::zero());
    a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
    a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::random::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn maximally_mixed_qubit() {
        let h = HermitianMatrix::<f64>::identity(2).scale(0.5);
        let e = h.eig().unwrap();
        assert!((e.values[0] - 0.5).abs() < 1e-15 && (e.values[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn diagonal_sorted_ascending() {
        let h = HermitianMatrix::<f64>::diagonal(&[0.8, 0.2]);
        let e = h.eig().unwrap();
        assert_eq!(e.values, vec![0.2, 0.8]);
    }

    #[test]
    fn reconstruction_and_trace_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &n in &[2usize, 3, 4, 9, 16, 27] {
            for _ in 0..5 {
                let a = random_hermitian::<f64, _>(&mut rng, n);
                let e = a.eig().unwrap();
                let rec = e.reconstruct_with(|x| x);
                let err = rec.matrix().sub(a.matrix()).frobenius_norm();
                assert!(err <= 1e-10 * a.matrix().frobenius_norm(), "n={n} err={err}");
                let sum: f64 = e.values.iter().sum();
                assert!((sum - a.trace()).abs() < 1e-10);
                assert!(e.vectors.is_unitary(1e-10));
                assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn complex_pauli_y() {
        let y = Matrix::from_vec(
            2,
            vec![
                Complex::new(0.0, 0.0),
                Complex::new(0.0, -1.0),
                Complex::new(0.0, 1.0),
                Complex::new(0.0, 0.0),
            ],
        )
        .unwrap();
        let e = HermitianMatrix::<f64>::new(y).unwrap().eig().unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_precision_path() {
        let h = HermitianMatrix::<f32>::diagonal(&[0.3, 0.1, 0.6]);
        let e = h.eig().unwrap();
        assert!((e.values[0] - 0.1).abs() < 1e-6);
    }
}
