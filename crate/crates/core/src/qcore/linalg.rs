//! Small dense solvers: real LU with partial pivoting (plus a Hager-Higham
//! condition estimate) and complex Cholesky.

use num_complex::Complex;

use crate::qcore::matrix::Matrix;
use crate::scalar::Real;

/// LU factorization `P A = L U` of a real row-major matrix.
#[derive(Clone, Debug)]
pub struct RealLu<T> {
    n: usize,
    lu: Vec<T>,
    piv: Vec<usize>,
    norm1: T,
}

impl<T: Real> RealLu<T> {
    /// Returns `None` when a pivot vanishes exactly.
    pub fn factor(n: usize, a: &[T]) -> Option<Self> {
        assert_eq!(a.len(), n * n);
        let norm1 = (0..n)
            .map(|j| (0..n).map(|i| a[i * n + j].abs()).sum::<T>())
            .fold(T::zero(), T::max);
        let mut lu = a.to_vec();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, big) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if big == T::zero() {
                return None;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        let u = lu[k * n + j];
                        lu[i * n + j] -= f * u;
                    }
                }
            }
        }
        Some(Self { n, lu, piv, norm1 })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    /// Solves `A^T x = b`.
    pub fn solve_transpose(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        // U^T y = b
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[j * n + i] * y[j];
            }
            y[i] = s / self.lu[i * n + i];
        }
        // L^T z = y
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.lu[j * n + i] * y[j];
            }
            y[i] = s;
        }
        let mut x = vec![T::zero(); n];
        for (k, &p) in self.piv.iter().enumerate() {
            x[p] = y[k];
        }
        x
    }

    /// Hager-Higham estimate of `||A||_1 ||A^{-1}||_1`.
    pub fn condition_estimate(&self) -> T {
        let n = self.n;
        let nf = T::count(n);
        let mut x = vec![T::one() / nf; n];
        let mut est = T::zero();
        for _ in 0..5 {
            let y = self.solve(&x);
            let new_est: T = y.iter().map(|v| v.abs()).sum();
            let xi: Vec<T> = y
                .iter()
                .map(|&v| if v >= T::zero() { T::one() } else { -T::one() })
                .collect();
            let z = self.solve_transpose(&xi);
            let (jmax, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.abs()))
                .fold((0, -T::one()), |b, c| if c.1 > b.1 { c } else { b });
            let ztx: T = z.iter().zip(&x).map(|(&a, &b)| a * b).sum();
            if new_est <= est || zmax <= ztx {
                est = est.max(new_est);
                break;
            }
            est = new_est;
            x = vec![T::zero(); n];
            x[jmax] = T::one();
        }
        est * self.norm1
    }
}

/// Solves a real linear system in place of a symmetric positive definite
/// Newton matrix; falls back to LU when Cholesky breaks down.
pub fn solve_spd<T: Real>(n: usize, h: &[T], g: &[T]) -> Option<Vec<T>> {
    let mut l = vec![T::zero(); n * n];
    let mut ok = true;
    'outer: for i in 0..n {
        for j in 0..=i {
            let mut s = h[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= T::zero() {
                    ok = false;
                    break 'outer;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    if !ok {
        return RealLu::factor(n, h).map(|lu| lu.solve(g));
    }
    let mut y = g.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    Some(y)
}

/// Lower-triangular factor of a Hermitian positive definite matrix.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    n: usize,
    l: Vec<Complex<T>>,
}

impl<T: Real> Cholesky<T> {
    /// `None` unless the matrix is numerically positive definite.
    pub fn factor(a: &Matrix<T>) -> Option<Self> {
        let n = a.dim();
        let zero = Complex::new(T::zero(), T::zero());
        let mut l = vec![zero; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                if i == j {
                    let d = s.re;
                    if !(d > T::zero()) {
                        return None;
                    }
                    l[i * n + i] = Complex::new(d.sqrt(), T::zero());
                } else {
                    l[i * n + j] = s / l[j * n + j].re;
                }
            }
        }
        Some(Self { n, l })
    }

    pub fn log_det(&self) -> T {
        (0..self.n).map(|i| self.l[i * self.n + i].re.ln()).sum::<T>() * T::lit(2.0)
    }

    pub fn inverse(&self) -> Matrix<T> {
        let n = self.n;
        let zero = Complex::new(T::zero(), T::zero());
        // L^{-1} column by column.
        let mut linv = vec![zero; n * n];
        for c in 0..n {
            for i in c..n {
                let mut s = if i == c { Complex::new(T::one(), T::zero()) } else { zero };
                for k in c..i {
                    s -= self.l[i * n + k] * linv[k * n + c];
                }
                linv[i * n + c] = s / self.l[i * n + i].re;
            }
        }
        // A^{-1} = L^{-dagger} L^{-1}
        Matrix::from_fn(n, |i, j| {
            let mut s = zero;
            for k in i.max(j)..n {
                s += linv[k * n + i].conj() * linv[k * n + j];
            }
            s
        })
    }
}
