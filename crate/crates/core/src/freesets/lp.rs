//! Dense tableau simplex for the least-absolute-residual problem
//!
//! ```text
//! minimize  sum_r |(A x - b)_r|   subject to  x >= 0
//! ```
//!
//! written as `A x + u - v = b` with `u, v >= 0`. The slack with a `+1`
//! coefficient in each (sign-normalized) row gives a feasible starting
//! basis, so no phase one is needed. Bland's rule prevents cycling.

use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct LpSolution<T> {
    /// Optimal L1 residual.
    pub residual: T,
    pub x: Vec<T>,
}

/// `a` is row-major `rows x cols`.
pub fn min_l1_residual<T: Real>(rows: usize, cols: usize, a: &[T], b: &[T]) -> LpSolution<T> {
    assert_eq!(a.len(), rows * cols);
    assert_eq!(b.len(), rows);
    let width = cols + 2 * rows;
    let eps = T::epsilon() * T::lit(1e3);

    // Tableau rows: [coefficients | rhs]
    let mut tab = vec![T::zero(); rows * (width + 1)];
    let mut basis = vec![0usize; rows];
    for r in 0..rows {
        let sign = if b[r] < T::zero() { -T::one() } else { T::one() };
        let row = &mut tab[r * (width + 1)..(r + 1) * (width + 1)];
        for c in 0..cols {
            row[c] = sign * a[r * cols + c];
        }
        // u_r at cols + r with coefficient +1, v_r at cols + rows + r with -1.
        row[cols + r] = sign;
        row[cols + rows + r] = -sign;
        row[width] = sign * b[r];
        basis[r] = if sign > T::zero() { cols + r } else { cols + rows + r };
    }
    let cost = |j: usize| if j < cols { T::zero() } else { T::one() };

    let max_iter = 50 * (width + rows);
    for _ in 0..max_iter {
        // Reduced costs c_j - c_B^T column_j (tableau already holds B^{-1} A).
        let mut entering = None;
        for j in 0..width {
            if basis.contains(&j) {
                continue;
            }
            let mut rc = cost(j);
            for r in 0..rows {
                rc -= cost(basis[r]) * tab[r * (width + 1) + j];
            }
            if rc < -eps {
                entering = Some(j);
                break;
            }
        }
        let Some(j) = entering else { break };

        let mut leave: Option<(usize, T)> = None;
        for r in 0..rows {
            let coef = tab[r * (width + 1) + j];
            if coef > eps {
                let ratio = tab[r * (width + 1) + width] / coef;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio - eps || (ratio <= lratio + eps && basis[r] < basis[lr]) {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
        }
        // Unbounded cannot happen: the objective is bounded below by zero.
        let Some((pr, _)) = leave else { break };
        pivot(&mut tab, rows, width + 1, pr, j);
        basis[pr] = j;
    }

    let mut x = vec![T::zero(); cols];
    let mut residual = T::zero();
    for r in 0..rows {
        let val = tab[r * (width + 1) + width];
        if basis[r] < cols {
            x[basis[r]] = val;
        } else {
            residual += val;
        }
    }
    LpSolution { residual, x }
}

fn pivot<T: Real>(tab: &mut [T], rows: usize, stride: usize, pr: usize, pc: usize) {
    let p = tab[pr * stride + pc];
    for c in 0..stride {
        tab[pr * stride + c] /= p;
    }
    for r in 0..rows {
        if r == pr {
            continue;
        }
        let f = tab[r * stride + pc];
        if f != T::zero() {
            for c in 0..stride {
                let v = tab[pr * stride + c];
                tab[r * stride + c] -= f * v;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_convex_combination() {
        // x1 + x2 = 1, x1 - x2 = 0.2
        let a = [1.0f64, 1.0, 1.0, -1.0];
        let sol = min_l1_residual(2, 2, &a, &[1.0, 0.2]);
        assert!(sol.residual < 1e-12);
        assert!((sol.x[0] - 0.6).abs() < 1e-12 && (sol.x[1] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn infeasible_reports_residual() {
        // x = -1 with x >= 0: best residual 1.
        let sol = min_l1_residual(1, 1, &[1.0f64], &[-1.0]);
        assert!((sol.residual - 1.0).abs() < 1e-12);
        assert_eq!(sol.x[0], 0.0);
    }
}
