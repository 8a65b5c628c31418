//! Log-barrier kernels for the two small conic problems behind the
//! robustness: the primal eigenvalue maximization over a weight simplex and
//! the dual program `min sum y` subject to `sum_i y_i omega_i >= rho`.
//!
//! Both are solved by damped Newton centering along a geometric sequence of
//! barrier weights. Matrices here are plain square complex blocks so the
//! dual can run on a compressed support of dimension 1.

use num_complex::Complex;

use crate::qcore::linalg::{solve_spd, Cholesky};
use crate::qcore::matrix::Matrix;
use crate::scalar::Real;

const MAX_NEWTON: usize = 200;
const MAX_OUTER: usize = 60;
const GROWTH: f64 = 8.0;

/// Value, gradient and Hessian of a barrier objective, or `None` outside
/// the domain.
type Oracle<'a, T> = dyn FnMut(&[T], bool) -> Option<(T, Vec<T>, Vec<T>)> + 'a;

/// Damped Newton from a strictly feasible `z`. Returns whether the Newton
/// decrement dropped below the threshold.
fn center<T: Real>(z: &mut [T], eval: &mut Oracle<'_, T>) -> bool {
    let n = z.len();
    let quarter = T::lit(0.25);
    for _ in 0..MAX_NEWTON {
        let Some((f, g, h)) = eval(z, true) else { return false };
        let Some(step) = solve_spd(n, &h, &g.iter().map(|&x| -x).collect::<Vec<_>>()) else {
            return false;
        };
        let slope: T = g.iter().zip(&step).map(|(&a, &b)| a * b).sum();
        if -slope * T::lit(0.5) < T::lit(1e-14) {
            return true;
        }
        let mut t = T::one();
        let mut moved = false;
        for _ in 0..60 {
            let trial: Vec<T> = z.iter().zip(&step).map(|(&a, &b)| a + t * b).collect();
            if let Some((ft, _, _)) = eval(&trial, false) {
                if ft <= f + quarter * t * slope {
                    z.copy_from_slice(&trial);
                    moved = true;
                    break;
                }
            }
            t *= T::lit(0.5);
        }
        if !moved {
            return true;
        }
    }
    false
}

fn real_tr<T: Real>(a: &Matrix<T>) -> T {
    a.trace().re
}

/// `log det S` and `S^{-1}` for a positive definite block.
fn logdet_inv<T: Real>(s: &Matrix<T>) -> Option<(T, Matrix<T>)> {
    let ch = Cholesky::factor(s)?;
    Some((ch.log_det(), ch.inverse()))
}

/// Outcome of the primal eigenvalue maximization.
#[derive(Clone, Debug)]
pub struct EigMax<T> {
    /// Simplex weights of the best point found.
    pub weights: Vec<T>,
    /// `lambda_min(a sum c_i omega_i - rho)` at `weights`.
    pub lower: T,
    /// Certified upper bound on the optimum.
    pub upper: T,
}

/// Maximizes `lambda_min(a sum_i c_i omega_i - rho)` over the simplex,
/// stopping once the optimum is known to be above `+stop` or below `-stop`,
/// or once the bracket is narrower than `resolution`.
pub fn max_min_eigenvalue<T: Real>(omegas: &[Matrix<T>], rho: &Matrix<T>, a: T, stop: T, resolution: T) -> EigMax<T> {
    let k = omegas.len();
    let d = rho.dim();
    let combo = |c: &[T]| {
        let mut m = rho.scale(-T::one());
        for (om, &ci) in omegas.iter().zip(c) {
            m.axpy(Complex::new(a * ci, T::zero()), om);
        }
        m
    };
    let lmin = |m: &Matrix<T>| {
        crate::qcore::eigen::eig_hermitian(&m.hermitian_part())
            .map(|e| e.values[0])
            .unwrap_or(T::neg_infinity())
    };
    if k == 1 {
        let v = lmin(&combo(&[T::one()]));
        return EigMax {
            weights: vec![T::one()],
            lower: v,
            upper: v,
        };
    }

    let uniform = T::one() / T::count(k);
    let mut z: Vec<T> = vec![uniform; k - 1];
    let start = lmin(&combo(&vec![uniform; k]));
    z.push(start - T::one());

    let diffs: Vec<Matrix<T>> = omegas[..k - 1].iter().map(|om| om.sub(&omegas[k - 1]).scale(a)).collect();
    let weights_of = |z: &[T]| {
        let mut c: Vec<T> = z[..k - 1].to_vec();
        let last = T::one() - c.iter().copied().sum::<T>();
        c.push(last);
        c
    };
    let barrier_terms = T::count(d + k);
    let mut tau = T::one();
    let mut best = EigMax {
        weights: vec![uniform; k],
        lower: start,
        upper: T::infinity(),
    };
    for _ in 0..MAX_OUTER {
        let tau_now = tau;
        let mut eval = |z: &[T], full: bool| -> Option<(T, Vec<T>, Vec<T>)> {
            let c = weights_of(z);
            if c.iter().any(|&x| x <= T::zero()) {
                return None;
            }
            let t = z[k - 1];
            let mut s = combo(&c);
            for i in 0..d {
                s[(i, i)].re -= t;
            }
            let (ld, inv) = logdet_inv(&s)?;
            let f = -tau_now * t - ld - c.iter().map(|x| x.ln()).sum::<T>();
            if !full {
                return Some((f, Vec::new(), Vec::new()));
            }
            let n = k;
            // Directional blocks S^{-1} D_j; the t-direction has D = -I.
            let mut p: Vec<Matrix<T>> = diffs.iter().map(|dm| inv.matmul(dm)).collect();
            p.push(inv.scale(-T::one()));
            let ck = c[k - 1];
            let mut g = vec![T::zero(); n];
            let mut h = vec![T::zero(); n * n];
            for i in 0..n {
                g[i] = -real_tr(&p[i]);
                for j in 0..=i {
                    let v = p[i].trace_mul(&p[j]).re;
                    h[i * n + j] = v;
                    h[j * n + i] = v;
                }
            }
            g[n - 1] -= tau_now;
            for i in 0..k - 1 {
                g[i] += -T::one() / c[i] + T::one() / ck;
                for j in 0..k - 1 {
                    h[i * n + j] += T::one() / (ck * ck);
                }
                h[i * n + i] += T::one() / (c[i] * c[i]);
            }
            Some((f, g, h))
        };
        center(&mut z, &mut eval);
        let c = weights_of(&z);
        let exact = lmin(&combo(&c));
        if exact >= best.lower {
            best.lower = exact;
            best.weights = c;
        }
        best.upper = best.upper.min(z[k - 1] + barrier_terms / tau);
        if best.lower > stop || best.upper < -stop || best.upper - best.lower < resolution {
            break;
        }
        tau *= T::lit(GROWTH);
    }
    best
}

/// Solution of `min sum y` subject to `sum_i y_i omega_i - rho > 0`, `y > 0`.
#[derive(Clone, Debug)]
pub struct DualSolution<T> {
    pub y: Vec<T>,
    /// Best dual block `Z >= 0` with `tr[Z omega_i] <= 1`.
    pub z: Matrix<T>,
    /// Duality gap bound at exit.
    pub gap: T,
}

/// Requires `sum_i omega_i` positive definite on the block.
pub fn min_cover<T: Real>(omegas: &[Matrix<T>], rho: &Matrix<T>, target_gap: T) -> Option<DualSolution<T>> {
    let k = omegas.len();
    let d = rho.dim();
    let total = omegas.iter().skip(1).fold(omegas[0].clone(), |acc, m| acc.add(m));
    let cover_min = crate::qcore::eigen::eig_hermitian(&total.hermitian_part()).ok()?.values[0];
    let rho_max = crate::qcore::eigen::eig_hermitian(&rho.hermitian_part()).ok()?.values[d - 1];
    if cover_min <= T::zero() {
        return None;
    }
    let mut y = vec![T::lit(2.0) * rho_max.max(T::lit(1e-3)) / cover_min + T::lit(1e-3); k];
    let barrier_terms = T::count(d + k);
    let mut tau = T::count(k) / y.iter().copied().sum::<T>();
    let mut best: Option<(T, Matrix<T>)> = None;
    for _ in 0..MAX_OUTER {
        let tau_now = tau;
        let mut eval = |y: &[T], full: bool| -> Option<(T, Vec<T>, Vec<T>)> {
            if y.iter().any(|&x| x <= T::zero()) {
                return None;
            }
            let mut g_mat = rho.scale(-T::one());
            for (om, &yi) in omegas.iter().zip(y) {
                g_mat.axpy(Complex::new(yi, T::zero()), om);
            }
            let (ld, inv) = logdet_inv(&g_mat)?;
            let f = tau_now * y.iter().copied().sum::<T>() - ld - y.iter().map(|x| x.ln()).sum::<T>();
            if !full {
                return Some((f, Vec::new(), Vec::new()));
            }
            let p: Vec<Matrix<T>> = omegas.iter().map(|om| inv.matmul(om)).collect();
            let mut g = vec![T::zero(); k];
            let mut h = vec![T::zero(); k * k];
            for i in 0..k {
                g[i] = tau_now - real_tr(&p[i]) - T::one() / y[i];
                for j in 0..=i {
                    let v = p[i].trace_mul(&p[j]).re;
                    h[i * k + j] = v;
                    h[j * k + i] = v;
                }
                h[i * k + i] += T::one() / (y[i] * y[i]);
            }
            Some((f, g, h))
        };
        center(&mut y, &mut eval);
        let mut g_mat = rho.scale(-T::one());
        for (om, &yi) in omegas.iter().zip(&y) {
            g_mat.axpy(Complex::new(yi, T::zero()), om);
        }
        let (_, inv) = logdet_inv(&g_mat)?;
        // Late iterates lose the inverse to cancellation, so every outer
        // step proposes a rescaled dual point and the best one is kept.
        let z = inv.scale(T::one() / tau);
        let worst = omegas.iter().map(|om| z.trace_mul(om).re).fold(T::zero(), T::max);
        let z = z.scale(T::one() / worst.max(T::one()));
        let value = z.trace_mul(rho).re;
        if best.as_ref().is_none_or(|(v, _)| value > *v) {
            best = Some((value, z));
        }
        if barrier_terms / tau < target_gap {
            break;
        }
        tau *= T::lit(GROWTH);
    }
    Some(DualSolution {
        y,
        z: best?.1,
        gap: barrier_terms / tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> Matrix<f64> {
        Matrix::diagonal(v)
    }

    fn plus() -> Matrix<f64> {
        Matrix::from_fn(2, |_, _| Complex::new(0.5, 0.0))
    }

    #[test]
    fn plus_state_against_diagonal_at_unit_shift() {
        let om = [diag(&[1.0, 0.0]), diag(&[0.0, 1.0])];
        let r = max_min_eigenvalue(&om, &plus(), 2.0, 0.0, 1e-12);
        assert!(r.lower.abs() < 1e-9 && r.upper.abs() < 1e-9);
        assert!((r.weights[0] - 0.5).abs() < 1e-4);
        let r = max_min_eigenvalue(&om, &plus(), 1.5, 1e-9, 1e-12);
        assert!(r.upper < 0.0);
    }

    #[test]
    fn dual_cover_of_plus() {
        let om = [diag(&[1.0, 0.0]), diag(&[0.0, 1.0])];
        let sol = min_cover(&om, &plus(), 1e-11).unwrap();
        let total: f64 = sol.y.iter().sum();
        assert!((total - 2.0).abs() < 1e-8);
        let value = sol.z.trace_mul(&plus()).re;
        assert!((value - 2.0).abs() < 1e-8);
        for om in &om {
            assert!(sol.z.trace_mul(om).re <= 1.0 + 1e-12);
        }
    }
}
