//! Derivative-free and small quadratic optimizers used by the witness and
//! discrimination modules.

use crate::qcore::linalg::RealLu;
use crate::scalar::Real;

/// Result of an unconstrained minimization.
#[derive(Clone, Debug)]
pub struct Minimum<T> {
    pub x: Vec<T>,
    pub value: T,
    pub iterations: usize,
}

/// Nelder-Mead simplex search with standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
pub fn nelder_mead<T: Real>(
    mut f: impl FnMut(&[T]) -> T,
    x0: &[T],
    step: T,
    max_iter: usize,
    ftol: T,
) -> Minimum<T> {
    let n = x0.len();
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let mut simplex: Vec<Vec<T>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<T> = simplex.iter().map(|v| f(v)).collect();
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if (values[n] - values[0]).abs() <= ftol * (T::one() + values[0].abs()) {
            break;
        }
        let mut centroid = vec![T::zero(); n];
        for v in &simplex[..n] {
            for (c, &x) in centroid.iter_mut().zip(v) {
                *c += x / T::count(n);
            }
        }
        let along = |t: T| -> Vec<T> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(&c, &w)| c + t * (c - w))
                .collect()
        };
        let reflected = along(T::one());
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = along(two);
            let fe = f(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let (contracted, fc) = if fr < values[n] {
                let c = along(half);
                let v = f(&c);
                (c, v)
            } else {
                let c = along(-half);
                let v = f(&c);
                (c, v)
            };
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=n {
                    for j in 0..n {
                        simplex[i][j] = best[j] + half * (simplex[i][j] - best[j]);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or(0);
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
    }
}

/// Maps unconstrained logits onto the probability simplex.
pub fn softmax<T: Real>(z: &[T]) -> Vec<T> {
    let top = z.iter().copied().fold(T::neg_infinity(), T::max);
    let e: Vec<T> = z.iter().map(|&v| (v - top).exp()).collect();
    let total: T = e.iter().copied().sum();
    e.into_iter().map(|v| v / total).collect()
}

/// Largest point set solved by exhaustive active-set enumeration.
pub const EXACT_MIN_NORM_LIMIT: usize = 16;

/// Minimizes `c^T G c` over the probability simplex for a positive
/// semidefinite Gram matrix `G` (row-major, `k x k`).
///
/// Up to [`EXACT_MIN_NORM_LIMIT`] points every support is enumerated and the
/// affine minimizer on each face is solved in closed form, so the result is
/// exact. Larger instances fall back to Frank-Wolfe with away steps.
pub fn min_norm_simplex<T: Real>(k: usize, gram: &[T]) -> (Vec<T>, T) {
    assert_eq!(gram.len(), k * k);
    let quad = |c: &[T]| {
        let mut v = T::zero();
        for i in 0..k {
            for j in 0..k {
                v += c[i] * gram[i * k + j] * c[j];
            }
        }
        v
    };
    if k <= EXACT_MIN_NORM_LIMIT {
        let mut best: Option<(Vec<T>, T)> = None;
        for mask in 1u32..(1u32 << k) {
            let idx: Vec<usize> = (0..k).filter(|&i| mask & (1 << i) != 0).collect();
            let Some(local) = affine_min_norm(&idx, k, gram) else { continue };
            if local.iter().any(|&c| c < -T::lit(1e-13)) {
                continue;
            }
            let mut c = vec![T::zero(); k];
            for (&i, &v) in idx.iter().zip(&local) {
                c[i] = v.max(T::zero());
            }
            let total: T = c.iter().copied().sum();
            for v in &mut c {
                *v /= total;
            }
            let val = quad(&c);
            if best.as_ref().is_none_or(|b| val < b.1) {
                best = Some((c, val));
            }
        }
        if let Some(b) = best {
            return b;
        }
    }
    frank_wolfe(k, gram, quad)
}

/// Minimizer of `c^T G c` subject to `sum c = 1` on the coordinates `idx`.
fn affine_min_norm<T: Real>(idx: &[usize], k: usize, gram: &[T]) -> Option<Vec<T>> {
    let n = idx.len();
    let dim = n + 1;
    let mut a = vec![T::zero(); dim * dim];
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            a[r * dim + c] = gram[i * k + j];
        }
        a[r * dim + n] = T::one();
        a[n * dim + r] = T::one();
    }
    let lu = RealLu::factor(dim, &a)?;
    if lu.condition_estimate() > T::lit(1e12) {
        return None;
    }
    let mut rhs = vec![T::zero(); dim];
    rhs[n] = T::one();
    let sol = lu.solve(&rhs);
    Some(sol[..n].to_vec())
}

fn frank_wolfe<T: Real>(k: usize, gram: &[T], quad: impl Fn(&[T]) -> T) -> (Vec<T>, T) {
    let mut c = vec![T::one() / T::count(k); k];
    for _ in 0..20_000 {
        let grad: Vec<T> = (0..k)
            .map(|i| (0..k).map(|j| gram[i * k + j] * c[j]).sum::<T>() * T::lit(2.0))
            .collect();
        let toward = (0..k)
            .min_by(|&a, &b| grad[a].partial_cmp(&grad[b]).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(0);
        let away = (0..k)
            .filter(|&i| c[i] > T::zero())
            .max_by(|&a, &b| grad[a].partial_cmp(&grad[b]).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(0);
        let gc: T = grad.iter().zip(&c).map(|(&g, &x)| g * x).sum();
        let fw_gap = gc - grad[toward];
        let away_gap = grad[away] - gc;
        let mut dir = vec![T::zero(); k];
        let max_step;
        if fw_gap >= away_gap {
            if fw_gap < T::lit(1e-15) {
                break;
            }
            for (i, v) in dir.iter_mut().enumerate() {
                *v = -c[i];
            }
            dir[toward] += T::one();
            max_step = T::one();
        } else {
            if away_gap < T::lit(1e-15) {
                break;
            }
            for (i, v) in dir.iter_mut().enumerate() {
                *v = c[i];
            }
            dir[away] -= T::one();
            let ca = c[away];
            max_step = if ca < T::one() { ca / (T::one() - ca) } else { T::infinity() };
        }
        // Exact line search on the quadratic.
        let slope: T = grad.iter().zip(&dir).map(|(&g, &x)| g * x).sum();
        let curv = quad(&dir) * T::lit(2.0);
        let step = if curv > T::zero() { (-slope / curv).min(max_step) } else { max_step };
        if !(step > T::zero()) || !step.is_finite() {
            break;
        }
        for i in 0..k {
            c[i] = (c[i] + step * dir[i]).max(T::zero());
        }
    }
    let v = quad(&c);
    (c, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_finds_rosenbrock_minimum() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(f, &[-1.2, 1.0], 0.5, 5000, 1e-16);
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn min_norm_of_segment_through_origin() {
        // Points -1 and 3 on a line: min-norm point 0 at weights (3/4, 1/4).
        let g = [1.0f64, -3.0, -3.0, 9.0];
        let (c, v) = min_norm_simplex(2, &g);
        assert!(v.abs() < 1e-14);
        assert!((c[0] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn exact_and_frank_wolfe_agree() {
        let pts: [[f64; 3]; 5] = [[1.0, 0.2, 0.3], [0.5, 1.0, -0.1], [0.7, -0.4, 1.0], [2.0, 2.0, 2.0], [0.9, 0.9, -0.8]];
        let k = pts.len();
        let mut g = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                g[i * k + j] = (0..3).map(|t| pts[i][t] * pts[j][t]).sum();
            }
        }
        let (_, exact) = min_norm_simplex(k, &g);
        let quad = |c: &[f64]| {
            let mut v = 0.0;
            for i in 0..k {
                for j in 0..k {
                    v += c[i] * g[i * k + j] * c[j];
                }
            }
            v
        };
        let (_, fw) = frank_wolfe(k, &g, quad);
        assert!((exact - fw).abs() < 1e-8, "{exact} vs {fw}");
    }
}
