//! Multi-copy operators by polynomial interpolation in Bloch coordinates.
//!
//! `eta -> S_m(((1+s) eta - rho) / s)` is a polynomial of degree `m` in the
//! Bloch vector `x` of `eta`. Its monomial coefficients are recovered from
//! values on the principal lattice of a simplex (unisolvent for degree `m`),
//! and a monomial `x_{j1} ... x_{jk}` becomes `Q_{j1} (x) ... (x) Q_{jk}
//! (x) I^{(x)(m-k)}` with `x_j = tr[eta Q_j]`. The sum is then symmetrized
//! over the copies.

use crate::error::{Error, Result};
use crate::qcore::gellmann::{gell_mann_basis, state_from_bloch_in};
use crate::qcore::linalg::RealLu;
use crate::qcore::matrix::{DensityMatrix, HermitianMatrix};
use crate::qcore::tensor::{checked_power, symmetrize};
use crate::scalar::Real;

use super::shifted_s_hermitian;

/// Largest condition number accepted for the interpolation system.
pub const MAX_CONDITION: f64 = 1e10;

/// Edge length of the interpolation simplex in Bloch units.
const SIMPLEX_EDGE: f64 = 2.0;

/// Nondecreasing index tuples of length `0..=m` over `0..n`, by degree.
pub(crate) fn monomials(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..m {
        let mut next = Vec::new();
        for mono in &frontier {
            let start = mono.last().copied().unwrap_or(0);
            for j in start..n {
                let mut v = mono.clone();
                v.push(j);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Multi-indices `beta in N^{parts}` with `|beta| = m`.
fn compositions(parts: usize, m: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for v in (0..=left).rev() {
            cur[i] = v;
            go(i + 1, left - v, cur, out);
        }
    }
    let mut out = Vec::new();
    go(0, m, &mut vec![0; parts], &mut out);
    out
}

/// Principal lattice `{sum_j (beta_j / m) v_j}` of a simplex centred at the
/// origin with vertices `v_0 = -a 1`, `v_j = v_0 + L e_j`.
fn lattice_nodes<T: Real>(n: usize, m: usize) -> Vec<Vec<T>> {
    let edge = T::lit(SIMPLEX_EDGE);
    let shift = edge / T::count(n + 1);
    let mf = T::count(m);
    compositions(n + 1, m)
        .into_iter()
        .map(|beta| (0..n).map(|j| edge * T::count(beta[j + 1]) / mf - shift).collect())
        .collect()
}

/// Coefficients of `S_{m,rho,s}` in the monomial basis returned by
/// [`monomials`], with the estimated condition number of the solve.
pub(crate) fn interpolate<T: Real>(rho: &DensityMatrix<T>, s: T, m: usize) -> Result<(Vec<Vec<usize>>, Vec<T>, T)> {
    let d = rho.dim();
    let basis = gell_mann_basis::<T>(d)?;
    let n = basis.len();
    let monos = monomials(n, m);
    let nodes = lattice_nodes::<T>(n, m);
    debug_assert_eq!(monos.len(), nodes.len());
    let size = monos.len();

    let mut a = vec![T::zero(); size * size];
    let mut b = vec![T::zero(); size];
    for (r, x) in nodes.iter().enumerate() {
        for (c, mono) in monos.iter().enumerate() {
            a[r * size + c] = mono.iter().fold(T::one(), |acc, &j| acc * x[j]);
        }
        let eta = state_from_bloch_in(&basis, x);
        b[r] = shifted_s_hermitian(rho.as_hermitian(), s, &eta, m)?;
    }
    let lu = RealLu::factor(size, &a).ok_or(Error::IllConditioned(f64::INFINITY))?;
    let cond = lu.condition_estimate();
    if !(cond <= T::lit(MAX_CONDITION)) {
        return Err(Error::IllConditioned(cond.as_f64()));
    }
    let mut coef = lu.solve(&b);
    for _ in 0..2 {
        let resid: Vec<T> = (0..size)
            .map(|r| b[r] - (0..size).map(|c| a[r * size + c] * coef[c]).sum::<T>())
            .collect();
        let corr = lu.solve(&resid);
        for (c, dc) in coef.iter_mut().zip(corr) {
            *c += dc;
        }
    }
    Ok((monos, coef, cond))
}

/// `W_m(rho, s)` with `tr[W_m eta^{(x)m}] = S_{m,rho,s}(eta)`, as the
/// copy-symmetric representative. `cap` bounds `d^m`.
pub fn build_multicopy_operator_capped<T: Real>(
    rho: &DensityMatrix<T>,
    s: T,
    m: usize,
    cap: usize,
) -> Result<HermitianMatrix<T>> {
    let d = rho.dim();
    if m < 2 || m > d {
        return Err(Error::InvalidArgument(format!("copy number m = {m} must lie in 2..={d}")));
    }
    if !(s > T::zero()) {
        return Err(Error::InvalidArgument(format!("shift s = {s} must be positive")));
    }
    checked_power(d, m, cap)?;
    let (monos, coef, _) = interpolate(rho, s, m)?;
    let q = gell_mann_basis::<T>(d)?.coordinate_operators();
    let id = HermitianMatrix::identity(d);
    let dim = d.pow(m as u32);
    let mut acc = HermitianMatrix::zeros(dim);
    for (mono, &c) in monos.iter().zip(&coef) {
        if c == T::zero() {
            continue;
        }
        let mut term: Option<HermitianMatrix<T>> = None;
        for slot in 0..m {
            let f = mono.get(slot).map_or(&id, |&j| &q[j]);
            term = Some(match term {
                None => f.clone(),
                Some(t) => t.kron(f),
            });
        }
        acc.axpy(c, &term.expect("m >= 2"));
    }
    Ok(symmetrize(&acc, d, m))
}
