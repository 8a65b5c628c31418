//! Tensor powers and permutations of tensor factors.

use crate::error::{Error, Result};
use crate::qcore::matrix::{HermitianMatrix, Matrix};
use crate::scalar::Real;

/// Largest operator dimension built by default (`4^4`).
pub const DEFAULT_DIM_CAP: usize = 256;

/// `A^{(x) m}` under the default dimension cap.
pub fn tensor_power<T: Real>(a: &HermitianMatrix<T>, m: usize) -> Result<HermitianMatrix<T>> {
    tensor_power_capped(a, m, DEFAULT_DIM_CAP)
}

pub fn tensor_power_capped<T: Real>(a: &HermitianMatrix<T>, m: usize, cap: usize) -> Result<HermitianMatrix<T>> {
    if m == 0 {
        return Err(Error::InvalidArgument("tensor power needs m >= 1".into()));
    }
    let dim = checked_power(a.dim(), m, cap)?;
    let mut out = a.clone();
    for _ in 1..m {
        out = out.kron(a);
    }
    debug_assert_eq!(out.dim(), dim);
    Ok(out)
}

/// `d^m`, or a size-cap error when it exceeds `cap`.
pub fn checked_power(d: usize, m: usize, cap: usize) -> Result<usize> {
    let mut dim: usize = 1;
    for _ in 0..m {
        dim = dim.checked_mul(d).filter(|&x| x <= cap).ok_or(Error::SizeCap {
            dim: d.saturating_pow(m as u32),
            cap,
        })?;
    }
    Ok(dim)
}

/// All permutations of `0..m` in lexicographic order.
pub fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(m), &mut vec![false; m], &mut out);
    out
}

/// Index map of the factor permutation on `(C^d)^{(x) m}`: the basis vector
/// with digits `(i_0, ..., i_{m-1})` goes to the one whose digit `k` is
/// `i_{perm[k]}`.
pub fn permutation_index_map(d: usize, m: usize, perm: &[usize]) -> Vec<usize> {
    let dim = d.pow(m as u32);
    let mut digits = vec![0usize; m];
    (0..dim)
        .map(|idx| {
            let mut r = idx;
            for k in (0..m).rev() {
                digits[k] = r % d;
                r /= d;
            }
            perm.iter().fold(0, |acc, &src| acc * d + digits[src])
        })
        .collect()
}

/// `P M P^dagger` for the factor permutation `perm`.
pub fn conjugate_by_permutation<T: Real>(m: &Matrix<T>, d: usize, copies: usize, perm: &[usize]) -> Matrix<T> {
    let map = permutation_index_map(d, copies, perm);
    let n = m.dim();
    let mut out = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[(map[i], map[j])] = m[(i, j)];
        }
    }
    out
}

/// Average of `P M P^dagger` over every permutation of the `copies` factors.
pub fn symmetrize<T: Real>(m: &HermitianMatrix<T>, d: usize, copies: usize) -> HermitianMatrix<T> {
    let perms = permutations(copies);
    let n = m.dim();
    let inv = T::one() / T::count(perms.len());
    let mut acc = Matrix::<T>::zeros(n);
    for p in &perms {
        let map = permutation_index_map(d, copies, p);
        for i in 0..n {
            for j in 0..n {
                acc[(map[i], map[j])] += m.matrix()[(i, j)];
            }
        }
    }
    acc.scale(inv).hermitian_part()
}

/// SWAP on `C^d (x) C^d`.
pub fn swap_operator<T: Real>(d: usize) -> HermitianMatrix<T> {
    let map = permutation_index_map(d, 2, &[1, 0]);
    let n = d * d;
    let mut m = Matrix::zeros(n);
    for (i, &j) in map.iter().enumerate() {
        m[(j, i)] = num_complex::Complex::new(T::one(), T::zero());
    }
    HermitianMatrix::new_unchecked(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::random::{random_hermitian, random_state, seeded_rng};

    #[test]
    fn maximally_mixed_square() {
        let h = HermitianMatrix::<f64>::identity(2).scale(0.5);
        let t = tensor_power(&h, 2).unwrap();
        assert!(t.max_abs_diff(&HermitianMatrix::identity(4).scale(0.25)) < 1e-15);
    }

    #[test]
    fn trace_is_multiplicative() {
        let mut rng = seeded_rng(3);
        for d in 2..=4 {
            let a = random_hermitian::<f64, _>(&mut rng, d);
            for m in 1..=3 {
                let t = tensor_power(&a, m).unwrap();
                assert!((t.trace() - a.trace().powi(m as i32)).abs() < 1e-10 * (1.0 + a.trace().abs().powi(m as i32)));
            }
            let rho = random_state::<f64, _>(&mut rng, d);
            assert!((tensor_power(rho.as_hermitian(), 2).unwrap().trace() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn size_cap_enforced() {
        let a = HermitianMatrix::<f64>::identity(4);
        assert!(matches!(tensor_power(&a, 5), Err(Error::SizeCap { .. })));
        assert!(tensor_power(&a, 4).is_ok());
        assert!(matches!(tensor_power(&a, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn swap_trick() {
        let mut rng = seeded_rng(9);
        for d in 2..=3 {
            let a = random_hermitian::<f64, _>(&mut rng, d);
            let b = random_hermitian::<f64, _>(&mut rng, d);
            let v = swap_operator::<f64>(d);
            let lhs = a.kron(&b).trace_product(&v);
            let rhs = a.trace_product(&b);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(4).len(), 24);
    }

    #[test]
    fn symmetrize_swaps_factors() {
        let mut rng = seeded_rng(5);
        let a = random_hermitian::<f64, _>(&mut rng, 2);
        let b = random_hermitian::<f64, _>(&mut rng, 2);
        let sym = symmetrize(&a.kron(&b), 2, 2);
        let want = a.kron(&b).add(&b.kron(&a)).scale(0.5);
        assert!(sym.max_abs_diff(&want) < 1e-14);
    }
}
