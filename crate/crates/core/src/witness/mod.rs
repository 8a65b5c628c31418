//! Elementary symmetric functionals, the positivity test built on them and
//! the multi-copy witness families that separate a state from a free set.
//!
//! For a unit-trace Hermitian `A`, `S_m(A)` is the `m`-th elementary
//! symmetric polynomial of its spectrum and `A` is a state iff `S_m(A) >= 0`
//! for every `m`. With `B = ((1+s) eta - rho) / s`, the shifted functional
//! `S_{m,rho,s}(eta) = S_m(B)` is a polynomial in `eta`, realized as the
//! expectation of an operator `W_m` on `eta^{(x)m}`.

pub mod interp;

use std::collections::BTreeMap;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::freesets::{dirichlet_mixture, mix, sample_free, FreeSet};
use crate::optim::{min_norm_simplex, nelder_mead, softmax};
use crate::qcore::gellmann::bloch_from_state;
use crate::qcore::matrix::{DensityMatrix, HermitianMatrix, Matrix};
use crate::qcore::random::seeded_rng;
use crate::qcore::tensor::{swap_operator, tensor_power_capped, DEFAULT_DIM_CAP};
use crate::robustness::robustness_union;
use crate::scalar::{tol, Real};

pub use interp::build_multicopy_operator_capped;

/// `tr[A^l]` for `l = 1..=m`.
pub fn power_traces<T: Real>(a: &HermitianMatrix<T>, m: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(m);
    let mut pow: Option<Matrix<T>> = None;
    for _ in 0..m {
        let next = match &pow {
            None => a.matrix().clone(),
            Some(p) => p.matmul(a.matrix()),
        };
        out.push(next.trace().re);
        pow = Some(next);
    }
    out
}

/// Newton identities: `e_m` from the power sums `p_1..p_m`.
pub fn elementary_from_power_sums<T: Real>(p: &[T], m: usize) -> T {
    let mut e = vec![T::one()];
    for k in 1..=m {
        let mut acc = T::zero();
        for l in 1..=k {
            let term = p[l - 1] * e[k - l];
            if l % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        e.push(acc / T::count(k));
    }
    e[m]
}

/// `S_m(A)`, the `m`-th elementary symmetric polynomial of the spectrum.
#[allow(non_snake_case)]
pub fn elementary_symmetric_S<T: Real>(a: &HermitianMatrix<T>, m: usize) -> Result<T> {
    if m > a.dim() {
        return Err(Error::InvalidArgument(format!("m = {m} exceeds dimension {}", a.dim())));
    }
    Ok(elementary_from_power_sums(&power_traces(a, m), m))
}

/// `S_0(A), ..., S_d(A)` from a single set of power traces.
pub fn elementary_symmetric_all<T: Real>(a: &HermitianMatrix<T>) -> Vec<T> {
    let d = a.dim();
    let p = power_traces(a, d);
    (0..=d).map(|m| elementary_from_power_sums(&p, m)).collect()
}

/// `((1+s) eta - rho) / s`
pub fn shifted_operator<T: Real>(rho: &HermitianMatrix<T>, s: T, eta: &HermitianMatrix<T>) -> HermitianMatrix<T> {
    let mut b = eta.scale((T::one() + s) / s);
    b.axpy(-T::one() / s, rho);
    b
}

pub(crate) fn shifted_s_hermitian<T: Real>(
    rho: &HermitianMatrix<T>,
    s: T,
    eta: &HermitianMatrix<T>,
    m: usize,
) -> Result<T> {
    if !(s > T::zero()) {
        return Err(Error::InvalidArgument(format!("shift s = {s} must be positive")));
    }
    if rho.dim() != eta.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: eta.dim(),
        });
    }
    elementary_symmetric_S(&shifted_operator(rho, s, eta), m)
}

/// `S_{m,rho,s}(eta) = S_m(((1+s) eta - rho) / s)`.
#[allow(non_snake_case)]
pub fn shifted_S<T: Real>(rho: &DensityMatrix<T>, s: T, eta: &DensityMatrix<T>, m: usize) -> Result<T> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    shifted_s_hermitian(rho.as_hermitian(), s, eta.as_hermitian(), m)
}

/// `min_{2 <= m <= d} S_{m,rho,s}(eta)`.
pub fn min_shifted_s<T: Real>(rho: &HermitianMatrix<T>, s: T, eta: &HermitianMatrix<T>) -> T {
    let all = elementary_symmetric_all(&shifted_operator(rho, s, eta));
    all[2..].iter().copied().fold(T::infinity(), T::min)
}

/// Positivity test for unit-trace Hermitian operators: `S_m(A) >= -tol`
/// for all `m = 1..=d`.
pub fn is_state_byrd<T: Real>(a: &HermitianMatrix<T>, tol: T) -> Result<bool> {
    let tr = a.trace();
    if (tr - T::one()).abs() > tol {
        return Err(Error::InvalidTrace(tr.as_f64()));
    }
    Ok(elementary_symmetric_all(a)[1..].iter().all(|&v| v >= -tol))
}

/// [`build_multicopy_operator_capped`] under the default size cap.
pub fn build_multicopy_operator<T: Real>(rho: &DensityMatrix<T>, s: T, m: usize) -> Result<HermitianMatrix<T>> {
    build_multicopy_operator_capped(rho, s, m, DEFAULT_DIM_CAP)
}

fn pauli<T: Real>() -> [HermitianMatrix<T>; 3] {
    let z = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let i = Complex::new(T::zero(), T::one());
    [
        HermitianMatrix::new_unchecked(Matrix::from_vec(2, vec![z, one, one, z]).expect("2x2")),
        HermitianMatrix::new_unchecked(Matrix::from_vec(2, vec![z, -i, i, z]).expect("2x2")),
        HermitianMatrix::diagonal(&[T::one(), -T::one()]),
    ]
}

/// Two-copy qubit operator
/// `(|r|^2/s^2 - 1) I(x)I + ((1+s)/s^2) sum_j [(1+s) s_j(x)s_j - r_j (I(x)s_j + s_j(x)I)]`.
/// Its expectation on `eta (x) eta` is `-4 S_{2,rho,s}(eta)`.
pub fn qubit_closed_form<T: Real>(rho: &DensityMatrix<T>, s: T) -> Result<HermitianMatrix<T>> {
    if rho.dim() != 2 {
        return Err(Error::InvalidDimension(rho.dim()));
    }
    if !(s > T::zero()) {
        return Err(Error::InvalidArgument(format!("shift s = {s} must be positive")));
    }
    let r = bloch_from_state(rho).coords;
    let r2: T = r.iter().map(|&v| v * v).sum();
    let id = HermitianMatrix::<T>::identity(2);
    let mut w = HermitianMatrix::identity(4).scale(r2 / (s * s) - T::one());
    let pre = (T::one() + s) / (s * s);
    for (j, p) in pauli::<T>().iter().enumerate() {
        w.axpy(pre * (T::one() + s), &p.kron(p));
        w.axpy(-pre * r[j], &id.kron(p));
        w.axpy(-pre * r[j], &p.kron(&id));
    }
    Ok(w)
}

/// `W' = V + (tr[rho^2] - eps) I(x)I - 2 rho(x)I`, with
/// `tr[W' eta(x)eta] = tr[(rho - eta)^2] - eps`.
pub fn swap_witness<T: Real>(rho: &DensityMatrix<T>, eps: T) -> Result<HermitianMatrix<T>> {
    if !(eps > T::zero()) {
        return Err(Error::InvalidArgument(format!("epsilon = {eps} must be positive")));
    }
    let d = rho.dim();
    let mut w = swap_operator::<T>(d);
    w.axpy(rho.purity() - eps, &HermitianMatrix::identity(d * d));
    w.axpy(-T::lit(2.0), &rho.as_hermitian().kron(&HermitianMatrix::identity(d)));
    Ok(w)
}

/// `tr[W A^{(x)m}]` for an operator on `m` copies.
pub fn multicopy_expectation<T: Real>(w: &HermitianMatrix<T>, a: &HermitianMatrix<T>, m: usize) -> Result<T> {
    let big = tensor_power_capped(a, m, w.dim())?;
    if big.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            found: big.dim(),
        });
    }
    Ok(w.trace_product(&big))
}

/// The operators `W_m(rho, s)` for `m = 2..=d`.
#[derive(Clone, Debug)]
pub struct WitnessFamily<T> {
    pub rho: DensityMatrix<T>,
    pub s: T,
    pub members: BTreeMap<usize, HermitianMatrix<T>>,
}

impl<T: Real> WitnessFamily<T> {
    pub fn new(rho: &DensityMatrix<T>, s: T) -> Result<Self> {
        Self::with_cap(rho, s, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(rho: &DensityMatrix<T>, s: T, cap: usize) -> Result<Self> {
        let members = (2..=rho.dim())
            .map(|m| build_multicopy_operator_capped(rho, s, m, cap).map(|w| (m, w)))
            .collect::<Result<_>>()?;
        Ok(Self {
            rho: rho.clone(),
            s,
            members,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// `tr[W_m eta^{(x)m}]`
    pub fn expectation(&self, m: usize, eta: &HermitianMatrix<T>) -> Result<T> {
        let w = self
            .members
            .get(&m)
            .ok_or_else(|| Error::InvalidArgument(format!("no member for m = {m}")))?;
        multicopy_expectation(w, eta, m)
    }
}

/// Best free point of `min_m S_{m,rho,s}` found by the estimator.
#[derive(Clone, Debug)]
pub struct SupEstimate<T> {
    /// `sup_{sigma in F} min_m S_{m,rho,s}(sigma)` (lower estimate).
    pub value: T,
    pub sigma: DensityMatrix<T>,
    pub subset: usize,
    /// True when every subset was maximized exactly (qubits).
    pub exact: bool,
    pub samples: usize,
}

/// Estimates `sup_{sigma in F} min_m S_{m,rho,s}(sigma)`.
///
/// For qubits only `m = 2` matters and `S_2(B) = (1 - tr[B^2]) / 2` is
/// concave, so each subset reduces to a min-norm point of
/// `{(1+s)/s omega_i - rho/s}` over the simplex, solved exactly. Otherwise
/// the estimate is the best of `n_samples` Dirichlet samples and the
/// extreme points, refined by Nelder-Mead over softmax weights.
pub fn sup_min_shifted_s<T: Real>(
    rho: &DensityMatrix<T>,
    s: T,
    f: &FreeSet<T>,
    n_samples: usize,
    seed: u64,
) -> Result<SupEstimate<T>> {
    if f.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: rho.dim(),
        });
    }
    let d = rho.dim();
    let rh = rho.as_hermitian();
    let objective = |sigma: &HermitianMatrix<T>| min_shifted_s(rh, s, sigma);
    let mut best: Option<SupEstimate<T>> = None;
    let mut offer = |value: T, sigma: DensityMatrix<T>, subset: usize| {
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(SupEstimate {
                value,
                sigma,
                subset,
                exact: false,
                samples: 0,
            });
        }
    };

    let extremes: Vec<Vec<DensityMatrix<T>>> = f.subsets().iter().map(|k| k.extreme_points()).collect();
    if d == 2 {
        for (k, pts) in extremes.iter().enumerate() {
            let bs: Vec<HermitianMatrix<T>> = pts.iter().map(|p| shifted_operator(rh, s, p.as_hermitian())).collect();
            let n = bs.len();
            let mut gram = vec![T::zero(); n * n];
            for i in 0..n {
                for j in 0..n {
                    gram[i * n + j] = bs[i].trace_product(&bs[j]);
                }
            }
            let (c, norm2) = min_norm_simplex(n, &gram);
            let sigma = mix(pts, &c);
            let exact_value = (T::one() - norm2) * T::lit(0.5);
            // Report the functional itself at the optimizer for consistency.
            let v = objective(sigma.as_hermitian()).max(exact_value);
            offer(v, sigma, k);
        }
    }

    let samples = if n_samples > 0 { sample_free(f, n_samples, seed)? } else { Vec::new() };
    for smp in &samples {
        offer(objective(smp.state.as_hermitian()), smp.state.clone(), smp.subset);
    }
    for (k, pts) in extremes.iter().enumerate() {
        for p in pts {
            offer(objective(p.as_hermitian()), p.clone(), k);
        }
    }

    if d > 2 {
        // Multistart refinement from the best sampled points of each subset
        // and a few random mixtures.
        let mut rng = seeded_rng(seed ^ 0x9e37_79b9_7f4a_7c15);
        for (k, pts) in extremes.iter().enumerate() {
            if pts.len() < 2 {
                continue;
            }
            let mut starts: Vec<(T, DensityMatrix<T>)> = samples
                .iter()
                .filter(|smp| smp.subset == k)
                .map(|smp| (objective(smp.state.as_hermitian()), smp.state.clone()))
                .collect();
            starts.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
            starts.truncate(4);
            for _ in 0..2 {
                let st = dirichlet_mixture(&mut rng, pts);
                starts.push((objective(st.as_hermitian()), st));
            }
            for (_, st) in starts {
                let w0 = fit_weights(pts, &st);
                let z0: Vec<T> = w0.iter().map(|&w| (w + T::lit(1e-6)).ln()).collect();
                let res = nelder_mead(
                    |z: &[T]| -objective(mix(pts, &softmax(z)).as_hermitian()),
                    &z0,
                    T::lit(0.5),
                    400 * pts.len(),
                    T::lit(1e-13),
                );
                let sigma = mix(pts, &softmax(&res.x));
                offer(-res.value, sigma, k);
            }
        }
    }

    let mut out = best.ok_or_else(|| Error::InvalidArgument("free set has no points".into()))?;
    out.exact = d == 2;
    out.samples = samples.len();
    Ok(out)
}

/// Simplex weights reproducing `target` from `pts`, via the L1 residual
/// program.
fn fit_weights<T: Real>(pts: &[DensityMatrix<T>], target: &DensityMatrix<T>) -> Vec<T> {
    let d = target.dim();
    let mut a = Vec::new();
    let mut b = vec![T::one()];
    let rows_per = d * d;
    let flat = |h: &HermitianMatrix<T>| {
        let m = h.matrix();
        let mut out = Vec::with_capacity(rows_per);
        for i in 0..d {
            for j in i..d {
                out.push(m[(i, j)].re);
                if i != j {
                    out.push(m[(i, j)].im);
                }
            }
        }
        out
    };
    let cols: Vec<Vec<T>> = pts.iter().map(|p| flat(p.as_hermitian())).collect();
    b.extend(flat(target.as_hermitian()));
    let rows = b.len();
    a.resize(rows * pts.len(), T::zero());
    for (c, col) in cols.iter().enumerate() {
        a[c] = T::one();
        for (r, &v) in col.iter().enumerate() {
            a[(r + 1) * pts.len() + c] = v;
        }
    }
    let sol = crate::freesets::lp::min_l1_residual(rows, pts.len(), &a, &b);
    let total: T = sol.x.iter().copied().sum();
    if total > T::zero() {
        sol.x.iter().map(|&v| v / total).collect()
    } else {
        vec![T::one() / T::count(pts.len()); pts.len()]
    }
}

/// Uniform shift `Delta_m = delta / 2` with `delta = -sup_F min_m S_{m,rho,s}`.
#[derive(Clone, Debug)]
pub struct DeltaEstimate<T> {
    pub delta: T,
    pub deltas: BTreeMap<usize, T>,
    /// Free point attaining the supremum estimate.
    pub sigma: DensityMatrix<T>,
    pub exact: bool,
    pub samples: usize,
}

impl<T: Real> DeltaEstimate<T> {
    fn from_delta(delta: T, d: usize, sigma: DensityMatrix<T>, exact: bool, samples: usize) -> Self {
        let half = delta * T::lit(0.5);
        Self {
            delta,
            deltas: (2..=d).map(|m| (m, half)).collect(),
            sigma,
            exact,
            samples,
        }
    }
}

/// Estimates the margin `delta` and returns `Delta_m = delta / 2`.
/// A nonpositive estimate means `s` is not below the robustness (or the
/// sampling missed the margin) and is reported as a witness-regime error.
pub fn compute_deltas<T: Real>(
    base: &WitnessFamily<T>,
    f: &FreeSet<T>,
    n_samples: usize,
    seed: u64,
) -> Result<DeltaEstimate<T>> {
    let sup = sup_min_shifted_s(&base.rho, base.s, f, n_samples, seed)?;
    let delta = -sup.value;
    if !(delta > T::zero()) {
        return Err(Error::WitnessRegime(delta.as_f64()));
    }
    Ok(DeltaEstimate::from_delta(delta, base.dim(), sup.sigma, sup.exact, sup.samples))
}

/// Shift valid for several families at once: the smallest margin among
/// them. Families sharing `rho` and one shift have nested detection regions
/// in `s`, which per-family shifts do not guarantee.
pub fn common_deltas<T: Real>(estimates: &[DeltaEstimate<T>]) -> Result<DeltaEstimate<T>> {
    let worst = estimates
        .iter()
        .min_by(|a, b| a.delta.partial_cmp(&b.delta).unwrap_or(std::cmp::Ordering::Equal))
        .ok_or_else(|| Error::InvalidArgument("no delta estimates".into()))?;
    let d = worst.sigma.dim();
    Ok(DeltaEstimate::from_delta(
        worst.delta,
        d,
        worst.sigma.clone(),
        estimates.iter().all(|e| e.exact),
        estimates.iter().map(|e| e.samples).sum(),
    ))
}

/// `W~_m = -C (W_m + Delta_m I)`.
#[derive(Clone, Debug)]
pub struct ShiftedWitnessFamily<T> {
    pub base: WitnessFamily<T>,
    pub c: T,
    pub deltas: BTreeMap<usize, T>,
    pub members: BTreeMap<usize, HermitianMatrix<T>>,
}

pub fn shift_family<T: Real>(
    base: &WitnessFamily<T>,
    deltas: &BTreeMap<usize, T>,
    c: T,
) -> Result<ShiftedWitnessFamily<T>> {
    if !(c > T::zero()) {
        return Err(Error::InvalidArgument(format!("normalization C = {c} must be positive")));
    }
    let mut members = BTreeMap::new();
    for (&m, w) in &base.members {
        let delta = *deltas
            .get(&m)
            .ok_or_else(|| Error::InvalidArgument(format!("missing shift for m = {m}")))?;
        if !(delta > T::zero()) {
            return Err(Error::InvalidArgument(format!("shift for m = {m} must be positive, got {delta}")));
        }
        let mut shifted = w.clone();
        shifted.axpy(delta, &HermitianMatrix::identity(w.dim()));
        members.insert(m, shifted.scale(-c));
    }
    Ok(ShiftedWitnessFamily {
        base: base.clone(),
        c,
        deltas: deltas.clone(),
        members,
    })
}

impl<T: Real> ShiftedWitnessFamily<T> {
    #[inline]
    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// `tr[W~_m eta^{(x)m}]`
    pub fn expectation(&self, m: usize, eta: &HermitianMatrix<T>) -> Result<T> {
        let w = self
            .members
            .get(&m)
            .ok_or_else(|| Error::InvalidArgument(format!("no member for m = {m}")))?;
        multicopy_expectation(w, eta, m)
    }

    /// Expectations for every `m`, ascending.
    pub fn expectations(&self, eta: &HermitianMatrix<T>) -> Result<Vec<(usize, T)>> {
        self.members
            .keys()
            .map(|&m| self.expectation(m, eta).map(|v| (m, v)))
            .collect()
    }

    /// `max_m tr[W~_m eta^{(x)m}]`; negative exactly when `eta` is detected.
    pub fn max_expectation(&self, eta: &HermitianMatrix<T>) -> Result<T> {
        Ok(self
            .expectations(eta)?
            .into_iter()
            .fold(T::neg_infinity(), |a, (_, v)| a.max(v)))
    }
}

/// `eta` is flagged as a resource when every member has a negative
/// expectation.
pub fn detect<T: Real>(family: &ShiftedWitnessFamily<T>, eta: &DensityMatrix<T>) -> Result<bool> {
    if eta.dim() != family.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            found: eta.dim(),
        });
    }
    Ok(family.max_expectation(eta.as_hermitian())? < T::zero())
}

/// Outcome of probing a witness family just below and just above the
/// robustness.
#[derive(Clone, Debug)]
pub struct BoundaryReport<T> {
    pub robustness: T,
    pub zeta: T,
    pub s_below: T,
    pub s_above: T,
    /// Margin estimate `delta` at `s_below`.
    pub delta_below: T,
    /// `max_m tr[W~_m rho^{(x)m}]` at `s_below` (negative when detected).
    pub rho_expectation: T,
    /// Smallest `max_m tr[W~_m sigma^{(x)m}]` over the checked free points.
    pub free_margin: T,
    /// `min_m S_{m,rho,s_above}(sigma)` for the certificate's free state.
    pub certificate_margin: T,
    pub below_valid: bool,
    pub above_invalidated: bool,
    pub samples: usize,
}

impl<T: Real> BoundaryReport<T> {
    pub fn passed(&self) -> bool {
        self.below_valid && self.above_invalidated
    }
}

/// Builds the shifted family at `(1 - zeta) R` and checks it on `n_samples`
/// free samples (plus extreme points and the estimator's maximizer); then
/// replays the robustness certificate at `(1 + zeta) R`, where the optimal
/// free state has every `S_m >= 0`.
pub fn theorem1_boundary_check<T: Real>(
    rho: &DensityMatrix<T>,
    f: &FreeSet<T>,
    zeta: T,
    n_samples: usize,
    seed: u64,
) -> Result<BoundaryReport<T>> {
    if !(zeta > T::zero() && zeta < T::one()) {
        return Err(Error::InvalidArgument(format!("zeta = {zeta} must lie in (0, 1)")));
    }
    let union = robustness_union(rho, f)?;
    let r = union.value;
    if !r.is_finite() {
        return Err(Error::InfiniteRobustness);
    }
    if !(r > T::zero()) {
        return Err(Error::FreeState(r.as_f64()));
    }
    let s_below = (T::one() - zeta) * r;
    let s_above = (T::one() + zeta) * r;

    let base = WitnessFamily::new(rho, s_below)?;
    let est = compute_deltas(&base, f, n_samples, seed)?;
    let family = shift_family(&base, &est.deltas, T::one())?;
    let rho_expectation = family.max_expectation(rho.as_hermitian())?;

    let mut free_points: Vec<DensityMatrix<T>> = sample_free(f, n_samples.max(1), seed.wrapping_add(1))?
        .into_iter()
        .map(|smp| smp.state)
        .collect();
    for k in f.subsets() {
        free_points.extend(k.extreme_points());
    }
    free_points.push(est.sigma.clone());
    let mut free_margin = T::infinity();
    for p in &free_points {
        free_margin = free_margin.min(family.max_expectation(p.as_hermitian())?);
    }
    let below_valid = rho_expectation < T::zero() && free_margin >= -tol::<T>(1e-12);

    let sigma = &union.best_certificate().sigma;
    let certificate_margin = min_shifted_s(rho.as_hermitian(), s_above, sigma.as_hermitian());
    let above_invalidated = certificate_margin >= -tol::<T>(1e-9);

    Ok(BoundaryReport {
        robustness: r,
        zeta,
        s_below,
        s_above,
        delta_below: est.delta,
        rho_expectation,
        free_margin,
        certificate_margin,
        below_valid,
        above_invalidated,
        samples: free_points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freesets::ConvexFreeSet;
    use crate::qcore::random::{random_hermitian, random_pure, random_state};

    fn plus() -> DensityMatrix<f64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(&[Complex::new(h, 0.0), Complex::new(h, 0.0)]).unwrap()
    }

    #[test]
    fn low_order_functionals() {
        let mut rng = seeded_rng(2);
        for d in 2..=4 {
            let a = random_hermitian::<f64, _>(&mut rng, d);
            let tr = a.trace();
            let tr2 = a.trace_product(&a);
            assert!((elementary_symmetric_S(&a, 1).unwrap() - tr).abs() < 1e-12);
            assert!((elementary_symmetric_S(&a, 2).unwrap() - (tr * tr - tr2) / 2.0).abs() < 1e-10);
            let det: f64 = a.eig().unwrap().values.iter().product();
            assert!((elementary_symmetric_S(&a, d).unwrap() - det).abs() < 1e-9 * (1.0 + det.abs()));
            assert!(elementary_symmetric_S(&a, d + 1).is_err());
        }
    }

    #[test]
    fn byrd_examples() {
        assert!(is_state_byrd(&HermitianMatrix::<f64>::identity(3).scale(1.0 / 3.0), 1e-12).unwrap());
        let bad = HermitianMatrix::<f64>::diagonal(&[1.2, -0.2]);
        assert!(!is_state_byrd(&bad, 1e-12).unwrap());
        assert!((elementary_symmetric_S(&bad, 2).unwrap() + 0.24).abs() < 1e-15);
        assert!(is_state_byrd(&HermitianMatrix::diagonal(&[0.5, 0.6]), 1e-12).is_err());
    }

    #[test]
    fn shifted_functional_facts() {
        let mut rng = seeded_rng(8);
        let rho = random_state::<f64, _>(&mut rng, 3);
        let eta = random_state::<f64, _>(&mut rng, 3);
        assert!((shifted_S(&rho, 0.7, &eta, 1).unwrap() - 1.0).abs() < 1e-12);
        for m in 1..=3 {
            let own = shifted_S(&rho, 0.7, &rho, m).unwrap();
            assert!((own - elementary_symmetric_S(rho.as_hermitian(), m).unwrap()).abs() < 1e-12);
            assert!(own >= -1e-12);
        }
        assert!(shifted_S(&rho, 0.0, &eta, 2).is_err());
    }

    #[test]
    fn qubit_formula_for_shifted_s2() {
        let mut rng = seeded_rng(12);
        for _ in 0..20 {
            let rho = random_state::<f64, _>(&mut rng, 2);
            let eta = random_state::<f64, _>(&mut rng, 2);
            let s = 0.3;
            let r = bloch_from_state(&rho);
            let x = bloch_from_state(&eta);
            let want = 0.25 - r.dot(&r) / (4.0 * s * s) + (1.0 + s) * r.dot(&x) / (2.0 * s * s)
                - (1.0 + s).powi(2) * x.dot(&x) / (4.0 * s * s);
            assert!((shifted_S(&rho, s, &eta, 2).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn multicopy_contract_small() {
        let mut rng = seeded_rng(13);
        for d in 2..=3 {
            let rho = random_state::<f64, _>(&mut rng, d);
            for m in 2..=d {
                let w = build_multicopy_operator(&rho, 0.5, m).unwrap();
                for _ in 0..10 {
                    let eta = random_state::<f64, _>(&mut rng, d);
                    let got = multicopy_expectation(&w, eta.as_hermitian(), m).unwrap();
                    let want = shifted_S(&rho, 0.5, &eta, m).unwrap();
                    assert!((got - want).abs() < 1e-8, "d={d} m={m}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn closed_form_relation() {
        let mut rng = seeded_rng(14);
        let rho = random_state::<f64, _>(&mut rng, 2);
        let w = qubit_closed_form(&rho, 0.8).unwrap();
        let built = build_multicopy_operator(&rho, 0.8, 2).unwrap();
        assert!(built.max_abs_diff(&w.scale(-0.25)) < 1e-9);
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        let w0 = qubit_closed_form(&mixed, 0.5).unwrap();
        let mut want = HermitianMatrix::identity(4).scale(-1.0);
        for p in pauli::<f64>() {
            want.axpy(9.0, &p.kron(&p));
        }
        assert!(w0.max_abs_diff(&want) < 1e-12);
        assert!(qubit_closed_form(&DensityMatrix::<f64>::maximally_mixed(3).unwrap(), 0.5).is_err());
    }

    #[test]
    fn swap_witness_values() {
        let w = swap_witness(&DensityMatrix::<f64>::basis(2, 0).unwrap(), 0.1).unwrap();
        let own = multicopy_expectation(&w, DensityMatrix::basis(2, 0).unwrap().as_hermitian(), 2).unwrap();
        assert!((own + 0.1).abs() < 1e-12);
        let other = multicopy_expectation(&w, DensityMatrix::basis(2, 1).unwrap().as_hermitian(), 2).unwrap();
        assert!((other - 1.9).abs() < 1e-12);
        assert!(swap_witness(&plus(), 0.0).is_err());
    }

    #[test]
    fn deltas_for_plus_state() {
        let f = FreeSet::single(ConvexFreeSet::incoherent_computational("z", 2).unwrap());
        let base = WitnessFamily::new(&plus(), 0.5).unwrap();
        let est = compute_deltas(&base, &f, 1000, 3).unwrap();
        assert!(est.exact && est.delta > 0.0);
        // On the z axis b = 3x - 2r, so S_2 = (1 - 4 - 9 z^2) / 4 peaks at -3/4.
        assert!((est.delta - 0.75).abs() < 1e-12, "{}", est.delta);
        let fam = shift_family(&base, &est.deltas, 1.0).unwrap();
        assert!(detect(&fam, &plus()).unwrap());
        let above = WitnessFamily::new(&plus(), 1.05).unwrap();
        assert!(matches!(compute_deltas(&above, &f, 1000, 3), Err(Error::WitnessRegime(_))));
    }

    #[test]
    fn boundary_report_for_plus_state() {
        let f = FreeSet::single(ConvexFreeSet::incoherent_computational("z", 2).unwrap());
        let rep = theorem1_boundary_check(&plus(), &f, 0.02, 500, 4).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!((rep.robustness - 1.0).abs() < 1e-6);
        let free = DensityMatrix::from_probabilities(&[0.4, 0.6]).unwrap();
        assert!(matches!(theorem1_boundary_check(&free, &f, 0.02, 10, 1), Err(Error::FreeState(_))));
    }

    #[test]
    fn qutrit_deltas_are_positive_below_robustness() {
        let mut rng = seeded_rng(30);
        let rho = random_pure::<f64, _>(&mut rng, 3);
        let f = FreeSet::single(ConvexFreeSet::incoherent_computational("z", 3).unwrap());
        let r = robustness_union(&rho, &f).unwrap().value;
        let base = WitnessFamily::new(&rho, 0.5 * r).unwrap();
        let est = compute_deltas(&base, &f, 1000, 5).unwrap();
        assert!(!est.exact && est.delta > 0.0);
    }
}
