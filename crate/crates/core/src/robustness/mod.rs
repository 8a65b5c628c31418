//! Generalized robustness against a convex piece and against a union.
//!
//! The primal value comes from bisection on `s` with an eigenvalue
//! feasibility test per step; the dual operator `X` comes from the conic
//! program `min sum y` subject to `sum_i y_i omega_i >= rho` over the extreme
//! points, whose optimum is `1 + R`.

pub mod barrier;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::freesets::{mix, ConvexFreeSet, FreeSet};
use crate::qcore::eigen::eig_hermitian;
use crate::qcore::matrix::{DensityMatrix, HermitianMatrix, Matrix};
use crate::scalar::{tol, Real};

/// Bisection and certificate tolerances.
#[derive(Clone, Debug, PartialEq)]
pub struct RobustnessOptions {
    /// Absolute bracket width on `s`.
    pub abs_tol: f64,
    /// Feasibility slack: `(1+s) sigma - rho >= -slack I`.
    pub slack: f64,
    /// Doubling stops here and reports `+inf`.
    pub s_cap: f64,
    pub membership_tol: f64,
    /// Target gap of the dual barrier.
    pub dual_gap: f64,
}

impl Default for RobustnessOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            slack: 1e-9,
            s_cap: 1e6,
            membership_tol: 1e-8,
            dual_gap: 1e-10,
        }
    }
}

/// Primal and dual proof of a robustness value.
#[derive(Clone, Debug)]
pub struct RobustnessCertificate<T> {
    /// `s*`, possibly `+inf`.
    pub value: T,
    pub sigma: DensityMatrix<T>,
    /// Absent when `s* = 0` or infinite.
    pub tau: Option<DensityMatrix<T>>,
    pub dual_x: HermitianMatrix<T>,
    pub subset_label: String,
    /// `|s* - (tr[X rho] - 1)|`, zero for exact certificates.
    pub gap: T,
}

impl<T: Real> RobustnessCertificate<T> {
    #[inline]
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }

    /// `tr[X rho] - 1`.
    pub fn dual_value(&self, rho: &DensityMatrix<T>) -> T {
        self.dual_x.trace_product(rho.as_hermitian()) - T::one()
    }
}

/// Outcome of one bisection step.
#[derive(Clone, Debug)]
pub struct Feasibility<T> {
    pub feasible: bool,
    /// Best `sigma` found; present when feasible.
    pub sigma: Option<DensityMatrix<T>>,
    /// Best `lambda_min((1+s) sigma - rho)`.
    pub margin: T,
}

fn extreme_blocks<T: Real>(k: &ConvexFreeSet<T>) -> (Vec<DensityMatrix<T>>, Vec<Matrix<T>>) {
    let pts = k.extreme_points();
    let blocks = pts.iter().map(|p| p.matrix().clone()).collect();
    (pts, blocks)
}

fn check_dims<T: Real>(rho: &DensityMatrix<T>, k: &ConvexFreeSet<T>) -> Result<()> {
    if rho.dim() != k.dim() {
        return Err(Error::DimensionMismatch {
            expected: k.dim(),
            found: rho.dim(),
        });
    }
    Ok(())
}

/// Decides whether some `sigma in K` has `(1+s) sigma - rho >= -slack I`.
pub fn feasibility_step<T: Real>(rho: &DensityMatrix<T>, k: &ConvexFreeSet<T>, s: T) -> Result<Feasibility<T>> {
    feasibility_step_with(rho, k, s, &RobustnessOptions::default())
}

pub fn feasibility_step_with<T: Real>(
    rho: &DensityMatrix<T>,
    k: &ConvexFreeSet<T>,
    s: T,
    opts: &RobustnessOptions,
) -> Result<Feasibility<T>> {
    check_dims(rho, k)?;
    if !(s >= T::zero()) {
        return Err(Error::InvalidArgument(format!("shift s = {s} must be nonnegative")));
    }
    let (pts, blocks) = extreme_blocks(k);
    Ok(feasibility_on(&pts, &blocks, rho, s, tol::<T>(opts.slack)))
}

fn feasibility_on<T: Real>(
    pts: &[DensityMatrix<T>],
    blocks: &[Matrix<T>],
    rho: &DensityMatrix<T>,
    s: T,
    slack: T,
) -> Feasibility<T> {
    let r = barrier::max_min_eigenvalue(blocks, rho.matrix(), T::one() + s, slack, slack * T::lit(1e-2));
    let feasible = r.lower >= -slack;
    Feasibility {
        feasible,
        sigma: feasible.then(|| mix(pts, &r.weights)),
        margin: r.lower,
    }
}

/// Robustness of `rho` against a convex piece, with default options.
pub fn robustness_convex<T: Real>(rho: &DensityMatrix<T>, k: &ConvexFreeSet<T>) -> Result<RobustnessCertificate<T>> {
    robustness_convex_with(rho, k, &RobustnessOptions::default())
}

pub fn robustness_convex_with<T: Real>(
    rho: &DensityMatrix<T>,
    k: &ConvexFreeSet<T>,
    opts: &RobustnessOptions,
) -> Result<RobustnessCertificate<T>> {
    check_dims(rho, k)?;
    let d = rho.dim();
    if k.membership_residual(rho) <= tol::<T>(opts.membership_tol) {
        return Ok(RobustnessCertificate {
            value: T::zero(),
            sigma: rho.clone(),
            tau: None,
            dual_x: HermitianMatrix::identity(d),
            subset_label: k.label().to_string(),
            gap: T::zero(),
        });
    }
    let (pts, blocks) = extreme_blocks(k);
    let slack = tol::<T>(opts.slack);
    let abs_tol = tol::<T>(opts.abs_tol);
    let cap = T::lit(opts.s_cap);

    if let Some(x) = support_obstruction(&blocks, rho)? {
        return Ok(infinite_certificate(k, &pts, &blocks, rho, x));
    }

    let mut lo = T::zero();
    let mut hi = T::one();
    let mut at_hi = feasibility_on(&pts, &blocks, rho, hi, slack);
    while !at_hi.feasible {
        lo = hi;
        hi *= T::lit(2.0);
        if hi > cap {
            let x = dual_operator(k, &blocks, rho, opts)?.map(|(x, _)| x);
            let mut cert = infinite_certificate(k, &pts, &blocks, rho, HermitianMatrix::zeros(d));
            cert.gap = T::infinity();
            if let Some(x) = x {
                cert.dual_x = x;
            }
            return Ok(cert);
        }
        at_hi = feasibility_on(&pts, &blocks, rho, hi, slack);
    }
    while hi - lo > abs_tol {
        let mid = (lo + hi) * T::lit(0.5);
        let step = feasibility_on(&pts, &blocks, rho, mid, slack);
        if step.feasible {
            hi = mid;
            at_hi = step;
        } else {
            lo = mid;
        }
    }

    let sigma = at_hi.sigma.expect("feasible step carries sigma");
    let noise = sigma.as_hermitian().scale(T::one() + hi).sub(rho.as_hermitian()).scale(T::one() / hi);
    let tau = DensityMatrix::clip_to_state(&noise).ok();
    let (dual_x, gap) = match dual_operator(k, &blocks, rho, opts)? {
        Some((x, v)) => (x, (hi - v).abs()),
        None => (HermitianMatrix::identity(d), hi),
    };
    Ok(RobustnessCertificate {
        value: hi,
        sigma,
        tau,
        dual_x,
        subset_label: k.label().to_string(),
        gap,
    })
}

/// Projector onto the part of `supp(rho)` missed by every extreme point.
fn support_obstruction<T: Real>(blocks: &[Matrix<T>], rho: &DensityMatrix<T>) -> Result<Option<HermitianMatrix<T>>> {
    let total = blocks.iter().skip(1).fold(blocks[0].clone(), |acc, b| acc.add(b));
    let e = eig_hermitian(&total.hermitian_part())?;
    let top = e.values[e.values.len() - 1];
    let cut = top * tol::<T>(1e-10);
    let kernel = e.reconstruct_with(|x| if x <= cut { T::one() } else { T::zero() });
    if kernel.trace_product(rho.as_hermitian()) > tol::<T>(1e-10) {
        Ok(Some(kernel))
    } else {
        Ok(None)
    }
}

fn infinite_certificate<T: Real>(
    k: &ConvexFreeSet<T>,
    pts: &[DensityMatrix<T>],
    blocks: &[Matrix<T>],
    rho: &DensityMatrix<T>,
    x: HermitianMatrix<T>,
) -> RobustnessCertificate<T> {
    // Best effort primal point: the closest approach at the cap.
    let r = barrier::max_min_eigenvalue(blocks, rho.matrix(), T::lit(2.0), T::zero(), T::lit(1e-6));
    RobustnessCertificate {
        value: T::infinity(),
        sigma: mix(pts, &r.weights),
        tau: None,
        dual_x: x,
        subset_label: k.label().to_string(),
        gap: T::zero(),
    }
}

/// Solves the dual program on the support of the extreme points and returns
/// `(X, tr[X rho] - 1)` with `X` rescaled so that `max_K tr[X sigma] <= 1`.
fn dual_operator<T: Real>(
    k: &ConvexFreeSet<T>,
    blocks: &[Matrix<T>],
    rho: &DensityMatrix<T>,
    opts: &RobustnessOptions,
) -> Result<Option<(HermitianMatrix<T>, T)>> {
    let d = rho.dim();
    let total = blocks.iter().skip(1).fold(blocks[0].clone(), |acc, b| acc.add(b));
    let e = eig_hermitian(&total.hermitian_part())?;
    let top = e.values[d - 1];
    let cut = top * tol::<T>(1e-10);
    let support: Vec<usize> = (0..d).filter(|&j| e.values[j] > cut).collect();
    let r = support.len();
    let v = &e.vectors;
    let compress = |m: &Matrix<T>| {
        Matrix::from_fn(r, |a, b| {
            let (ja, jb) = (support[a], support[b]);
            let mut acc = Complex::new(T::zero(), T::zero());
            for p in 0..d {
                for q in 0..d {
                    acc += v[(p, ja)].conj() * m[(p, q)] * v[(q, jb)];
                }
            }
            acc
        })
    };
    let small: Vec<Matrix<T>> = blocks.iter().map(compress).collect();
    let Some(sol) = barrier::min_cover(&small, &compress(rho.matrix()), tol::<T>(opts.dual_gap)) else {
        return Ok(None);
    };
    let x = Matrix::from_fn(d, |p, q| {
        let mut acc = Complex::new(T::zero(), T::zero());
        for a in 0..r {
            for b in 0..r {
                acc += v[(p, support[a])] * sol.z[(a, b)] * v[(q, support[b])].conj();
            }
        }
        acc
    })
    .hermitian_part();
    // Clip tiny negative eigenvalues from the inverse and enforce feasibility.
    let x = x.map_spectrum(|l| l.max(T::zero()))?;
    let (worst, _) = k.max_linear(&x)?;
    let x = if worst > T::one() { x.scale(T::one() / worst) } else { x };
    let value = x.trace_product(rho.as_hermitian()) - T::one();
    Ok(Some((x, value)))
}

/// Dual operator `X >= 0` with `max_K tr[X sigma] <= 1` and
/// `tr[X rho] = 1 + R_K(rho)` up to the solver gap.
pub fn dual_witness<T: Real>(rho: &DensityMatrix<T>, k: &ConvexFreeSet<T>) -> Result<HermitianMatrix<T>> {
    check_dims(rho, k)?;
    let opts = RobustnessOptions::default();
    if k.membership_residual(rho) <= tol::<T>(opts.membership_tol) {
        return Ok(HermitianMatrix::identity(rho.dim()));
    }
    let (_, blocks) = extreme_blocks(k);
    if support_obstruction(&blocks, rho)?.is_some() {
        return Err(Error::InfiniteRobustness);
    }
    let (x, value) = dual_operator(k, &blocks, rho, &opts)?.ok_or(Error::InfiniteRobustness)?;
    // The primal value of the compressed program bounds the dual from above.
    let primal = robustness_convex_with(rho, k, &opts)?;
    let gap = (primal.value - value).abs();
    if gap > tol::<T>(1e-6) {
        return Err(Error::CertificateQuality(gap.as_f64()));
    }
    Ok(x)
}

/// Robustness against a union: the minimum over its pieces.
#[derive(Clone, Debug)]
pub struct UnionRobustness<T> {
    pub value: T,
    /// Index of the minimizing piece; first in declaration order on ties.
    pub best: usize,
    pub per_subset: Vec<RobustnessCertificate<T>>,
}

impl<T: Real> UnionRobustness<T> {
    pub fn best_certificate(&self) -> &RobustnessCertificate<T> {
        &self.per_subset[self.best]
    }
}

pub fn robustness_union<T: Real>(rho: &DensityMatrix<T>, f: &FreeSet<T>) -> Result<UnionRobustness<T>> {
    robustness_union_with(rho, f, &RobustnessOptions::default())
}

pub fn robustness_union_with<T: Real>(
    rho: &DensityMatrix<T>,
    f: &FreeSet<T>,
    opts: &RobustnessOptions,
) -> Result<UnionRobustness<T>> {
    let per_subset = f
        .subsets()
        .iter()
        .map(|k| robustness_convex_with(rho, k, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, c) in per_subset.iter().enumerate() {
        if c.value < per_subset[best].value {
            best = i;
        }
    }
    Ok(UnionRobustness {
        value: per_subset[best].value,
        best,
        per_subset,
    })
}
