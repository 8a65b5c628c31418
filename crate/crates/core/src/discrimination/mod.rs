//! Channel discrimination: ensembles of measure-and-prepare channels,
//! success probabilities, optimal measurements and the tasks that turn a
//! witness or a dual operator into an operational advantage.
//!
//! Flag outputs are classical distributions over `n` labels stored as a
//! uniform floor plus sparse peaks, so ensembles with `10^4` channels and
//! `10^4` flags never materialize a dense `n x n` matrix.

pub mod channel;

use std::collections::BTreeMap;

use rand::Rng;

pub use channel::{Channel, ChannelEnsemble, ChannelKind, ChannelOutput, Flag, FlagDistribution, OutputState, Povm};

use crate::error::{Error, Result};
use crate::freesets::{mix, sample_free, ConvexFreeSet, FreeSet};
use crate::optim::{nelder_mead, softmax};
use crate::qcore::matrix::{DensityMatrix, HermitianMatrix};
use crate::qcore::random::{random_density_with, random_state};
use crate::qcore::tensor::{tensor_power_capped, DEFAULT_DIM_CAP};
use crate::robustness::{robustness_convex, robustness_union};
use crate::scalar::{tol, Real};
use crate::witness::{compute_deltas, shift_family, ShiftedWitnessFamily, WitnessFamily};

/// `sum_i p_i tr[M_i Lambda_i(input)]`.
pub fn success_probability<T: Real>(e: &ChannelEnsemble<T>, m: &Povm<T>, input: &HermitianMatrix<T>) -> Result<T> {
    if m.len() != e.len() {
        return Err(Error::DimensionMismatch {
            expected: e.len(),
            found: m.len(),
        });
    }
    let mut total = T::zero();
    for (i, (p, ch)) in e.priors().iter().zip(e.channels()).enumerate() {
        if *p == T::zero() {
            continue;
        }
        total += *p * m.weight(i, &ch.apply(input)?)?;
    }
    Ok(total)
}

/// Measurement maximizing the success probability and its value.
#[derive(Clone, Debug)]
pub struct OptimalMeasurement<T> {
    pub povm: Povm<T>,
    pub value: T,
    /// False when the value is only a lower bound (pretty-good measurement
    /// on non-commuting outputs with more than two hypotheses).
    pub exact: bool,
}

/// Classical outputs: outcome-wise argmax. Two dense outputs: Helstrom.
/// More dense outputs: joint eigenbasis argmax when they commute, the
/// pretty-good measurement otherwise.
pub fn optimal_measurement<T: Real>(e: &ChannelEnsemble<T>, input: &HermitianMatrix<T>) -> Result<OptimalMeasurement<T>> {
    let outs: Vec<ChannelOutput<T>> = e.channels().iter().map(|c| c.apply(input)).collect::<Result<_>>()?;
    let priors = e.priors();
    if let Some(dists) = outs.iter().map(|o| o.as_classical()).collect::<Option<Vec<_>>>() {
        let (povm, value) = classical_argmax(priors, &dists)?;
        return Ok(OptimalMeasurement { povm, value, exact: true });
    }
    let dense: Vec<HermitianMatrix<T>> = outs.iter().map(|o| o.to_dense()).collect::<Result<_>>()?;
    let dim = dense[0].dim();
    if dense.iter().any(|o| o.dim() != dim) {
        return Err(Error::InvalidArgument("channel outputs differ in dimension".into()));
    }
    let weighted: Vec<HermitianMatrix<T>> = dense.iter().zip(priors).map(|(o, &p)| o.scale(p)).collect();
    let (povm, exact) = if weighted.len() == 2 {
        let gamma = weighted[0].sub(&weighted[1]);
        let m1 = gamma.positive_projector(T::zero())?;
        let m2 = HermitianMatrix::identity(dim).sub(&m1);
        (Povm::dense_unchecked(vec![m1, m2]), true)
    } else if commute_all(&weighted) {
        (joint_eigenbasis_argmax(&weighted)?, true)
    } else {
        (pretty_good(&weighted)?, false)
    };
    let value = success_probability(e, &povm, input)?;
    Ok(OptimalMeasurement { povm, value, exact })
}

fn classical_argmax<T: Real>(priors: &[T], dists: &[&FlagDistribution<T>]) -> Result<(Povm<T>, T)> {
    let n = dists[0].len();
    if dists.iter().any(|d| d.len() != n) {
        return Err(Error::InvalidArgument("flag outputs differ in label count".into()));
    }
    let (floor_best, floor_val) = dists
        .iter()
        .zip(priors)
        .enumerate()
        .map(|(i, (d, &p))| (i, p * d.floor()))
        .fold((0, T::neg_infinity()), |b, c| if c.1 > b.1 { c } else { b });
    let mut by_flag: BTreeMap<usize, (usize, T)> = BTreeMap::new();
    for (i, (d, &p)) in dists.iter().zip(priors).enumerate() {
        for (&j, &v) in d.peaks() {
            let val = p * (d.floor() + v);
            let entry = by_flag.entry(j).or_insert((floor_best, floor_val));
            if val > entry.1 || (val == entry.1 && i < entry.0) {
                *entry = (i, val);
            }
        }
    }
    let mut guesses = vec![floor_best; n];
    let mut value = floor_val * T::count(n - by_flag.len());
    for (&j, &(i, v)) in &by_flag {
        guesses[j] = i;
        value += v;
    }
    Ok((Povm::assignment(guesses, dists.len())?, value))
}

fn commute_all<T: Real>(ops: &[HermitianMatrix<T>]) -> bool {
    for i in 0..ops.len() {
        for j in i + 1..ops.len() {
            let ab = ops[i].matmul(&ops[j]);
            let ba = ops[j].matmul(&ops[i]);
            if ab.max_abs_diff(&ba) > tol::<T>(1e-12) {
                return false;
            }
        }
    }
    true
}

fn joint_eigenbasis_argmax<T: Real>(ops: &[HermitianMatrix<T>]) -> Result<Povm<T>> {
    let dim = ops[0].dim();
    // A generic combination separates every joint eigenspace.
    let mut mixc = HermitianMatrix::zeros(dim);
    for (i, o) in ops.iter().enumerate() {
        mixc.axpy(T::one() + T::lit(0.618_033_988_749_895) * T::count(i * i + 1).sqrt(), o);
    }
    let e = mixc.eig()?;
    let mut elems = vec![HermitianMatrix::zeros(dim); ops.len()];
    for j in 0..dim {
        let v = e.vector(j);
        let proj = DensityMatrix::pure(&v)?.into_hermitian();
        let best = ops
            .iter()
            .enumerate()
            .map(|(i, o)| (i, o.trace_product(&proj)))
            .fold((0, T::neg_infinity()), |b, c| if c.1 > b.1 { c } else { b })
            .0;
        elems[best] = elems[best].add(&proj);
    }
    Ok(Povm::dense_unchecked(elems))
}

fn pretty_good<T: Real>(ops: &[HermitianMatrix<T>]) -> Result<Povm<T>> {
    let avg = ops.iter().skip(1).fold(ops[0].clone(), |a, o| a.add(o));
    let cut = tol::<T>(1e-12);
    let inv_sqrt = avg.map_spectrum(|x| if x > cut { T::one() / x.sqrt() } else { T::zero() })?;
    let kernel = avg.map_spectrum(|x| if x > cut { T::zero() } else { T::one() })?;
    let mut elems: Vec<HermitianMatrix<T>> = ops
        .iter()
        .map(|o| inv_sqrt.matmul(o).matmul(inv_sqrt.matrix()).hermitian_part())
        .collect();
    elems[0] = elems[0].add(&kernel);
    Ok(Povm::dense_unchecked(elems))
}

/// Binary task from `W~_m`: `Lambda_1` measures `{A, I - A}` with
/// `A = I/2 - W~_m / (2 ||W~_m||)` and prepares flag 0 or 1, `Lambda_2`
/// always prepares flag 1; uniform priors. The optimal success on
/// `eta^{(x)m}` is `(1 + tr[A eta^{(x)m}]) / 2`.
pub fn task_from_witness<T: Real>(family: &ShiftedWitnessFamily<T>, m: usize) -> Result<ChannelEnsemble<T>> {
    let w = family
        .members
        .get(&m)
        .ok_or_else(|| Error::InvalidArgument(format!("no member for m = {m}")))?;
    let a = task_effect(w)?;
    let dim = w.dim();
    let rest = HermitianMatrix::identity(dim).sub(&a);
    let flag = |j| OutputState::Flag { n: 2, flag: Flag::Basis(j) };
    let half = T::lit(0.5);
    ChannelEnsemble::new(
        vec![half, half],
        vec![
            Channel::measure_prepare(vec![a, rest], vec![flag(0), flag(1)])?,
            Channel::constant(dim, flag(1))?,
        ],
    )
}

/// `A = I/2 - W / (2 ||W||_inf)`, spectrum in `[0, 1]`.
pub fn task_effect<T: Real>(w: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
    let norm = w.operator_norm()?;
    let mut a = HermitianMatrix::identity(w.dim()).scale(T::lit(0.5));
    if norm > T::zero() {
        a.axpy(-T::one() / (T::lit(2.0) * norm), w);
    }
    Ok(a)
}

/// The tasks of [`task_from_witness`] for every member.
pub fn tasks_from_family<T: Real>(family: &ShiftedWitnessFamily<T>) -> Result<BTreeMap<usize, ChannelEnsemble<T>>> {
    family
        .members
        .keys()
        .map(|&m| task_from_witness(family, m).map(|t| (m, t)))
        .collect()
}

/// Optimal success of `task` on `eta^{(x)m}`.
pub fn multi_copy_value<T: Real>(task: &ChannelEnsemble<T>, eta: &HermitianMatrix<T>, m: usize) -> Result<T> {
    let input = tensor_power_capped(eta, m, DEFAULT_DIM_CAP.max(task.in_dim()))?;
    Ok(optimal_measurement(task, &input)?.value)
}

/// `max_m P*(rho^{(x)m}) / P*(sigma^{(x)m})`.
pub fn multi_input_advantage<T: Real>(
    rho: &DensityMatrix<T>,
    sigma: &DensityMatrix<T>,
    tasks: &BTreeMap<usize, ChannelEnsemble<T>>,
) -> Result<T> {
    if tasks.is_empty() {
        return Err(Error::InvalidArgument("empty task map".into()));
    }
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let mut best = T::neg_infinity();
    for (&m, task) in tasks {
        let num = multi_copy_value(task, rho.as_hermitian(), m)?;
        let den = multi_copy_value(task, sigma.as_hermitian(), m)?;
        best = best.max(num / den);
    }
    Ok(best)
}

/// Outcome of the multi-copy advantage check.
#[derive(Clone, Debug)]
pub struct QualitativeReport<T> {
    pub robustness: T,
    pub s: T,
    pub delta: T,
    /// Smallest advantage ratio over the checked free states.
    pub min_ratio: T,
    pub mean_ratio: T,
    /// Standard error of the sampled minimum, from the spread of the
    /// minima of [`MIN_BATCHES`] disjoint batches.
    pub std_error: T,
    /// `min_ratio - 1`.
    pub margin: T,
    pub samples: usize,
    pub worst_sigma: DensityMatrix<T>,
    pub passed: bool,
}

/// Builds the family at `s = 0.9 R`, the tasks for `m = 2..=d`, and
/// minimizes the advantage ratio over sampled free states, extreme points,
/// the margin estimator's maximizer and a Nelder-Mead refinement. Passes
/// when `min_ratio - 1 > 3 std_error`.
pub fn verify_qualitative_advantage<T: Real>(
    rho: &DensityMatrix<T>,
    f: &FreeSet<T>,
    n_samples: usize,
    seed: u64,
) -> Result<QualitativeReport<T>> {
    let union = robustness_union(rho, f)?;
    let r = union.value;
    if !r.is_finite() {
        return Err(Error::InfiniteRobustness);
    }
    if !(r > T::zero()) {
        return Err(Error::FreeState(r.as_f64()));
    }
    let s = T::lit(0.9) * r;
    let base = WitnessFamily::new(rho, s)?;
    let est = compute_deltas(&base, f, n_samples, seed)?;
    let family = shift_family(&base, &est.deltas, T::one())?;
    let tasks = tasks_from_family(&family)?;

    let numerators: BTreeMap<usize, T> = tasks
        .iter()
        .map(|(&m, t)| multi_copy_value(t, rho.as_hermitian(), m).map(|v| (m, v)))
        .collect::<Result<_>>()?;
    let ratio = |sigma: &HermitianMatrix<T>| -> Result<T> {
        let mut best = T::neg_infinity();
        for (&m, t) in &tasks {
            best = best.max(numerators[&m] / multi_copy_value(t, sigma, m)?);
        }
        Ok(best)
    };

    let mut candidates: Vec<(usize, DensityMatrix<T>)> = sample_free(f, n_samples.max(1), seed.wrapping_add(7))?
        .into_iter()
        .map(|smp| (smp.subset, smp.state))
        .collect();
    for (k, sub) in f.subsets().iter().enumerate() {
        candidates.extend(sub.extreme_points().into_iter().map(|p| (k, p)));
    }
    let mut ratios = Vec::with_capacity(candidates.len() + 1);
    let mut worst: Option<(T, usize, DensityMatrix<T>)> = None;
    for (k, c) in &candidates {
        let v = ratio(c.as_hermitian())?;
        ratios.push(v);
        if worst.as_ref().is_none_or(|w| v < w.0) {
            worst = Some((v, *k, c.clone()));
        }
    }
    let (mut min_ratio, worst_k, mut worst_sigma) = worst.expect("at least one candidate");
    let v = ratio(est.sigma.as_hermitian())?;
    if v < min_ratio {
        min_ratio = v;
        worst_sigma = est.sigma.clone();
    }
    if rho.dim() > 2 {
        let pts = f.subsets()[worst_k].extreme_points();
        if pts.len() > 1 {
            let res = nelder_mead(
                |z: &[T]| ratio(mix(&pts, &softmax(z)).as_hermitian()).unwrap_or(T::infinity()),
                &vec![T::zero(); pts.len()],
                T::lit(0.5),
                300 * pts.len(),
                T::lit(1e-12),
            );
            if res.value < min_ratio {
                min_ratio = res.value;
                worst_sigma = mix(&pts, &softmax(&res.x));
            }
        }
    }

    let mean = ratios.iter().copied().sum::<T>() / T::count(ratios.len());
    let std_error = batch_min_std_error(&ratios[..n_samples.max(1)]);
    let margin = min_ratio - T::one();
    Ok(QualitativeReport {
        robustness: r,
        s,
        delta: est.delta,
        min_ratio,
        mean_ratio: mean,
        std_error,
        margin,
        samples: ratios.len() + 1,
        worst_sigma,
        passed: margin > T::lit(3.0) * std_error,
    })
}

/// Batches used for the standard error of a sampled minimum.
pub const MIN_BATCHES: usize = 20;

/// `std(batch minima) / sqrt(batches)`; zero when there are too few
/// samples to form two batches.
fn batch_min_std_error<T: Real>(xs: &[T]) -> T {
    let b = MIN_BATCHES.min(xs.len());
    if b < 2 {
        return T::zero();
    }
    let size = xs.len() / b;
    let mins: Vec<T> = (0..b)
        .map(|i| xs[i * size..(i + 1) * size].iter().copied().fold(T::infinity(), T::min))
        .collect();
    let bf = T::count(b);
    let mean = mins.iter().copied().sum::<T>() / bf;
    let var = mins.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / (bf - T::one());
    (var / bf).sqrt()
}

/// `N` channels with uniform priors; channel `i` measures `{A, I - A}`,
/// `A = X / ||X||`, and prepares flag `i` or the uniform flag mixture. The
/// optimal success on `eta` is `(1 - 1/N) tr[A eta] + 1/N`.
pub fn achieving_ensemble<T: Real>(x: &HermitianMatrix<T>, n: usize) -> Result<ChannelEnsemble<T>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("ensemble size N = {n} must be at least 2")));
    }
    let e = x.eig()?;
    if e.values[0] < -tol::<T>(1e-9) {
        return Err(Error::NotPsd(e.values[0].as_f64()));
    }
    let norm = e.values[e.values.len() - 1];
    if !(norm > T::zero()) {
        return Err(Error::InvalidArgument("operator must be nonzero".into()));
    }
    let a = x.map_spectrum(|l| (l / norm).clamp(T::zero(), T::one()))?;
    let rest = HermitianMatrix::identity(x.dim()).sub(&a);
    let channels = (0..n)
        .map(|i| {
            Channel::measure_prepare_unchecked(
                vec![a.clone(), rest.clone()],
                vec![OutputState::Flag { n, flag: Flag::Basis(i) }, OutputState::Flag { n, flag: Flag::Uniform }],
            )
        })
        .collect();
    ChannelEnsemble::new(vec![T::one() / T::count(n); n], channels)
}

/// Single-copy effect `G = sum_i p_i Lambda_i^dagger(M_i)`, so that the
/// success probability on `eta` is `tr[G eta]`.
pub fn induced_effect<T: Real>(e: &ChannelEnsemble<T>, m: &Povm<T>) -> Result<HermitianMatrix<T>> {
    if m.len() != e.len() {
        return Err(Error::DimensionMismatch {
            expected: e.len(),
            found: m.len(),
        });
    }
    let mut g = HermitianMatrix::zeros(e.in_dim());
    for (i, (&p, ch)) in e.priors().iter().zip(e.channels()).enumerate() {
        if p == T::zero() {
            continue;
        }
        match ch.kind() {
            ChannelKind::MeasurePrepare { effects, outputs } => {
                for (a, out) in effects.iter().zip(outputs) {
                    let w = m.weight(i, &out.as_output())?;
                    if w != T::zero() {
                        g.axpy(p * w, a);
                    }
                }
            }
            ChannelKind::Constant { output } => {
                let w = m.weight(i, &output.as_output())?;
                g.axpy(p * w, &HermitianMatrix::identity(e.in_dim()));
            }
        }
    }
    Ok(g)
}

/// `P(rho) / max_{sigma in K} P(sigma)` for a fixed task and measurement.
pub fn fixed_task_advantage<T: Real>(
    rho: &DensityMatrix<T>,
    k: &ConvexFreeSet<T>,
    e: &ChannelEnsemble<T>,
    m: &Povm<T>,
) -> Result<T> {
    if rho.dim() != e.in_dim() || k.dim() != e.in_dim() {
        return Err(Error::DimensionMismatch {
            expected: e.in_dim(),
            found: rho.dim(),
        });
    }
    let g = induced_effect(e, m)?;
    let (den, _) = k.max_linear(&g)?;
    if !(den > T::zero()) {
        return Err(Error::InvalidArgument("task has zero success on every free state".into()));
    }
    Ok(g.trace_product(rho.as_hermitian()) / den)
}

/// Per-subset achieved advantage against its target `1 + R_k`.
#[derive(Clone, Debug)]
pub struct SubsetAdvantage<T> {
    pub label: String,
    pub robustness: T,
    pub target: T,
    pub achieved: T,
}

#[derive(Clone, Debug)]
pub struct WorstCaseReport<T> {
    /// `min_k achieved_k`.
    pub value: T,
    /// `1 + R_F`.
    pub target: T,
    pub n: usize,
    pub per_subset: Vec<SubsetAdvantage<T>>,
    /// `|value - target| / target`.
    pub relative_error: T,
    pub passed: bool,
}

/// For every subset: dual operator, achieving ensemble with `N` channels,
/// optimal measurement on `rho`, and the fixed-task advantage. The minimum
/// over subsets is compared with `1 + R_F` at tolerance
/// `(1 + R_F)(2/N + 1e-6)`.
pub fn worst_case_advantage<T: Real>(rho: &DensityMatrix<T>, f: &FreeSet<T>, n: usize) -> Result<WorstCaseReport<T>> {
    let mut per_subset = Vec::with_capacity(f.subsets().len());
    for k in f.subsets() {
        let cert = robustness_convex(rho, k)?;
        let e = achieving_ensemble(&cert.dual_x, n)?;
        let m = optimal_measurement(&e, rho.as_hermitian())?;
        let achieved = fixed_task_advantage(rho, k, &e, &m.povm)?;
        per_subset.push(SubsetAdvantage {
            label: k.label().to_string(),
            robustness: cert.value,
            target: T::one() + cert.value,
            achieved,
        });
    }
    let value = per_subset.iter().map(|p| p.achieved).fold(T::infinity(), T::min);
    let r = per_subset.iter().map(|p| p.robustness).fold(T::infinity(), T::min);
    if !r.is_finite() {
        return Err(Error::InfiniteRobustness);
    }
    let target = T::one() + r;
    let relative_error = (value - target).abs() / target;
    let budget = T::lit(2.0) / T::count(n) + T::lit(1e-6);
    Ok(WorstCaseReport {
        value,
        target,
        n,
        per_subset,
        relative_error,
        passed: relative_error <= budget,
    })
}

/// Random POVM with `outcomes` elements: `S^{-1/2} G_i S^{-1/2}` for
/// Ginibre-distributed `G_i` and `S = sum_i G_i`.
pub fn random_povm<T: Real, R: Rng + ?Sized>(rng: &mut R, d: usize, outcomes: usize) -> Result<Povm<T>> {
    let gs: Vec<HermitianMatrix<T>> = (0..outcomes)
        .map(|_| random_density_with::<T, _>(rng, d, d).map(|s| s.into_hermitian()))
        .collect::<Result<_>>()?;
    let total = gs.iter().skip(1).fold(gs[0].clone(), |a, g| a.add(g));
    let inv_sqrt = total.map_spectrum(|x| T::one() / x.sqrt())?;
    let elems = gs
        .iter()
        .map(|g| inv_sqrt.matmul(g).matmul(inv_sqrt.matrix()).hermitian_part())
        .collect();
    Povm::dense(elems)
}

/// Random ensemble of `n` measure-and-prepare channels from `C^d` to
/// `C^out`, each with `outcomes` effects and random output states.
pub fn random_ensemble<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    out: usize,
    n: usize,
    outcomes: usize,
) -> Result<ChannelEnsemble<T>> {
    let mut channels = Vec::with_capacity(n);
    for _ in 0..n {
        let effects = random_povm::<T, _>(rng, d, outcomes)?.into_dense()?;
        let outputs = (0..outcomes).map(|_| OutputState::Dense(random_state(rng, out))).collect();
        channels.push(Channel::measure_prepare(effects, outputs)?);
    }
    let raw: Vec<T> = (0..n).map(|_| T::lit(rng.random::<f64>()) + T::lit(0.05)).collect();
    let total: T = raw.iter().copied().sum();
    ChannelEnsemble::new(raw.into_iter().map(|p| p / total).collect(), channels)
}
