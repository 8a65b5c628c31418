//! Channels, ensembles and measurements with sparse classical flags.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::qcore::matrix::{DensityMatrix, HermitianMatrix};
use crate::scalar::{tol, Real};

/// Flag spaces up to this size may be expanded into dense matrices.
pub const DENSE_FLAG_LIMIT: usize = 256;

/// Diagonal state on `n` flag labels.
#[derive(Clone, Debug, PartialEq)]
pub enum Flag<T> {
    Basis(usize),
    Uniform,
    Weights(Vec<T>),
}

/// Output state of a channel branch.
#[derive(Clone, Debug)]
pub enum OutputState<T> {
    Dense(DensityMatrix<T>),
    Flag { n: usize, flag: Flag<T> },
}

impl<T: Real> OutputState<T> {
    pub fn dim(&self) -> usize {
        match self {
            OutputState::Dense(s) => s.dim(),
            OutputState::Flag { n, .. } => *n,
        }
    }

    fn validate(&self) -> Result<()> {
        if let OutputState::Flag { n, flag } = self {
            match flag {
                Flag::Basis(i) if *i >= *n => {
                    return Err(Error::InvalidArgument(format!("flag {i} outside 0..{n}")));
                }
                Flag::Weights(w) => {
                    if w.len() != *n {
                        return Err(Error::DimensionMismatch { expected: *n, found: w.len() });
                    }
                    if w.iter().any(|&x| x < -tol::<T>(1e-12)) {
                        return Err(Error::InvalidArgument("negative flag weight".into()));
                    }
                    let total: T = w.iter().copied().sum();
                    if (total - T::one()).abs() > tol::<T>(1e-9) {
                        return Err(Error::InvalidTrace(total.as_f64()));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn as_output(&self) -> ChannelOutput<T> {
        match self {
            OutputState::Dense(s) => ChannelOutput::Dense(s.as_hermitian().clone()),
            OutputState::Flag { n, flag } => ChannelOutput::Classical(FlagDistribution::from_flag(*n, flag, T::one())),
        }
    }
}

/// `floor` on every label plus sparse `peaks`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlagDistribution<T> {
    n: usize,
    floor: T,
    peaks: BTreeMap<usize, T>,
}

impl<T: Real> FlagDistribution<T> {
    pub fn zero(n: usize) -> Self {
        Self { n, floor: T::zero(), peaks: BTreeMap::new() }
    }

    fn from_flag(n: usize, flag: &Flag<T>, w: T) -> Self {
        let mut d = Self::zero(n);
        d.add_flag(flag, w);
        d
    }

    fn add_flag(&mut self, flag: &Flag<T>, w: T) {
        match flag {
            Flag::Basis(i) => *self.peaks.entry(*i).or_insert(T::zero()) += w,
            Flag::Uniform => self.floor += w / T::count(self.n),
            Flag::Weights(v) => {
                for (i, &x) in v.iter().enumerate() {
                    if x != T::zero() {
                        *self.peaks.entry(i).or_insert(T::zero()) += w * x;
                    }
                }
            }
        }
    }

    fn add(&mut self, other: &Self, w: T) {
        self.floor += w * other.floor;
        for (&i, &v) in &other.peaks {
            *self.peaks.entry(i).or_insert(T::zero()) += w * v;
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn floor(&self) -> T {
        self.floor
    }

    pub fn peaks(&self) -> &BTreeMap<usize, T> {
        &self.peaks
    }

    /// Probability of label `j`.
    pub fn get(&self, j: usize) -> T {
        self.floor + self.peaks.get(&j).copied().unwrap_or(T::zero())
    }

    pub fn to_dense(&self) -> Result<HermitianMatrix<T>> {
        if self.n > DENSE_FLAG_LIMIT {
            return Err(Error::SizeCap { dim: self.n, cap: DENSE_FLAG_LIMIT });
        }
        let diag: Vec<T> = (0..self.n).map(|j| self.get(j)).collect();
        Ok(HermitianMatrix::diagonal(&diag))
    }
}

/// A channel applied to a fixed input (unnormalized if the input is).
#[derive(Clone, Debug)]
pub enum ChannelOutput<T> {
    Dense(HermitianMatrix<T>),
    Classical(FlagDistribution<T>),
}

impl<T: Real> ChannelOutput<T> {
    pub fn as_classical(&self) -> Option<&FlagDistribution<T>> {
        match self {
            ChannelOutput::Classical(d) => Some(d),
            ChannelOutput::Dense(_) => None,
        }
    }

    pub fn to_dense(&self) -> Result<HermitianMatrix<T>> {
        match self {
            ChannelOutput::Dense(h) => Ok(h.clone()),
            ChannelOutput::Classical(d) => d.to_dense(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ChannelOutput::Dense(h) => h.dim(),
            ChannelOutput::Classical(d) => d.len(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum ChannelKind<T> {
    /// `eta -> sum_j tr[A_j eta] out_j`.
    MeasurePrepare {
        effects: Vec<HermitianMatrix<T>>,
        outputs: Vec<OutputState<T>>,
    },
    /// `eta -> tr[eta] out`.
    Constant { output: OutputState<T> },
}

#[derive(Clone, Debug)]
pub struct Channel<T> {
    kind: ChannelKind<T>,
    in_dim: usize,
    out_dim: usize,
}

impl<T: Real> Channel<T> {
    /// Checks that the effects are PSD and sum to the identity, and that
    /// all outputs share one dimension.
    pub fn measure_prepare(effects: Vec<HermitianMatrix<T>>, outputs: Vec<OutputState<T>>) -> Result<Self> {
        if effects.is_empty() || effects.len() != outputs.len() {
            return Err(Error::DimensionMismatch { expected: effects.len(), found: outputs.len() });
        }
        check_povm(&effects)?;
        let out_dim = outputs[0].dim();
        for o in &outputs {
            o.validate()?;
            if o.dim() != out_dim {
                return Err(Error::DimensionMismatch { expected: out_dim, found: o.dim() });
            }
        }
        Ok(Self::measure_prepare_unchecked(effects, outputs))
    }

    pub(crate) fn measure_prepare_unchecked(effects: Vec<HermitianMatrix<T>>, outputs: Vec<OutputState<T>>) -> Self {
        let in_dim = effects[0].dim();
        let out_dim = outputs[0].dim();
        Self { kind: ChannelKind::MeasurePrepare { effects, outputs }, in_dim, out_dim }
    }

    pub fn constant(in_dim: usize, output: OutputState<T>) -> Result<Self> {
        if in_dim == 0 {
            return Err(Error::InvalidDimension(in_dim));
        }
        output.validate()?;
        let out_dim = output.dim();
        Ok(Self { kind: ChannelKind::Constant { output }, in_dim, out_dim })
    }

    pub fn kind(&self) -> &ChannelKind<T> {
        &self.kind
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn apply(&self, input: &HermitianMatrix<T>) -> Result<ChannelOutput<T>> {
        if input.dim() != self.in_dim {
            return Err(Error::DimensionMismatch { expected: self.in_dim, found: input.dim() });
        }
        match &self.kind {
            ChannelKind::Constant { output } => Ok(scale_output(output.as_output(), input.trace())),
            ChannelKind::MeasurePrepare { effects, outputs } => {
                let weights: Vec<T> = effects.iter().map(|a| a.trace_product(input)).collect();
                let any_dense = outputs.iter().any(|o| matches!(o, OutputState::Dense(_)));
                if !any_dense {
                    let mut d = FlagDistribution::zero(self.out_dim);
                    for (o, &w) in outputs.iter().zip(&weights) {
                        if let OutputState::Flag { flag, .. } = o {
                            d.add_flag(flag, w);
                        }
                    }
                    return Ok(ChannelOutput::Classical(d));
                }
                let mut acc = HermitianMatrix::zeros(self.out_dim);
                for (o, &w) in outputs.iter().zip(&weights) {
                    acc.axpy(w, &o.as_output().to_dense()?);
                }
                Ok(ChannelOutput::Dense(acc))
            }
        }
    }
}

fn scale_output<T: Real>(o: ChannelOutput<T>, w: T) -> ChannelOutput<T> {
    match o {
        ChannelOutput::Dense(h) => ChannelOutput::Dense(h.scale(w)),
        ChannelOutput::Classical(d) => {
            let mut out = FlagDistribution::zero(d.len());
            out.add(&d, w);
            ChannelOutput::Classical(out)
        }
    }
}

fn check_povm<T: Real>(elems: &[HermitianMatrix<T>]) -> Result<()> {
    let dim = elems[0].dim();
    let mut total = HermitianMatrix::zeros(dim);
    for e in elems {
        if e.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: e.dim() });
        }
        let lo = e.min_eigenvalue()?;
        if lo < -tol::<T>(1e-9) {
            return Err(Error::NotPsd(lo.as_f64()));
        }
        total = total.add(e);
    }
    let defect = total.max_abs_diff(&HermitianMatrix::identity(dim));
    if defect > tol::<T>(1e-9) {
        return Err(Error::InvalidArgument(format!("elements sum to identity only within {}", defect.as_f64())));
    }
    Ok(())
}

/// Channels with prior probabilities.
#[derive(Clone, Debug)]
pub struct ChannelEnsemble<T> {
    priors: Vec<T>,
    channels: Vec<Channel<T>>,
}

impl<T: Real> ChannelEnsemble<T> {
    pub fn new(priors: Vec<T>, channels: Vec<Channel<T>>) -> Result<Self> {
        if channels.is_empty() || priors.len() != channels.len() {
            return Err(Error::DimensionMismatch { expected: channels.len(), found: priors.len() });
        }
        if priors.iter().any(|&p| p < T::zero()) {
            return Err(Error::InvalidArgument("negative prior".into()));
        }
        let total: T = priors.iter().copied().sum();
        if (total - T::one()).abs() > tol::<T>(1e-9) {
            return Err(Error::InvalidArgument(format!("priors sum to {total}")));
        }
        let (din, dout) = (channels[0].in_dim, channels[0].out_dim);
        if let Some(c) = channels.iter().find(|c| c.in_dim != din || c.out_dim != dout) {
            return Err(Error::DimensionMismatch { expected: din, found: c.in_dim });
        }
        Ok(Self { priors, channels })
    }

    pub fn priors(&self) -> &[T] {
        &self.priors
    }

    pub fn channels(&self) -> &[Channel<T>] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn in_dim(&self) -> usize {
        self.channels[0].in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.channels[0].out_dim
    }
}

/// Measurement on the output space; element `i` guesses channel `i`.
#[derive(Clone, Debug)]
pub enum Povm<T> {
    Dense(Vec<HermitianMatrix<T>>),
    /// Label `j` of a flag space is answered with `guesses[j]`.
    Assignment { guesses: Vec<usize>, counts: Vec<usize> },
}

impl<T: Real> Povm<T> {
    pub fn dense(elems: Vec<HermitianMatrix<T>>) -> Result<Self> {
        if elems.is_empty() {
            return Err(Error::InvalidArgument("empty POVM".into()));
        }
        check_povm(&elems)?;
        Ok(Povm::Dense(elems))
    }

    pub(crate) fn dense_unchecked(elems: Vec<HermitianMatrix<T>>) -> Self {
        Povm::Dense(elems)
    }

    /// `outcomes` is the number of hypotheses.
    pub fn assignment(guesses: Vec<usize>, outcomes: usize) -> Result<Self> {
        let mut counts = vec![0; outcomes];
        for &g in &guesses {
            if g >= outcomes {
                return Err(Error::InvalidArgument(format!("guess {g} outside 0..{outcomes}")));
            }
            counts[g] += 1;
        }
        Ok(Povm::Assignment { guesses, counts })
    }

    /// Number of elements.
    pub fn len(&self) -> usize {
        match self {
            Povm::Dense(e) => e.len(),
            Povm::Assignment { counts, .. } => counts.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn into_dense(self) -> Result<Vec<HermitianMatrix<T>>> {
        match self {
            Povm::Dense(e) => Ok(e),
            Povm::Assignment { guesses, counts } => {
                if guesses.len() > DENSE_FLAG_LIMIT {
                    return Err(Error::SizeCap { dim: guesses.len(), cap: DENSE_FLAG_LIMIT });
                }
                Ok((0..counts.len())
                    .map(|i| {
                        let diag: Vec<T> =
                            guesses.iter().map(|&g| if g == i { T::one() } else { T::zero() }).collect();
                        HermitianMatrix::diagonal(&diag)
                    })
                    .collect())
            }
        }
    }

    /// `tr[M_i out]`.
    pub fn weight(&self, i: usize, out: &ChannelOutput<T>) -> Result<T> {
        let mismatch = |expected, found| Error::DimensionMismatch { expected, found };
        match (self, out) {
            (Povm::Dense(e), ChannelOutput::Dense(h)) => {
                if e[i].dim() != h.dim() {
                    return Err(mismatch(e[i].dim(), h.dim()));
                }
                Ok(e[i].trace_product(h))
            }
            (Povm::Dense(e), ChannelOutput::Classical(d)) => {
                if e[i].dim() != d.len() {
                    return Err(mismatch(e[i].dim(), d.len()));
                }
                let m = e[i].matrix();
                Ok((0..d.len()).map(|j| m[(j, j)].re * d.get(j)).sum())
            }
            (Povm::Assignment { guesses, counts }, ChannelOutput::Classical(d)) => {
                if guesses.len() != d.len() {
                    return Err(mismatch(guesses.len(), d.len()));
                }
                let peaks: T = d.peaks().iter().filter(|(&j, _)| guesses[j] == i).map(|(_, &v)| v).sum();
                Ok(d.floor() * T::count(counts[i]) + peaks)
            }
            (Povm::Assignment { guesses, .. }, ChannelOutput::Dense(h)) => {
                if guesses.len() != h.dim() {
                    return Err(mismatch(guesses.len(), h.dim()));
                }
                let m = h.matrix();
                Ok(guesses.iter().enumerate().filter(|(_, &g)| g == i).map(|(j, _)| m[(j, j)].re).sum())
            }
        }
    }
}
