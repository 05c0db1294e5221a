//! Nörlund means of sequences and series.
//!
//! `t_m = (p_0 s_m + ⋯ + p_m s_0) / P_m`. A sequence is `(N, p)`-convergent
//! when `(t_m)` converges; since that cannot be decided from a finite trace,
//! [`detect_limit`] applies a window/epsilon Cauchy heuristic and reports
//! `Undecided` whenever the window is not tight.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::methods::{Method, MethodError};
use crate::numerics::{common_denominator, Scalar};

pub const DEFAULT_HORIZON: usize = 1000;
pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const DEFAULT_WINDOW: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error(transparent)]
    Method(#[from] MethodError),
    #[error("sequence has {available} values but index {index} was requested")]
    SequenceTooShort { available: usize, index: usize },
    #[error("limit window must be at least 2, got {0}")]
    InvalidWindow(usize),
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("cannot detect a limit from an empty trace")]
    EmptyTrace,
}

/// Named sequences and series terms available without data files.
#[derive(Debug, Clone, PartialEq)]
pub enum BuiltinSequence {
    /// Partial sums of `1 − 1 + 1 − ⋯`: `1, 0, 1, 0, …`.
    GrandiPartialSums,
    Ones,
    /// Partial sums of `Σ (−1)^n/(n+1)`, converging to `ln 2`.
    AlternatingHarmonicPartialSums,
    /// `s_n = 1` for even `n`, `0` for odd `n`.
    OneZeroAlternating,
    /// Terms `1, −1, 1, −1, …`.
    GrandiTerms,
    /// Terms `(−1)^n/(n+1)`.
    AlternatingHarmonicTerms,
    /// Terms `r^n`.
    GeometricTerms(Scalar),
}

impl BuiltinSequence {
    pub fn value(&self, n: usize) -> Scalar {
        let even = n % 2 == 0;
        match self {
            BuiltinSequence::GrandiPartialSums | BuiltinSequence::OneZeroAlternating => {
                Scalar::from_int(i64::from(even))
            }
            BuiltinSequence::Ones => Scalar::one(),
            BuiltinSequence::AlternatingHarmonicPartialSums => (0..=n)
                .map(|i| BuiltinSequence::AlternatingHarmonicTerms.value(i))
                .sum(),
            BuiltinSequence::GrandiTerms => Scalar::from_int(if even { 1 } else { -1 }),
            BuiltinSequence::AlternatingHarmonicTerms => {
                Scalar::ratio(if even { 1 } else { -1 }, n as i64 + 1)
            }
            BuiltinSequence::GeometricTerms(r) => match i32::try_from(n) {
                Ok(e) => r.powi(e).unwrap_or_else(|_| Scalar::zero()),
                Err(_) => Scalar::float(r.to_f64().powf(n as f64)),
            },
        }
    }

    /// Known limit of the sequence itself, if it converges.
    pub fn limit(&self) -> Option<Scalar> {
        match self {
            BuiltinSequence::Ones => Some(Scalar::one()),
            BuiltinSequence::AlternatingHarmonicPartialSums => {
                Some(Scalar::float(std::f64::consts::LN_2))
            }
            BuiltinSequence::AlternatingHarmonicTerms => Some(Scalar::zero()),
            _ => None,
        }
    }
}

pub type SequenceFn = dyn Fn(usize) -> Scalar + Send + Sync;

#[derive(Clone)]
pub enum SequenceSource {
    Explicit(Vec<Scalar>),
    Builtin(BuiltinSequence),
    Generator(Arc<SequenceFn>),
    /// `s_n = a_0 + ⋯ + a_n` for the wrapped term sequence.
    PartialSums(Box<SequenceSpec>),
}

#[derive(Clone)]
pub struct SequenceSpec {
    pub source: SequenceSource,
    pub declared_limit: Option<Scalar>,
}

impl fmt::Debug for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let source = match &self.source {
            SequenceSource::Explicit(v) => format!("Explicit(len {})", v.len()),
            SequenceSource::Builtin(b) => format!("{b:?}"),
            SequenceSource::Generator(_) => "Generator".to_string(),
            SequenceSource::PartialSums(inner) => format!("PartialSums({inner:?})"),
        };
        f.debug_struct("SequenceSpec")
            .field("source", &source)
            .field("declared_limit", &self.declared_limit)
            .finish()
    }
}

impl SequenceSpec {
    pub fn explicit(values: Vec<Scalar>) -> Self {
        SequenceSpec {
            source: SequenceSource::Explicit(values),
            declared_limit: None,
        }
    }

    pub fn builtin(which: BuiltinSequence) -> Self {
        let declared_limit = which.limit();
        SequenceSpec {
            source: SequenceSource::Builtin(which),
            declared_limit,
        }
    }

    pub fn generator<F>(f: F) -> Self
    where
        F: Fn(usize) -> Scalar + Send + Sync + 'static,
    {
        SequenceSpec {
            source: SequenceSource::Generator(Arc::new(f)),
            declared_limit: None,
        }
    }

    pub fn with_limit(mut self, limit: Scalar) -> Self {
        self.declared_limit = Some(limit);
        self
    }

    /// Number of available values; `None` for unbounded sources.
    pub fn len(&self) -> Option<usize> {
        match &self.source {
            SequenceSource::Explicit(v) => Some(v.len()),
            SequenceSource::PartialSums(inner) => inner.len(),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// `s_0..s_{len-1}`.
    pub fn prefix(&self, len: usize) -> Result<Vec<Scalar>, TransformError> {
        if let Some(available) = self.len() {
            if len > available {
                return Err(TransformError::SequenceTooShort {
                    available,
                    index: len - 1,
                });
            }
        }
        Ok(match &self.source {
            SequenceSource::Explicit(v) => v[..len].to_vec(),
            SequenceSource::Builtin(b) => match b {
                // Running sums, rather than re-summing every prefix.
                BuiltinSequence::AlternatingHarmonicPartialSums => running_sums(
                    (0..len).map(|n| BuiltinSequence::AlternatingHarmonicTerms.value(n)),
                ),
                _ => (0..len).map(|n| b.value(n)).collect(),
            },
            SequenceSource::Generator(f) => (0..len).map(|n| f(n)).collect(),
            SequenceSource::PartialSums(inner) => running_sums(inner.prefix(len)?),
        })
    }

    pub fn value(&self, n: usize) -> Result<Scalar, TransformError> {
        match &self.source {
            SequenceSource::Builtin(b) => Ok(b.value(n)),
            SequenceSource::Generator(f) => Ok(f(n)),
            _ => Ok(self.prefix(n + 1)?.pop().expect("nonempty prefix")),
        }
    }
}

fn running_sums(values: impl IntoIterator<Item = Scalar>) -> Vec<Scalar> {
    let mut acc = Scalar::zero();
    values
        .into_iter()
        .map(|v| {
            acc = &acc + &v;
            acc.clone()
        })
        .collect()
}

/// Sequence of partial sums of a series given by its terms.
pub fn partial_sums_of_series(terms: SequenceSpec) -> SequenceSpec {
    SequenceSpec {
        source: SequenceSource::PartialSums(Box::new(terms)),
        declared_limit: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitKind {
    Converged { limit: f64, residual: f64 },
    Undecided,
}

/// Outcome of the window/epsilon heuristic. Never a proof of convergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitVerdict {
    pub kind: LimitKind,
    pub horizon: usize,
    pub epsilon: f64,
    pub window: usize,
}

impl LimitVerdict {
    pub fn limit(&self) -> Option<f64> {
        match self.kind {
            LimitKind::Converged { limit, .. } => Some(limit),
            LimitKind::Undecided => None,
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self.kind, LimitKind::Converged { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitCriteria {
    pub epsilon: f64,
    pub window: usize,
}

impl Default for LimitCriteria {
    fn default() -> Self {
        LimitCriteria {
            epsilon: DEFAULT_EPSILON,
            window: DEFAULT_WINDOW,
        }
    }
}

impl LimitCriteria {
    pub fn new(epsilon: f64, window: usize) -> Result<Self, TransformError> {
        if window < 2 {
            return Err(TransformError::InvalidWindow(window));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(TransformError::InvalidEpsilon(epsilon));
        }
        Ok(LimitCriteria { epsilon, window })
    }
}

#[derive(Debug, Clone)]
pub struct TransformTrace {
    pub method_name: String,
    pub values: Vec<Scalar>,
    pub verdict: LimitVerdict,
}

/// `t_m` evaluated directly from the defining quotient.
pub fn norlund_mean(method: &Method, seq: &SequenceSpec, index: usize) -> Result<Scalar, TransformError> {
    let s = seq.prefix(index + 1)?;
    let p = method.coefficients(index)?;
    let weighted: Scalar = s
        .iter()
        .enumerate()
        .map(|(n, s_n)| &p[index - n] * s_n)
        .sum();
    let total = method.partial_sum(index)?;
    Ok(weighted / total)
}

/// All means `t_0..=t_M` by a fresh convolution per `m`.
///
/// Exact inputs are lifted onto common denominators so the convolution runs
/// in integers (machine-width when the operand sizes allow it); any float
/// input switches the whole trace to floats.
pub fn norlund_means(method: &Method, seq: &SequenceSpec, horizon: usize) -> Result<Vec<Scalar>, TransformError> {
    let p = method.coefficients(horizon)?;
    let s = seq.prefix(horizon + 1)?;
    match (common_denominator(&p), common_denominator(&s)) {
        (Some((a, _)), Some((b, seq_den))) => Ok(exact_means(&a, &b, &seq_den)),
        _ => Ok(float_means(&p, &s)),
    }
}

fn exact_means(a: &[BigInt], b: &[BigInt], seq_den: &BigInt) -> Vec<Scalar> {
    let bits = |v: &[BigInt]| v.iter().map(BigInt::bits).max().unwrap_or(0);
    let len_bits = u64::from(usize::BITS - a.len().leading_zeros());
    let narrow = bits(a) + bits(b) + len_bits < 126;

    let numerators: Vec<BigInt> = if narrow {
        let a: Vec<i128> = a.iter().map(|x| x.to_i128().expect("fits")).collect();
        let b: Vec<i128> = b.iter().map(|x| x.to_i128().expect("fits")).collect();
        (0..a.len())
            .map(|m| BigInt::from((0..=m).map(|n| a[m - n] * b[n]).sum::<i128>()))
            .collect()
    } else {
        (0..a.len())
            .map(|m| {
                (0..=m)
                    .filter(|&n| !a[m - n].is_zero() && !b[n].is_zero())
                    .fold(BigInt::zero(), |acc, n| acc + &a[m - n] * &b[n])
            })
            .collect()
    };

    let mut weight_sum = BigInt::zero();
    numerators
        .into_iter()
        .zip(a)
        .map(|(num, a_m)| {
            weight_sum += a_m;
            Scalar::Exact(BigRational::new(num, &weight_sum * seq_den))
        })
        .collect()
}

fn float_means(p: &[Scalar], s: &[Scalar]) -> Vec<Scalar> {
    let p: Vec<f64> = p.iter().map(Scalar::to_f64).collect();
    let s: Vec<f64> = s.iter().map(Scalar::to_f64).collect();
    let mut total = 0.0;
    (0..p.len())
        .map(|m| {
            total += p[m];
            let weighted: f64 = (0..=m).map(|n| p[m - n] * s[n]).sum();
            Scalar::float(weighted / total)
        })
        .collect()
}

/// Window/epsilon Cauchy check on the tail of a trace: converged when the last
/// `window` values lie within `epsilon` of each other, with the window mean as
/// the limit estimate.
pub fn detect_limit(values: &[Scalar], epsilon: f64, window: usize) -> Result<LimitVerdict, TransformError> {
    let criteria = LimitCriteria::new(epsilon, window)?;
    if values.is_empty() {
        return Err(TransformError::EmptyTrace);
    }
    let horizon = values.len() - 1;
    let undecided = LimitVerdict {
        kind: LimitKind::Undecided,
        horizon,
        epsilon,
        window,
    };
    if values.len() < criteria.window {
        return Ok(undecided);
    }
    let tail: Vec<f64> = values[values.len() - window..]
        .iter()
        .map(Scalar::to_f64)
        .collect();
    if tail.iter().any(|v| !v.is_finite()) {
        return Ok(undecided);
    }
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi - lo > epsilon {
        return Ok(undecided);
    }
    // Exact window means avoid float drift on constant traces.
    let limit = if values[values.len() - window..].iter().all(Scalar::is_exact) {
        let sum: Scalar = values[values.len() - window..].iter().sum();
        (sum / Scalar::from_int(window as i64)).to_f64()
    } else {
        tail.iter().sum::<f64>() / window as f64
    };
    let residual = tail.iter().map(|v| (v - limit).abs()).fold(0.0, f64::max);
    Ok(LimitVerdict {
        kind: LimitKind::Converged { limit, residual },
        horizon,
        epsilon,
        window,
    })
}

/// `t_0..=t_M` plus a limit verdict.
pub fn transform_prefix(
    method: &Method,
    seq: &SequenceSpec,
    horizon: usize,
    criteria: LimitCriteria,
) -> Result<TransformTrace, TransformError> {
    let values = norlund_means(method, seq, horizon)?;
    let verdict = detect_limit(&values, criteria.epsilon, criteria.window)?;
    Ok(TransformTrace {
        method_name: method.name().to_string(),
        values,
        verdict,
    })
}

/// `(N, p)`-summability of the series with the given terms.
pub fn summability_verdict(
    method: &Method,
    series_terms: SequenceSpec,
    horizon: usize,
    epsilon: f64,
    window: usize,
) -> Result<TransformTrace, TransformError> {
    let criteria = LimitCriteria::new(epsilon, window)?;
    transform_prefix(method, &partial_sums_of_series(series_terms), horizon, criteria)
}
