//! Nörlund weight sequences.
//!
//! A [`Method`] wraps a coefficient generator `n ↦ p_n` together with a
//! memoized prefix of coefficients and partial sums `P_n`, plus declared
//! finiteness metadata. Finiteness is never inferred from data: the family
//! constructors set it from closed-form knowledge and user generators must
//! declare it.

use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use thiserror::Error;

use crate::numerics::Scalar;

/// Default bound on the number of cached coefficients per method.
pub const DEFAULT_CACHE_CAP: usize = 1 << 20;

pub type CoeffFn = dyn Fn(usize) -> Scalar + Send + Sync;
pub type TailBoundFn = dyn Fn(usize) -> Option<Scalar> + Send + Sync;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MethodError {
    #[error("method {name}: leading weight p_0 = {value} must be positive")]
    NonPositiveLeading { name: String, value: String },
    #[error("method {name}: negative weight p_{index} = {value}")]
    NegativeCoefficient {
        name: String,
        index: usize,
        value: String,
    },
    #[error("method {name} is poisoned by a negative weight at index {index}")]
    Poisoned { name: String, index: usize },
    #[error("method {name}: coefficient cache cap {cap} exceeded at index {index}")]
    CacheCapExceeded {
        name: String,
        index: usize,
        cap: usize,
    },
    #[error("invalid parameter for {family}: {reason}")]
    InvalidParameter { family: &'static str, reason: String },
    #[error("method {name}: metadata violated: {reason}")]
    MetadataViolation { name: String, reason: String },
}

/// Whether `Σ p_n` is declared convergent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Finiteness {
    Finite,
    Infinite,
    Unknown,
}

#[derive(Clone)]
pub struct FinitenessInfo {
    pub finiteness: Finiteness,
    /// The value `P = Σ p_n` when known in closed form.
    pub total: Option<Scalar>,
    /// `n ↦` an upper bound on `Σ_{m>n} p_m`, when one is available at `n`.
    pub tail_bound: Option<Arc<TailBoundFn>>,
    pub eventually_zero_after: Option<usize>,
}

impl FinitenessInfo {
    pub fn unknown() -> Self {
        FinitenessInfo {
            finiteness: Finiteness::Unknown,
            total: None,
            tail_bound: None,
            eventually_zero_after: None,
        }
    }

    pub fn infinite() -> Self {
        FinitenessInfo {
            finiteness: Finiteness::Infinite,
            ..Self::unknown()
        }
    }

    pub fn finite() -> Self {
        FinitenessInfo {
            finiteness: Finiteness::Finite,
            ..Self::unknown()
        }
    }

    pub fn with_total(mut self, total: Scalar) -> Self {
        self.total = Some(total);
        self
    }

    pub fn with_tail_bound<F>(mut self, f: F) -> Self
    where
        F: Fn(usize) -> Option<Scalar> + Send + Sync + 'static,
    {
        self.tail_bound = Some(Arc::new(f));
        self
    }

    pub fn with_eventually_zero_after(mut self, n: usize) -> Self {
        self.eventually_zero_after = Some(n);
        self
    }

    pub fn tail_bound_at(&self, n: usize) -> Option<Scalar> {
        self.tail_bound.as_ref().and_then(|f| f(n))
    }
}

impl fmt::Debug for FinitenessInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FinitenessInfo")
            .field("finiteness", &self.finiteness)
            .field("total", &self.total)
            .field("tail_bound", &self.tail_bound.as_ref().map(|_| "<fn>"))
            .field("eventually_zero_after", &self.eventually_zero_after)
            .finish()
    }
}

/// The family a method was built from. Comparison verdicts consult this to
/// apply closed-form facts about reciprocals.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Unit,
    Cesaro { order: u32 },
    Geometric { ratio: Scalar },
    Poisson { rate: Scalar },
    NegBinomial { ratio: Scalar, order: u32 },
    Zeta { exponent: Scalar },
    /// Finitely many weights; the Hutton method is the two-term case.
    Polynomial { coeffs: Vec<Scalar> },
    Custom,
}

#[derive(Default)]
struct PrefixCache {
    coeffs: Vec<Scalar>,
    partials: Vec<Scalar>,
    poisoned: Option<usize>,
}

struct Inner {
    name: String,
    family: Family,
    coeff: Box<CoeffFn>,
    meta: FinitenessInfo,
    cap: usize,
    cache: Mutex<PrefixCache>,
}

/// A Nörlund method `(N, p)`. Cloning shares the coefficient cache.
#[derive(Clone)]
pub struct Method {
    inner: Arc<Inner>,
}

impl fmt::Debug for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Method")
            .field("name", &self.inner.name)
            .field("family", &self.inner.family)
            .field("meta", &self.inner.meta)
            .finish()
    }
}

/// Builds a method from a generator; `p_0 > 0` is checked immediately,
/// nonnegativity of later weights as they are materialized.
pub fn make_method<F>(
    name: impl Into<String>,
    coeff: F,
    meta: FinitenessInfo,
) -> Result<Method, MethodError>
where
    F: Fn(usize) -> Scalar + Send + Sync + 'static,
{
    Method::build(name.into(), Family::Custom, Box::new(coeff), meta)
}

impl Method {
    fn build(
        name: String,
        family: Family,
        coeff: Box<CoeffFn>,
        meta: FinitenessInfo,
    ) -> Result<Method, MethodError> {
        let method = Method {
            inner: Arc::new(Inner {
                name,
                family,
                coeff,
                meta,
                cap: DEFAULT_CACHE_CAP,
                cache: Mutex::new(PrefixCache::default()),
            }),
        };
        let p0 = method.coefficient(0).map_err(|err| match err {
            MethodError::NegativeCoefficient { name, value, .. } => {
                MethodError::NonPositiveLeading { name, value }
            }
            other => other,
        })?;
        if !p0.is_positive() {
            return Err(MethodError::NonPositiveLeading {
                name: method.inner.name.clone(),
                value: p0.to_string(),
            });
        }
        method.audit_metadata(&[1, 2, 3, 5, 8, 13, 32])?;
        Ok(method)
    }

    /// Same method with a different cache cap; the cache starts empty.
    pub fn with_cache_cap(&self, cap: usize) -> Method {
        let this = self.clone();
        let coeff = move |n: usize| (this.inner.coeff)(n);
        Method {
            inner: Arc::new(Inner {
                name: self.inner.name.clone(),
                family: self.inner.family.clone(),
                coeff: Box::new(coeff),
                meta: self.inner.meta.clone(),
                cap,
                cache: Mutex::new(PrefixCache::default()),
            }),
        }
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    pub fn family(&self) -> &Family {
        &self.inner.family
    }

    pub fn meta(&self) -> &FinitenessInfo {
        &self.inner.meta
    }

    pub fn finiteness(&self) -> Finiteness {
        self.inner.meta.finiteness
    }

    pub fn is_declared_finite(&self) -> bool {
        self.inner.meta.finiteness == Finiteness::Finite
    }

    /// Degree of the weight polynomial, when the weights vanish eventually.
    pub fn polynomial_degree(&self) -> Option<usize> {
        self.inner.meta.eventually_zero_after
    }

    fn fill_to(&self, n: usize) -> Result<(), MethodError> {
        let inner = &*self.inner;
        if n >= inner.cap {
            return Err(MethodError::CacheCapExceeded {
                name: inner.name.clone(),
                index: n,
                cap: inner.cap,
            });
        }
        let mut cache = inner.cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(index) = cache.poisoned {
            if n >= index {
                return Err(MethodError::Poisoned {
                    name: inner.name.clone(),
                    index,
                });
            }
        }
        while cache.coeffs.len() <= n {
            let idx = cache.coeffs.len();
            let value = (inner.coeff)(idx);
            if value.is_negative() {
                cache.poisoned = Some(idx);
                return Err(MethodError::NegativeCoefficient {
                    name: inner.name.clone(),
                    index: idx,
                    value: value.to_string(),
                });
            }
            let partial = match cache.partials.last() {
                Some(prev) => prev + &value,
                None => value.clone(),
            };
            cache.coeffs.push(value);
            cache.partials.push(partial);
        }
        Ok(())
    }

    /// `p_n`.
    pub fn coefficient(&self, n: usize) -> Result<Scalar, MethodError> {
        self.fill_to(n)?;
        let cache = self.inner.cache.lock().unwrap_or_else(|e| e.into_inner());
        Ok(cache.coeffs[n].clone())
    }

    /// `P_n = p_0 + ⋯ + p_n`.
    pub fn partial_sum(&self, n: usize) -> Result<Scalar, MethodError> {
        self.fill_to(n)?;
        let cache = self.inner.cache.lock().unwrap_or_else(|e| e.into_inner());
        Ok(cache.partials[n].clone())
    }

    /// `p_0..=p_n`.
    pub fn coefficients(&self, n: usize) -> Result<Vec<Scalar>, MethodError> {
        self.fill_to(n)?;
        let cache = self.inner.cache.lock().unwrap_or_else(|e| e.into_inner());
        Ok(cache.coeffs[..=n].to_vec())
    }

    /// `P_0..=P_n`.
    pub fn partial_sums(&self, n: usize) -> Result<Vec<Scalar>, MethodError> {
        self.fill_to(n)?;
        let cache = self.inner.cache.lock().unwrap_or_else(|e| e.into_inner());
        Ok(cache.partials[..=n].to_vec())
    }

    /// `Σ_{n=0}^{N} p_n x^n`.
    pub fn truncated_series_eval(&self, x: &Scalar, degree: usize) -> Result<Scalar, MethodError> {
        let coeffs = self.coefficients(degree)?;
        // Horner, highest power first.
        Ok(coeffs
            .iter()
            .rev()
            .fold(Scalar::zero(), |acc, c| acc * x + c))
    }

    /// Checks the declared metadata at the given indices: zero weights past
    /// `eventually_zero_after`, and `0 ≤ total − P_n ≤ tail_bound(n)`.
    pub fn audit_metadata(&self, indices: &[usize]) -> Result<(), MethodError> {
        let meta = &self.inner.meta;
        let violation = |reason: String| MethodError::MetadataViolation {
            name: self.inner.name.clone(),
            reason,
        };
        for &n in indices {
            if let Some(last) = meta.eventually_zero_after {
                let probe = last + 1 + n;
                let value = self.coefficient(probe)?;
                if !value.is_zero() {
                    return Err(violation(format!(
                        "p_{probe} = {value} but weights vanish after index {last}"
                    )));
                }
            }
            if let (Some(total), Some(bound)) = (&meta.total, meta.tail_bound_at(n)) {
                let gap = total - &self.partial_sum(n)?;
                // Float totals get a small relative slack.
                let slack = if gap.is_exact() && bound.is_exact() {
                    Scalar::zero()
                } else {
                    Scalar::float(1e-12 * total.to_f64().abs().max(1.0))
                };
                let lower_ok = (&gap + &slack).cmp_value(&Scalar::zero())
                    != Some(std::cmp::Ordering::Less);
                let upper_ok = gap.cmp_value(&(&bound + &slack))
                    != Some(std::cmp::Ordering::Greater);
                if !(lower_ok && upper_ok) {
                    return Err(violation(format!(
                        "total − P_{n} = {gap} is outside [0, {bound}]"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn require_positive(family: &'static str, name: &str, value: &Scalar) -> Result<(), MethodError> {
    if value.is_positive() {
        Ok(())
    } else {
        Err(MethodError::InvalidParameter {
            family,
            reason: format!("{name} = {value} must be positive"),
        })
    }
}

fn require_order(family: &'static str, order: u32) -> Result<(), MethodError> {
    if order >= 1 {
        Ok(())
    } else {
        Err(MethodError::InvalidParameter {
            family,
            reason: "order must be a positive integer".into(),
        })
    }
}

/// `C(n, k)` as an exact scalar.
pub(crate) fn binomial(n: u64, k: u64) -> Scalar {
    if k > n {
        return Scalar::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::from(1u32);
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Scalar::from_bigint(acc)
}

fn is_less_than_one(x: &Scalar) -> bool {
    x.cmp_value(&Scalar::one()) == Some(std::cmp::Ordering::Less)
}

/// `(N, u)`: `u_0 = 1`, all later weights zero. Ordinary convergence.
pub fn unit() -> Method {
    let meta = FinitenessInfo::finite()
        .with_total(Scalar::one())
        .with_tail_bound(|_| Some(Scalar::zero()))
        .with_eventually_zero_after(0);
    Method::build(
        "unit".into(),
        Family::Unit,
        Box::new(|n| if n == 0 { Scalar::one() } else { Scalar::zero() }),
        meta,
    )
    .expect("unit method is valid")
}

/// Cesàro `(C, k)` as a Nörlund method: `p_n = C(n+k−1, k−1)`.
pub fn cesaro(order: u32) -> Result<Method, MethodError> {
    require_order("cesaro", order)?;
    let k = u64::from(order);
    Method::build(
        format!("cesaro({order})"),
        Family::Cesaro { order },
        Box::new(move |n| binomial(n as u64 + k - 1, k - 1)),
        FinitenessInfo::infinite(),
    )
}

/// `p_n = p^n`; finite exactly when `p < 1`.
pub fn geometric(ratio: Scalar) -> Result<Method, MethodError> {
    require_positive("geometric", "p", &ratio)?;
    let meta = if is_less_than_one(&ratio) {
        let one_minus = Scalar::one() - &ratio;
        let total = one_minus.recip().expect("p < 1");
        let r = ratio.clone();
        FinitenessInfo::finite()
            .with_total(total)
            .with_tail_bound(move |n| {
                let power = r.powi(i32::try_from(n + 1).ok()?).ok()?;
                power.checked_div(&one_minus).ok()
            })
    } else {
        FinitenessInfo::infinite()
    };
    let r = ratio.clone();
    Method::build(
        format!("geometric({ratio})"),
        Family::Geometric { ratio },
        Box::new(move |n| power_or_float(&r, n)),
        meta,
    )
}

/// `x^n`, falling back to float when the exponent does not fit an `i32`.
fn power_or_float(x: &Scalar, n: usize) -> Scalar {
    match i32::try_from(n) {
        Ok(e) => x.powi(e).expect("positive base"),
        Err(_) => Scalar::float(x.to_f64().powf(n as f64)),
    }
}

/// `p_n = p^n / n!`; always finite, with total `e^p` (not rational, so left
/// unset) and a ratio-test tail bound.
pub fn poisson(rate: Scalar) -> Result<Method, MethodError> {
    require_positive("poisson", "p", &rate)?;
    let tail_rate = rate.clone();
    let meta = FinitenessInfo::finite().with_tail_bound(move |n| poisson_tail_bound(&tail_rate, n));
    let r = rate.clone();
    Method::build(
        format!("poisson({rate})"),
        Family::Poisson { rate },
        Box::new(move |n| {
            let mut term = Scalar::one();
            for i in 1..=n {
                term = term * &r / Scalar::from_int(i as i64);
            }
            term
        }),
        meta,
    )
}

/// `Σ_{m>n} p^m/m! ≤ p^{n+1}/(n+1)! · 1/(1 − p/(n+2))`, valid once `n + 2 > p`.
pub(crate) fn poisson_tail_bound(rate: &Scalar, n: usize) -> Option<Scalar> {
    let next = Scalar::from_int(n as i64 + 2);
    let q = rate.checked_div(&next).ok()?;
    if !is_less_than_one(&q) {
        return None;
    }
    let mut term = Scalar::one();
    for i in 1..=(n + 1) {
        term = term * rate / Scalar::from_int(i as i64);
    }
    term.checked_div(&(Scalar::one() - q)).ok()
}

/// `p_n = C(n+k−1, k−1) p^n`, the coefficients of `(1 − px)^{−k}`.
pub fn neg_binomial(ratio: Scalar, order: u32) -> Result<Method, MethodError> {
    require_positive("neg_binomial", "p", &ratio)?;
    require_order("neg_binomial", order)?;
    let k = u64::from(order);
    let meta = if is_less_than_one(&ratio) {
        let one_minus = Scalar::one() - &ratio;
        let total = one_minus
            .powi(-(order as i32))
            .expect("1 − p is nonzero");
        let r = ratio.clone();
        FinitenessInfo::finite()
            .with_total(total)
            .with_tail_bound(move |n| {
                // Weight ratios (m+k)/(m+1)·p decrease in m, so the tail past
                // n is dominated by a geometric series once the ratio is < 1.
                let first = binomial(n as u64 + k, k - 1) * power_or_float(&r, n + 1);
                let rho = Scalar::from_int((n as i64) + 1 + k as i64)
                    .checked_div(&Scalar::from_int(n as i64 + 2))
                    .ok()?
                    * &r;
                if !is_less_than_one(&rho) {
                    return None;
                }
                first.checked_div(&(Scalar::one() - rho)).ok()
            })
    } else {
        FinitenessInfo::infinite()
    };
    let r = ratio.clone();
    Method::build(
        format!("neg_binomial({ratio},{order})"),
        Family::NegBinomial { ratio, order },
        Box::new(move |n| binomial(n as u64 + k - 1, k - 1) * power_or_float(&r, n)),
        meta,
    )
}

/// `p_n = (n+1)^{−s}`. Integer `s` stays exact; anything else uses floats.
/// Finite exactly when `s > 1`.
pub fn zeta(exponent: Scalar) -> Result<Method, MethodError> {
    let exact_exp = exponent
        .to_i64()
        .and_then(|s| i32::try_from(s).ok());
    let s_float = exponent.to_f64();
    if !s_float.is_finite() {
        return Err(MethodError::InvalidParameter {
            family: "zeta",
            reason: format!("s = {exponent} must be finite"),
        });
    }
    let coeff: Box<CoeffFn> = match exact_exp {
        Some(s) => Box::new(move |n| {
            Scalar::from_int(n as i64 + 1)
                .powi(-s)
                .expect("n + 1 is nonzero")
        }),
        None => Box::new(move |n| Scalar::float(((n + 1) as f64).powf(-s_float))),
    };
    let meta = if s_float > 1.0 {
        // Σ_{m>n} (m+1)^{−s} ≤ ∫_{n+1}^∞ x^{−s} dx = (n+1)^{1−s}/(s−1).
        let tail = move |n: usize| -> Option<Scalar> {
            match exact_exp {
                Some(s) => Scalar::from_int(n as i64 + 1)
                    .powi(1 - s)
                    .ok()?
                    .checked_div(&Scalar::from_int(i64::from(s) - 1))
                    .ok(),
                None => Some(Scalar::float(
                    ((n + 1) as f64).powf(1.0 - s_float) / (s_float - 1.0),
                )),
            }
        };
        FinitenessInfo::finite().with_tail_bound(tail)
    } else {
        FinitenessInfo::infinite()
    };
    Method::build(
        format!("zeta({exponent})"),
        Family::Zeta { exponent },
        coeff,
        meta,
    )
}

/// Finitely many weights `p_0, …, p_d`; zero afterwards.
pub fn polynomial(coeffs: Vec<Scalar>) -> Result<Method, MethodError> {
    let name = format!(
        "polynomial([{}])",
        coeffs
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    polynomial_named(name, coeffs)
}

fn polynomial_named(name: String, mut coeffs: Vec<Scalar>) -> Result<Method, MethodError> {
    if coeffs.is_empty() {
        return Err(MethodError::InvalidParameter {
            family: "polynomial",
            reason: "coefficient list is empty".into(),
        });
    }
    if let Some((i, c)) = coeffs.iter().enumerate().skip(1).find(|(_, c)| c.is_negative()) {
        return Err(MethodError::InvalidParameter {
            family: "polynomial",
            reason: format!("p_{i} = {c} must be nonnegative"),
        });
    }
    while coeffs.len() > 1 && coeffs.last().is_some_and(Scalar::is_zero) {
        coeffs.pop();
    }
    let degree = coeffs.len() - 1;
    let total: Scalar = coeffs.iter().sum();
    let tail_coeffs = coeffs.clone();
    let meta = FinitenessInfo::finite()
        .with_total(total)
        .with_tail_bound(move |n| Some(tail_coeffs.iter().skip(n + 1).sum()))
        .with_eventually_zero_after(degree);
    let table = coeffs.clone();
    Method::build(
        name,
        Family::Polynomial { coeffs },
        Box::new(move |n| table.get(n).cloned().unwrap_or_else(Scalar::zero)),
        meta,
    )
}

/// Hutton's method `(Hu, 1)` for `p = 1`: weights `(1, p)`.
pub fn hutton(p: Scalar) -> Result<Method, MethodError> {
    require_positive("hutton", "p", &p)?;
    polynomial_named(format!("hutton({p})"), vec![Scalar::one(), p])
}

impl Method {
    /// Uniformly rescaled weights `c·p_n`; `c` must be positive.
    pub fn scaled(&self, factor: Scalar) -> Result<Method, MethodError> {
        require_positive("scaled", "factor", &factor)?;
        let base = self.clone();
        let meta = self.meta();
        let mut scaled_meta = FinitenessInfo {
            finiteness: meta.finiteness,
            total: meta.total.as_ref().map(|t| t * &factor),
            tail_bound: None,
            eventually_zero_after: meta.eventually_zero_after,
        };
        if meta.tail_bound.is_some() {
            let base_meta = meta.clone();
            let f = factor.clone();
            scaled_meta = scaled_meta.with_tail_bound(move |n| base_meta.tail_bound_at(n).map(|b| b * &f));
        }
        let family = match self.family() {
            Family::Polynomial { coeffs } => Family::Polynomial {
                coeffs: coeffs.iter().map(|c| c * &factor).collect(),
            },
            _ => Family::Custom,
        };
        let f = factor.clone();
        Method::build(
            format!("{}·{}", factor, self.name()),
            family,
            Box::new(move |n| {
                base.coefficient(n)
                    .map(|c| c * &f)
                    // Negative values poison the scaled method at the same index.
                    .unwrap_or_else(|_| Scalar::from_int(-1))
            }),
            scaled_meta,
        )
    }
}
