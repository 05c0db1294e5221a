//! Comparison calculus for pairs of Nörlund methods.
//!
//! For methods `p` and `q` the comparison coefficients `k_n` solve
//! `q_n = k_0 p_n + ⋯ + k_n p_0`, i.e. `k(x) = q(x)/p(x)`. The bracket
//! `[q:p] = Σ |k_n|` decides inclusion between finite methods: `(N, p)` is
//! included in `(N, q)` exactly when `[q:p] < ∞`, and the two are equivalent
//! when both brackets are finite.
//!
//! Finiteness of `Σ |k_n|` cannot be read off finitely many terms, so a
//! bracket is only *certified* from exact algebraic facts: an eventually-zero
//! quotient backed by polynomial division, a closed-form reciprocal for one of
//! the built-in families, the Kaluza–Szegő sign pattern, or the
//! Eneström–Kakeya annulus. Everything else is reported as numeric evidence.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::methods::{binomial, poisson_tail_bound, unit, Family, Method, MethodError};
use crate::numerics::{common_denominator, format_float, Scalar};

pub const DEFAULT_CMP_HORIZON: usize = 256;
/// Default cap on the summed denominator bit lengths of one comparison table.
pub const DEFAULT_DENOMINATOR_BITS: u64 = 1_000_000;

/// Threshold on `p_N/P_N` below which a decreasing tail counts as evidence of
/// regularity.
pub const REGULARITY_RATIO_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComparisonError {
    #[error(transparent)]
    Method(#[from] MethodError),
    #[error("denominator budget exhausted: {used} bits used, limit {limit}")]
    BudgetExhausted { used: u64, limit: u64 },
    #[error("{criterion} requires finite methods; {method} is not declared finite")]
    RequiresFinite {
        criterion: &'static str,
        method: String,
    },
    #[error("{check} is inapplicable to {method}: {reason}")]
    Inapplicable {
        check: &'static str,
        method: String,
        reason: String,
    },
    #[error("horizon must be at least {min}, got {got}")]
    InvalidHorizon { min: usize, got: usize },
}

/// Resource limit on exact rational growth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_denominator_bits: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_denominator_bits: DEFAULT_DENOMINATOR_BITS,
        }
    }
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget {
            max_denominator_bits: u64::MAX,
        }
    }
}

/// Comparison coefficients `k_0..=k_N` of `q` relative to `p`, with running
/// absolute sums `A_n = |k_0| + ⋯ + |k_n|`.
#[derive(Debug, Clone)]
pub struct ComparisonTable {
    pub p_name: String,
    pub q_name: String,
    pub k: Vec<Scalar>,
    pub abs_partial: Vec<Scalar>,
    pub horizon: usize,
}

impl ComparisonTable {
    /// `A_N`.
    pub fn abs_sum(&self) -> &Scalar {
        self.abs_partial.last().expect("table has at least one entry")
    }

    /// Largest `n` with `k_n ≠ 0`, if any.
    pub fn last_nonzero(&self) -> Option<usize> {
        self.k.iter().rposition(|k| !k.is_zero())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CertificateKind {
    /// `k_n = 0` for every `n > after`.
    EventuallyZero { after: usize },
    ClosedFormReciprocal(String),
    KaluzaSzego,
    EnestromKakeyaAnnulus { rho_min: Scalar },
    /// `|k_n| ≥ delta` along a closed-form pattern, so `Σ |k_n|` diverges.
    TermTestFailure { delta: f64, witness: Vec<usize> },
}

impl fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertificateKind::EventuallyZero { after } => write!(f, "eventually-zero(after={after})"),
            CertificateKind::ClosedFormReciprocal(d) => write!(f, "closed-form({d})"),
            CertificateKind::KaluzaSzego => f.write_str("kaluza-szego"),
            CertificateKind::EnestromKakeyaAnnulus { rho_min } => {
                write!(f, "enestrom-kakeya(rho_min={rho_min})")
            }
            CertificateKind::TermTestFailure { delta, witness } => {
                let w: Vec<String> = witness.iter().map(usize::to_string).collect();
                write!(f, "term-test(delta={},witness={})", format_float(*delta), w.join(" "))
            }
        }
    }
}

/// A certified bracket value: exact, or an upper bound.
#[derive(Debug, Clone, PartialEq)]
pub enum BracketValue {
    Exact(Scalar),
    UpperBound(Scalar),
}

impl BracketValue {
    pub fn scalar(&self) -> &Scalar {
        match self {
            BracketValue::Exact(v) | BracketValue::UpperBound(v) => v,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, BracketValue::Exact(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BracketKind {
    CertifiedFinite {
        value: BracketValue,
        certificate: CertificateKind,
    },
    CertifiedInfinite {
        certificate: CertificateKind,
    },
    /// No certificate; `last_a` is `A_N` at the horizon.
    NumericEvidence { last_a: f64, growth_note: String },
}

#[derive(Debug, Clone)]
pub struct BracketVerdict {
    pub kind: BracketKind,
    pub horizon: usize,
    pub table: ComparisonTable,
}

impl BracketVerdict {
    pub fn is_certified_finite(&self) -> bool {
        matches!(self.kind, BracketKind::CertifiedFinite { .. })
    }

    pub fn is_certified_infinite(&self) -> bool {
        matches!(self.kind, BracketKind::CertifiedInfinite { .. })
    }

    pub fn value(&self) -> Option<&BracketValue> {
        match &self.kind {
            BracketKind::CertifiedFinite { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn certificate(&self) -> Option<&CertificateKind> {
        match &self.kind {
            BracketKind::CertifiedFinite { certificate, .. }
            | BracketKind::CertifiedInfinite { certificate } => Some(certificate),
            BracketKind::NumericEvidence { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Includes,
    NotIncludes,
    Inconclusive,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Includes => "includes",
            Relation::NotIncludes => "not-includes",
            Relation::Inconclusive => "inconclusive",
        })
    }
}

/// Observed constants of the Riesz inclusion conditions over a horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszWitness {
    /// `max_n (|k_0| P_n + ⋯ + |k_n| P_0) / Q_n`.
    pub h: f64,
    /// `max_n P_n / Q_n`.
    pub j: f64,
    /// `k_N / Q_N`.
    pub k_over_q_last: f64,
    /// Whether the running maximum of the condition-(i) ratio stopped growing
    /// over the second half of the horizon.
    pub h_stable: bool,
}

#[derive(Debug, Clone)]
pub enum InclusionBasis {
    /// Both methods finite: inclusion holds iff `[q:p] < ∞`.
    FiniteBracket(BracketVerdict),
    /// Otherwise only finite-horizon checks of the Riesz conditions, which can
    /// refute a particular `H` but never establish condition (i) for all `n`.
    RieszFiniteHorizon {
        h_witness: f64,
        cond1_ok: bool,
        cond2_trend: f64,
    },
}

/// Verdict on whether `(N, q)` includes `(N, p)`.
#[derive(Debug, Clone)]
pub struct InclusionVerdict {
    pub p_name: String,
    pub q_name: String,
    pub relation: Relation,
    pub basis: InclusionBasis,
    pub witness: RieszWitness,
    pub notes: String,
}

#[derive(Debug, Clone)]
pub struct EquivalenceVerdict {
    /// `(N, p) ⇝ (N, q)`.
    pub forward: InclusionVerdict,
    /// `(N, q) ⇝ (N, p)`.
    pub backward: InclusionVerdict,
    pub equivalent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegularityVerdict {
    RegularCertified,
    RegularEvidence { last_ratio: f64 },
    NotRegularEvidence { last_ratio: f64 },
}

impl fmt::Display for RegularityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegularityVerdict::RegularCertified => "regular-certified",
            RegularityVerdict::RegularEvidence { .. } => "regular-evidence",
            RegularityVerdict::NotRegularEvidence { .. } => "not-regular-evidence",
        })
    }
}

#[derive(Debug, Clone)]
pub struct KaluzaSzegoReport {
    /// `p_{n+1} p_{n−1} ≥ p_n²` for `1 ≤ n ≤ N`.
    pub hypothesis_ok: bool,
    pub first_violation: Option<usize>,
    /// `k_0 = 1` and `k_n ≤ 0` for `1 ≤ n ≤ N`, for the normalized method.
    pub k_sign_ok: bool,
    /// `Σ_{0<n≤N} k_n ≥ −1`.
    pub tail_sum_ok: bool,
    pub tail_sum: Scalar,
    /// `A_N` for the normalized method.
    pub u_bracket_bound: f64,
    pub within_two: bool,
}

#[derive(Debug, Clone)]
pub struct EnestromKakeyaReport {
    pub applies: bool,
    /// `min_i p_i/p_{i+1}`; `None` for a constant.
    pub rho_min: Option<Scalar>,
    pub trivial_certified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RatioDominanceReport {
    /// Smallest `n₀` with `p_{n+1}/p_n ≤ q_{n+1}/q_n` for all `n₀ ≤ n ≤ N`.
    pub holds_from: Option<usize>,
    pub horizon: usize,
}

/// `k = q/p` as power series, truncated at `horizon`. Stops with
/// [`ComparisonError::BudgetExhausted`] when the summed denominator bit
/// lengths exceed the budget.
pub fn series_quotient(
    q: &[Scalar],
    p: &[Scalar],
    budget: &Budget,
) -> Result<Vec<Scalar>, ComparisonError> {
    let len = q.len().min(p.len());
    let lifted: Vec<Scalar> = p[..len].iter().chain(&q[..len]).cloned().collect();
    match common_denominator(&lifted) {
        Some((ints, _)) => exact_quotient(&ints[len..], &ints[..len], budget),
        None => {
            let p: Vec<f64> = p[..len].iter().map(Scalar::to_f64).collect();
            let mut k: Vec<f64> = Vec::with_capacity(len);
            for (n, q_n) in q[..len].iter().enumerate() {
                let acc: f64 = (1..=n).map(|j| k[n - j] * p[j]).sum();
                k.push((q_n.to_f64() - acc) / p[0]);
            }
            Ok(k.into_iter().map(Scalar::float).collect())
        }
    }
}

/// `c(x)/a(x)` for integer coefficient vectors. The numerators of `k_0..k_{n-1}`
/// are kept over their common denominator `L`, so each step is an integer
/// dot product followed by a single reduction.
fn exact_quotient(c: &[BigInt], a: &[BigInt], budget: &Budget) -> Result<Vec<Scalar>, ComparisonError> {
    let len = c.len();
    let nonzero: Vec<usize> = (1..len).filter(|&j| !a[j].is_zero()).collect();
    let mut scaled: Vec<BigInt> = Vec::with_capacity(len);
    let mut lcm = BigInt::one();
    let mut k = Vec::with_capacity(len);
    let mut used = 0u64;
    for n in 0..len {
        let mut acc = BigInt::zero();
        for &j in nonzero.iter().take_while(|&&j| j <= n) {
            let s = &scaled[n - j];
            if !s.is_zero() {
                acc += s * &a[j];
            }
        }
        let k_n = BigRational::new(&c[n] * &lcm - acc, &a[0] * &lcm);
        used = used.saturating_add(k_n.denom().bits());
        if used > budget.max_denominator_bits {
            return Err(ComparisonError::BudgetExhausted {
                used,
                limit: budget.max_denominator_bits,
            });
        }
        let factor = k_n.denom() / lcm.gcd(k_n.denom());
        if !factor.is_one() {
            lcm *= &factor;
            for s in scaled.iter_mut() {
                *s *= &factor;
            }
        }
        scaled.push(k_n.numer() * (&lcm / k_n.denom()));
        k.push(Scalar::Exact(k_n));
    }
    Ok(k)
}

/// Truncated product `(a * b)_n` for `n ≤ len − 1`.
pub fn convolve(a: &[Scalar], b: &[Scalar], len: usize) -> Vec<Scalar> {
    (0..len)
        .map(|n| {
            (0..=n)
                .filter(|&i| i < a.len() && n - i < b.len())
                .map(|i| &a[i] * &b[n - i])
                .sum()
        })
        .collect()
}

fn running_abs(k: &[Scalar]) -> Vec<Scalar> {
    let mut acc = Scalar::zero();
    k.iter()
        .map(|v| {
            acc = &acc + &v.abs();
            acc.clone()
        })
        .collect()
}

fn require_horizon(horizon: usize, min: usize) -> Result<(), ComparisonError> {
    if horizon < min {
        Err(ComparisonError::InvalidHorizon { min, got: horizon })
    } else {
        Ok(())
    }
}

/// Closed-form knowledge about `1/p(x)` for the built-in families.
enum Reciprocal {
    /// `1/p(x)` is a polynomial with these coefficients.
    Polynomial(Vec<Scalar>),
    /// `Σ |k_n|` is finite with the given value or bound.
    Summable { value: BracketValue, description: String },
    /// `|k_n| ≥ delta` for every `n`.
    NonSummable { delta: Scalar },
}

fn reciprocal_closed_form(p: &Method, horizon: usize) -> Option<Reciprocal> {
    match p.family() {
        Family::Unit => Some(Reciprocal::Polynomial(vec![Scalar::one()])),
        Family::Geometric { ratio } => Some(Reciprocal::Polynomial(vec![Scalar::one(), -ratio])),
        Family::NegBinomial { ratio, order } => Some(Reciprocal::Polynomial(binomial_row(*order, &(-ratio)))),
        Family::Cesaro { order } => Some(Reciprocal::Polynomial(binomial_row(*order, &Scalar::from_int(-1)))),
        Family::Poisson { rate } => {
            // |k_n| = rate^n/n! = p_n, so [u:p] = P = e^rate.
            let mut n = horizon;
            let tail = loop {
                if let Some(t) = poisson_tail_bound(rate, n) {
                    break t;
                }
                n += 1;
            };
            let partial = p.partial_sum(n).ok()?;
            Some(Reciprocal::Summable {
                value: BracketValue::UpperBound(partial + tail),
                description: format!("1/p(x) = exp(-{rate}x)"),
            })
        }
        Family::Polynomial { coeffs } => match coeffs.as_slice() {
            [a] => Some(Reciprocal::Polynomial(vec![a.recip().ok()?])),
            [a, b] => {
                // 1/(a + bx) = (1/a) Σ (−b/a)^n x^n.
                let description = format!("1/p(x) = 1/({a} + {b}x)");
                if b < a {
                    let value = (a - b).recip().ok()?;
                    Some(Reciprocal::Summable {
                        value: BracketValue::Exact(value),
                        description,
                    })
                } else {
                    Some(Reciprocal::NonSummable { delta: a.recip().ok()? })
                }
            }
            _ => None,
        },
        Family::Zeta { .. } | Family::Custom => None,
    }
}

/// `C(k, n) x^n` for `n = 0..=k`.
fn binomial_row(order: u32, x: &Scalar) -> Vec<Scalar> {
    (0..=order)
        .map(|n| binomial(u64::from(order), u64::from(n)) * x.powi(n as i32).expect("nonzero"))
        .collect()
}

/// Families whose weights are log-convex for every `n` (with power series
/// converging on the open unit disc).
fn is_log_convex_family(p: &Method) -> bool {
    match p.family() {
        Family::Zeta { exponent } => !exponent.is_negative(),
        Family::Geometric { .. } => true,
        Family::Cesaro { order } => *order == 1,
        _ => false,
    }
}

/// Families with `q_n ≥ 1` for every `n`.
fn weights_bounded_below_by_one(q: &Method) -> bool {
    let at_least_one = |x: &Scalar| x.cmp_value(&Scalar::one()) != Some(Ordering::Less);
    match q.family() {
        Family::Cesaro { .. } => true,
        Family::Geometric { ratio } | Family::NegBinomial { ratio, .. } => at_least_one(ratio),
        Family::Zeta { exponent } => !exponent.is_positive(),
        _ => false,
    }
}

/// Polynomial coefficients of a method with eventually-zero weights.
fn polynomial_coeffs(m: &Method) -> Result<Option<Vec<Scalar>>, ComparisonError> {
    match m.polynomial_degree() {
        Some(d) => Ok(Some(m.coefficients(d)?)),
        None => Ok(None),
    }
}

fn trim(mut v: Vec<Scalar>) -> Vec<Scalar> {
    while v.len() > 1 && v.last().is_some_and(Scalar::is_zero) {
        v.pop();
    }
    v
}

/// Long division of polynomials in ascending coefficient order; `None` if
/// either side holds a float.
pub fn poly_divrem(num: &[Scalar], den: &[Scalar]) -> Option<(Vec<Scalar>, Vec<Scalar>)> {
    if !num.iter().chain(den).all(Scalar::is_exact) {
        return None;
    }
    let den = trim(den.to_vec());
    let mut rem = trim(num.to_vec());
    let dd = den.len() - 1;
    let lead = den[dd].clone();
    if lead.is_zero() {
        return None;
    }
    if rem.len() <= dd {
        return Some((vec![Scalar::zero()], rem));
    }
    let mut quot = vec![Scalar::zero(); rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = &rem[i + dd] / &lead;
        if !c.is_zero() {
            for (j, d) in den.iter().enumerate() {
                rem[i + j] = &rem[i + j] - &(&c * d);
            }
        }
        quot[i] = c;
    }
    rem.truncate(dd.max(1));
    Some((trim(quot), trim(rem)))
}

fn growth_note(table: &ComparisonTable) -> String {
    let n = table.horizon;
    let quarter = (n / 4).max(1);
    let start = n.saturating_sub(quarter);
    let a_now = table.abs_sum().to_f64();
    let a_then = table.abs_partial[start].to_f64();
    let tail_max = table.k[start..]
        .iter()
        .map(|k| k.abs().to_f64())
        .fold(0.0, f64::max);
    format!(
        "A_{n} = {}; grew by {} over n in ({start}, {n}]; max |k_n| there = {}",
        format_float(a_now),
        format_float(a_now - a_then),
        format_float(tail_max)
    )
}

/// Computes comparison tables and verdicts under a denominator budget.
#[derive(Debug, Clone, Copy, Default)]
pub struct Comparator {
    pub budget: Budget,
}

impl Comparator {
    pub fn new(budget: Budget) -> Self {
        Comparator { budget }
    }

    /// `k_0..=k_N` for `q(x)/p(x)`.
    pub fn table(&self, q: &Method, p: &Method, horizon: usize) -> Result<ComparisonTable, ComparisonError> {
        let pc = p.coefficients(horizon)?;
        let qc = q.coefficients(horizon)?;
        let k = series_quotient(&qc, &pc, &self.budget)?;
        let abs_partial = running_abs(&k);
        Ok(ComparisonTable {
            p_name: p.name().to_string(),
            q_name: q.name().to_string(),
            k,
            abs_partial,
            horizon,
        })
    }

    /// `[q:p]` with a certificate when one is available.
    pub fn bracket(&self, q: &Method, p: &Method, horizon: usize) -> Result<BracketVerdict, ComparisonError> {
        require_horizon(horizon, 1)?;
        let table = self.table(q, p, horizon)?;
        let kind = self.classify(q, p, &table)?;
        Ok(BracketVerdict { kind, horizon, table })
    }

    fn classify(&self, q: &Method, p: &Method, table: &ComparisonTable) -> Result<BracketKind, ComparisonError> {
        let horizon = table.horizon;

        // Both polynomial: exact division decides whether k is eventually zero.
        if let (Some(qp), Some(pp)) = (polynomial_coeffs(q)?, polynomial_coeffs(p)?) {
            if let Some((quot, rem)) = poly_divrem(&qp, &pp) {
                if rem.iter().all(Scalar::is_zero) {
                    return Ok(eventually_zero(&quot, table));
                }
            }
        }

        if matches!(p.family(), Family::Unit) {
            if let Some(kind) = self.bracket_over_unit(q, table)? {
                return Ok(kind);
            }
        }

        if matches!(q.family(), Family::Unit) {
            if let Some(kind) = self.bracket_of_unit(p, table)? {
                return Ok(kind);
            }
        }

        // A polynomial over a method with polynomial reciprocal is a polynomial.
        if let (Some(qp), Some(Reciprocal::Polynomial(coeffs))) =
            (polynomial_coeffs(q)?, reciprocal_closed_form(p, horizon))
        {
            let product = trim(convolve(&qp, &coeffs, qp.len() + coeffs.len() - 1));
            return Ok(eventually_zero(&product, table));
        }

        // [q:p] ≤ [q:u]·[u:p], since k = q · (1/p) and ℓ¹ is submultiplicative.
        let u = unit();
        if !matches!(p.family(), Family::Unit) && !matches!(q.family(), Family::Unit) {
            let over_unit = self.bracket(q, &u, horizon)?;
            let of_unit = self.bracket(&u, p, horizon)?;
            if let (
                BracketKind::CertifiedFinite { value: a, .. },
                BracketKind::CertifiedFinite { value: b, certificate },
            ) = (&over_unit.kind, &of_unit.kind)
            {
                return Ok(BracketKind::CertifiedFinite {
                    value: BracketValue::UpperBound(a.scalar() * b.scalar()),
                    certificate: certificate.clone(),
                });
            }
        }

        Ok(BracketKind::NumericEvidence {
            last_a: table.abs_sum().to_f64(),
            growth_note: growth_note(table),
        })
    }

    /// `[q:u] = Σ q_n`, read from the declared metadata of `q`.
    fn bracket_over_unit(&self, q: &Method, table: &ComparisonTable) -> Result<Option<BracketKind>, ComparisonError> {
        let meta = q.meta();
        let horizon = table.horizon;
        let kind = match meta.finiteness {
            crate::methods::Finiteness::Finite => {
                let certificate = CertificateKind::ClosedFormReciprocal("k = q, [q:u] = Σ q_n".into());
                if let Some(total) = &meta.total {
                    BracketKind::CertifiedFinite {
                        value: BracketValue::Exact(total.clone()),
                        certificate,
                    }
                } else {
                    // Walk forward to the first index with an available tail bound.
                    let mut n = horizon;
                    let mut found = None;
                    while n <= horizon + 4096 {
                        if let Some(t) = meta.tail_bound_at(n) {
                            found = Some(q.partial_sum(n)? + t);
                            break;
                        }
                        n += 1;
                    }
                    match found {
                        Some(bound) => BracketKind::CertifiedFinite {
                            value: BracketValue::UpperBound(bound),
                            certificate,
                        },
                        None => return Ok(None),
                    }
                }
            }
            crate::methods::Finiteness::Infinite => {
                if weights_bounded_below_by_one(q) {
                    BracketKind::CertifiedInfinite {
                        certificate: CertificateKind::TermTestFailure {
                            delta: 1.0,
                            witness: vec![horizon - 1, horizon],
                        },
                    }
                } else {
                    BracketKind::CertifiedInfinite {
                        certificate: CertificateKind::ClosedFormReciprocal(
                            "k = q, Σ q_n diverges".into(),
                        ),
                    }
                }
            }
            crate::methods::Finiteness::Unknown => return Ok(None),
        };
        Ok(Some(kind))
    }

    /// `[u:p] = Σ |(1/p)_n|`.
    fn bracket_of_unit(&self, p: &Method, table: &ComparisonTable) -> Result<Option<BracketKind>, ComparisonError> {
        let horizon = table.horizon;
        match reciprocal_closed_form(p, horizon) {
            Some(Reciprocal::Polynomial(coeffs)) => {
                return Ok(Some(eventually_zero(&trim(coeffs), table)));
            }
            Some(Reciprocal::Summable { value, description }) => {
                return Ok(Some(BracketKind::CertifiedFinite {
                    value,
                    certificate: CertificateKind::ClosedFormReciprocal(description),
                }));
            }
            Some(Reciprocal::NonSummable { delta }) => {
                let witness = vec![horizon - 1, horizon];
                debug_assert!(witness.iter().all(|&n| table.k[n].abs() >= delta));
                return Ok(Some(BracketKind::CertifiedInfinite {
                    certificate: CertificateKind::TermTestFailure {
                        delta: delta.to_f64(),
                        witness,
                    },
                }));
            }
            None => {}
        }

        if is_log_convex_family(p) {
            // Normalized reciprocal has k_0 = 1, k_n ≤ 0 and Σ_{n>0} k_n ≥ −1,
            // so Σ |k_n| ≤ 2 before undoing the scaling by p_0.
            let p0 = p.coefficient(0)?;
            let bound = Scalar::from_int(2) / p0;
            return Ok(Some(BracketKind::CertifiedFinite {
                value: BracketValue::UpperBound(bound),
                certificate: CertificateKind::KaluzaSzego,
            }));
        }

        if p.polynomial_degree().is_some() {
            let ek = enestrom_kakeya_check(p)?;
            if ek.applies {
                if let Some(rho) = ek.rho_min {
                    let bound = enestrom_kakeya_tail(table, &rho);
                    return Ok(Some(BracketKind::CertifiedFinite {
                        value: BracketValue::UpperBound(table.abs_sum() + &Scalar::float(bound)),
                        certificate: CertificateKind::EnestromKakeyaAnnulus { rho_min: rho },
                    }));
                }
            }
        }
        Ok(None)
    }

    /// Does `(N, q)` include `(N, p)`?
    pub fn includes(&self, p: &Method, q: &Method, horizon: usize) -> Result<InclusionVerdict, ComparisonError> {
        require_horizon(horizon, 1)?;
        if p.is_declared_finite() && q.is_declared_finite() {
            let bracket = self.bracket(q, p, horizon)?;
            let witness = riesz_witness(p, q, &bracket.table)?;
            let label = format!("[{}:{}]", q.name(), p.name());
            let (relation, notes) = match &bracket.kind {
                BracketKind::CertifiedFinite { value, certificate } => {
                    let op = if value.is_exact() { "=" } else { "<=" };
                    (Relation::Includes, format!("{label} {op} {} ({certificate})", value.scalar()))
                }
                BracketKind::CertifiedInfinite { certificate } => {
                    (Relation::NotIncludes, format!("{label} = inf ({certificate})"))
                }
                BracketKind::NumericEvidence { growth_note, .. } => (
                    Relation::Inconclusive,
                    format!("{label} uncertified: {growth_note}"),
                ),
            };
            return Ok(InclusionVerdict {
                p_name: p.name().to_string(),
                q_name: q.name().to_string(),
                relation,
                basis: InclusionBasis::FiniteBracket(bracket),
                witness,
                notes,
            });
        }

        let table = self.table(q, p, horizon)?;
        let witness = riesz_witness(p, q, &table)?;
        let not_finite = if p.is_declared_finite() { q.name() } else { p.name() };
        let notes = format!(
            "bracket criterion refused: {not_finite} is not declared finite; finite-horizon evidence only: H >= {}, condition (i) {}, k_N/Q_N = {}",
            format_float(witness.h),
            if witness.h_stable { "stable" } else { "growing" },
            format_float(witness.k_over_q_last),
        );
        Ok(InclusionVerdict {
            p_name: p.name().to_string(),
            q_name: q.name().to_string(),
            relation: Relation::Inconclusive,
            basis: InclusionBasis::RieszFiniteHorizon {
                h_witness: witness.h,
                cond1_ok: witness.h_stable,
                cond2_trend: witness.k_over_q_last,
            },
            witness,
            notes,
        })
    }

    /// Equivalence of two finite methods: both brackets finite.
    pub fn equivalent(&self, p: &Method, q: &Method, horizon: usize) -> Result<EquivalenceVerdict, ComparisonError> {
        for m in [p, q] {
            if !m.is_declared_finite() {
                return Err(ComparisonError::RequiresFinite {
                    criterion: "equivalence criterion",
                    method: m.name().to_string(),
                });
            }
        }
        let forward = self.includes(p, q, horizon)?;
        let backward = self.includes(q, p, horizon)?;
        let equivalent = forward.relation == Relation::Includes && backward.relation == Relation::Includes;
        Ok(EquivalenceVerdict {
            forward,
            backward,
            equivalent,
        })
    }

    /// Equivalence with ordinary convergence.
    pub fn is_trivial(&self, p: &Method, horizon: usize) -> Result<EquivalenceVerdict, ComparisonError> {
        self.equivalent(p, &unit(), horizon)
    }
}

fn eventually_zero(poly: &[Scalar], table: &ComparisonTable) -> BracketKind {
    let after = poly.len() - 1;
    for n in 0..=table.horizon {
        let expected = poly.get(n).cloned().unwrap_or_else(Scalar::zero);
        assert!(
            table.k[n] == expected,
            "comparison table disagrees with the exact quotient at n = {n}"
        );
    }
    let value: Scalar = poly.iter().map(Scalar::abs).sum();
    BracketKind::CertifiedFinite {
        value: BracketValue::Exact(value),
        certificate: CertificateKind::EventuallyZero { after },
    }
}

/// `C · rho^{−N} / (1 − 1/rho)` with `C = max_{n ≤ N} |k_n| rho^n`.
fn enestrom_kakeya_tail(table: &ComparisonTable, rho: &Scalar) -> f64 {
    let ln_rho = rho.to_f64().ln();
    let n = table.horizon as f64;
    let ln_c = table
        .k
        .iter()
        .enumerate()
        .filter(|(_, k)| !k.is_zero())
        .map(|(i, k)| abs_ln(k) + i as f64 * ln_rho)
        .fold(f64::NEG_INFINITY, f64::max);
    (ln_c - n * ln_rho).exp() / (1.0 - (-ln_rho).exp())
}

/// `ln |x|` without overflowing for very large or small exact values.
fn abs_ln(x: &Scalar) -> f64 {
    match x {
        Scalar::Exact(r) => {
            let num = r.numer().abs();
            let den = r.denom();
            let ln_big = |v: &num_bigint::BigInt| {
                let bits = v.bits();
                let shift = bits.saturating_sub(60);
                let top: f64 = num_traits::ToPrimitive::to_f64(&(v >> shift)).unwrap_or(f64::INFINITY);
                top.ln() + shift as f64 * std::f64::consts::LN_2
            };
            ln_big(&num) - ln_big(den)
        }
        Scalar::Float(v) => v.abs().ln(),
    }
}

/// Observed constants of the Riesz conditions for `(N, p) ⇝ (N, q)`.
pub fn riesz_witness(p: &Method, q: &Method, table: &ComparisonTable) -> Result<RieszWitness, ComparisonError> {
    let horizon = table.horizon;
    let big_p: Vec<f64> = p.partial_sums(horizon)?.iter().map(Scalar::to_f64).collect();
    let big_q: Vec<f64> = q.partial_sums(horizon)?.iter().map(Scalar::to_f64).collect();
    let abs_k: Vec<f64> = table.k.iter().map(|k| k.abs().to_f64()).collect();
    let ratios: Vec<f64> = (0..=horizon)
        .map(|n| (0..=n).map(|i| abs_k[i] * big_p[n - i]).sum::<f64>() / big_q[n])
        .collect();
    let h = ratios.iter().copied().fold(0.0, f64::max);
    let half = horizon / 2;
    let first_half = ratios[..=half].iter().copied().fold(0.0, f64::max);
    let h_stable = h <= first_half * (1.0 + 1e-9);
    let j = (0..=horizon)
        .map(|n| big_p[n] / big_q[n])
        .fold(0.0, f64::max);
    let k_over_q_last = table.k[horizon].to_f64() / big_q[horizon];
    Ok(RieszWitness {
        h,
        j,
        k_over_q_last,
        h_stable,
    })
}

/// Default-budget form of [`Comparator::table`].
pub fn comparison_coefficients(q: &Method, p: &Method, horizon: usize) -> Result<ComparisonTable, ComparisonError> {
    Comparator::default().table(q, p, horizon)
}

/// `Σ_{i≤n} k_i P_{n−i} = Q_n` exactly for every `n` in the table.
pub fn summed_identity_check(q: &Method, p: &Method, table: &ComparisonTable) -> Result<bool, ComparisonError> {
    let big_p = p.partial_sums(table.horizon)?;
    let big_q = q.partial_sums(table.horizon)?;
    let lhs = convolve(&table.k, &big_p, table.horizon + 1);
    Ok(lhs.iter().zip(&big_q).all(|(a, b)| a == b))
}

pub fn bracket(q: &Method, p: &Method, horizon: usize) -> Result<BracketVerdict, ComparisonError> {
    Comparator::default().bracket(q, p, horizon)
}

pub fn includes(p: &Method, q: &Method, horizon: usize) -> Result<InclusionVerdict, ComparisonError> {
    Comparator::default().includes(p, q, horizon)
}

pub fn equivalent(p: &Method, q: &Method, horizon: usize) -> Result<EquivalenceVerdict, ComparisonError> {
    Comparator::default().equivalent(p, q, horizon)
}

pub fn is_trivial(p: &Method, horizon: usize) -> Result<EquivalenceVerdict, ComparisonError> {
    Comparator::default().is_trivial(p, horizon)
}

/// Finite methods are regular outright; otherwise look at `p_n/P_n`.
pub fn regularity_check(p: &Method, horizon: usize) -> Result<RegularityVerdict, ComparisonError> {
    require_horizon(horizon, 1)?;
    if p.is_declared_finite() {
        return Ok(RegularityVerdict::RegularCertified);
    }
    let coeffs = p.coefficients(horizon)?;
    let partials = p.partial_sums(horizon)?;
    let ratios: Vec<f64> = coeffs
        .iter()
        .zip(&partials)
        .map(|(c, s)| (c / s).to_f64())
        .collect();
    let last_ratio = ratios[horizon];
    let start = horizon - (horizon / 4).max(1);
    let decreasing = ratios[start..].windows(2).all(|w| w[1] <= w[0]);
    Ok(if last_ratio < REGULARITY_RATIO_THRESHOLD && decreasing {
        RegularityVerdict::RegularEvidence { last_ratio }
    } else {
        RegularityVerdict::NotRegularEvidence { last_ratio }
    })
}

/// Checks log-convexity of the weights and the sign pattern of the
/// reciprocal series, after rescaling so that `p_0 = 1`.
pub fn kaluza_szego_check(p: &Method, horizon: usize) -> Result<KaluzaSzegoReport, ComparisonError> {
    require_horizon(horizon, 1)?;
    let raw = p.coefficients(horizon + 1)?;
    if let Some(n) = raw.iter().position(Scalar::is_zero) {
        return Err(ComparisonError::Inapplicable {
            check: "log-convexity check",
            method: p.name().to_string(),
            reason: format!("p_{n} = 0; the hypothesis needs strictly positive weights"),
        });
    }
    let p0 = raw[0].clone();
    let coeffs: Vec<Scalar> = raw.iter().map(|c| c / &p0).collect();

    let first_violation = (1..=horizon).find(|&n| &coeffs[n + 1] * &coeffs[n - 1] < &coeffs[n] * &coeffs[n]);

    let mut unit_row = vec![Scalar::zero(); horizon + 1];
    unit_row[0] = Scalar::one();
    let k = series_quotient(&unit_row, &coeffs[..=horizon], &Budget::default())?;
    let k_sign_ok = k[0] == Scalar::one() && k[1..].iter().all(|v| !v.is_positive());
    let tail_sum: Scalar = k[1..].iter().sum();
    let tail_sum_ok = tail_sum >= Scalar::from_int(-1);
    let a_n: Scalar = k.iter().map(Scalar::abs).sum();
    let within_two = a_n <= Scalar::from_int(2);
    Ok(KaluzaSzegoReport {
        hypothesis_ok: first_violation.is_none(),
        first_violation,
        k_sign_ok,
        tail_sum_ok,
        tail_sum,
        u_bracket_bound: a_n.to_f64(),
        within_two,
    })
}

/// Strictly decreasing positive weights with finitely many nonzero terms give
/// a polynomial without zeros in the closed unit disc.
pub fn enestrom_kakeya_check(p: &Method) -> Result<EnestromKakeyaReport, ComparisonError> {
    let Some(degree) = p.polynomial_degree() else {
        return Err(ComparisonError::Inapplicable {
            check: "Enestrom-Kakeya check",
            method: p.name().to_string(),
            reason: "weights do not vanish eventually".into(),
        });
    };
    let coeffs = p.coefficients(degree)?;
    let applies = coeffs.iter().all(Scalar::is_positive)
        && coeffs.windows(2).all(|w| w[0] > w[1]);
    let rho_min = coeffs
        .windows(2)
        .filter(|w| w[1].is_positive())
        .map(|w| &w[0] / &w[1])
        .reduce(|a, b| if b < a { b } else { a });
    Ok(EnestromKakeyaReport {
        applies,
        rho_min,
        trivial_certified: applies && p.is_declared_finite(),
    })
}

/// Finds where `p_{n+1}/p_n ≤ q_{n+1}/q_n` starts holding through the horizon.
pub fn ratio_dominance_check(p: &Method, q: &Method, horizon: usize) -> Result<RatioDominanceReport, ComparisonError> {
    let pc = p.coefficients(horizon + 1)?;
    let qc = q.coefficients(horizon + 1)?;
    for (m, c) in [(p, &pc), (q, &qc)] {
        if let Some(n) = c.iter().position(Scalar::is_zero) {
            return Err(ComparisonError::Inapplicable {
                check: "ratio dominance check",
                method: m.name().to_string(),
                reason: format!("p_{n} = 0; ratios need strictly positive weights"),
            });
        }
    }
    let holds = |n: usize| &pc[n + 1] * &qc[n] <= &qc[n + 1] * &pc[n];
    let mut holds_from = None;
    for n in (0..=horizon).rev() {
        if holds(n) {
            holds_from = Some(n);
        } else {
            break;
        }
    }
    Ok(RatioDominanceReport { holds_from, horizon })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::{cesaro, geometric, hutton, make_method, neg_binomial, poisson, polynomial, zeta, FinitenessInfo};
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    fn int(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    #[test]
    fn coefficient_examples() {
        let t = comparison_coefficients(&cesaro(1).unwrap(), &unit(), 20).unwrap();
        assert!(t.k.iter().all(|k| *k == int(1)));

        let t = comparison_coefficients(&unit(), &cesaro(1).unwrap(), 20).unwrap();
        assert_eq!(&t.k[..3], &[int(1), int(-1), int(0)]);
        assert!(t.k[2..].iter().all(Scalar::is_zero));

        let t = comparison_coefficients(&unit(), &poisson(int(1)).unwrap(), 20).unwrap();
        let mut fact = 1i64;
        for (n, k) in t.k.iter().enumerate() {
            if n > 0 {
                fact *= n as i64;
            }
            assert_eq!(*k, r(if n % 2 == 0 { 1 } else { -1 }, fact));
        }

        let t = comparison_coefficients(&unit(), &hutton(int(1)).unwrap(), 20).unwrap();
        for (n, k) in t.k.iter().enumerate() {
            assert_eq!(*k, int(if n % 2 == 0 { 1 } else { -1 }));
        }
    }

    #[test]
    fn abs_partial_sums_are_running_sums() {
        let t = comparison_coefficients(&unit(), &hutton(int(1)).unwrap(), 10).unwrap();
        assert_eq!(t.abs_partial[4], int(5));
        assert!(t.abs_partial.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn summed_identity() {
        let c = cesaro(1).unwrap();
        let u = unit();
        let t = comparison_coefficients(&c, &u, 30).unwrap();
        assert!(summed_identity_check(&c, &u, &t).unwrap());
        let p = poisson(int(1)).unwrap();
        let mut t = comparison_coefficients(&u, &p, 30).unwrap();
        assert!(summed_identity_check(&u, &p, &t).unwrap());
        t.k[3] = &t.k[3] + &int(1);
        assert!(!summed_identity_check(&u, &p, &t).unwrap());
    }

    #[test]
    fn bracket_examples() {
        let u = unit();
        let b = bracket(&u, &geometric(r(1, 2)).unwrap(), 16).unwrap();
        assert_eq!(b.value(), Some(&BracketValue::Exact(r(3, 2))));
        assert_eq!(&b.table.k[..3], &[int(1), r(-1, 2), int(0)]);
        assert_eq!(b.certificate(), Some(&CertificateKind::EventuallyZero { after: 1 }));

        let b = bracket(&cesaro(1).unwrap(), &u, 16).unwrap();
        assert!(b.is_certified_infinite());
        assert!(matches!(b.certificate(), Some(CertificateKind::TermTestFailure { .. })));

        let b = bracket(&u, &cesaro(1).unwrap(), 16).unwrap();
        assert_eq!(b.value(), Some(&BracketValue::Exact(int(2))));

        let b = bracket(&u, &neg_binomial(r(1, 2), 3).unwrap(), 16).unwrap();
        assert_eq!(b.value(), Some(&BracketValue::Exact(r(27, 8))));

        let b = bracket(&poisson(int(1)).unwrap(), &u, 30).unwrap();
        let v = b.value().unwrap();
        assert!(!v.is_exact());
        assert!((v.scalar().to_f64() - std::f64::consts::E).abs() < 1e-12);
        assert!(v.scalar().to_f64() >= std::f64::consts::E);

        let b = bracket(&u, &hutton(int(1)).unwrap(), 16).unwrap();
        assert!(b.is_certified_infinite());
        assert_eq!(
            b.certificate(),
            Some(&CertificateKind::TermTestFailure { delta: 1.0, witness: vec![15, 16] })
        );
    }

    #[test]
    fn bracket_for_log_convex_and_ek_methods() {
        let u = unit();
        let b = bracket(&u, &zeta(int(2)).unwrap(), 64).unwrap();
        assert_eq!(b.certificate(), Some(&CertificateKind::KaluzaSzego));
        assert_eq!(b.value(), Some(&BracketValue::UpperBound(int(2))));
        assert!(*b.table.abs_sum() <= int(2));

        let p = polynomial(vec![int(1), r(2, 3), r(1, 3)]).unwrap();
        let b = bracket(&u, &p, 64).unwrap();
        assert_eq!(
            b.certificate(),
            Some(&CertificateKind::EnestromKakeyaAnnulus { rho_min: r(3, 2) })
        );
        let bound = b.value().unwrap().scalar().to_f64();
        let longer = comparison_coefficients(&u, &p, 400).unwrap();
        assert!(longer.abs_sum().to_f64() <= bound);
    }

    #[test]
    fn uncertified_pairs_report_evidence() {
        // 1 + 2x + x^2 = (1 + x)^2 has a double root on the unit circle.
        let p = polynomial(vec![int(1), int(2), int(1)]).unwrap();
        let b = bracket(&unit(), &p, 32).unwrap();
        match &b.kind {
            BracketKind::NumericEvidence { last_a, growth_note } => {
                // k_n = (−1)^n (n+1).
                assert_eq!(*last_a, (1..=33).sum::<i64>() as f64);
                assert!(growth_note.starts_with("A_32"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn polynomial_division_witness() {
        let p = hutton(int(1)).unwrap();
        let q = polynomial(vec![int(1), r(3, 2), r(1, 2)]).unwrap();
        let b = bracket(&q, &p, 20).unwrap();
        assert_eq!(b.value(), Some(&BracketValue::Exact(r(3, 2))));
        assert_eq!(b.certificate(), Some(&CertificateKind::EventuallyZero { after: 1 }));

        let (quot, rem) = poly_divrem(&[int(1), r(3, 2), r(1, 2)], &[int(1), int(1)]).unwrap();
        assert_eq!(quot, vec![int(1), r(1, 2)]);
        assert!(rem.iter().all(Scalar::is_zero));
        let (_, rem) = poly_divrem(&[int(1), int(3)], &[int(1), int(1)]).unwrap();
        assert_eq!(rem, vec![int(-2)]);
    }

    #[test]
    fn composed_bracket_bound() {
        // k = poisson(1)/geometric(1/2) = e^x (1 − x/2): both factors certified.
        let q = poisson(int(1)).unwrap();
        let p = geometric(r(1, 2)).unwrap();
        let b = bracket(&q, &p, 40).unwrap();
        let v = b.value().unwrap();
        assert!(!v.is_exact());
        assert!(b.table.abs_sum().to_f64() <= v.scalar().to_f64());
        // Polynomial over polynomial-reciprocal: (1 + x)(1 − x/2).
        let b = bracket(&hutton(int(1)).unwrap(), &p, 10).unwrap();
        assert_eq!(b.value(), Some(&BracketValue::Exact(int(2))));
        assert_eq!(b.certificate(), Some(&CertificateKind::EventuallyZero { after: 2 }));
    }

    #[test]
    fn inclusion_examples() {
        let p = hutton(int(1)).unwrap();
        let q = polynomial(vec![int(1), r(3, 2), r(1, 2)]).unwrap();
        let v = includes(&p, &q, 32).unwrap();
        assert_eq!(v.relation, Relation::Includes);
        assert!(matches!(v.basis, InclusionBasis::FiniteBracket(_)));

        // Cesàro is not finite: the bracket criterion must not be used, even
        // though [u:c] = 2 is finite.
        let c = cesaro(1).unwrap();
        let u = unit();
        let v = includes(&c, &u, 64).unwrap();
        assert_eq!(v.relation, Relation::Inconclusive);
        match v.basis {
            InclusionBasis::RieszFiniteHorizon { h_witness, cond1_ok, .. } => {
                assert_eq!(h_witness, 129.0);
                assert!(!cond1_ok);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(v.notes.contains("refused"));

        let v = includes(&u, &c, 64).unwrap();
        assert_eq!(v.relation, Relation::Inconclusive);
        match v.basis {
            InclusionBasis::RieszFiniteHorizon { h_witness, cond1_ok, cond2_trend } => {
                assert_eq!(h_witness, 1.0);
                assert!(cond1_ok);
                assert!((cond2_trend - 1.0 / 65.0).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn equivalence_examples() {
        let u = unit();
        let v = equivalent(&geometric(r(1, 2)).unwrap(), &u, 32).unwrap();
        assert!(v.equivalent);
        let InclusionBasis::FiniteBracket(b) = &v.backward.basis else { panic!() };
        assert_eq!(b.value(), Some(&BracketValue::Exact(int(2))));
        let InclusionBasis::FiniteBracket(b) = &v.forward.basis else { panic!() };
        assert_eq!(b.value(), Some(&BracketValue::Exact(r(3, 2))));

        assert!(equivalent(&poisson(int(1)).unwrap(), &u, 32).unwrap().equivalent);

        let v = equivalent(&hutton(int(1)).unwrap(), &u, 32).unwrap();
        assert!(!v.equivalent);
        assert_eq!(v.forward.relation, Relation::NotIncludes);
        assert_eq!(v.backward.relation, Relation::Includes);

        let err = equivalent(&cesaro(1).unwrap(), &u, 32).unwrap_err();
        assert!(matches!(err, ComparisonError::RequiresFinite { .. }));
    }

    #[test]
    fn triviality_examples() {
        assert!(is_trivial(&neg_binomial(r(1, 2), 2).unwrap(), 32).unwrap().equivalent);
        assert!(is_trivial(&zeta(int(2)).unwrap(), 64).unwrap().equivalent);
        assert!(!is_trivial(&hutton(int(1)).unwrap(), 32).unwrap().equivalent);
        assert!(is_trivial(&polynomial(vec![int(1), r(1, 2)]).unwrap(), 32).unwrap().equivalent);
        assert!(is_trivial(&zeta(int(1)).unwrap(), 32).is_err());
    }

    #[test]
    fn unknown_finiteness_never_uses_bracket_criterion() {
        let m = make_method(
            "mystery",
            |n| Scalar::ratio(1, (n as i64 + 1) * (n as i64 + 1)),
            FinitenessInfo::unknown(),
        )
        .unwrap();
        let v = includes(&m, &unit(), 16).unwrap();
        assert!(matches!(v.basis, InclusionBasis::RieszFiniteHorizon { .. }));
        assert!(equivalent(&m, &unit(), 16).is_err());
        let b = bracket(&m, &unit(), 16).unwrap();
        assert!(matches!(b.kind, BracketKind::NumericEvidence { .. }));
    }

    #[test]
    fn regularity_examples() {
        assert_eq!(
            regularity_check(&geometric(r(1, 2)).unwrap(), 16).unwrap(),
            RegularityVerdict::RegularCertified
        );
        assert!(matches!(
            regularity_check(&cesaro(1).unwrap(), 2000).unwrap(),
            RegularityVerdict::RegularEvidence { .. }
        ));
        match regularity_check(&geometric(int(2)).unwrap(), 200).unwrap() {
            RegularityVerdict::NotRegularEvidence { last_ratio } => {
                assert!((last_ratio - 0.5).abs() < 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(regularity_check(&unit(), 0).is_err());
    }

    #[test]
    fn kaluza_szego_examples() {
        let rep = kaluza_szego_check(&zeta(int(2)).unwrap(), 64).unwrap();
        assert!(rep.hypothesis_ok && rep.k_sign_ok && rep.tail_sum_ok && rep.within_two);

        let rep = kaluza_szego_check(&poisson(int(1)).unwrap(), 16).unwrap();
        assert!(!rep.hypothesis_ok);
        assert_eq!(rep.first_violation, Some(1));
        assert!(!rep.k_sign_ok);

        let rep = kaluza_szego_check(&geometric(r(1, 2)).unwrap(), 16).unwrap();
        assert!(rep.hypothesis_ok && rep.k_sign_ok && rep.tail_sum_ok);
        assert_eq!(rep.tail_sum, r(-1, 2));

        // Rescaling leaves the normalized report unchanged.
        let scaled = zeta(int(2)).unwrap().scaled(int(5)).unwrap();
        let rep = kaluza_szego_check(&scaled, 32).unwrap();
        assert!(rep.hypothesis_ok && rep.within_two);

        assert!(matches!(
            kaluza_szego_check(&hutton(int(1)).unwrap(), 8).unwrap_err(),
            ComparisonError::Inapplicable { .. }
        ));
    }

    #[test]
    fn poisson_fails_log_convexity_by_direct_comparison() {
        // p_{n+1} p_{n−1} = 1/((n+1)! (n−1)!) < 1/(n!)^2 ⇔ n < n + 1.
        let p = poisson(int(1)).unwrap();
        for n in 1..20 {
            let lhs = p.coefficient(n + 1).unwrap() * p.coefficient(n - 1).unwrap();
            let rhs = p.coefficient(n).unwrap() * p.coefficient(n).unwrap();
            assert!(lhs < rhs);
        }
    }

    #[test]
    fn enestrom_kakeya_examples() {
        let rep = enestrom_kakeya_check(&polynomial(vec![int(1), r(1, 2)]).unwrap()).unwrap();
        assert!(rep.applies && rep.trivial_certified);
        assert_eq!(rep.rho_min, Some(int(2)));

        let rep = enestrom_kakeya_check(&hutton(int(1)).unwrap()).unwrap();
        assert!(!rep.applies && !rep.trivial_certified);

        let rep = enestrom_kakeya_check(&polynomial(vec![int(1), r(2, 3), r(1, 3)]).unwrap()).unwrap();
        assert!(rep.applies);
        assert_eq!(rep.rho_min, Some(r(3, 2)));

        assert!(enestrom_kakeya_check(&geometric(r(1, 2)).unwrap()).is_err());
    }

    #[test]
    fn ratio_dominance_examples() {
        let g3 = geometric(r(1, 3)).unwrap();
        let g2 = geometric(r(1, 2)).unwrap();
        assert_eq!(ratio_dominance_check(&g3, &g2, 20).unwrap().holds_from, Some(0));
        assert_eq!(
            ratio_dominance_check(&poisson(int(1)).unwrap(), &g2, 20).unwrap().holds_from,
            Some(1)
        );
        assert_eq!(ratio_dominance_check(&cesaro(1).unwrap(), &g2, 20).unwrap().holds_from, None);
        assert!(ratio_dominance_check(&hutton(int(1)).unwrap(), &g2, 20).is_err());
    }

    /// Plain rational recursion, reducing after every operation.
    fn reference_quotient(q: &[Scalar], p: &[Scalar]) -> Vec<Scalar> {
        let mut k: Vec<Scalar> = Vec::new();
        for n in 0..q.len() {
            let acc: Scalar = (1..=n).map(|j| &k[n - j] * &p[j]).sum();
            k.push(&(&q[n] - &acc) / &p[0]);
        }
        k
    }

    #[test]
    fn lifted_kernel_matches_rational_recursion() {
        let z = zeta(int(2)).unwrap().coefficients(40).unwrap();
        let g = geometric(r(2, 3)).unwrap().coefficients(40).unwrap();
        let mut e = vec![Scalar::zero(); 41];
        e[0] = r(7, 3);
        e[5] = r(1, 9);
        for (q, p) in [(&g, &z), (&z, &g), (&e, &z), (&z, &e)] {
            assert_eq!(series_quotient(q, p, &Budget::default()).unwrap(), reference_quotient(q, p));
        }
    }

    #[test]
    fn budget_is_enforced() {
        let tight = Comparator::new(Budget { max_denominator_bits: 64 });
        let err = tight.table(&unit(), &poisson(int(1)).unwrap(), 64).unwrap_err();
        assert!(matches!(err, ComparisonError::BudgetExhausted { limit: 64, .. }));
    }

    #[test]
    fn float_methods_compare_in_floats() {
        let z = zeta(Scalar::float(1.5)).unwrap();
        let t = comparison_coefficients(&unit(), &z, 40).unwrap();
        assert!(t.k.iter().all(|k| !k.is_exact()));
        let back = convolve(&t.k, &z.coefficients(40).unwrap(), 41);
        assert!((back[0].to_f64() - 1.0).abs() < 1e-12);
        assert!(back[1..].iter().all(|v| v.to_f64().abs() < 1e-12));
    }

    #[test]
    fn proof_bound_chain() {
        // A_n ≤ H·Q/P_0 for every n, and H ≤ A_N·J.
        let pairs = [
            (geometric(r(1, 2)).unwrap(), unit()),
            (unit(), poisson(int(1)).unwrap()),
            (hutton(int(1)).unwrap(), polynomial(vec![int(1), r(3, 2), r(1, 2)]).unwrap()),
            (zeta(int(2)).unwrap(), unit()),
        ];
        for (p, q) in &pairs {
            let v = includes(p, q, 48).unwrap();
            assert_eq!(v.relation, Relation::Includes, "{} -> {}", p.name(), q.name());
            let InclusionBasis::FiniteBracket(b) = &v.basis else { panic!() };
            let q_total = q.partial_sum(48).unwrap().to_f64();
            let p0 = p.coefficient(0).unwrap().to_f64();
            for a in &b.table.abs_partial {
                assert!(a.to_f64() <= v.witness.h * q_total / p0 * (1.0 + 1e-12));
            }
            assert!(v.witness.h <= b.table.abs_sum().to_f64() * v.witness.j * (1.0 + 1e-12));
        }
    }

    fn rational_coeffs(len: usize) -> impl Strategy<Value = Vec<Scalar>> {
        (
            (1i64..=10, 1i64..=4),
            prop::collection::vec((0i64..=10, 1i64..=4), len - 1),
        )
            .prop_map(|(lead, rest)| {
                std::iter::once(lead)
                    .chain(rest)
                    .map(|(n, d)| r(n, d))
                    .collect()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn convolution_identity_and_duality(pc in rational_coeffs(24), qc in rational_coeffs(24)) {
            let n = 23;
            let p = polynomial(pc.clone()).unwrap();
            let q = polynomial(qc.clone()).unwrap();
            let k = comparison_coefficients(&q, &p, n).unwrap();
            let l = comparison_coefficients(&p, &q, n).unwrap();
            let p_coeffs = p.coefficients(n).unwrap();
            let q_coeffs = q.coefficients(n).unwrap();
            prop_assert_eq!(convolve(&k.k, &p_coeffs, n + 1), q_coeffs);
            let delta = convolve(&k.k, &l.k, n + 1);
            prop_assert_eq!(&delta[0], &int(1));
            prop_assert!(delta[1..].iter().all(Scalar::is_zero));
            prop_assert!(summed_identity_check(&q, &p, &k).unwrap());
        }
    }
}
