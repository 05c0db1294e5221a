//! Command implementations behind the `norlund` binary. Each command renders
//! its CSV into a string so output can be checked byte for byte.

pub mod report;
pub mod series;
pub mod spec;

use std::path::PathBuf;

use norlund_core::comparison::{
    regularity_check, Budget, Comparator, ComparisonError, InclusionBasis, RegularityVerdict,
};
use norlund_core::numerics::format_float;
use norlund_core::{
    unit, Finiteness, LimitCriteria, LimitKind, Method, MethodError, TransformError,
};
use rayon::prelude::*;
use thiserror::Error;

use report::CsvDoc;
use series::SeriesError;
use spec::{FamilyName, MethodSpecDoc, SpecLoadError};

pub const DENOM_BITS_ENV: &str = "NORLUND_DENOM_BITS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Resource(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) | CliError::Resource(_) => 1,
            CliError::Validation(_) => 2,
        }
    }
}

impl From<SpecLoadError> for CliError {
    fn from(e: SpecLoadError) -> Self {
        match e {
            SpecLoadError::Io(_) => CliError::Io(e.to_string()),
            SpecLoadError::Spec(_) => CliError::Validation(e.to_string()),
        }
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<MethodError> for CliError {
    fn from(e: MethodError) -> Self {
        match e {
            MethodError::CacheCapExceeded { .. } => CliError::Resource(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<TransformError> for CliError {
    fn from(e: TransformError) -> Self {
        match e {
            TransformError::Method(m) => m.into(),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ComparisonError> for CliError {
    fn from(e: ComparisonError) -> Self {
        match e {
            ComparisonError::Method(m) => m.into(),
            ComparisonError::BudgetExhausted { .. } => CliError::Resource(format!(
                "{e}; set {DENOM_BITS_ENV} to raise the limit"
            )),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub horizon: usize,
    pub cmp_horizon: usize,
    pub epsilon: f64,
    pub window: usize,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub budget: Budget,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            horizon: norlund_core::transform::DEFAULT_HORIZON,
            cmp_horizon: norlund_core::comparison::DEFAULT_CMP_HORIZON,
            epsilon: norlund_core::transform::DEFAULT_EPSILON,
            window: norlund_core::transform::DEFAULT_WINDOW,
            out: None,
            seed: 0,
            budget: Budget::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.horizon < 1 {
            return Err(CliError::Validation("--horizon must be at least 1".into()));
        }
        if self.cmp_horizon < 1 {
            return Err(CliError::Validation("--cmp-horizon must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(CliError::Validation("--epsilon must be positive".into()));
        }
        if self.window < 2 {
            return Err(CliError::Validation("--window must be at least 2".into()));
        }
        Ok(())
    }

    fn comparator(&self) -> Comparator {
        Comparator::new(self.budget)
    }
}

/// Reads the denominator budget override, if set.
pub fn budget_from_env(value: Option<&str>) -> Result<Budget, CliError> {
    match value {
        None => Ok(Budget::default()),
        Some(v) => v
            .trim()
            .parse::<u64>()
            .ok()
            .filter(|&b| b > 0)
            .map(|max_denominator_bits| Budget { max_denominator_bits })
            .ok_or_else(|| CliError::Validation(format!("{DENOM_BITS_ENV} must be a positive integer, found `{v}`"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Converged,
    Undecided,
    Done,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Converged | Outcome::Done => 0,
            Outcome::Undecided => 3,
        }
    }
}

fn header(doc: &mut CsvDoc, command: &str, cfg: &RunConfig, extra: &[(&str, String)]) {
    doc.comment(["command", command]);
    for (k, v) in extra {
        doc.comment([*k, v.as_str()]);
    }
    doc.comment(["seed".to_string(), cfg.seed.to_string()]);
}

pub fn cmd_transform(method: &str, series: &str, cfg: &RunConfig) -> Result<(String, Outcome), CliError> {
    cfg.validate()?;
    let m = spec::load_method(method)?;
    let seq = series::load_series(series)?;
    let criteria = LimitCriteria::new(cfg.epsilon, cfg.window)?;
    let trace = norlund_core::transform_prefix(&m, &seq, cfg.horizon, criteria)?;

    let mut doc = CsvDoc::new();
    header(
        &mut doc,
        "transform",
        cfg,
        &[("method", m.name().to_string()), ("series", series.to_string())],
    );
    report::transform_csv(&mut doc, &trace);
    let outcome = match trace.verdict.kind {
        LimitKind::Converged { .. } => Outcome::Converged,
        LimitKind::Undecided => Outcome::Undecided,
    };
    Ok((doc.into_string(), outcome))
}

pub fn cmd_compare(p_arg: &str, q_arg: &str, cfg: &RunConfig) -> Result<String, CliError> {
    cfg.validate()?;
    let p = spec::load_method(p_arg)?;
    let q = spec::load_method(q_arg)?;
    compare_methods(&p, &q, cfg)
}

pub fn compare_methods(p: &Method, q: &Method, cfg: &RunConfig) -> Result<String, CliError> {
    let n = cfg.cmp_horizon;
    let cmp = cfg.comparator();
    let forward = cmp.bracket(q, p, n)?;
    let backward = cmp.bracket(p, q, n)?;
    let pc = p.coefficients(n)?;
    let qc = q.coefficients(n)?;

    let mut doc = CsvDoc::new();
    header(
        &mut doc,
        "compare",
        cfg,
        &[
            ("p", p.name().to_string()),
            ("q", q.name().to_string()),
            ("cmp_horizon", n.to_string()),
        ],
    );
    doc.comment(["table", "k = q/p"]);
    report::table_csv(&mut doc, &forward.table, &pc, &qc, ["p_n", "q_n", "k_n"]);
    doc.comment(["table", "l = p/q"]);
    report::table_csv(&mut doc, &backward.table, &qc, &pc, ["q_n", "p_n", "l_n"]);

    doc.comment(["bracket", "which", "kind", "exact", "float", "certificate"]);
    report::bracket_row(&mut doc, "[q:p]", &forward);
    report::bracket_row(&mut doc, "[p:q]", &backward);

    let p_to_q = cmp.includes(p, q, n)?;
    let q_to_p = cmp.includes(q, p, n)?;
    report::inclusion_rows(&mut doc, "p->q", &p_to_q);
    report::inclusion_rows(&mut doc, "q->p", &q_to_p);

    match cmp.equivalent(p, q, n) {
        Ok(v) => report::equivalence_row(&mut doc, &v),
        Err(e @ ComparisonError::RequiresFinite { .. }) => {
            doc.comment(["equivalence".to_string(), "refused".to_string(), e.to_string()]);
        }
        Err(e) => return Err(e.into()),
    }
    Ok(doc.into_string())
}

fn finiteness_text(f: Finiteness) -> &'static str {
    match f {
        Finiteness::Finite => "finite",
        Finiteness::Infinite => "infinite",
        Finiteness::Unknown => "unknown",
    }
}

/// One row per parameter value; rows are computed in parallel and emitted in
/// grid order.
pub fn cmd_sweep(
    family: &str,
    param: &str,
    values: &[String],
    fixed: &[(String, String)],
    cfg: &RunConfig,
) -> Result<String, CliError> {
    cfg.validate()?;
    let family: FamilyName = family.parse().map_err(CliError::Validation)?;
    if values.is_empty() {
        return Err(CliError::Validation("sweep grid is empty".into()));
    }
    let methods: Vec<Method> = values
        .iter()
        .map(|v| {
            let mut doc = MethodSpecDoc::new(family).with_param(param, v.clone());
            for (k, val) in fixed {
                doc = doc.with_param(k, val.clone());
            }
            doc.build()
                .map_err(|e| CliError::Validation(format!("{param}={v}: {e}")))
        })
        .collect::<Result<_, _>>()?;

    let rows: Vec<Result<Vec<String>, CliError>> = methods
        .par_iter()
        .zip(values.par_iter())
        .map(|(m, v)| sweep_row(m, param, v, cfg))
        .collect();

    let mut doc = CsvDoc::new();
    let fixed_text: Vec<String> = fixed.iter().map(|(k, v)| format!("{k}={v}")).collect();
    header(
        &mut doc,
        "sweep",
        cfg,
        &[
            ("family", family.to_string()),
            ("fixed", fixed_text.join(" ")),
            ("horizon", cfg.horizon.to_string()),
            ("cmp_horizon", cfg.cmp_horizon.to_string()),
        ],
    );
    doc.row([
        "param",
        "value",
        "method",
        "finiteness",
        "regularity",
        "trivial",
        "bracket_u_p_kind",
        "bracket_u_p",
        "bracket_u_p_float",
        "bracket_p_u_kind",
        "bracket_p_u",
        "bracket_p_u_float",
    ]);
    for row in rows {
        doc.row(row?);
    }
    Ok(doc.into_string())
}

fn sweep_row(m: &Method, param: &str, value: &str, cfg: &RunConfig) -> Result<Vec<String>, CliError> {
    let cmp = cfg.comparator();
    let u = unit();
    let n = cfg.cmp_horizon;
    let regularity = regularity_check(m, cfg.horizon)?;
    let regular_text = match regularity {
        RegularityVerdict::RegularCertified => "regular-certified".to_string(),
        RegularityVerdict::RegularEvidence { last_ratio } => {
            format!("regular-evidence(p_M/P_M={})", format_float(last_ratio))
        }
        RegularityVerdict::NotRegularEvidence { last_ratio } => {
            format!("not-regular-evidence(p_M/P_M={})", format_float(last_ratio))
        }
    };
    let trivial = match cmp.is_trivial(m, n) {
        Ok(v) if v.equivalent => "trivial".to_string(),
        Ok(v) => {
            let certified = |b: &InclusionBasis| match b {
                InclusionBasis::FiniteBracket(b) => b.is_certified_infinite(),
                InclusionBasis::RieszFiniteHorizon { .. } => false,
            };
            if certified(&v.forward.basis) || certified(&v.backward.basis) {
                "nontrivial".to_string()
            } else {
                "inconclusive".to_string()
            }
        }
        Err(ComparisonError::RequiresFinite { .. }) => "refused(non-finite)".to_string(),
        Err(e) => return Err(e.into()),
    };
    let u_p = cmp.bracket(&u, m, n)?;
    let p_u = cmp.bracket(m, &u, n)?;
    let [k1, e1, f1, _] = report::bracket_fields(&u_p);
    let [k2, e2, f2, _] = report::bracket_fields(&p_u);
    Ok(vec![
        param.to_string(),
        value.to_string(),
        m.name().to_string(),
        finiteness_text(m.finiteness()).to_string(),
        regular_text,
        trivial,
        k1,
        e1,
        f1,
        k2,
        e2,
        f2,
    ])
}

pub fn families_listing() -> String {
    let mut out = String::from("families:\n");
    for f in spec::FAMILIES {
        let mut params: Vec<String> = f.required.iter().map(|p| p.to_string()).collect();
        params.extend(f.optional.iter().map(|p| format!("[{p}]")));
        out.push_str(&format!("  {:<14} {:<26} {}\n", f.name.as_str(), params.join(" "), f.summary));
    }
    out.push_str("series:\n");
    for s in series::SERIES {
        out.push_str(&format!("  {:<22} {}\n", s.name, s.summary));
    }
    out
}
