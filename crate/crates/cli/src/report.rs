//! CSV rendering. Data rows go through the `csv` writer; metadata and
//! verdicts are `#`-prefixed comment rows using the same quoting.

use norlund_core::comparison::{
    BracketKind, BracketValue, BracketVerdict, ComparisonTable, EquivalenceVerdict,
    InclusionBasis, InclusionVerdict,
};
use norlund_core::numerics::format_float;
use norlund_core::{LimitKind, LimitVerdict, Scalar, TransformTrace};

pub struct CsvDoc {
    buf: Vec<u8>,
}

impl Default for CsvDoc {
    fn default() -> Self {
        Self::new()
    }
}

fn record_line<I, S>(fields: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(fields).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

impl CsvDoc {
    pub fn new() -> Self {
        CsvDoc { buf: Vec::new() }
    }

    pub fn comment<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.buf.extend_from_slice(b"# ");
        self.buf.extend_from_slice(record_line(fields).as_bytes());
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.buf.extend_from_slice(record_line(fields).as_bytes());
    }

    pub fn into_string(self) -> String {
        String::from_utf8(self.buf).expect("utf-8 output")
    }
}

/// Exact text, or empty when the value is a float.
pub fn exact_text(v: &Scalar) -> String {
    if v.is_exact() {
        v.to_string()
    } else {
        String::new()
    }
}

pub fn float_text(v: &Scalar) -> String {
    format_float(v.to_f64())
}

pub fn transform_csv(doc: &mut CsvDoc, trace: &TransformTrace) {
    doc.row(["m", "t_m_exact", "t_m_float"]);
    for (m, t) in trace.values.iter().enumerate() {
        doc.row([m.to_string(), exact_text(t), float_text(t)]);
    }
    verdict_rows(doc, &trace.verdict);
}

pub fn verdict_rows(doc: &mut CsvDoc, v: &LimitVerdict) {
    doc.comment(["verdict", "kind", "limit", "residual", "horizon", "epsilon", "window"]);
    let (kind, limit, residual) = match &v.kind {
        LimitKind::Converged { limit, residual } => ("converged", format_float(*limit), format_float(*residual)),
        LimitKind::Undecided => ("undecided", String::new(), String::new()),
    };
    doc.comment([
        "verdict".to_string(),
        kind.to_string(),
        limit,
        residual,
        v.horizon.to_string(),
        format_float(v.epsilon),
        v.window.to_string(),
    ]);
}

/// Comparison table rows; `num` and `den` name the numerator and denominator
/// methods' weight columns and `coef` the quotient column.
pub fn table_csv(
    doc: &mut CsvDoc,
    table: &ComparisonTable,
    den: &[Scalar],
    num: &[Scalar],
    labels: [&str; 3],
) {
    let [den_label, num_label, coef] = labels;
    doc.row([
        "n".to_string(),
        den_label.to_string(),
        num_label.to_string(),
        coef.to_string(),
        "abs_partial_sum".to_string(),
        format!("{den_label}_float"),
        format!("{num_label}_float"),
        format!("{coef}_float"),
        "abs_partial_sum_float".to_string(),
    ]);
    for n in 0..=table.horizon {
        let (d, q, k, a) = (&den[n], &num[n], &table.k[n], &table.abs_partial[n]);
        doc.row([
            n.to_string(),
            exact_text(d),
            exact_text(q),
            exact_text(k),
            exact_text(a),
            float_text(d),
            float_text(q),
            float_text(k),
            float_text(a),
        ]);
    }
}

/// `(kind, exact text, float text, certificate or note)`.
pub fn bracket_fields(b: &BracketVerdict) -> [String; 4] {
    match &b.kind {
        BracketKind::CertifiedFinite { value, certificate } => {
            let kind = match value {
                BracketValue::Exact(_) => "exact",
                BracketValue::UpperBound(_) => "upper-bound",
            };
            let v = value.scalar();
            [kind.into(), exact_text(v), float_text(v), certificate.to_string()]
        }
        BracketKind::CertifiedInfinite { certificate } => {
            ["infinite".into(), String::new(), "inf".into(), certificate.to_string()]
        }
        BracketKind::NumericEvidence { last_a, growth_note } => {
            ["evidence".into(), String::new(), format_float(*last_a), growth_note.clone()]
        }
    }
}

pub fn bracket_row(doc: &mut CsvDoc, label: &str, b: &BracketVerdict) {
    let [kind, exact, float, note] = bracket_fields(b);
    doc.comment(["bracket".to_string(), label.to_string(), kind, exact, float, note]);
}

pub fn inclusion_rows(doc: &mut CsvDoc, label: &str, v: &InclusionVerdict) {
    let basis = match &v.basis {
        InclusionBasis::FiniteBracket(_) => "finite-bracket".to_string(),
        InclusionBasis::RieszFiniteHorizon { cond1_ok, .. } => format!(
            "riesz-finite-horizon(condition-i={})",
            if *cond1_ok { "stable" } else { "growing" }
        ),
    };
    doc.comment([
        "inclusion".to_string(),
        label.to_string(),
        v.relation.to_string(),
        basis,
        v.notes.clone(),
    ]);
    doc.comment([
        "riesz-witness".to_string(),
        label.to_string(),
        format!("H={}", format_float(v.witness.h)),
        format!("J={}", format_float(v.witness.j)),
        format!("k_N/Q_N={}", format_float(v.witness.k_over_q_last)),
    ]);
}

pub fn equivalence_row(doc: &mut CsvDoc, v: &EquivalenceVerdict) {
    let status = if v.equivalent {
        "equivalent"
    } else if v.forward.relation == norlund_core::Relation::Inconclusive
        || v.backward.relation == norlund_core::Relation::Inconclusive
    {
        "inconclusive"
    } else {
        "not-equivalent"
    };
    doc.comment(["equivalence", status, ""]);
}
