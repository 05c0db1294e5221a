//! Sequences accepted by `--series`: a registry name or a file of values.

use std::path::Path;

use norlund_core::{BuiltinSequence, Scalar, SequenceSpec};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("{0}")]
    Io(String),
    #[error("series {source_name}, line {line}: {message}")]
    Malformed {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("unknown series `{0}`; use a registry name (see `norlund families`) or a file path")]
    Unknown(String),
}

pub struct SeriesInfo {
    pub name: &'static str,
    pub summary: &'static str,
}

pub const SERIES: &[SeriesInfo] = &[
    SeriesInfo {
        name: "grandi",
        summary: "partial sums of 1 - 1 + 1 - ...: 1, 0, 1, 0, ...",
    },
    SeriesInfo {
        name: "ones",
        summary: "1, 1, 1, ...",
    },
    SeriesInfo {
        name: "one-zero-alternating",
        summary: "1, 0, 1, 0, ... (same values as grandi)",
    },
    SeriesInfo {
        name: "alternating-harmonic",
        summary: "partial sums of 1 - 1/2 + 1/3 - ..., limit ln 2",
    },
    SeriesInfo {
        name: "geometric-terms(r)",
        summary: "r^n for an exact rational r",
    },
];

/// Resolves a registry name, falling back to a file of newline-delimited
/// values (`#` comments and blank lines skipped).
pub fn load_series(arg: &str) -> Result<SequenceSpec, SeriesError> {
    let builtin = match arg {
        "grandi" => Some(BuiltinSequence::GrandiPartialSums),
        "ones" => Some(BuiltinSequence::Ones),
        "one-zero-alternating" => Some(BuiltinSequence::OneZeroAlternating),
        "alternating-harmonic" => Some(BuiltinSequence::AlternatingHarmonicPartialSums),
        _ => None,
    };
    if let Some(b) = builtin {
        return Ok(SequenceSpec::builtin(b));
    }
    if let Some(inner) = arg.strip_prefix("geometric-terms(").and_then(|s| s.strip_suffix(')')) {
        let r: Scalar = inner.trim().parse().map_err(|e| SeriesError::Malformed {
            source_name: arg.to_string(),
            line: 1,
            message: format!("{e}"),
        })?;
        if !r.is_exact() {
            return Err(SeriesError::Malformed {
                source_name: arg.to_string(),
                line: 1,
                message: "ratio must be an exact rational".into(),
            });
        }
        return Ok(SequenceSpec::builtin(BuiltinSequence::GeometricTerms(r)));
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(SeriesError::Unknown(arg.to_string()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| SeriesError::Io(format!("{arg}: {e}")))?;
    parse_values(arg, &text).map(SequenceSpec::explicit)
}

pub fn parse_values(source_name: &str, text: &str) -> Result<Vec<Scalar>, SeriesError> {
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let v: Scalar = content.parse().map_err(|e| SeriesError::Malformed {
            source_name: source_name.to_string(),
            line: idx + 1,
            message: format!("{e}"),
        })?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(SeriesError::Malformed {
            source_name: source_name.to_string(),
            line: 0,
            message: "no values".into(),
        });
    }
    Ok(values)
}
