//! Method specification documents.
//!
//! A document is a list of `key=value` fields separated by commas or
//! newlines. `#` starts a comment. Values are exact literals (`3`, `-1/2`),
//! decimal literals where a family accepts floats, or bracketed lists:
//!
//! ```text
//! family=polynomial, coeffs=[1, 3/2, 1/2]
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use norlund_core::{
    cesaro, geometric, hutton, make_method, neg_binomial, poisson, polynomial, unit, zeta,
    Finiteness, FinitenessInfo, Method, Scalar,
};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct SpecError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.field) {
            (Some(l), Some(k)) => write!(f, "line {l}, field `{k}`: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "field `{k}`: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl SpecError {
    fn new(line: Option<usize>, field: Option<&str>, message: impl Into<String>) -> Self {
        SpecError {
            line,
            field: field.map(str::to_string),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FamilyName {
    Unit,
    Cesaro,
    Geometric,
    Poisson,
    NegBinomial,
    Zeta,
    Polynomial,
    Hutton,
    CustomList,
}

pub struct FamilyInfo {
    pub name: FamilyName,
    pub required: &'static [&'static str],
    pub optional: &'static [&'static str],
    pub summary: &'static str,
}

pub const FAMILIES: &[FamilyInfo] = &[
    FamilyInfo {
        name: FamilyName::Unit,
        required: &[],
        optional: &[],
        summary: "p_0 = 1, p_n = 0 otherwise (ordinary convergence)",
    },
    FamilyInfo {
        name: FamilyName::Cesaro,
        required: &[],
        optional: &["order"],
        summary: "p_n = C(n+k-1, k-1), order k >= 1 (default 1); infinite",
    },
    FamilyInfo {
        name: FamilyName::Geometric,
        required: &["p"],
        optional: &[],
        summary: "p_n = p^n, p > 0; finite iff p < 1",
    },
    FamilyInfo {
        name: FamilyName::Poisson,
        required: &["p"],
        optional: &[],
        summary: "p_n = p^n/n!, p > 0; finite",
    },
    FamilyInfo {
        name: FamilyName::NegBinomial,
        required: &["p", "k"],
        optional: &[],
        summary: "p_n = C(n+k-1, k-1) p^n, p > 0, k >= 1; finite iff p < 1",
    },
    FamilyInfo {
        name: FamilyName::Zeta,
        required: &["s"],
        optional: &[],
        summary: "p_n = (n+1)^-s, decimal s allowed; finite iff s > 1",
    },
    FamilyInfo {
        name: FamilyName::Polynomial,
        required: &["coeffs"],
        optional: &[],
        summary: "explicit weights, zero beyond the list; finite",
    },
    FamilyInfo {
        name: FamilyName::Hutton,
        required: &["p"],
        optional: &[],
        summary: "p_0 = 1, p_1 = p, zero beyond; finite",
    },
    FamilyInfo {
        name: FamilyName::CustomList,
        required: &["coeffs", "declared_finite"],
        optional: &[],
        summary: "explicit weights with declared_finite=true|unknown",
    },
];

impl FamilyName {
    pub fn as_str(self) -> &'static str {
        match self {
            FamilyName::Unit => "unit",
            FamilyName::Cesaro => "cesaro",
            FamilyName::Geometric => "geometric",
            FamilyName::Poisson => "poisson",
            FamilyName::NegBinomial => "neg_binomial",
            FamilyName::Zeta => "zeta",
            FamilyName::Polynomial => "polynomial",
            FamilyName::Hutton => "hutton",
            FamilyName::CustomList => "custom-list",
        }
    }

    pub fn info(self) -> &'static FamilyInfo {
        FAMILIES.iter().find(|f| f.name == self).expect("registered")
    }
}

impl fmt::Display for FamilyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FAMILIES
            .iter()
            .map(|f| f.name)
            .find(|f| f.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = FAMILIES.iter().map(|f| f.name.as_str()).collect();
                format!("unknown family `{s}` (known: {})", known.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclaredFinite {
    True,
    False,
    Unknown,
}

impl DeclaredFinite {
    pub fn as_str(self) -> &'static str {
        match self {
            DeclaredFinite::True => "true",
            DeclaredFinite::False => "false",
            DeclaredFinite::Unknown => "unknown",
        }
    }
}

/// Parsed but not yet validated method specification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodSpecDoc {
    pub family: FamilyName,
    /// Parameter name to literal text.
    pub params: BTreeMap<String, String>,
    pub declared_finite: Option<DeclaredFinite>,
}

/// Line numbers of each field, for error messages.
#[derive(Debug, Clone, Default)]
pub struct FieldLines(BTreeMap<String, usize>);

impl FieldLines {
    fn line_of(&self, field: &str) -> Option<usize> {
        self.0.get(field).copied()
    }
}

/// Splits on commas outside brackets.
fn split_fields(line: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in line.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&line[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&line[start..]);
    out
}

fn valid_key(key: &str) -> bool {
    !key.is_empty() && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl MethodSpecDoc {
    pub fn new(family: FamilyName) -> Self {
        MethodSpecDoc {
            family,
            params: BTreeMap::new(),
            declared_finite: None,
        }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<String>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn parse(text: &str) -> Result<Self, SpecError> {
        Self::parse_with_lines(text).map(|(doc, _)| doc)
    }

    pub fn parse_with_lines(text: &str) -> Result<(Self, FieldLines), SpecError> {
        let mut family = None;
        let mut params = BTreeMap::new();
        let mut declared_finite = None;
        let mut lines = FieldLines::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            if content.trim().is_empty() {
                continue;
            }
            let depth: i32 = content
                .chars()
                .map(|c| match c {
                    '[' => 1,
                    ']' => -1,
                    _ => 0,
                })
                .sum();
            if depth != 0 {
                return Err(SpecError::new(Some(line_no), None, "unbalanced brackets"));
            }
            for field in split_fields(content) {
                let field = field.trim();
                if field.is_empty() {
                    continue;
                }
                let Some((key, value)) = field.split_once('=') else {
                    return Err(SpecError::new(
                        Some(line_no),
                        None,
                        format!("expected key=value, found `{field}`"),
                    ));
                };
                let (key, value) = (key.trim(), value.trim());
                if !valid_key(key) {
                    return Err(SpecError::new(Some(line_no), None, format!("invalid key `{key}`")));
                }
                if value.is_empty() {
                    return Err(SpecError::new(Some(line_no), Some(key), "empty value"));
                }
                if lines.0.insert(key.to_string(), line_no).is_some() {
                    return Err(SpecError::new(Some(line_no), Some(key), "duplicate field"));
                }
                match key {
                    "family" => {
                        family = Some(
                            value
                                .parse::<FamilyName>()
                                .map_err(|m| SpecError::new(Some(line_no), Some(key), m))?,
                        )
                    }
                    "declared_finite" => {
                        declared_finite = Some(match value {
                            "true" => DeclaredFinite::True,
                            "false" => DeclaredFinite::False,
                            "unknown" => DeclaredFinite::Unknown,
                            other => {
                                return Err(SpecError::new(
                                    Some(line_no),
                                    Some(key),
                                    format!("expected true, false or unknown, found `{other}`"),
                                ))
                            }
                        })
                    }
                    _ => {
                        params.insert(key.to_string(), value.to_string());
                    }
                }
            }
        }
        let family = family.ok_or_else(|| SpecError::new(None, Some("family"), "missing field"))?;
        Ok((
            MethodSpecDoc {
                family,
                params,
                declared_finite,
            },
            lines,
        ))
    }

    /// Canonical single-line form.
    pub fn render(&self) -> String {
        let mut fields = vec![format!("family={}", self.family)];
        fields.extend(self.params.iter().map(|(k, v)| format!("{k}={v}")));
        if let Some(d) = self.declared_finite {
            fields.push(format!("declared_finite={}", d.as_str()));
        }
        fields.join(", ")
    }

    pub fn build(&self) -> Result<Method, SpecError> {
        self.build_with_lines(&FieldLines::default())
    }

    pub fn build_with_lines(&self, lines: &FieldLines) -> Result<Method, SpecError> {
        let err = |field: &str, message: String| SpecError::new(lines.line_of(field), Some(field), message);
        let info = self.family.info();
        for key in self.params.keys() {
            if !info.required.contains(&key.as_str()) && !info.optional.contains(&key.as_str()) {
                return Err(err(key, format!("not a parameter of family {}", self.family)));
            }
        }
        for key in info.required {
            if *key == "declared_finite" {
                if self.declared_finite.is_none() {
                    return Err(err(key, format!("required for family {}", self.family)));
                }
            } else if !self.params.contains_key(*key) {
                return Err(err(key, format!("required for family {}", self.family)));
            }
        }

        let exact = |key: &str| -> Result<Scalar, SpecError> {
            let text = &self.params[key];
            let v: Scalar = text.parse().map_err(|e| err(key, format!("{e}")))?;
            if !v.is_exact() {
                return Err(err(key, format!("exact rational literal required, found `{text}`")));
            }
            Ok(v)
        };
        let order = |key: &str| -> Result<u32, SpecError> {
            let v = exact(key)?;
            v.to_i64()
                .filter(|&k| v.is_integer() && k >= 1)
                .and_then(|k| u32::try_from(k).ok())
                .ok_or_else(|| err(key, format!("positive integer required, found `{}`", self.params[key])))
        };
        let list = |key: &str| -> Result<Vec<Scalar>, SpecError> {
            let text = self.params[key].trim();
            let inner = text
                .strip_prefix('[')
                .and_then(|t| t.strip_suffix(']'))
                .ok_or_else(|| err(key, format!("expected a list like [1, 1/2], found `{text}`")))?;
            let items: Vec<&str> = inner.split(',').map(str::trim).collect();
            if items.iter().any(|i| i.is_empty()) {
                return Err(err(key, "empty list entry".into()));
            }
            items
                .iter()
                .map(|i| {
                    let v: Scalar = i.parse().map_err(|e| err(key, format!("{e}")))?;
                    if v.is_exact() {
                        Ok(v)
                    } else {
                        Err(err(key, format!("exact rational literal required, found `{i}`")))
                    }
                })
                .collect()
        };
        let domain = |key: &str, e: norlund_core::MethodError| err(key, e.to_string());

        let method = match self.family {
            FamilyName::Unit => unit(),
            FamilyName::Cesaro => {
                let k = if self.params.contains_key("order") { order("order")? } else { 1 };
                cesaro(k).map_err(|e| domain("order", e))?
            }
            FamilyName::Geometric => geometric(exact("p")?).map_err(|e| domain("p", e))?,
            FamilyName::Poisson => poisson(exact("p")?).map_err(|e| domain("p", e))?,
            FamilyName::NegBinomial => {
                neg_binomial(exact("p")?, order("k")?).map_err(|e| domain("p", e))?
            }
            FamilyName::Zeta => {
                let s: Scalar = self.params["s"].parse().map_err(|e| err("s", format!("{e}")))?;
                zeta(s).map_err(|e| domain("s", e))?
            }
            FamilyName::Polynomial => polynomial(list("coeffs")?).map_err(|e| domain("coeffs", e))?,
            FamilyName::Hutton => hutton(exact("p")?).map_err(|e| domain("p", e))?,
            FamilyName::CustomList => {
                let coeffs = list("coeffs")?;
                custom_list(coeffs, self.declared_finite.expect("checked above"))
                    .map_err(|m| err("declared_finite", m))?
            }
        };

        if let (Some(declared), false) = (self.declared_finite, self.family == FamilyName::CustomList) {
            let actual = method.finiteness();
            let agrees = match declared {
                DeclaredFinite::True => actual == Finiteness::Finite,
                DeclaredFinite::False => actual == Finiteness::Infinite,
                DeclaredFinite::Unknown => true,
            };
            if !agrees {
                return Err(err(
                    "declared_finite",
                    format!("{} contradicts {}", declared.as_str(), method.name()),
                ));
            }
        }
        Ok(method)
    }
}

fn custom_list(coeffs: Vec<Scalar>, declared: DeclaredFinite) -> Result<Method, String> {
    let mut coeffs = coeffs;
    while coeffs.len() > 1 && coeffs.last().is_some_and(Scalar::is_zero) {
        coeffs.pop();
    }
    let name = format!(
        "custom-list[{}]",
        coeffs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
    );
    let degree = coeffs.len() - 1;
    let meta = match declared {
        DeclaredFinite::True => {
            let total: Scalar = coeffs.iter().sum();
            let tail = coeffs.clone();
            FinitenessInfo::finite()
                .with_total(total)
                .with_eventually_zero_after(degree)
                .with_tail_bound(move |n| Some(tail.iter().skip(n + 1).sum()))
        }
        DeclaredFinite::Unknown => FinitenessInfo::unknown(),
        DeclaredFinite::False => {
            return Err("a finite list of weights cannot be declared infinite".into());
        }
    };
    let values = coeffs;
    make_method(
        name,
        move |n| values.get(n).cloned().unwrap_or_else(Scalar::zero),
        meta,
    )
    .map_err(|e| e.to_string())
}

/// Reads `arg` as a file path when one exists, otherwise as inline text.
pub fn load_method(arg: &str) -> Result<Method, SpecLoadError> {
    let path = std::path::Path::new(arg);
    let text = if path.is_file() {
        std::fs::read_to_string(path).map_err(|e| SpecLoadError::Io(format!("{arg}: {e}")))?
    } else {
        arg.to_string()
    };
    let (doc, lines) = MethodSpecDoc::parse_with_lines(&text).map_err(SpecLoadError::Spec)?;
    doc.build_with_lines(&lines).map_err(SpecLoadError::Spec)
}

#[derive(Debug, Error)]
pub enum SpecLoadError {
    #[error("{0}")]
    Io(String),
    #[error("method spec: {0}")]
    Spec(SpecError),
}
