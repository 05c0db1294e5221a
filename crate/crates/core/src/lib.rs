//! Nörlund summation methods with exact rational arithmetic.
//!
//! A method `(N, p)` is given by nonnegative weights `p_n` with `p_0 > 0`; it
//! sends a sequence `s` to the means `t_m = (p_m s_0 + ⋯ + p_0 s_m) / P_m`.
//! This crate builds the standard families, evaluates transforms, and
//! compares methods through the power series `q(x)/p(x)`.

pub mod comparison;
pub mod methods;
pub mod numerics;
pub mod transform;

pub use comparison::{
    bracket, comparison_coefficients, enestrom_kakeya_check, equivalent, includes, is_trivial,
    kaluza_szego_check, ratio_dominance_check, regularity_check, summed_identity_check,
    BracketKind, BracketValue, BracketVerdict, Budget, CertificateKind, Comparator,
    ComparisonError, ComparisonTable, EquivalenceVerdict, InclusionBasis, InclusionVerdict,
    Relation, RegularityVerdict,
};
pub use methods::{
    cesaro, geometric, hutton, make_method, neg_binomial, poisson, polynomial, unit, zeta, Family,
    Finiteness, FinitenessInfo, Method, MethodError,
};
pub use numerics::{NumericsError, Scalar};
pub use transform::{
    detect_limit, norlund_mean, norlund_means, summability_verdict, transform_prefix,
    BuiltinSequence, LimitCriteria, LimitKind, LimitVerdict, SequenceSpec, TransformError,
    TransformTrace,
};
