//! Method fixtures shared by the benchmarks.

use norlund_core::{geometric, hutton, poisson, polynomial, unit, zeta, Method, Scalar};

/// `(label, q, p)` pairs whose comparison tables are benchmarked.
pub fn comparison_pairs() -> Vec<(&'static str, Method, Method)> {
    let r = Scalar::ratio;
    vec![
        ("unit/geometric(1/2)", unit(), geometric(r(1, 2)).unwrap()),
        ("unit/poisson(1)", unit(), poisson(r(1, 1)).unwrap()),
        ("unit/zeta(2)", unit(), zeta(r(2, 1)).unwrap()),
        (
            "polynomial/hutton(1)",
            polynomial(vec![r(1, 1), r(3, 2), r(1, 2)]).unwrap(),
            hutton(r(1, 1)).unwrap(),
        ),
        ("zeta(2)/poisson(1)", zeta(r(2, 1)).unwrap(), poisson(r(1, 1)).unwrap()),
    ]
}
