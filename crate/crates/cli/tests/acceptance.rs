//! Acceptance criteria. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line; exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use norlund_core::comparison::{
    bracket, comparison_coefficients, enestrom_kakeya_check, equivalent, includes, is_trivial,
    kaluza_szego_check, regularity_check, BracketValue, CertificateKind, ComparisonError,
    InclusionBasis, Relation, RegularityVerdict,
};
use norlund_core::methods::{
    cesaro, geometric, hutton, make_method, neg_binomial, poisson, polynomial, unit, zeta,
    FinitenessInfo, Method,
};
use norlund_core::transform::{
    norlund_mean, norlund_means, transform_prefix, BuiltinSequence, LimitCriteria, LimitKind,
    SequenceSpec,
};
use norlund_core::Scalar;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TIME_LIMIT: Duration = Duration::from_secs(10);

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn r(n: i64, d: i64) -> Scalar {
    Scalar::ratio(n, d)
}

fn int(n: i64) -> Scalar {
    Scalar::from_int(n)
}

fn grandi() -> SequenceSpec {
    SequenceSpec::builtin(BuiltinSequence::OneZeroAlternating)
}

/// Truncated Cauchy product written out independently of the library.
fn product(a: &[Scalar], b: &[Scalar], len: usize) -> Vec<Scalar> {
    let mut out = vec![Scalar::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    out
}

fn random_method(rng: &mut ChaCha8Rng, len: usize, tag: &str) -> Method {
    let coeffs: Vec<Scalar> = (0..len)
        .map(|n| {
            let d = rng.random_range(1..=8i64);
            let lo = if n == 0 { 1 } else { 0 };
            r(rng.random_range(lo..=10 * d), d)
        })
        .collect();
    make_method(
        tag,
        move |n| coeffs.get(n).cloned().unwrap_or_else(Scalar::zero),
        FinitenessInfo::unknown(),
    )
    .expect("valid random method")
}

/// Integer numerators over the lcm of the denominators.
fn lift(values: &[Scalar]) -> (Vec<BigInt>, BigInt) {
    let rats: Vec<&BigRational> = values.iter().map(|v| v.as_exact().expect("exact")).collect();
    let den = rats.iter().fold(BigInt::from(1), |acc, r| acc.lcm(r.denom()));
    let nums = rats.iter().map(|r| r.numer() * (&den / r.denom())).collect();
    (nums, den)
}

/// Truncated integer Cauchy product.
fn int_product(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
    (0..len)
        .map(|n| (0..=n).map(|i| &a[i] * &b[n - i]).sum())
        .collect()
}

fn criterion_1() -> Check {
    const N: usize = 128;
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    for pair in 0..200 {
        let p = random_method(&mut rng, N + 1, "p");
        let q = random_method(&mut rng, N + 1, "q");
        let k = comparison_coefficients(&q, &p, N).map_err(|e| e.to_string())?;
        let l = comparison_coefficients(&p, &q, N).map_err(|e| e.to_string())?;
        // With p = A/D, q = C/D', k = K/L: Σ k_i p_(n-i) = q_n ⇔ D' Σ K_i A_(n-i) = C_n D L.
        let (a, d) = lift(&p.coefficients(N).unwrap());
        let (c, d2) = lift(&q.coefficients(N).unwrap());
        let (kk, lk) = lift(&k.k);
        let (ll, ll_den) = lift(&l.k);
        let lhs = int_product(&kk, &a, N + 1);
        for n in 0..=N {
            ensure!(&lhs[n] * &d2 == &c[n] * &d * &lk, "pair {pair}: sum k_i p_(n-i) != q_n at n = {n}");
        }
        let delta = int_product(&kk, &ll, N + 1);
        let scale = &lk * &ll_den;
        ensure!(delta[0] == scale, "pair {pair}: (k*l)_0 != 1");
        ensure!(delta[1..].iter().all(|v| v.is_zero()), "pair {pair}: k*l has a nonzero tail");
    }
    Ok("200 pairs, n <= 128, convolution and duality exact".into())
}

fn criterion_2() -> Check {
    let c = cesaro(1).unwrap();
    let u = unit();
    let k = comparison_coefficients(&c, &u, 256).unwrap();
    ensure!(k.k.iter().all(|v| *v == int(1)), "k(c,u)_n != 1");
    let kuc = comparison_coefficients(&u, &c, 256).unwrap();
    ensure!(
        kuc.abs_partial[1..].iter().all(|a| *a == int(2)),
        "[u:c] partial sums are not exactly 2 for n >= 1"
    );

    let criteria = LimitCriteria::default();
    let trace = transform_prefix(&c, &grandi(), 10_000, criteria).unwrap();
    let t_m = trace.values.last().unwrap().to_f64();
    ensure!((t_m - 0.5).abs() <= 1e-3, "|t_M - 1/2| = {}", (t_m - 0.5).abs());
    ensure!(
        matches!(trace.verdict.kind, LimitKind::Converged { limit, .. } if (limit - 0.5).abs() <= 1e-3),
        "verdict {:?}",
        trace.verdict.kind
    );

    let v = includes(&c, &u, 256).unwrap();
    ensure!(
        v.relation == Relation::Inconclusive
            && matches!(v.basis, InclusionBasis::RieszFiniteHorizon { .. }),
        "bracket criterion applied to a non-finite method"
    );
    ensure!(
        matches!(equivalent(&c, &u, 256), Err(ComparisonError::RequiresFinite { .. })),
        "equivalence not refused for (c, u)"
    );
    Ok(format!("t_10000 = {t_m:.8}; bracket criterion refused for (c, u)"))
}

fn criterion_3() -> Check {
    let p = poisson(int(1)).unwrap();
    let t = comparison_coefficients(&unit(), &p, 30).unwrap();
    let mut fact = BigInt::from(1);
    for (n, k) in t.k.iter().enumerate() {
        if n > 0 {
            fact *= n;
        }
        let sign = if n % 2 == 0 { 1 } else { -1 };
        let expected = Scalar::Exact(BigRational::new(BigInt::from(sign), fact.clone()));
        ensure!(*k == expected, "k_{n} = {k}");
    }
    let a30 = t.abs_sum().to_f64();
    ensure!((a30 - std::f64::consts::E).abs() <= 1e-9, "A_30 = {a30}");
    let v = is_trivial(&p, 30).unwrap();
    ensure!(v.equivalent, "poisson(1) not certified trivial");
    Ok(format!("A_30 = {a30:.15}; trivial"))
}

/// `t_m` for weights `p^n` on `1, 0, 1, 0, …`, summed directly.
fn geometric_grandi_mean(ratio: i64, m: usize) -> BigRational {
    let p = BigInt::from(ratio);
    let num: BigInt = (0..=m).step_by(2).map(|n| p.pow((m - n) as u32)).sum();
    let den = (p.pow(m as u32 + 1) - 1) / (p - 1);
    BigRational::new(num, den)
}

fn criterion_4() -> Check {
    let u = unit();
    let g = geometric(r(1, 2)).unwrap();
    let b = bracket(&u, &g, 256).unwrap();
    ensure!(b.table.abs_partial[1] == r(3, 2), "A_1 = {}", b.table.abs_partial[1]);
    ensure!(b.value() == Some(&BracketValue::Exact(r(3, 2))), "[u:p] = {:?}", b.value());
    let b = bracket(&g, &u, 256).unwrap();
    ensure!(b.value() == Some(&BracketValue::Exact(int(2))), "[p:u] = {:?}", b.value());
    ensure!(g.meta().total == Some(int(2)), "declared total {:?}", g.meta().total);
    ensure!(b.table.abs_sum() <= &int(2), "A_N exceeds the total");

    let g2 = geometric(int(2)).unwrap();
    let reg = regularity_check(&g2, 200).unwrap();
    ensure!(
        matches!(reg, RegularityVerdict::NotRegularEvidence { .. }),
        "geometric(2): {reg:?}"
    );

    let t = norlund_mean(&g2, &grandi(), 200).unwrap();
    let oracle = Scalar::Exact(geometric_grandi_mean(2, 200));
    ensure!(t == oracle, "t_200 disagrees with the direct sum");
    let far = Scalar::Exact(geometric_grandi_mean(2, 4000)).to_f64();
    ensure!((far - 2.0 / 3.0).abs() <= 1e-12, "high-m value {far}");
    let err = (t.to_f64() - 2.0 / 3.0).abs();
    ensure!(err <= 1e-6, "|t_200 - 2/3| = {err}");
    Ok(format!("[u:p] = 3/2, [p:u] = 2, geometric(2) not regular, |t_200 - 2/3| = {err:.1e}"))
}

fn criterion_5() -> Check {
    let u = unit();
    for k in 1..=3u32 {
        let p = neg_binomial(r(1, 2), k).unwrap();
        let b = bracket(&u, &p, 256).unwrap();
        let expected = r(3, 2).powi(k as i32).unwrap();
        ensure!(
            b.value() == Some(&BracketValue::Exact(expected.clone())),
            "k={k}: [u:p] = {:?}",
            b.value()
        );
        ensure!(
            b.certificate() == Some(&CertificateKind::EventuallyZero { after: k as usize }),
            "k={k}: certificate {:?}",
            b.certificate()
        );
        ensure!(
            b.table.k[k as usize + 1..].iter().all(Scalar::is_zero),
            "k={k}: k_n nonzero past index {k}"
        );
        let total = (int(1) - r(1, 2)).powi(-(k as i32)).unwrap();
        let b = bracket(&p, &u, 256).unwrap();
        ensure!(
            b.value() == Some(&BracketValue::Exact(total.clone())),
            "k={k}: [p:u] = {:?}",
            b.value()
        );
        ensure!(total == int(1 << k), "k={k}: total {total}");
    }
    Ok("[u:p] = (3/2)^k, [p:u] = 2^k for k = 1, 2, 3".into())
}

fn criterion_6() -> Check {
    let z = zeta(int(2)).unwrap();
    let w = z.coefficients(257).unwrap();
    for n in 1..=256 {
        ensure!(&w[n + 1] * &w[n - 1] > &w[n] * &w[n], "log-convexity fails at n = {n}");
    }
    let rep = kaluza_szego_check(&z, 256).map_err(|e| e.to_string())?;
    ensure!(rep.hypothesis_ok && rep.k_sign_ok && rep.tail_sum_ok, "report {rep:?}");
    let t = comparison_coefficients(&unit(), &z, 256).map_err(|e| e.to_string())?;
    ensure!(t.k[0] == int(1), "k_0 = {}", t.k[0]);
    ensure!(t.k[1..].iter().all(|k| !k.is_positive()), "positive k_n");
    ensure!(t.abs_sum() <= &int(2), "A_256 = {}", t.abs_sum().to_f64());
    let v = is_trivial(&z, 256).map_err(|e| e.to_string())?;
    ensure!(v.equivalent, "zeta(2) not certified trivial");
    Ok(format!("A_256 = {:.12}; trivial", t.abs_sum().to_f64()))
}

fn criterion_7() -> Check {
    let h = hutton(int(1)).unwrap();
    let b = bracket(&unit(), &h, 256).unwrap();
    for (n, k) in b.table.k.iter().enumerate() {
        ensure!(*k == int(if n % 2 == 0 { 1 } else { -1 }), "k_{n} = {k}");
    }
    ensure!(b.is_certified_infinite(), "[u:p] not certified infinite");
    ensure!(!is_trivial(&h, 256).unwrap().equivalent, "hutton(1) reported trivial");

    let p = polynomial(vec![int(1), r(1, 2)]).unwrap();
    let ek = enestrom_kakeya_check(&p).unwrap();
    ensure!(ek.applies && ek.trivial_certified, "EK report {ek:?}");
    ensure!(ek.rho_min == Some(int(2)), "rho_min = {:?}", ek.rho_min);
    ensure!(is_trivial(&p, 256).unwrap().equivalent, "polynomial([1,1/2]) not trivial");

    let means = norlund_means(&h, &grandi(), 1000).unwrap();
    ensure!(means[1..].iter().all(|t| *t == r(1, 2)), "hutton(1) mean differs from 1/2");
    Ok("hutton(1) nontrivial; [1, 1/2] trivial with rho_min = 2; Grandi -> 1/2".into())
}

fn criterion_8() -> Check {
    let p = hutton(int(1)).unwrap();
    let q = polynomial(vec![int(1), r(3, 2), r(1, 2)]).unwrap();
    let v = includes(&p, &q, 256).unwrap();
    ensure!(v.relation == Relation::Includes, "relation {}", v.relation);
    let InclusionBasis::FiniteBracket(b) = &v.basis else {
        return Err("inclusion not decided by the bracket".into());
    };
    ensure!(b.value() == Some(&BracketValue::Exact(r(3, 2))), "[q:p] = {:?}", b.value());
    let k_oracle = [int(1), r(1, 2)];
    let qc = q.coefficients(256).unwrap();
    ensure!(product(&k_oracle, &p.coefficients(256).unwrap(), 257) == qc, "(1 + x)(1 + x/2) != q");
    for (n, k) in b.table.k.iter().enumerate() {
        let expected = k_oracle.get(n).cloned().unwrap_or_else(Scalar::zero);
        ensure!(*k == expected, "k_{n} = {k}");
    }
    let means = norlund_means(&q, &grandi(), 1000).unwrap();
    ensure!(means[2..].iter().all(|t| *t == r(1, 2)), "(N,q) mean differs from 1/2");
    Ok("[q:p] = 3/2 exact; (N,q) Grandi means = 1/2 for m >= 2".into())
}

fn random_convergent(rng: &mut ChaCha8Rng) -> (SequenceSpec, Scalar) {
    let limit = r(rng.random_range(-50..=50), rng.random_range(1..=10));
    let c = r(rng.random_range(-20..=20), 10);
    let seq = match rng.random_range(0..3) {
        0 => {
            let den = rng.random_range(2..=9i64);
            let num = rng.random_range(1..=den / 2) * if rng.random_bool(0.5) { 1 } else { -1 };
            let ratio = r(num, den);
            let (l, c) = (limit.clone(), c.clone());
            SequenceSpec::generator(move |n| &l + &(&c * &ratio.powi(n as i32).unwrap()))
        }
        1 => {
            let (l, c) = (limit.clone(), c.clone());
            SequenceSpec::generator(move |n| {
                let m = n as i64 + 1;
                &l + &(&c / &int(m * m * m))
            })
        }
        _ => {
            let bumps: Vec<Scalar> = (0..5).map(|_| r(rng.random_range(-5..=5), 10)).collect();
            let l = limit.clone();
            SequenceSpec::generator(move |n| match bumps.get(n) {
                Some(b) => &l + b,
                None => l.clone(),
            })
        }
    };
    (seq.with_limit(limit.clone()), limit)
}

fn criterion_9() -> Check {
    let methods = [
        geometric(r(1, 2)).unwrap(),
        poisson(int(1)).unwrap(),
        zeta(int(2)).unwrap(),
        hutton(int(1)).unwrap(),
        neg_binomial(r(1, 2), 2).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sequences: Vec<(SequenceSpec, Scalar)> = (0..20).map(|_| random_convergent(&mut rng)).collect();
    let mut worst = 0.0f64;
    for m in &methods {
        ensure!(m.is_declared_finite(), "{} not finite", m.name());
        for (i, (seq, limit)) in sequences.iter().enumerate() {
            let t = norlund_mean(m, seq, 200).unwrap();
            let err = (&t - limit).abs().to_f64();
            worst = worst.max(err);
            ensure!(err <= 1e-4, "{} on sequence {i}: |t_200 - limit| = {err}", m.name());
        }
    }
    Ok(format!("5 methods x 20 sequences, worst |t_200 - limit| = {worst:.2e}"))
}

fn norlund(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_norlund"))
        .args(args)
        .output()
        .expect("run norlund")
}

fn criterion_10() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in 0..2 {
        let path = dir.path().join(format!("compare-{run}.csv"));
        let out = norlund(&[
            "compare",
            "--p",
            "family=geometric, p=1/2",
            "--q",
            "family=unit",
            "--seed",
            "42",
            "--out",
            path.to_str().unwrap(),
        ]);
        ensure!(out.status.code() == Some(0), "compare exit {:?}", out.status.code());
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    ensure!(outputs[0] == outputs[1], "compare outputs differ");
    ensure!(!outputs[0].is_empty(), "empty compare output");

    let undecided = norlund(&["transform", "--method", "family=unit", "--series", "grandi"]);
    ensure!(undecided.status.code() == Some(3), "unit/grandi exit {:?}", undecided.status.code());
    let converged = norlund(&["transform", "--method", "family=cesaro", "--series", "grandi"]);
    ensure!(converged.status.code() == Some(0), "cesaro/grandi exit {:?}", converged.status.code());
    let invalid = norlund(&["transform", "--method", "family=geometric, p=0", "--series", "grandi"]);
    ensure!(invalid.status.code() == Some(2), "validation exit {:?}", invalid.status.code());
    let missing = dir.path().join("no-such-dir").join("out.csv");
    let io = norlund(&[
        "transform",
        "--method",
        "family=cesaro",
        "--series",
        "grandi",
        "--out",
        missing.to_str().unwrap(),
    ]);
    ensure!(io.status.code() == Some(1), "I/O exit {:?}", io.status.code());
    Ok(format!("{} identical bytes; exit codes 0/3/2/1", outputs[0].len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("exact convolution identity and duality", criterion_1),
        ("Cesaro comparison with the unit method", criterion_2),
        ("Poisson method reciprocal and triviality", criterion_3),
        ("geometric methods", criterion_4),
        ("negative binomial brackets", criterion_5),
        ("log-convex zeta weights", criterion_6),
        ("Hutton method and decreasing polynomials", criterion_7),
        ("inclusion between finite polynomial methods", criterion_8),
        ("finite methods are regular", criterion_9),
        ("CLI determinism and exit codes", criterion_10),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = match result {
            Ok(_) if elapsed > TIME_LIMIT => Err(format!("exceeded {}s", TIME_LIMIT.as_secs())),
            other => other,
        };
        let (status, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {:>2} {status} [{:.2}s] {name}: {detail}",
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
