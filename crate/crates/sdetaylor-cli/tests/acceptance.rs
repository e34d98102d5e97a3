//! Acceptance criteria, one test each. Every test writes a single
//! `PASS`/`FAIL` line to stderr (uncaptured) before asserting.
//!
//! Two criteria contain printed reference values that exact arithmetic does
//! not reproduce. Those tests print `FAIL` and assert that the mismatches are
//! exactly the known ones, each backed by an independent exact value.

use std::io::Write;
use std::time::Instant;

use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};

use sdetaylor::coeffs::SparseTensor;
use sdetaylor::mse::{exact_mse_ito, exact_mse_ito_unit, ErrorQuery};
use sdetaylor::problemsval::{alternating_time_quadruple, check_identity, outer_time_double};
use sdetaylor::rngstream::{stream, StepRng};
use sdetaylor::schemes::series_tensor;
use sdetaylor::stochint::{expansion_sum, ito_value, GaussianBasis, IntegralLabel, Kind};
use sdetaylor::BigRational;
use sdetaylor_cli::{
    check_binomial_relation, check_coefficient_tables, check_determinism, check_error_constants,
    check_milstein, check_rank_tables, cmd_converge, golden, Family, StudySpec, TruncationSpec,
};

fn report(n: u32, name: &str, pass: bool, detail: &str, started: Instant) {
    let line = format!(
        "criterion {n} {}: {name}: {detail} [{:.2?}]\n",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn rat(s: &str) -> BigRational {
    s.parse().unwrap()
}

#[test]
fn criterion_1_golden_coefficients() {
    let t = Instant::now();
    let checks = check_coefficient_tables();
    let pass = checks.iter().all(|c| c.pass);
    let detail = checks
        .iter()
        .map(|c| c.detail.as_str())
        .collect::<Vec<_>>()
        .join(", ");
    report(1, "coefficient tables bit-exact", pass, &detail, t);
    assert!(pass, "{checks:?}");
}

/// Exact errors at unit step from an independent symbolic computation of
/// `‖K‖² − Σ C²` with shifted Legendre polynomials on `[0, 1]`.
const EXACT_CONSTANTS: [&str; 6] = [
    "3754499729/192008134890",
    "234761/10245312",
    "17261/2116800",
    "8909/529200",
    "53513/2116800",
    "32131/4233600",
];

#[test]
fn criterion_2_error_constants() {
    let t = Instant::now();
    let checks = check_error_constants();
    let mut unexplained = Vec::new();
    for ((c, g), want) in checks
        .iter()
        .zip(golden::ERROR_CONSTANTS.iter())
        .zip(EXACT_CONSTANTS)
    {
        let label = IntegralLabel::ito(g.i, g.l).unwrap();
        let got = exact_mse_ito_unit(&label, g.p).unwrap();
        assert_eq!(
            got,
            rat(want),
            "{}: exact engine disagrees with the independent value",
            g.name
        );
        let printed_ok = ((rat(want).to_f64().unwrap() - g.value) / g.value).abs()
            <= golden::ERROR_CONSTANT_RTOL;
        if c.pass != printed_ok {
            unexplained.push(c.name.clone());
        }
    }
    let failing: Vec<_> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.detail.clone())
        .collect();
    let pass = failing.is_empty();
    let detail = if pass {
        "6/6 printed constants reproduced".to_string()
    } else {
        format!(
            "{}/6 reproduced; printed values differ from exact arithmetic: {}",
            6 - failing.len(),
            failing.join("; ")
        )
    };
    report(2, "error constants at relative 5e-6", pass, &detail, t);
    assert!(unexplained.is_empty(), "{unexplained:?}");
    assert_eq!(failing.len(), 4, "{failing:?}");
}

#[test]
fn criterion_3_rank_tables() {
    let t = Instant::now();
    let checks = check_rank_tables();
    let pass = checks.iter().all(|c| c.pass);
    let detail = checks
        .iter()
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect::<Vec<_>>()
        .join("; ");
    report(3, "rank tables and enumeration", pass, &detail, t);
    assert!(checks[0].pass && checks[2].pass, "{checks:?}");
    assert_eq!(
        checks[1].detail,
        "n_E(10) = 226, table 261; g(10) = 1.5804, table 1.8252"
    );
}

#[test]
fn criterion_4_double_integral_closed_form() {
    let t = Instant::now();
    let delta = 0.5;
    let label = IntegralLabel::ito(&[1, 2], &[0, 0]).unwrap();
    let closed = |q: usize| delta * delta / (4.0 * (2 * q + 1) as f64);
    let mut worst: f64 = 0.0;
    for q in 0..=50 {
        let got = exact_mse_ito(&ErrorQuery::new(label.clone(), q, delta)).unwrap();
        worst = worst.max((got - closed(q)).abs() / closed(q));
    }
    let exact_ok = worst <= 1e-14;

    let p_ref = 200;
    let qs = [1, 4, 16];
    let reference = series_tensor::<f64>(&label, p_ref, delta).unwrap();
    let tensors: Vec<_> = qs
        .iter()
        .map(|&q| series_tensor::<f64>(&label, q, delta).unwrap())
        .collect();
    let trials = 100_000u64;
    let mut sums = vec![(0.0f64, 0.0f64); qs.len()];
    for trial in 0..trials {
        let mut rng = stream(4, trial, 0);
        let basis = GaussianBasis::<f64>::sample(&mut rng, 2, p_ref, delta);
        let full = ito_value(&label, &basis, &reference).unwrap();
        for (s, tq) in sums.iter_mut().zip(&tensors) {
            let d = full - ito_value(&label, &basis, tq).unwrap();
            s.0 += d * d;
            s.1 += d.powi(4);
        }
    }
    let n = trials as f64;
    let mut mc_ok = true;
    let mut parts = Vec::new();
    for (&q, &(s1, s2)) in qs.iter().zip(&sums) {
        let mean = s1 / n;
        let se = ((s2 / n - mean * mean) / (n - 1.0)).sqrt();
        let want = closed(q) - closed(p_ref);
        let z = (mean - want) / se;
        mc_ok &= z.abs() <= 4.0;
        parts.push(format!("q={q}: {mean:.4e} vs {want:.4e} (z={z:+.2})"));
    }
    let pass = exact_ok && mc_ok;
    report(
        4,
        "distinct double integral error",
        pass,
        &format!(
            "q<=50 worst relative {worst:.1e}; Monte Carlo {}",
            parts.join(", ")
        ),
        t,
    );
    assert!(pass);
}

/// Explicit forms for `k = 2, 3, 4` with indicator corrections.
fn explicit_ito(
    c: &BigRational,
    i: &[usize],
    j: &[usize],
    z: &dyn Fn(usize, usize) -> BigRational,
) -> BigRational {
    let one = |a: usize, b: usize| i[a] == i[b] && i[a] != 0 && j[a] == j[b];
    let zz = |g: usize| z(i[g], j[g]);
    let w = match i.len() {
        2 => {
            let mut w = zz(0) * zz(1);
            if one(0, 1) {
                w -= BigRational::one();
            }
            w
        }
        3 => {
            let mut w = zz(0) * zz(1) * zz(2);
            for (a, b, r) in [(0, 1, 2), (1, 2, 0), (0, 2, 1)] {
                if one(a, b) {
                    w -= zz(r);
                }
            }
            w
        }
        4 => {
            let mut w = zz(0) * zz(1) * zz(2) * zz(3);
            for (a, b, r, s) in [
                (0, 1, 2, 3),
                (0, 2, 1, 3),
                (0, 3, 1, 2),
                (1, 2, 0, 3),
                (1, 3, 0, 2),
                (2, 3, 0, 1),
            ] {
                if one(a, b) {
                    w -= zz(r) * zz(s);
                }
            }
            for (a, b, r, s) in [(0, 1, 2, 3), (0, 2, 1, 3), (0, 3, 1, 2)] {
                if one(a, b) && one(r, s) {
                    w += BigRational::one();
                }
            }
            w
        }
        _ => unreachable!(),
    };
    c.clone() * w
}

fn small_rational(rng: &mut StepRng) -> BigRational {
    BigRational::new(
        rng.random_range(-9i64..=9).into(),
        rng.random_range(1i64..=7).into(),
    )
}

#[test]
fn criterion_5_matching_forms() {
    let t = Instant::now();
    let mut rng = StepRng::seed_from_u64(5);
    let mut mismatches = 0;
    let configs = 1000;
    for _ in 0..configs {
        let k = rng.random_range(2..=4usize);
        let p = rng.random_range(0..=2usize);
        let i: Vec<usize> = (0..k).map(|_| rng.random_range(0..=3)).collect();
        let zeta: Vec<Vec<BigRational>> = (0..4)
            .map(|_| (0..=p).map(|_| small_rational(&mut rng)).collect())
            .collect();
        let z = |a: usize, b: usize| zeta[a][b].clone();
        let mut tensor = SparseTensor::empty(k);
        let mut want = BigRational::zero();
        let mut j = vec![0usize; k];
        loop {
            let c = small_rational(&mut rng);
            want += explicit_ito(&c, &i, &j, &z);
            tensor.push(&j, c);
            let Some(g) = (0..k).find(|&g| j[g] < p) else {
                break;
            };
            j[g] += 1;
            j[..g].iter_mut().for_each(|x| *x = 0);
        }
        let got = expansion_sum(&tensor, &i, Kind::Ito, z);
        if got != want {
            mismatches += 1;
        }
    }
    let pass = mismatches == 0;
    report(
        5,
        "generic corrections vs explicit forms",
        pass,
        &format!("{mismatches}/{configs} configurations differ"),
        t,
    );
    assert!(pass);
}

#[test]
fn criterion_6_milstein() {
    let t = Instant::now();
    let c = check_milstein(1000, 6).unwrap();
    report(6, "order-1.0 step equals Milstein", c.pass, &c.detail, t);
    assert!(c.pass);
}

#[test]
fn criterion_7_strong_orders() {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for r in [2, 3, 4] {
        let spec = StudySpec {
            problem: "gbm".into(),
            family: Family::Ito,
            r,
            grid: vec![8, 16, 32, 64, 128],
            trials: 10_000,
            seed: 7,
            truncation: TruncationSpec::Target {
                constant: 1.0,
                p_max: 512,
            },
            compare_families: false,
        };
        let rep = cmd_converge(&spec).unwrap();
        let nominal = r as f64 / 2.0;
        pass &= (rep.slope - nominal).abs() <= 0.2;
        parts.push(format!("order {nominal}: slope {:.3}", rep.slope));
    }
    report(
        7,
        "fitted GBM slopes within 0.2",
        pass,
        &parts.join(", "),
        t,
    );
    assert!(pass);
}

#[test]
fn criterion_8_identities() {
    let t = Instant::now();
    let binomial = check_binomial_relation();
    let one = BigRational::one();
    let mut pass = binomial.pass;
    let mut parts = vec![binomial.detail.clone()];
    for case in [
        outer_time_double(one.clone()),
        alternating_time_quadruple(one.clone()),
    ] {
        let r = check_identity(&case, &[2, 4, 8], 20_000, 8).unwrap();
        pass &= r.pass;
        let last = r.rows.last().unwrap();
        parts.push(format!(
            "{}: ms difference {:.2e} (bound {:.2e})",
            r.name, last.ms_difference, last.truncation_mse
        ));
    }
    report(8, "identity suite", pass, &parts.join("; "), t);
    assert!(pass);
}

#[test]
fn criterion_9_determinism() {
    let t = Instant::now();
    let c = check_determinism(9).unwrap();
    report(9, "seeded converge reruns identical", c.pass, &c.detail, t);
    assert!(c.pass);
}
