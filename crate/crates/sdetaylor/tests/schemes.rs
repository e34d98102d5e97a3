use proptest::prelude::*;
use rand::SeedableRng;

use sdetaylor::rngstream::{stream, StepRng};
use sdetaylor::schemes::study::{summarize, Study};
use sdetaylor::schemes::{builtin_problem, gbm, PreparedScheme, SchemeConfig, BUILTIN_IDS};
use sdetaylor::stochint::Kind;

#[test]
fn one_step_mean_is_drift() {
    let (mu, sigma, x, delta) = (0.06, 0.3, 1.5, 0.1);
    let pb = gbm::<f64>(mu, sigma, x, 1.0);
    let n = 1_000_000u64;
    for r in 2..=6 {
        let sch = PreparedScheme::new(&pb, &SchemeConfig::ito(r).unwrap(), delta).unwrap();
        let mut rng = StepRng::seed_from_u64(r as u64);
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let basis = sch.sample_basis(&mut rng);
            let d = sch.step(&pb, &[x], 0.0, &basis).unwrap()[0] - x;
            s1 += d;
            s2 += d * d;
        }
        let mean = s1 / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        let gap = (mean - delta * mu * x).abs();
        assert!(
            gap <= 4.0 * se + mu * mu * delta * delta * x,
            "r={r}: mean {mean}, gap {gap}, se {se}"
        );
    }
}

#[test]
fn families_agree_on_builtins() {
    for id in BUILTIN_IDS {
        let pb = builtin_problem::<f64>(id).unwrap();
        for r in [2, 3] {
            let study = Study::new(&pb, &SchemeConfig::ito(r).unwrap(), &[4, 8, 16], true).unwrap();
            let trials: Vec<_> = (0..400).map(|t| study.trial(11, t).unwrap()).collect();
            let s = summarize(&study, &trials);
            assert_eq!(
                s.families_agree(3.0),
                Some(true),
                "{id} r={r}: {:?}",
                s.rows
            );
        }
    }
}

#[test]
fn stratonovich_study_converges() {
    let pb = builtin_problem::<f64>("gbm").unwrap();
    let cfg = SchemeConfig::new(Kind::Stratonovich, 3).unwrap();
    let study = Study::new(&pb, &cfg, &[8, 16, 32], false).unwrap();
    let trials: Vec<_> = (0..1000).map(|t| study.trial(12, t).unwrap()).collect();
    let s = summarize(&study, &trials);
    assert!((s.slope - 1.5).abs() < 0.3, "slope {}", s.slope);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn zero_noise_is_deterministic_taylor(mu in -2.0f64..2.0, x in 0.1f64..3.0, delta in 0.01f64..0.5, r in 2usize..=6) {
        let pb = gbm::<f64>(mu, 0.0, x, 1.0);
        let sch = PreparedScheme::new(&pb, &SchemeConfig::ito(r).unwrap(), delta).unwrap();
        let basis = sch.sample_basis(&mut stream(1, 0, 0));
        let got = sch.step(&pb, &[x], 0.0, &basis).unwrap()[0];
        let mut want = x;
        let mut term = x;
        for k in 1..=(r + 1) / 2 {
            term *= mu * delta / k as f64;
            want += term;
        }
        prop_assert!((got - want).abs() <= 1e-13 * want.abs().max(1.0), "r={} got {} want {}", r, got, want);
    }
}
