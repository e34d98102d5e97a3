use super::*;

fn run_args(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("sdetaylor")
        .chain(args.iter().copied())
        .map(OsString::from)
        .collect();
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

#[test]
fn coefficient_csv_has_one_row_per_index() {
    let csv = cmd_coeffs(4, &[0; 4], 2, Format::Csv).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "j1,j2,j3,j4,exact,decimal");
    assert_eq!(lines.len(), 81 + 1);
}

#[test]
fn coefficient_table_entry() {
    let csv = cmd_coeffs(3, &[0; 3], 6, Format::Csv).unwrap();
    assert!(
        csv.lines().any(|l| l.starts_with("1,0,3,2/105,")),
        "missing j1=1 j2=0 j3=3"
    );
}

#[test]
fn coefficient_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let (code, _, err) = run_args(&[
        "coeffs",
        "--k",
        "3",
        "--l",
        "0,1,0",
        "--p",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let back = sdetaylor::coeffs::import_cache(&path).unwrap();
    let w = WeightVector::new(vec![0, 1, 0]).unwrap();
    let fresh = coefficient_tensor(&w, 3).unwrap();
    assert_eq!(back.len(), 1);
    assert_eq!(back[0].unit_values(), fresh.unit_values());
}

#[test]
fn weights_expand_or_match_k() {
    assert_eq!(parse_weights(3, "1").unwrap(), vec![1, 1, 1]);
    assert_eq!(parse_weights(3, "0,1,0").unwrap(), vec![0, 1, 0]);
    assert!(parse_weights(3, "0,1").is_err());
    assert!(parse_weights(3, "x").is_err());
}

#[test]
fn mse_column_decreases() {
    let rows = cmd_mse("I_(000)^(1,2,3)", 0, 6, 1.0).unwrap();
    assert!(rows.windows(2).all(|w| w[1].mse <= w[0].mse));
    assert!(rows.iter().all(|r| r.method == "exact" && r.bound >= r.mse));
    // sympy: 1/6 - sum of squares up to p = 6
    assert!((rows[6].mse - 3754499729.0 / 192008134890.0).abs() < 1e-15);
}

#[test]
fn mse_double_distinct_closed_form() {
    for r in cmd_mse("I_(00)^(1,2)", 0, 10, 0.5).unwrap() {
        let want = 0.25 / (4.0 * (2 * r.p + 1) as f64);
        assert!((r.mse - want).abs() <= 1e-15 * want, "p={}", r.p);
    }
}

#[test]
fn mse_repeated_stratonovich_reports_bound() {
    let rows = cmd_mse("I*_(00)^(1,1)", 1, 2, 1.0).unwrap();
    assert!(rows.iter().all(|r| r.method == "bound" && r.mse == r.bound));
}

#[test]
fn rank_rows() {
    let csv = cmd_ranks(10, Format::Csv).unwrap();
    let rows: Vec<Vec<&str>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[6][1], "127");
    assert!(rows[0][1..]
        .iter()
        .all(|v| v.parse::<f64>().unwrap() == 1.0));
    let json: serde_json::Value =
        serde_json::from_str(&cmd_ranks(3, Format::Json).unwrap()).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 3);
}

#[test]
fn truncation_specs() {
    assert_eq!(
        "fixed:4".parse::<TruncationSpec>().unwrap(),
        TruncationSpec::Fixed { p: 4 }
    );
    assert_eq!(
        "target:0.5".parse::<TruncationSpec>().unwrap(),
        TruncationSpec::Target {
            constant: 0.5,
            p_max: 512
        }
    );
    assert!("target".parse::<TruncationSpec>().is_ok());
    for bad in ["fixed", "fixed:x", "target:-1", "exact:3"] {
        assert!(bad.parse::<TruncationSpec>().is_err(), "{bad}");
    }
}

#[test]
fn orders() {
    assert_eq!(parse_order("1.5"), Ok(3));
    assert_eq!(parse_order("3"), Ok(6));
    assert!(parse_order("1.25").is_err());
    assert!(parse_order("0.5").is_err());
}

fn spec() -> StudySpec {
    StudySpec {
        problem: "gbm".into(),
        family: Family::Ito,
        r: 2,
        grid: vec![4, 8, 16],
        trials: 200,
        seed: 3,
        truncation: TruncationSpec::Target {
            constant: 1.0,
            p_max: 512,
        },
        compare_families: false,
    }
}

#[test]
fn study_spec_invariants() {
    assert!(spec().validate().is_ok());
    let cases: Vec<Box<dyn Fn(&mut StudySpec)>> = vec![
        Box::new(|s| s.trials = 99),
        Box::new(|s| s.grid = vec![8, 8]),
        Box::new(|s| s.grid = vec![16, 8]),
        Box::new(|s| s.grid = vec![8]),
        Box::new(|s| s.problem = "heston".into()),
        Box::new(|s| s.r = 7),
    ];
    for f in cases {
        let mut s = spec();
        f(&mut s);
        assert!(matches!(s.validate(), Err(CliError::Usage(_))), "{s:?}");
    }
}

#[test]
fn converge_report_shape() {
    let r = cmd_converge(&spec()).unwrap();
    assert_eq!(r.errors.len(), 3);
    assert_eq!(r.reference, ReferenceKind::Exact);
    assert!(r.errors.windows(2).all(|w| w[1].rms_error < w[0].rms_error));
    assert!(r.slope > 0.5 && r.slope < 1.5, "slope {}", r.slope);
    assert!(r.families_agree.is_none());
    let v: serde_json::Value = serde_json::to_value(&r).unwrap();
    for key in ["config", "seed", "reference", "errors", "slope"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn converge_is_reproducible() {
    let mut s = spec();
    s.compare_families = true;
    let a = serde_json::to_string(&cmd_converge(&s).unwrap()).unwrap();
    let b = serde_json::to_string(&cmd_converge(&s).unwrap()).unwrap();
    assert_eq!(a, b);
    s.seed += 1;
    assert_ne!(
        a,
        serde_json::to_string(&cmd_converge(&s).unwrap()).unwrap()
    );
}

#[test]
fn fine_grid_reference_for_linear2d() {
    let mut s = spec();
    s.problem = "linear2d".into();
    s.grid = vec![2, 4];
    s.trials = 100;
    let r = cmd_converge(&s).unwrap();
    assert!(
        matches!(r.reference, ReferenceKind::FineGrid { steps: 64, .. }),
        "{:?}",
        r.reference
    );
}

#[test]
fn exit_codes() {
    assert_eq!(run_args(&["ranks", "--r-max", "3"]).0, EXIT_PASS);
    assert_eq!(
        run_args(&["converge", "--grid", "4,8", "--trials", "100", "--format", "csv"]).0,
        EXIT_PASS
    );
    assert_eq!(run_args(&["ranks", "--r-max", "0"]).0, EXIT_USAGE);
    assert_eq!(run_args(&["bogus"]).0, EXIT_USAGE);
    assert_eq!(run_args(&["converge", "--trials", "10"]).0, EXIT_USAGE);
    assert_eq!(
        run_args(&["mse", "--label", "I_(0)^(x)", "--p-to", "2"]).0,
        EXIT_FAIL
    );
    assert_eq!(run_args(&["coeffs", "--k", "9", "--p", "1"]).0, EXIT_FAIL);
    let (code, out, _) = run_args(&["--help"]);
    assert_eq!(code, EXIT_PASS);
    assert!(out.contains("converge"));
}

#[test]
fn config_file_fills_unset_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# ranks only\nformat = json\n").unwrap();
    let (code, out, err) = run_args(&["ranks", "--r-max", "2", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(out.trim_start().starts_with('['), "{out}");
    let (code, _, _) = run_args(&[
        "ranks",
        "--config",
        dir.path().join("missing").to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn milstein_check_passes() {
    assert!(check_milstein(200, 5).unwrap().pass);
}

#[test]
fn coefficient_tables_pass() {
    assert!(check_coefficient_tables().iter().all(|c| c.pass));
}
