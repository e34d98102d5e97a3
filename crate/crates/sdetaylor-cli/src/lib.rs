//! Command-line front end: coefficient export, error tables, rank tables,
//! convergence studies and the validation suite.

pub mod config;
pub mod golden;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use sdetaylor::coeffs::{
    cache_json, coefficient_tensor, unit_coefficient, CoeffError, CoeffStore, WeightVector,
};
use sdetaylor::mse::{
    exact_mse_ito, exact_mse_ito_unit, exact_mse_strat_distinct, mse_bound, ErrorQuery, MseError,
};
use sdetaylor::problemsval::{
    binomial_cases, check_identity, coefficients_agree, identity_catalog, IdentityReport, ValError,
};
use sdetaylor::ranks::{
    n_e_enumerated, n_m_enumerated, rank_a_enumerated, rank_d_enumerated, rank_row, rank_table,
    rank_table_csv, RankRow,
};
use sdetaylor::rngstream::{normal, stream};
use sdetaylor::schemes::study::{summarize, ErrorRow, ReferenceKind, Study, TrialErrors};
use sdetaylor::schemes::{
    builtin_problem, gbm, SchemeConfig, SchemeError, Truncation, BUILTIN_IDS,
};
use sdetaylor::stochint::{IntegralLabel, Kind, StochError};
use sdetaylor::BigRational;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Mse(#[from] MseError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Stoch(#[from] StochError),
    #[error(transparent)]
    Val(#[from] ValError),
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_FAIL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Ito,
    Stratonovich,
}

impl From<Family> for Kind {
    fn from(f: Family) -> Kind {
        match f {
            Family::Ito => Kind::Ito,
            Family::Stratonovich => Kind::Stratonovich,
        }
    }
}

// ---------------------------------------------------------------- coeffs

/// Parses `0,1,0` or a single value repeated `k` times.
pub fn parse_weights(k: usize, l: &str) -> Result<Vec<u32>, CliError> {
    let v: Vec<u32> = l
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| CliError::Usage(format!("bad weight list {l:?}")))
        })
        .collect::<Result<_, _>>()?;
    match v.len() {
        1 => Ok(vec![v[0]; k]),
        n if n == k => Ok(v),
        n => Err(CliError::Usage(format!("{n} weights for k={k}"))),
    }
}

/// Exact tensor `\bar C` for shape `(k, l)` up to `p`.
pub fn cmd_coeffs(k: usize, l: &[u32], p: usize, format: Format) -> Result<String, CliError> {
    if l.len() != k {
        return Err(CliError::Usage(format!("{} weights for k={k}", l.len())));
    }
    let w = WeightVector::new(l.to_vec())?;
    let t = coefficient_tensor(&w, p)?;
    Ok(match format {
        Format::Json => cache_json(&[&t]),
        Format::Csv => {
            let mut s = (1..=k)
                .map(|g| format!("j{g}"))
                .collect::<Vec<_>>()
                .join(",");
            s.push_str(",exact,decimal\n");
            for (j, v) in t.iter() {
                let js = j
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",");
                s.push_str(&format!("{js},{v},{}\n", v.to_f64().unwrap_or(f64::NAN)));
            }
            s
        }
    })
}

// ---------------------------------------------------------------- mse

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MseRow {
    pub p: usize,
    pub mse: f64,
    pub bound: f64,
    /// `exact` or `bound` when only the `k!` bound is available.
    pub method: &'static str,
}

pub fn cmd_mse(
    label: &str,
    p_from: usize,
    p_to: usize,
    delta: f64,
) -> Result<Vec<MseRow>, CliError> {
    let label: IntegralLabel = label.parse()?;
    if p_from > p_to {
        return Err(CliError::Usage(format!("empty range {p_from}..={p_to}")));
    }
    if !(delta > 0.0) {
        return Err(CliError::Usage("step size must be positive".into()));
    }
    (p_from..=p_to)
        .map(|p| {
            let q = ErrorQuery::new(label.clone(), p, delta);
            let bound = mse_bound(&q)?;
            let (mse, method) = match label.kind() {
                Kind::Ito => (exact_mse_ito(&q)?, "exact"),
                Kind::Stratonovich if label.distinct_nonzero() => {
                    (exact_mse_strat_distinct(&q)?, "exact")
                }
                Kind::Stratonovich => (bound, "bound"),
            };
            Ok(MseRow {
                p,
                mse,
                bound,
                method,
            })
        })
        .collect()
}

pub fn mse_csv(rows: &[MseRow]) -> String {
    let mut s = String::from("p,mse,bound,method\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{}\n", r.p, r.mse, r.bound, r.method));
    }
    s
}

// ---------------------------------------------------------------- ranks

pub fn cmd_ranks(r_max: usize, format: Format) -> Result<String, CliError> {
    if r_max == 0 {
        return Err(CliError::Usage("r_max must be at least 1".into()));
    }
    Ok(match format {
        Format::Csv => rank_table_csv(r_max),
        Format::Json => serde_json::to_string_pretty(&rank_table(r_max))?,
    })
}

// ---------------------------------------------------------------- converge

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum TruncationSpec {
    Fixed { p: usize },
    Target { constant: f64, p_max: usize },
}

impl std::str::FromStr for TruncationSpec {
    type Err = CliError;

    /// `fixed:P`, `target` or `target:C`.
    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || {
            CliError::Usage(format!(
                "truncation {s:?}: expected fixed:P, target or target:C"
            ))
        };
        match s.split_once(':') {
            None if s == "target" => Ok(TruncationSpec::Target {
                constant: 1.0,
                p_max: 512,
            }),
            Some(("fixed", p)) => Ok(TruncationSpec::Fixed {
                p: p.parse().map_err(|_| bad())?,
            }),
            Some(("target", c)) => {
                let constant: f64 = c.parse().map_err(|_| bad())?;
                if !(constant > 0.0) {
                    return Err(bad());
                }
                Ok(TruncationSpec::Target {
                    constant,
                    p_max: 512,
                })
            }
            _ => Err(bad()),
        }
    }
}

impl From<&TruncationSpec> for Truncation {
    fn from(t: &TruncationSpec) -> Truncation {
        match *t {
            TruncationSpec::Fixed { p } => Truncation::Fixed(p),
            TruncationSpec::Target { constant, p_max } => Truncation::Target { constant, p_max },
        }
    }
}

pub const MIN_TRIALS: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySpec {
    pub problem: String,
    pub family: Family,
    /// Twice the strong order.
    pub r: usize,
    pub grid: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    pub truncation: TruncationSpec,
    pub compare_families: bool,
}

impl StudySpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if !BUILTIN_IDS.contains(&self.problem.as_str()) {
            return Err(CliError::Usage(format!(
                "unknown problem {:?} (known: {})",
                self.problem,
                BUILTIN_IDS.join(", ")
            )));
        }
        if !(2..=6).contains(&self.r) {
            return Err(CliError::Usage(format!(
                "order {} is not one of 1.0, 1.5, 2.0, 2.5, 3.0",
                self.r as f64 / 2.0
            )));
        }
        if self.grid.len() < 2 || self.grid.windows(2).any(|w| w[0] >= w[1]) || self.grid[0] == 0 {
            return Err(CliError::Usage(
                "grid needs at least two strictly increasing positive sizes".into(),
            ));
        }
        if self.trials < MIN_TRIALS {
            return Err(CliError::Usage(format!(
                "{} trials is too few for a slope estimate (minimum {MIN_TRIALS})",
                self.trials
            )));
        }
        Ok(())
    }

    pub fn scheme_config(&self) -> Result<SchemeConfig, CliError> {
        Ok(SchemeConfig::new(self.family.into(), self.r)?
            .with_truncation((&self.truncation).into()))
    }
}

/// Parses a strong order `1.0 .. 3.0` into `r`.
pub fn parse_order(s: &str) -> Result<usize, String> {
    let v: f64 = s.parse().map_err(|_| format!("bad order {s:?}"))?;
    let r = (2.0 * v).round();
    if (2.0 * v - r).abs() > 1e-9 || !(2.0..=6.0).contains(&r) {
        return Err(format!("order {s} is not one of 1.0, 1.5, 2.0, 2.5, 3.0"));
    }
    Ok(r as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergeReport {
    pub config: StudySpec,
    pub seed: u64,
    pub reference: ReferenceKind,
    pub errors: Vec<ErrorRow>,
    pub slope: f64,
    pub intercept: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub families_agree: Option<bool>,
}

/// Factor on the fitted strong error allowed between the two families.
pub const FAMILY_FACTOR: f64 = 3.0;

pub fn cmd_converge(spec: &StudySpec) -> Result<ConvergeReport, CliError> {
    spec.validate()?;
    let problem = builtin_problem::<f64>(&spec.problem).expect("validated id");
    let study = Study::new(
        &problem,
        &spec.scheme_config()?,
        &spec.grid,
        spec.compare_families,
    )?;
    let trials: Vec<TrialErrors> = (0..spec.trials)
        .into_par_iter()
        .map(|t| study.trial(spec.seed, t))
        .collect::<Result<_, _>>()?;
    let s = summarize(&study, &trials);
    let families_agree = s.families_agree(FAMILY_FACTOR);
    Ok(ConvergeReport {
        config: spec.clone(),
        seed: spec.seed,
        reference: study.reference(),
        errors: s.rows,
        slope: s.slope,
        intercept: s.intercept,
        families_agree,
    })
}

pub fn converge_csv(r: &ConvergeReport) -> String {
    let mut s = String::from("n,delta,p,rms_error,std_error\n");
    for e in &r.errors {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            e.n, e.delta, e.p, e.rms_error, e.std_error
        ));
    }
    s
}

// ---------------------------------------------------------------- validate

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub identities: Vec<IdentityReport>,
    pub pass: bool,
}

fn parse_rational(s: &str) -> BigRational {
    s.parse().expect("golden fixture")
}

/// Exact comparison of the embedded coefficient tables.
pub fn check_coefficient_tables() -> Vec<Check> {
    let entries = golden::coefficient_entries();
    let mut out = Vec::new();
    for k in 3..=5 {
        let mut bad = Vec::new();
        let mut n = 0;
        for (l, j, v) in entries.iter().filter(|(l, _, _)| l.len() == k) {
            n += 1;
            let got =
                unit_coefficient(&WeightVector::new(l.clone()).expect("shape"), j).expect("index");
            if got != parse_rational(v) {
                bad.push(format!("j={j:?}: {got} vs {v}"));
            }
        }
        let detail = if bad.is_empty() {
            format!("{n}/{n} entries exact")
        } else {
            bad.join("; ")
        };
        out.push(Check::new(
            format!("coefficients k={k}"),
            bad.is_empty(),
            detail,
        ));
    }
    out
}

pub fn check_error_constants() -> Vec<Check> {
    golden::ERROR_CONSTANTS
        .iter()
        .map(|c| {
            let lab = IntegralLabel::ito(c.i, c.l).expect("label");
            let got = exact_mse_ito_unit(&lab, c.p)
                .expect("exact error")
                .to_f64()
                .unwrap_or(f64::NAN);
            let rel = (got - c.value).abs() / c.value;
            let pass = rel <= golden::ERROR_CONSTANT_RTOL;
            Check::new(
                format!("error constant {}", c.name),
                pass,
                format!("{got:.8} vs {} (rel {rel:.1e})", c.value),
            )
        })
        .collect()
}

fn ratio_matches(got: f64, printed: &str) -> bool {
    format!("{got:.4}") == format!("{:.4}", printed.parse::<f64>().expect("golden fixture"))
}

/// Table values against closed forms, and closed forms against enumeration.
pub fn check_rank_tables() -> Vec<Check> {
    let rows: Vec<RankRow> = (1..=10).map(rank_row).collect();
    let mut a_bad = Vec::new();
    let mut d_bad = Vec::new();
    for (n, row) in rows.iter().enumerate() {
        let r = row.r;
        let cmp = |bad: &mut Vec<String>, what: &str, got: String, want: String, ok: bool| {
            if !ok {
                bad.push(format!("{what}({r}) = {got}, table {want}"));
            }
        };
        cmp(
            &mut a_bad,
            "rank_A",
            row.rank_a.to_string(),
            golden::RANK_A[n].to_string(),
            row.rank_a == golden::RANK_A[n],
        );
        cmp(
            &mut a_bad,
            "n_M",
            row.n_m.to_string(),
            golden::N_M[n].to_string(),
            row.n_m == golden::N_M[n],
        );
        cmp(
            &mut a_bad,
            "f",
            format!("{:.4}", row.f),
            golden::F[n].to_string(),
            ratio_matches(row.f, golden::F[n]),
        );
        cmp(
            &mut d_bad,
            "rank_D",
            row.rank_d.to_string(),
            golden::RANK_D[n].to_string(),
            row.rank_d == golden::RANK_D[n],
        );
        cmp(
            &mut d_bad,
            "n_E",
            row.n_e.to_string(),
            golden::N_E[n].to_string(),
            row.n_e == golden::N_E[n],
        );
        cmp(
            &mut d_bad,
            "g",
            format!("{:.4}", row.g),
            golden::G[n].to_string(),
            ratio_matches(row.g, golden::G[n]),
        );
    }
    let mut e_bad = Vec::new();
    for row in &rows {
        let r = row.r;
        if rank_a_enumerated(r) as u64 != row.rank_a
            || n_m_enumerated(r) as u64 != row.n_m
            || rank_d_enumerated(r) as u64 != row.rank_d
            || n_e_enumerated(r) as u64 != row.n_e
        {
            e_bad.push(format!("r={r}"));
        }
    }
    let detail = |bad: &[String], n: usize| {
        if bad.is_empty() {
            format!("{n} values match")
        } else {
            bad.join("; ")
        }
    };
    vec![
        Check::new("rank table A", a_bad.is_empty(), detail(&a_bad, 30)),
        Check::new("rank table D", d_bad.is_empty(), detail(&d_bad, 30)),
        Check::new(
            "rank closed forms vs enumeration",
            e_bad.is_empty(),
            detail(&e_bad, 40),
        ),
    ]
}

pub fn check_binomial_relation() -> Check {
    let mut n = 0;
    let mut bad = Vec::new();
    for delta in [
        BigRational::from_integer(1.into()),
        BigRational::new(5.into(), 7.into()),
    ] {
        for case in binomial_cases(&delta) {
            for p in 0..=6 {
                n += 1;
                if !coefficients_agree(&case, p) {
                    bad.push(format!("{} p={p}", case.name));
                }
            }
        }
    }
    let detail = if bad.is_empty() {
        format!("{n} coefficient comparisons exact")
    } else {
        bad.join("; ")
    };
    Check::new("binomial relation", bad.is_empty(), detail)
}

/// Order-1.0 scheme against the closed-form Milstein step on GBM.
pub fn check_milstein(states: usize, seed: u64) -> Result<Check, CliError> {
    let (mu, s) = (0.06, 0.3);
    let pb = gbm::<f64>(mu, s, 1.0, 1.0);
    let d = 0.01;
    let sch = sdetaylor::Scheme::new(&pb, &SchemeConfig::ito(2)?, d)?;
    let mut rng = stream(seed, 0, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..states {
        let x: f64 = 0.1 + 5.0 * normal::<f64, _>(&mut rng).abs();
        let basis = sch.sample_basis(&mut rng);
        let dw = basis.increment(1);
        let want = x + s * x * dw + d * mu * x + s * s * x * (dw * dw - d) / 2.0;
        let got = sch.step(&pb, &[x], 0.0, &basis)?[0];
        worst = worst.max((got - want).abs() / want.abs());
    }
    Ok(Check::new(
        "milstein identity",
        worst <= 1e-12,
        format!("{states} states, worst relative gap {worst:.1e}"),
    ))
}

pub fn check_determinism(seed: u64) -> Result<Check, CliError> {
    let spec = StudySpec {
        problem: "gbm".into(),
        family: Family::Ito,
        r: 3,
        grid: vec![4, 8],
        trials: MIN_TRIALS,
        seed,
        truncation: TruncationSpec::Target {
            constant: 1.0,
            p_max: 512,
        },
        compare_families: true,
    };
    let a = serde_json::to_string(&cmd_converge(&spec)?)?;
    let b = serde_json::to_string(&cmd_converge(&spec)?)?;
    Ok(Check::new(
        "seeded rerun",
        a == b,
        format!("{} bytes, identical: {}", a.len(), a == b),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    pub trials: u64,
    pub seed: u64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            trials: 100_000,
            seed: 1,
        }
    }
}

pub const IDENTITY_LEVELS: [usize; 3] = [2, 4, 8];

pub fn cmd_validate(opts: ValidateOptions) -> Result<ValidationReport, CliError> {
    let mut checks = check_coefficient_tables();
    checks.extend(check_error_constants());
    checks.extend(check_rank_tables());
    checks.push(check_binomial_relation());
    let one = BigRational::from_integer(1.into());
    let identities = identity_catalog(&one)
        .par_iter()
        .map(|c| check_identity(c, &IDENTITY_LEVELS, opts.trials, opts.seed))
        .collect::<Result<Vec<_>, _>>()?;
    for r in &identities {
        let last = r.rows.last().expect("levels");
        checks.push(Check::new(
            format!("identity {}", r.name),
            r.pass,
            format!(
                "p={}: ms difference {:.3e} vs truncation error {:.3e}",
                last.p, last.ms_difference, last.truncation_mse
            ),
        ));
    }
    checks.push(check_milstein(1000, opts.seed)?);
    checks.push(check_determinism(opts.seed)?);
    let pass = checks.iter().all(|c| c.pass);
    Ok(ValidationReport {
        checks,
        identities,
        pass,
    })
}

// ---------------------------------------------------------------- parsing

#[derive(Debug, Parser)]
#[command(
    name = "sdetaylor",
    version,
    about = "Strong Taylor schemes for SDEs with Fourier-Legendre integral approximation"
)]
pub struct Cli {
    /// Flat key = value file; keys map to SDETAYLOR_<KEY>.
    #[arg(long, global = true, env = "SDETAYLOR_CONFIG")]
    pub config: Option<PathBuf>,
    /// Directory for cached coefficient tensors.
    #[arg(long, global = true, env = "SDETAYLOR_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, env = "SDETAYLOR_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, env = "SDETAYLOR_FORMAT")]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact Fourier-Legendre coefficients of one shape.
    Coeffs {
        #[arg(long)]
        k: usize,
        /// Comma-separated weights, innermost first, or one value for all.
        #[arg(long, default_value = "0")]
        l: String,
        #[arg(long)]
        p: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Mean-square truncation error against p.
    Mse {
        /// Integral name such as I_(000)^(1,2,3).
        #[arg(long)]
        label: String,
        #[arg(long, default_value_t = 0)]
        p_from: usize,
        #[arg(long)]
        p_to: usize,
        #[arg(long, default_value_t = 1.0, env = "SDETAYLOR_DELTA")]
        delta: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Rank tables of the expansion bases.
    Ranks {
        #[arg(long, default_value_t = 10)]
        r_max: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Strong convergence study.
    Converge {
        #[arg(long, env = "SDETAYLOR_PROBLEM", default_value = "gbm")]
        problem: String,
        #[arg(long, value_enum, env = "SDETAYLOR_FAMILY", default_value = "ito")]
        family: Family,
        /// Strong order: 1.0, 1.5, 2.0, 2.5 or 3.0.
        #[arg(long, env = "SDETAYLOR_ORDER", default_value = "1.0", value_parser = parse_order)]
        order: usize,
        #[arg(
            long,
            env = "SDETAYLOR_GRID",
            value_delimiter = ',',
            default_value = "8,16,32,64,128"
        )]
        grid: Vec<usize>,
        #[arg(long, env = "SDETAYLOR_TRIALS", default_value_t = 10_000)]
        trials: u64,
        #[arg(long, env = "SDETAYLOR_SEED", default_value_t = 1)]
        seed: u64,
        /// fixed:P, target or target:C.
        #[arg(long, env = "SDETAYLOR_TRUNCATION", default_value = "target")]
        truncation: String,
        /// Also run the other family on the same bases.
        #[arg(long, env = "SDETAYLOR_COMPARE_FAMILIES")]
        compare_families: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Golden tables, error constants and identity checks.
    Validate {
        #[arg(long, env = "SDETAYLOR_TRIALS", default_value_t = 100_000)]
        trials: u64,
        #[arg(long, env = "SDETAYLOR_SEED", default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
}

fn emit(output: &Output, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &output.out {
        Some(p) => write_file(p, text),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(std::fs::write(path, text)?)
}

fn json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Executes a parsed command; returns the exit code.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    if let Some(dir) = &cli.cache_dir {
        // a store already in use keeps its settings
        let _ = CoeffStore::install_global(CoeffStore::new().with_cache_dir(dir));
    }
    match cli.command {
        Command::Coeffs { k, l, p, output } => {
            let l = parse_weights(k, &l)?;
            let text = cmd_coeffs(k, &l, p, output.format.unwrap_or(Format::Json))?;
            emit(&output, &text, stdout)?;
        }
        Command::Mse {
            label,
            p_from,
            p_to,
            delta,
            output,
        } => {
            let rows = cmd_mse(&label, p_from, p_to, delta)?;
            let text = match output.format.unwrap_or(Format::Csv) {
                Format::Csv => mse_csv(&rows),
                Format::Json => json(&rows)?,
            };
            emit(&output, &text, stdout)?;
        }
        Command::Ranks { r_max, output } => {
            let text = cmd_ranks(r_max, output.format.unwrap_or(Format::Csv))?;
            emit(&output, &text, stdout)?;
        }
        Command::Converge {
            problem,
            family,
            order,
            grid,
            trials,
            seed,
            truncation,
            compare_families,
            output,
        } => {
            let spec = StudySpec {
                problem,
                family,
                r: order,
                grid,
                trials,
                seed,
                truncation: truncation.parse()?,
                compare_families,
            };
            let report = cmd_converge(&spec)?;
            let text = match output.format.unwrap_or(Format::Json) {
                Format::Json => json(&report)?,
                Format::Csv => converge_csv(&report),
            };
            emit(&output, &text, stdout)?;
        }
        Command::Validate {
            trials,
            seed,
            output,
        } => {
            if trials == 0 {
                return Err(CliError::Usage(
                    "validation needs at least one trial".into(),
                ));
            }
            let report = cmd_validate(ValidateOptions { trials, seed })?;
            let text = match output.format.unwrap_or(Format::Csv) {
                Format::Json => json(&report)?,
                Format::Csv => {
                    let mut s: String = report.checks.iter().map(|c| c.line() + "\n").collect();
                    s.push_str(if report.pass {
                        "validation passed\n"
                    } else {
                        "validation FAILED\n"
                    });
                    s
                }
            };
            emit(&output, &text, stdout)?;
            return Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL });
        }
    }
    Ok(EXIT_PASS)
}

/// Full entry point: config file, argument parsing and execution.
pub fn run(args: Vec<OsString>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    if let Some(path) = config::config_path(&args) {
        match config::load(&path) {
            Ok(values) => {
                for (k, v) in config::pending_env(&values, |k| std::env::var(k).ok()) {
                    std::env::set_var(k, v);
                }
            }
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_USAGE;
            }
        }
    }
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_PASS;
        }
    };
    match execute(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests;
