//! Explicit one-step strong schemes of orders 1.0 to 3.0 built from the
//! first form of the unified Taylor-Ito and Taylor-Stratonovich expansions.

mod builtin;
pub mod ops;
pub mod oracle;
mod refine;
pub mod study;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeffs::{coefficient_tensor, scaled_tensor_float, CoeffError, ScaledTensor};
use crate::mse::{minimal_p, MseError};
use crate::ranks::enumerate_dq;
use crate::rngstream::{stream, StepRng};
use crate::scalar::Real;
use crate::stochint::{
    closed_form, GaussianBasis, IntegralLabel, Kind, PreparedClosed, PreparedSeries, StochError,
};

pub use builtin::{
    builtin_problem, builtin_problems, gbm, linear2d, ornstein_uhlenbeck, GbmExact, OuExact,
    BUILTIN_IDS,
};
pub use ops::{Op, Word};
pub use oracle::{FiniteDifferenceOracle, LinearOracle, OperatorOracle, FD_MAX_DEPTH};
pub use refine::{legendre_values, Refinement};

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("operator oracle cannot evaluate {0}")]
    OracleGap(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("state has {got} components, problem has {n}")]
    Dimension { n: usize, got: usize },
    #[error("basis with m={m}, p={p} cannot drive a step needing m={need_m}, p>={need_p}")]
    Basis {
        m: usize,
        p: usize,
        need_m: usize,
        need_p: usize,
    },
    #[error(transparent)]
    Mse(#[from] MseError),
    #[error(transparent)]
    Stoch(#[from] StochError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

/// Exact transition of a problem over one step, driven by the step's basis.
/// Randomness not captured by the basis is drawn from `rng`.
pub trait ExactSolution<T>: Send + Sync {
    fn advance(&self, x: &[T], t: T, basis: &GaussianBasis<T>, rng: &mut StepRng) -> Vec<T>;
}

#[derive(Clone)]
pub struct SdeProblem<T> {
    pub id: String,
    pub n: usize,
    pub m: usize,
    pub oracle: Arc<dyn OperatorOracle<T>>,
    pub x0: Vec<T>,
    pub horizon: T,
    pub exact: Option<Arc<dyn ExactSolution<T>>>,
}

impl<T: Real> SdeProblem<T> {
    pub fn new(
        id: impl Into<String>,
        oracle: Arc<dyn OperatorOracle<T>>,
        x0: Vec<T>,
        horizon: T,
    ) -> Result<Self, SchemeError> {
        let (n, m) = (oracle.n(), oracle.m());
        if x0.len() != n {
            return Err(SchemeError::Dimension { n, got: x0.len() });
        }
        Ok(Self {
            id: id.into(),
            n,
            m,
            oracle,
            x0,
            horizon,
            exact: None,
        })
    }

    pub fn with_exact(mut self, exact: Arc<dyn ExactSolution<T>>) -> Self {
        self.exact = Some(exact);
        self
    }

    pub fn drift(&self, x: &[T], t: T) -> Result<Vec<T>, SchemeError> {
        self.oracle.apply(&[Op::L], x, t)
    }

    pub fn diffusion(&self, x: &[T], t: T, i: usize) -> Result<Vec<T>, SchemeError> {
        self.oracle.apply(&[Op::G(i)], x, t)
    }
}

impl<T> std::fmt::Debug for SdeProblem<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SdeProblem")
            .field("id", &self.id)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

pub fn apply_operator<T: Real>(
    problem: &SdeProblem<T>,
    word: &[Op],
    x: &[T],
    t: T,
) -> Result<Vec<T>, SchemeError> {
    problem.oracle.apply(word, x, t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Truncation {
    /// The same `p` for every series-evaluated integral.
    Fixed(usize),
    /// Smallest `p` with exact (or bounding) error `<= constant·Δ^{r+1}`.
    Target { constant: f64, p_max: usize },
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Target {
            constant: 1.0,
            p_max: 512,
        }
    }
}

/// Operator used in the `Δ^{(r+1)/2}` term for odd `r` under the
/// Stratonovich family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum OddTail {
    /// `Ḹ^{(r+1)/2}`, consistent with the `k = 0` terms of the expansion.
    #[default]
    Family,
    /// `L^{(r+1)/2}` for both families.
    Ito,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub family: Kind,
    pub r: usize,
    pub truncation: Truncation,
    pub overrides: BTreeMap<String, usize>,
    pub odd_tail: OddTail,
}

impl SchemeConfig {
    pub fn new(family: Kind, r: usize) -> Result<Self, SchemeError> {
        if !(2..=6).contains(&r) {
            return Err(SchemeError::Config(format!("r={r} outside 2..=6")));
        }
        Ok(Self {
            family,
            r,
            truncation: Truncation::default(),
            overrides: BTreeMap::new(),
            odd_tail: OddTail::default(),
        })
    }

    pub fn ito(r: usize) -> Result<Self, SchemeError> {
        Self::new(Kind::Ito, r)
    }

    pub fn strat(r: usize) -> Result<Self, SchemeError> {
        Self::new(Kind::Stratonovich, r)
    }

    pub fn with_truncation(mut self, t: Truncation) -> Self {
        self.truncation = t;
        self
    }

    /// Pins `p` for one integral, keyed by [`IntegralLabel::name`].
    pub fn with_override(mut self, label: &IntegralLabel, p: usize) -> Self {
        self.overrides.insert(label.name(), p);
        self
    }

    pub fn with_odd_tail(mut self, tail: OddTail) -> Self {
        self.odd_tail = tail;
        self
    }

    pub fn order(&self) -> f64 {
        self.r as f64 / 2.0
    }
}

#[derive(Debug, Clone)]
pub enum IntegralEval<T> {
    Closed(PreparedClosed<T>),
    Series(PreparedSeries<T>),
}

impl<T: Real> IntegralEval<T> {
    pub fn eval(&self, basis: &GaussianBasis<T>) -> T {
        match self {
            IntegralEval::Closed(c) => c.eval(basis),
            IntegralEval::Series(s) => s.eval(basis),
        }
    }

    pub fn p(&self) -> usize {
        match self {
            IntegralEval::Closed(c) => c.form().modes(),
            IntegralEval::Series(s) => s.p(),
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, IntegralEval::Closed(_))
    }
}

/// One approximated integral together with the operator values that
/// multiply it.
#[derive(Debug, Clone)]
pub struct TermGroup<T> {
    pub label: IntegralLabel,
    pub eval: IntegralEval<T>,
    combo: Vec<(T, usize)>,
}

/// Exact tensors up to this many dense entries, floating ones beyond.
pub const EXACT_TENSOR_LIMIT: usize = 1 << 14;

pub fn series_tensor<T: Real>(
    label: &IntegralLabel,
    p: usize,
    delta: f64,
) -> Result<ScaledTensor<T>, SchemeError> {
    let dense = (p + 1).checked_pow(label.k() as u32).unwrap_or(usize::MAX);
    if dense <= EXACT_TENSOR_LIMIT {
        return Ok(coefficient_tensor(label.weight(), p)?.scaled::<T>(delta));
    }
    let f = scaled_tensor_float(label.weight(), p, delta);
    let mut t = ScaledTensor::empty(label.weight().clone(), p);
    for (j, &v) in f.sparse().iter() {
        let j: Vec<usize> = j.iter().map(|&x| x as usize).collect();
        t.push(&j, T::of(v));
    }
    Ok(t)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn index_tuples(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                (1..=m).map(move |i| {
                    let mut v = t.clone();
                    v.push(i);
                    v
                })
            })
            .collect();
    }
    out
}

/// A scheme specialised to one problem and one step size.
#[derive(Debug, Clone)]
pub struct PreparedScheme<T> {
    config: SchemeConfig,
    n: usize,
    m: usize,
    delta: T,
    words: Vec<Word>,
    deterministic: Vec<(T, usize)>,
    groups: Vec<TermGroup<T>>,
    p_required: usize,
}

#[derive(Default)]
struct Collector {
    words: BTreeMap<Word, usize>,
    order: Vec<Word>,
}

impl Collector {
    fn id(&mut self, w: &Word) -> usize {
        if let Some(&i) = self.words.get(w) {
            return i;
        }
        let i = self.order.len();
        self.words.insert(w.clone(), i);
        self.order.push(w.clone());
        i
    }
}

impl<T: Real> PreparedScheme<T> {
    pub fn new(
        problem: &SdeProblem<T>,
        config: &SchemeConfig,
        delta: f64,
    ) -> Result<Self, SchemeError> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(SchemeError::Config(format!(
                "step {delta} must be positive"
            )));
        }
        let kind = config.family;
        let m = problem.m;
        let mut det: BTreeMap<Word, f64> = BTreeMap::new();
        let mut by_label: BTreeMap<IntegralLabel, BTreeMap<Word, f64>> = BTreeMap::new();
        for q in 1..=config.r {
            for key in enumerate_dq(q) {
                let scale = delta.powi(key.j as i32) / factorial(key.j);
                if key.k == 0 {
                    for (c, w) in ops::term_operator(kind, &[], &[], key.j) {
                        *det.entry(w).or_insert(0.0) += scale * c.to_f64().unwrap_or(f64::NAN);
                    }
                    continue;
                }
                for i in index_tuples(m, key.k) {
                    let combo = ops::term_operator(kind, &key.l, &i, key.j);
                    if combo.is_empty() || problem.oracle.vanishes(&combo) == Some(true) {
                        continue;
                    }
                    let label = IntegralLabel::new(i, key.l.clone(), kind)?;
                    let entry = by_label.entry(label).or_default();
                    for (c, w) in combo {
                        *entry.entry(w).or_insert(0.0) += scale * c.to_f64().unwrap_or(f64::NAN);
                    }
                }
            }
        }
        if config.r % 2 == 1 {
            let h = (config.r + 1) / 2;
            let base = match (kind, config.odd_tail) {
                (Kind::Stratonovich, OddTail::Family) => Op::Lbar,
                _ => Op::L,
            };
            *det.entry(vec![base; h]).or_insert(0.0) += delta.powi(h as i32) / factorial(h as u32);
        }

        let mut col = Collector::default();
        let deterministic = det
            .iter()
            .filter(|(_, &c)| c != 0.0)
            .map(|(w, &c)| (T::of(c), col.id(w)))
            .collect();
        let target = match config.truncation {
            Truncation::Target { constant, .. } => constant * delta.powi(config.r as i32 + 1),
            Truncation::Fixed(_) => 0.0,
        };
        let mut groups = Vec::with_capacity(by_label.len());
        let mut p_required = 0;
        for (label, words) in by_label {
            let combo: Vec<(T, usize)> = words
                .iter()
                .filter(|(_, &c)| c != 0.0)
                .map(|(w, &c)| (T::of(c), col.id(w)))
                .collect();
            if combo.is_empty() {
                continue;
            }
            let eval = match closed_form(&label) {
                Some(f) => IntegralEval::Closed(PreparedClosed::new(f, delta)),
                None => {
                    let p = match (config.overrides.get(&label.name()), &config.truncation) {
                        (Some(&p), _) => p,
                        (None, Truncation::Fixed(p)) => *p,
                        (None, Truncation::Target { p_max, .. }) => {
                            minimal_p(&label, delta, target, *p_max)?
                        }
                    };
                    let tensor = series_tensor::<T>(&label, p, delta)?;
                    IntegralEval::Series(PreparedSeries::new(&label, &tensor, T::of(delta))?)
                }
            };
            p_required = p_required.max(eval.p());
            groups.push(TermGroup { label, eval, combo });
        }
        for w in &col.order {
            if !problem.oracle.supports(w) {
                return Err(SchemeError::OracleGap(ops::word_name(w)));
            }
        }
        Ok(Self {
            config: config.clone(),
            n: problem.n,
            m,
            delta: T::of(delta),
            words: col.order,
            deterministic,
            groups,
            p_required,
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    /// Smallest basis truncation that drives every integral.
    pub fn p_required(&self) -> usize {
        self.p_required
    }

    pub fn groups(&self) -> &[TermGroup<T>] {
        &self.groups
    }

    /// Operator compositions the scheme evaluates.
    pub fn demand(&self) -> Vec<String> {
        self.words.iter().map(|w| ops::word_name(w)).collect()
    }

    /// Truncation level used for each integral, by name.
    pub fn truncations(&self) -> BTreeMap<String, usize> {
        self.groups
            .iter()
            .map(|g| (g.label.name(), g.eval.p()))
            .collect()
    }

    pub fn sample_basis(&self, rng: &mut StepRng) -> GaussianBasis<T> {
        GaussianBasis::sample(rng, self.m, self.p_required, self.delta)
    }

    pub fn step(
        &self,
        problem: &SdeProblem<T>,
        x: &[T],
        t: T,
        basis: &GaussianBasis<T>,
    ) -> Result<Vec<T>, SchemeError> {
        if x.len() != self.n {
            return Err(SchemeError::Dimension {
                n: self.n,
                got: x.len(),
            });
        }
        if basis.m() != self.m || basis.p() < self.p_required {
            return Err(SchemeError::Basis {
                m: basis.m(),
                p: basis.p(),
                need_m: self.m,
                need_p: self.p_required,
            });
        }
        let vals = self
            .words
            .iter()
            .map(|w| problem.oracle.apply(w, x, t))
            .collect::<Result<Vec<_>, _>>()?;
        let mut y = x.to_vec();
        for &(c, w) in &self.deterministic {
            for (a, &b) in y.iter_mut().zip(&vals[w]) {
                *a = *a + c * b;
            }
        }
        let mut v = vec![T::zero(); self.n];
        for g in &self.groups {
            v.iter_mut().for_each(|a| *a = T::zero());
            for &(c, w) in &g.combo {
                for (a, &b) in v.iter_mut().zip(&vals[w]) {
                    *a = *a + c * b;
                }
            }
            if v.iter().all(|a| a.is_zero()) {
                continue;
            }
            let i = g.eval.eval(basis);
            for (a, &b) in y.iter_mut().zip(&v) {
                *a = *a + b * i;
            }
        }
        Ok(y)
    }
}

pub fn step<T: Real>(
    problem: &SdeProblem<T>,
    config: &SchemeConfig,
    x: &[T],
    t: T,
    delta: f64,
    basis: &GaussianBasis<T>,
) -> Result<Vec<T>, SchemeError> {
    PreparedScheme::new(problem, config, delta)?.step(problem, x, t, basis)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
    /// Cumulative Wiener path `W(t_p)` per component.
    pub wiener: Vec<Vec<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn terminal(&self) -> &[T] {
        self.states
            .last()
            .expect("trajectory has the initial state")
    }

    /// Columns `t, x1.., W1..`.
    pub fn to_csv(&self) -> String {
        let n = self.states[0].len();
        let m = self.wiener[0].len();
        let mut s = String::from("t");
        (1..=n).for_each(|i| {
            let _ = write!(s, ",x{i}");
        });
        (1..=m).for_each(|i| {
            let _ = write!(s, ",W{i}");
        });
        s.push('\n');
        for ((t, x), w) in self.times.iter().zip(&self.states).zip(&self.wiener) {
            let _ = write!(s, "{}", t.f64());
            x.iter().chain(w).for_each(|v| {
                let _ = write!(s, ",{}", v.f64());
            });
            s.push('\n');
        }
        s
    }
}

/// Runs `n_steps` uniform steps on `[0, horizon]`, drawing step `p`'s basis
/// from the stream `(seed, trial, p)`.
pub fn integrate_path<T: Real>(
    problem: &SdeProblem<T>,
    config: &SchemeConfig,
    x0: &[T],
    n_steps: usize,
    seed: u64,
    trial: u64,
) -> Result<Trajectory<T>, SchemeError> {
    if n_steps == 0 {
        return Err(SchemeError::Config("at least one step".into()));
    }
    let delta = problem.horizon.f64() / n_steps as f64;
    let scheme = PreparedScheme::new(problem, config, delta)?;
    let mut x = x0.to_vec();
    let mut w = vec![T::zero(); problem.m];
    let mut traj = Trajectory {
        times: vec![T::zero()],
        states: vec![x.clone()],
        wiener: vec![w.clone()],
    };
    for p in 0..n_steps {
        let t = T::of(p as f64 * delta);
        let basis = scheme.sample_basis(&mut stream(seed, trial, p as u64));
        x = scheme.step(problem, &x, t, &basis)?;
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = *wi + basis.increment(i + 1);
        }
        traj.times.push(T::of((p + 1) as f64 * delta));
        traj.states.push(x.clone());
        traj.wiener.push(w.clone());
    }
    Ok(traj)
}
