//! Exact mean-square errors of truncated expansions.
//!
//! All exact quantities are rationals in units of `Δ^{k + 2Σl}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::coeffs::{coefficient_tensor, CoeffError, CoefficientTensor, WeightVector};
use crate::exactpoly::{nested_simplex_integral, RationalPoly};
use crate::scalar::{rat, rat_to_f64};
use crate::stochint::{IntegralLabel, Kind};

#[derive(Debug, Error)]
pub enum MseError {
    #[error("{0}: exact error needs nonzero Wiener indices")]
    TimeIndex(String),
    #[error("{0}: repeated indices under the Stratonovich kind admit only a bound")]
    BoundOnly(String),
    #[error("target {target:e} not reached for p <= {p_max} (best {best:e})")]
    Unattainable {
        target: f64,
        p_max: usize,
        best: f64,
    },
    #[error("{0}: kept index set is not closed under index-preserving permutations")]
    NotClosed(String),
    #[error("{0}: catalog truncation is defined for double integrals only")]
    NotDouble(String),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorQuery {
    pub label: IntegralLabel,
    pub p: usize,
    pub delta: f64,
}

impl ErrorQuery {
    pub fn new(label: IntegralLabel, p: usize, delta: f64) -> Self {
        Self { label, p, delta }
    }

    fn scale(&self) -> f64 {
        self.delta.powi(self.label.weight().norm_power() as i32)
    }
}

fn pow2(e: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(2).pow(e))
}

/// `‖K‖²` in units of `Δ^{k+2Σl}`.
pub fn kernel_norm_unit(weight: &WeightVector) -> BigRational {
    let one_plus_x = RationalPoly::from_ints(&[1, 1]);
    let w: Vec<RationalPoly> = weight.l().iter().map(|&l| one_plus_x.pow(2 * l)).collect();
    nested_simplex_integral(&w) / pow2(weight.norm_power())
}

pub fn kernel_norm(weight: &WeightVector, delta: f64) -> f64 {
    rat_to_f64(&kernel_norm_unit(weight)) * delta.powi(weight.norm_power() as i32)
}

/// Permutations `π` of positions with `i_{π(g)} = i_g` for all `g`.
pub fn index_preserving_permutations(i: &[usize]) -> Vec<Vec<usize>> {
    fn rec(
        i: &[usize],
        g: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if g == i.len() {
            out.push(cur.clone());
            return;
        }
        for s in 0..i.len() {
            if !used[s] && i[s] == i[g] {
                used[s] = true;
                cur.push(s);
                rec(i, g + 1, used, cur, out);
                cur.pop();
                used[s] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(i, 0, &mut vec![false; i.len()], &mut Vec::new(), &mut out);
    out
}

fn odd_weight(j: &[usize]) -> BigRational {
    BigRational::from_integer(j.iter().map(|&v| BigInt::from(2 * v + 1)).product())
}

/// `Σ_j C_j Σ_π C_{π(j)}` in units of `Δ^{k+2Σl}`.
fn matched_sum_unit(t: &CoefficientTensor, perms: &[Vec<usize>]) -> BigRational {
    let mut acc = BigRational::zero();
    let mut jp = vec![0usize; t.k()];
    for (j, c) in t.iter() {
        if c.is_zero() {
            continue;
        }
        let mut s = BigRational::zero();
        for pi in perms {
            for g in 0..j.len() {
                jp[g] = j[pi[g]];
            }
            s += t.unit(&jp);
        }
        if !s.is_zero() {
            acc += odd_weight(&j) * c * s;
        }
    }
    acc / pow2(2 * (t.k() as u32 + t.weight().weight_sum()))
}

fn require_wiener(label: &IntegralLabel) -> Result<(), MseError> {
    if label.has_time() {
        Err(MseError::TimeIndex(label.name()))
    } else {
        Ok(())
    }
}

/// Theorem 8 error in units of `Δ^{k+2Σl}`, exact.
pub fn exact_mse_ito_unit(label: &IntegralLabel, p: usize) -> Result<BigRational, MseError> {
    require_wiener(label)?;
    let t = coefficient_tensor(label.weight(), p)?;
    let perms = index_preserving_permutations(label.i());
    Ok(kernel_norm_unit(label.weight()) - matched_sum_unit(&t, &perms))
}

/// Theorem 8 error for an arbitrary kept set of multi-indices with entries
/// `<= p_max`. The set must be closed under the index-preserving permutations.
pub fn exact_mse_ito_kept_unit<F>(
    label: &IntegralLabel,
    p_max: usize,
    keep: F,
) -> Result<BigRational, MseError>
where
    F: Fn(&[usize]) -> bool,
{
    require_wiener(label)?;
    let t = coefficient_tensor(label.weight(), p_max)?;
    let perms = index_preserving_permutations(label.i());
    let mut acc = BigRational::zero();
    let mut jp = vec![0usize; t.k()];
    for (j, c) in t.iter() {
        if !keep(&j) {
            continue;
        }
        let mut s = BigRational::zero();
        for pi in perms.iter() {
            for g in 0..j.len() {
                jp[g] = j[pi[g]];
            }
            if !keep(&jp) {
                return Err(MseError::NotClosed(label.name()));
            }
            s += t.unit(&jp);
        }
        if !c.is_zero() && !s.is_zero() {
            acc += odd_weight(&j) * c * s;
        }
    }
    let norm = pow2(2 * (t.k() as u32 + t.weight().weight_sum()));
    Ok(kernel_norm_unit(label.weight()) - acc / norm)
}

/// Pairs kept when a double-integral expansion written as a single sum over
/// `i` is cut at `i = q`: all `(a, b)` with `a, b <= q`, the pair `{0, 1}`,
/// and `(i, i)`, `(i, i+2)`, `(i+2, i)` for `i <= q`.
pub fn catalog_pair_kept(q: usize, j: &[usize]) -> bool {
    let (a, b) = (j[0], j[1]);
    let lo = a.min(b);
    (a <= q && b <= q)
        || (lo == 0 && a.max(b) == 1)
        || (lo <= q && a.abs_diff(b) % 2 == 0 && a.abs_diff(b) <= 2)
}

/// Exact error of a double integral under [`catalog_pair_kept`].
pub fn exact_mse_catalog_double_unit(
    label: &IntegralLabel,
    q: usize,
) -> Result<BigRational, MseError> {
    if label.k() != 2 {
        return Err(MseError::NotDouble(label.name()));
    }
    exact_mse_ito_kept_unit(label, q + 2, |j| catalog_pair_kept(q, j))
}

pub fn exact_mse_ito(q: &ErrorQuery) -> Result<f64, MseError> {
    Ok(rat_to_f64(&exact_mse_ito_unit(&q.label, q.p)?) * q.scale())
}

/// `I_k - Σ C²` in units of `Δ^{k+2Σl}`, uniform truncation.
pub fn parseval_gap_unit(weight: &WeightVector, p: usize) -> Result<BigRational, MseError> {
    let t = coefficient_tensor(weight, p)?;
    let id: Vec<usize> = (0..weight.k()).collect();
    Ok(kernel_norm_unit(weight) - matched_sum_unit(&t, &[id]))
}

/// `k! (I_k - Σ C²)`.
pub fn mse_bound(q: &ErrorQuery) -> Result<f64, MseError> {
    let k = q.label.k();
    let f: f64 = (1..=k).map(|v| v as f64).product();
    Ok(f * rat_to_f64(&parseval_gap_unit(q.label.weight(), q.p)?) * q.scale())
}

/// `k! (I_k - Σ C²)` with a separate truncation per position.
pub fn mse_bound_per_index(
    weight: &WeightVector,
    ps: &[usize],
    delta: f64,
) -> Result<f64, MseError> {
    let pmax = ps.iter().copied().max().unwrap_or(0);
    let t = coefficient_tensor(weight, pmax)?;
    let mut acc = BigRational::zero();
    for (j, c) in t.iter() {
        if c.is_zero() || j.iter().zip(ps).any(|(a, b)| a > b) {
            continue;
        }
        acc += odd_weight(&j) * c * c;
    }
    let gap = kernel_norm_unit(weight) - acc / pow2(2 * (weight.k() as u32 + weight.weight_sum()));
    let f: f64 = (1..=weight.k()).map(|v| v as f64).product();
    Ok(f * rat_to_f64(&gap) * delta.powi(weight.norm_power() as i32))
}

/// Exact error for pairwise distinct nonzero indices (both kinds coincide).
pub fn exact_mse_strat_distinct(q: &ErrorQuery) -> Result<f64, MseError> {
    require_wiener(&q.label)?;
    if !q.label.distinct_nonzero() {
        return Err(MseError::BoundOnly(q.label.name()));
    }
    Ok(rat_to_f64(&parseval_gap_unit(q.label.weight(), q.p)?) * q.scale())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub heuristic: bool,
}

/// Order-of-magnitude bound `C Δ² / q` for Stratonovich expansions with
/// repeated indices.
pub fn strat_mse_estimate(q: &ErrorQuery, constant: f64) -> Estimate {
    let qq = q.p.max(1) as f64;
    Estimate {
        value: constant * q.delta * q.delta / qq,
        heuristic: true,
    }
}

/// Per-tuple contributions `w(j) C_j Σ_π C_{π(j)}` accumulated by the shell
/// `max(j)`, in floating point.
fn shell_sums(t: &CoefficientTensor, perms: &[Vec<usize>]) -> Vec<f64> {
    let vals: Vec<f64> = t.unit_values().iter().map(rat_to_f64).collect();
    let p = t.p();
    let k = t.k();
    let mut shells = vec![0.0; p + 1];
    let denom = 4f64.powi((k as u32 + t.weight().weight_sum()) as i32);
    let mut jp = vec![0usize; k];
    for (flat, &c) in vals.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let j = t.index_tuple(flat);
        let mut s = 0.0;
        for pi in perms {
            for g in 0..k {
                jp[g] = j[pi[g]];
            }
            s += vals[jp.iter().rev().fold(0, |acc, &v| acc * (p + 1) + v)];
        }
        let w: f64 = j.iter().map(|&v| (2 * v + 1) as f64).product();
        shells[*j.iter().max().expect("k >= 1")] += w * c * s / denom;
    }
    shells
}

/// Which error functional governs the truncation choice for a label.
fn governing_perms(label: &IntegralLabel) -> (Vec<Vec<usize>>, f64) {
    let id: Vec<usize> = (0..label.k()).collect();
    if label.distinct_nonzero() {
        return (vec![id], 1.0);
    }
    match label.kind() {
        Kind::Ito => (index_preserving_permutations(label.i()), 1.0),
        Kind::Stratonovich => (vec![id], (1..=label.k()).map(|v| v as f64).product()),
    }
}

/// Smallest `p <= p_max` whose error meets `target`. Single integrals are
/// exact at `p = l`. Repeated-index Stratonovich labels use the `k!` bound.
pub fn minimal_p(
    label: &IntegralLabel,
    delta: f64,
    target: f64,
    p_max: usize,
) -> Result<usize, MseError> {
    require_wiener(label)?;
    if label.k() == 1 {
        return Ok(label.l()[0] as usize);
    }
    let (perms, factor) = governing_perms(label);
    let norm = rat_to_f64(&kernel_norm_unit(label.weight()));
    let unit_target = target / delta.powi(label.weight().norm_power() as i32);
    let mut hi = 8.min(p_max);
    loop {
        let t = coefficient_tensor(label.weight(), hi)?;
        let shells = shell_sums(&t, &perms);
        let mut acc = 0.0;
        let mut best = f64::INFINITY;
        for (p, s) in shells.iter().enumerate() {
            acc += s;
            let e = factor * (norm - acc).max(0.0);
            best = best.min(e);
            if e <= unit_target {
                return Ok(p);
            }
        }
        if hi >= p_max {
            return Err(MseError::Unattainable {
                target,
                p_max,
                best: best * delta.powi(label.weight().norm_power() as i32),
            });
        }
        hi = (hi * 2).min(p_max);
    }
}

/// Closed form `Δ²/(4(2q+1))` for the double integral with distinct indices.
pub fn double_distinct_closed_form(q: usize, delta: f64) -> f64 {
    delta * delta / (4.0 * (2 * q + 1) as f64)
}

/// Same, exact in units of `Δ²`.
pub fn double_distinct_closed_form_unit(q: usize) -> BigRational {
    rat(1, 4 * (2 * q as i64 + 1))
}

/// The printed series for the repeated-index `(10)` double integral, in
/// units of `Δ⁴`.
pub fn repeated_10_series_unit(q: usize) -> BigRational {
    let q = q as i64;
    let mut s = rat(1, 9);
    for i in 0..=q {
        s -= rat(1, (2 * i + 1) * (2 * i + 5) * (2 * i + 3) * (2 * i + 3));
    }
    for i in 1..=q {
        s -= rat(2, (2 * i - 1) * (2 * i - 1) * (2 * i + 3) * (2 * i + 3));
    }
    s / rat(16, 1)
}

/// The printed series for the `(10)` double integral with distinct indices,
/// in units of `Δ⁴`.
pub fn distinct_10_series_unit(q: usize) -> BigRational {
    let q = q as i64;
    let mut s = rat(5, 9);
    for i in 2..=q {
        s -= rat(2, 4 * i * i - 1);
    }
    for i in 1..=q {
        s -= rat(1, (2 * i - 1) * (2 * i - 1) * (2 * i + 3) * (2 * i + 3));
    }
    for i in 0..=q {
        s -= rat(
            (i + 2) * (i + 2) + (i + 1) * (i + 1),
            (2 * i + 1) * (2 * i + 5) * (2 * i + 3) * (2 * i + 3),
        );
    }
    s / rat(16, 1)
}
