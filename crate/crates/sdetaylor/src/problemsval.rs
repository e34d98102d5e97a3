//! Checks of integration-order replacement identities for iterated Ito
//! integrals: exact comparison of expansion coefficients after rewriting
//! `dt` integrations into polynomial weights, plus a Monte Carlo comparison
//! of the truncated expansions on shared Gaussian bases.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::coeffs::SparseTensor;
use crate::exactpoly::{legendre_table, nested_simplex_integral, RationalPoly};
use crate::mse::index_preserving_permutations;
use crate::rngstream::stream;
use crate::scalar::{rat, rat_to_f64};
use crate::stochint::{
    closed_form, expansion_sum, GaussianBasis, IntegralLabel, Kind, PreparedClosed, StochError,
};
use crate::BigRational;

#[derive(Debug, Error)]
pub enum ValError {
    #[error("unsupported rewriting: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Stoch(#[from] StochError),
}

/// `coef · ∫ w_k(t_k) .. ∫ w_1(t_1) d(i_1) .. d(i_k)` over one step, with
/// `i = 0` a `dt` differential. Weights are polynomials in the unit
/// coordinate `x ∈ [-1, 1]`, `t_g = t + Δ(1 + x_g)/2`, with `Δ` folded in.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedIntegral {
    pub coef: BigRational,
    pub i: Vec<usize>,
    pub weights: Vec<RationalPoly>,
    label: Option<IntegralLabel>,
}

fn u_to_x(delta: &BigRational) -> (BigRational, BigRational) {
    let h = delta / rat(2, 1);
    (h.clone(), h)
}

impl WeightedIntegral {
    /// Weights given as polynomials in `u = t_g - t ∈ [0, Δ]`.
    pub fn in_elapsed_time(
        coef: BigRational,
        i: Vec<usize>,
        weights: &[RationalPoly],
        delta: &BigRational,
    ) -> Self {
        let (a, b) = u_to_x(delta);
        let weights = weights.iter().map(|w| w.compose_affine(&a, &b)).collect();
        Self {
            coef,
            i,
            weights,
            label: None,
        }
    }

    /// The catalog integral with weights `(t - t_g)^{l_g}`.
    pub fn catalog(coef: BigRational, label: &IntegralLabel, delta: &BigRational) -> Self {
        let mut out = Self::from_left(coef, label.i().to_vec(), label.l(), delta);
        out.label = Some(label.clone());
        out
    }

    /// Weights `(t - t_g)^{l_g}` of any size.
    pub fn from_left(coef: BigRational, i: Vec<usize>, l: &[u32], delta: &BigRational) -> Self {
        let minus_u = RationalPoly::from_ints(&[0, -1]);
        let w: Vec<RationalPoly> = l.iter().map(|&l| minus_u.pow(l)).collect();
        let mut out = Self::in_elapsed_time(coef, i.clone(), &w, delta);
        out.label = IntegralLabel::ito(&i, l).ok();
        out
    }

    /// Weights `(s - t_g)^{l_g}` measured from the right end of the step.
    pub fn from_right(coef: BigRational, i: Vec<usize>, l: &[u32], delta: &BigRational) -> Self {
        let w: Vec<RationalPoly> = l
            .iter()
            .map(|&l| RationalPoly::linear(delta.clone(), rat(-1, 1)).pow(l))
            .collect();
        Self::in_elapsed_time(coef, i, &w, delta)
    }

    pub fn k(&self) -> usize {
        self.i.len()
    }

    fn pattern(&self) -> Vec<usize> {
        self.i.clone()
    }
}

/// Both sides of an identity between linear combinations of weighted
/// iterated integrals on a step of length `delta`.
#[derive(Debug, Clone)]
pub struct IdentityCase {
    pub name: String,
    pub delta: BigRational,
    pub lhs: Vec<WeightedIntegral>,
    pub rhs: Vec<WeightedIntegral>,
}

/// Integrates out every `dt` variable, leaving pure Wiener integrals (and
/// possibly deterministic constants with `k = 0`).
pub fn rewrite(term: &WeightedIntegral, delta: &BigRational) -> Vec<WeightedIntegral> {
    let Some(g) = term.i.iter().position(|&v| v == 0) else {
        let mut t = term.clone();
        t.label = None;
        return vec![t];
    };
    let half = delta / rat(2, 1);
    let w = term.weights[g].scale(&half).antiderivative(&rat(-1, 1));
    let k = term.k();
    let drop = |v: &[RationalPoly]| -> Vec<RationalPoly> {
        v.iter()
            .enumerate()
            .filter(|&(q, _)| q != g)
            .map(|(_, p)| p.clone())
            .collect()
    };
    let mut i = term.i.clone();
    i.remove(g);
    let mut out = Vec::new();
    if k == 1 {
        out.push(WeightedIntegral {
            coef: &term.coef * w.eval(&rat(1, 1)),
            i,
            weights: Vec::new(),
            label: None,
        });
    } else {
        // ∫_{x_{g-1}}^{x_{g+1}} w dx = W(x_{g+1}) - W(x_{g-1}); the ends are
        // -1 below the innermost and +1 above the outermost variable
        let mut parts: Vec<(BigRational, Vec<RationalPoly>)> = Vec::new();
        if g + 1 < k {
            let mut ws = term.weights.clone();
            ws[g + 1] = &ws[g + 1] * &w;
            parts.push((term.coef.clone(), drop(&ws)));
        } else {
            let mut ws = term.weights.clone();
            ws[g - 1] = &ws[g - 1] * &RationalPoly::constant(w.eval(&rat(1, 1)));
            parts.push((term.coef.clone(), drop(&ws)));
        }
        if g > 0 {
            let mut ws = term.weights.clone();
            ws[g - 1] = &ws[g - 1] * &w;
            parts.push((-term.coef.clone(), drop(&ws)));
        }
        for (coef, weights) in parts {
            let t = WeightedIntegral {
                coef,
                i: i.clone(),
                weights,
                label: None,
            };
            out.extend(rewrite(&t, delta));
        }
    }
    out
}

fn all_indices(k: usize, p: usize) -> impl Iterator<Item = Vec<usize>> {
    let n = (p + 1).pow(k as u32);
    (0..n).map(move |mut f| {
        let mut j = Vec::with_capacity(k);
        for _ in 0..k {
            j.push(f % (p + 1));
            f /= p + 1;
        }
        j
    })
}

/// Nested integral of `w_g P_{j_g}`; the coefficient is this times
/// `Δ^{k/2} sqrt(∏(2j_g + 1)) / 2^k`.
fn unit_coefficient(
    weights: &[RationalPoly],
    j: &[usize],
    legendre: &[RationalPoly],
) -> BigRational {
    let w: Vec<RationalPoly> = weights
        .iter()
        .zip(j)
        .map(|(w, &jj)| w * &legendre[jj])
        .collect();
    nested_simplex_integral(&w)
}

/// Expansion coefficients of one side after rewriting, keyed by the Wiener
/// index pattern; the empty pattern holds the deterministic part.
pub type CoefficientMap = BTreeMap<Vec<usize>, Vec<BigRational>>;

pub fn side_coefficients(
    side: &[WeightedIntegral],
    delta: &BigRational,
    p: usize,
) -> CoefficientMap {
    let legendre = legendre_table(p);
    let mut out: CoefficientMap = BTreeMap::new();
    for term in side.iter().flat_map(|t| rewrite(t, delta)) {
        let k = term.k();
        let entry = out
            .entry(term.pattern())
            .or_insert_with(|| vec![BigRational::zero(); (p + 1).pow(k as u32)]);
        for (n, j) in all_indices(k, p).enumerate() {
            entry[n] += &term.coef * unit_coefficient(&term.weights, &j, &legendre);
        }
    }
    out.retain(|_, v| v.iter().any(|c| !c.is_zero()));
    out
}

/// Exact equality of both sides' coefficients for all multi-indices `<= p`.
pub fn coefficients_agree(case: &IdentityCase, p: usize) -> bool {
    side_coefficients(&case.lhs, &case.delta, p) == side_coefficients(&case.rhs, &case.delta, p)
}

/// Exact mean-square truncation error at uniform level `p` of the series
/// terms of one side; terms with closed forms contribute nothing.
pub fn side_mse(
    side: &[WeightedIntegral],
    delta: &BigRational,
    p: usize,
) -> Result<BigRational, ValError> {
    let series: Vec<WeightedIntegral> = side
        .iter()
        .filter(|t| t.label.as_ref().and_then(closed_form).is_none())
        .flat_map(|t| rewrite(t, delta))
        .filter(|t| t.k() > 0)
        .collect();
    let Some(first) = series.first() else {
        return Ok(BigRational::zero());
    };
    let pattern = first.pattern();
    if series.iter().any(|t| t.pattern() != pattern) {
        return Err(ValError::Unsupported(
            "series terms with different index patterns".into(),
        ));
    }
    let k = pattern.len();
    let mut norm = BigRational::zero();
    for a in &series {
        for b in &series {
            let w: Vec<RationalPoly> = a
                .weights
                .iter()
                .zip(&b.weights)
                .map(|(x, y)| x * y)
                .collect();
            norm += &a.coef * &b.coef * nested_simplex_integral(&w);
        }
    }
    let legendre = legendre_table(p);
    let coefs: BTreeMap<Vec<usize>, BigRational> = all_indices(k, p)
        .map(|j| {
            let c = series
                .iter()
                .map(|t| &t.coef * unit_coefficient(&t.weights, &j, &legendre))
                .sum();
            (j, c)
        })
        .collect();
    let perms = index_preserving_permutations(&pattern);
    let mut matched = BigRational::zero();
    for (j, c) in &coefs {
        if c.is_zero() {
            continue;
        }
        let odd: usize = j.iter().map(|&v| 2 * v + 1).product();
        let mut s = BigRational::zero();
        for pi in &perms {
            let jp: Vec<usize> = (0..k).map(|g| j[pi[g]]).collect();
            s += &coefs[&jp];
        }
        matched += BigRational::from_integer(odd.into()) * c * s;
    }
    let two_k = BigRational::from_integer((1u64 << k).into());
    let dk = num_traits::pow(delta.clone(), k);
    Ok(dk.clone() / &two_k * norm - dk / (&two_k * &two_k) * matched)
}

/// One term prepared for evaluation at truncation `p` on a basis.
enum Evaluator {
    Closed(BigRational, PreparedClosed<f64>),
    Series(Vec<usize>, SparseTensor<f64>),
}

impl Evaluator {
    fn new(
        term: &WeightedIntegral,
        delta: &BigRational,
        p: usize,
        legendre: &[RationalPoly],
    ) -> Self {
        let d = rat_to_f64(delta);
        if let Some(form) = term.label.as_ref().and_then(closed_form) {
            return Self::Closed(term.coef.clone(), PreparedClosed::new(form, d));
        }
        let k = term.k();
        let mut t = SparseTensor::empty(k);
        let scale = d.powf(k as f64 / 2.0) / 2f64.powi(k as i32) * rat_to_f64(&term.coef);
        for j in all_indices(k, p) {
            // time columns carry only the constant mode
            if j.iter().zip(&term.i).any(|(&jj, &ii)| ii == 0 && jj > 0) {
                continue;
            }
            let c = unit_coefficient(&term.weights, &j, legendre);
            if c.is_zero() {
                continue;
            }
            let odd: usize = j.iter().map(|&v| 2 * v + 1).product();
            t.push(&j, scale * (odd as f64).sqrt() * rat_to_f64(&c));
        }
        Self::Series(term.i.clone(), t)
    }

    fn eval(&self, basis: &GaussianBasis<f64>) -> f64 {
        match self {
            Self::Closed(c, f) => rat_to_f64(c) * f.eval(basis),
            Self::Series(i, t) => expansion_sum(t, i, Kind::Ito, |i, j| basis.zeta(i, j)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityRow {
    pub p: usize,
    pub coefficients_agree: bool,
    pub ms_difference: f64,
    pub std_error: f64,
    pub truncation_mse: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub trials: u64,
    pub seed: u64,
    pub rows: Vec<IdentityRow>,
    pub pass: bool,
}

/// Bound factor on the empirical mean-square difference relative to the
/// sum of both sides' truncation errors.
pub const MS_FACTOR: f64 = 10.0;

/// Evaluates both sides on shared bases at each `p` in `ps` (bases sampled
/// once at the largest level and truncated).
pub fn check_identity(
    case: &IdentityCase,
    ps: &[usize],
    trials: u64,
    seed: u64,
) -> Result<IdentityReport, ValError> {
    let p_max = ps.iter().copied().max().unwrap_or(0);
    let m = case
        .lhs
        .iter()
        .chain(&case.rhs)
        .flat_map(|t| t.i.iter().copied())
        .max()
        .unwrap_or(0)
        .max(1);
    let d = rat_to_f64(&case.delta);
    let legendre = legendre_table(p_max);
    let mut rows = Vec::with_capacity(ps.len());
    let prepared: Vec<(Vec<Evaluator>, Vec<Evaluator>)> = ps
        .iter()
        .map(|&p| {
            let mk = |s: &[WeightedIntegral]| {
                s.iter()
                    .map(|t| Evaluator::new(t, &case.delta, p, &legendre))
                    .collect()
            };
            (mk(&case.lhs), mk(&case.rhs))
        })
        .collect();
    let mut sum = vec![0.0; ps.len()];
    let mut sum2 = vec![0.0; ps.len()];
    for trial in 0..trials {
        let full = GaussianBasis::<f64>::sample(&mut stream(seed, trial, 0), m, p_max, d);
        for (n, &p) in ps.iter().enumerate() {
            let basis = full.truncated(p);
            let (l, r) = &prepared[n];
            let diff = l.iter().map(|e| e.eval(&basis)).sum::<f64>()
                - r.iter().map(|e| e.eval(&basis)).sum::<f64>();
            sum[n] += diff * diff;
            sum2[n] += diff.powi(4);
        }
    }
    let nt = trials.max(1) as f64;
    for (n, &p) in ps.iter().enumerate() {
        let mean = sum[n] / nt;
        let var = (sum2[n] / nt - mean * mean).max(0.0);
        let bound = rat_to_f64(
            &(side_mse(&case.lhs, &case.delta, p)? + side_mse(&case.rhs, &case.delta, p)?),
        );
        let agree = coefficients_agree(case, p);
        rows.push(IdentityRow {
            p,
            coefficients_agree: agree,
            ms_difference: mean,
            std_error: (var / nt).sqrt(),
            truncation_mse: bound,
            pass: agree && mean <= MS_FACTOR * bound,
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(IdentityReport {
        name: case.name.clone(),
        trials,
        seed,
        rows,
        pass,
    })
}

fn ito(i: &[usize], l: &[u32]) -> IntegralLabel {
    IntegralLabel::ito(i, l).expect("valid label")
}

/// `∫∫∫ df df dt = ∫ (s - t_2) ∫ df df`, written with catalog integrals on
/// the right.
pub fn outer_time_double(delta: BigRational) -> IdentityCase {
    let lhs = vec![WeightedIntegral::catalog(
        BigRational::one(),
        &ito(&[1, 1, 0], &[0, 0, 0]),
        &delta,
    )];
    let rhs = vec![
        WeightedIntegral::catalog(delta.clone(), &ito(&[1, 1], &[0, 0]), &delta),
        WeightedIntegral::catalog(BigRational::one(), &ito(&[1, 1], &[0, 1]), &delta),
    ];
    IdentityCase {
        name: "outer-time-double".into(),
        delta,
        lhs,
        rhs,
    }
}

/// `∫∫∫∫ df dt df dt = ∫ (s - t_2) ∫ (t_2 - t_1) df df`.
pub fn alternating_time_quadruple(delta: BigRational) -> IdentityCase {
    let lhs = vec![WeightedIntegral::catalog(
        BigRational::one(),
        &ito(&[1, 0, 1, 0], &[0; 4]),
        &delta,
    )];
    let one = BigRational::one();
    let rhs = vec![
        WeightedIntegral::catalog(delta.clone(), &ito(&[1, 1], &[1, 0]), &delta),
        WeightedIntegral::catalog(-delta.clone(), &ito(&[1, 1], &[0, 1]), &delta),
        WeightedIntegral::catalog(one.clone(), &ito(&[1, 1], &[1, 1]), &delta),
        WeightedIntegral::catalog(-one, &ito(&[1, 1], &[0, 2]), &delta),
    ];
    IdentityCase {
        name: "alternating-time-quadruple".into(),
        delta,
        lhs,
        rhs,
    }
}

/// `∫ g(τ) ∫ h(θ) ∫ df^{(1)} df^{(2)} dτ = ∫ (G(s) - G(θ)) h(θ) ∫ df^{(1)} df^{(2)}`
/// with `g(u) = 1 + 2u`, `G(u) = u + u²` and `h(u) = 1 - u`.
pub fn antiderivative_swap(delta: BigRational) -> IdentityCase {
    let g = RationalPoly::from_ints(&[1, 2]);
    let h = RationalPoly::from_ints(&[1, -1]);
    let big_g = RationalPoly::from_ints(&[0, 1, 1]);
    let one = RationalPoly::one();
    let lhs = vec![WeightedIntegral::in_elapsed_time(
        BigRational::one(),
        vec![1, 2, 0],
        &[one.clone(), h.clone(), g],
        &delta,
    )];
    let gs = RationalPoly::constant(big_g.eval(&delta));
    let rhs = vec![WeightedIntegral::in_elapsed_time(
        BigRational::one(),
        vec![1, 2],
        &[one, &(&gs - &big_g) * &h],
        &delta,
    )];
    IdentityCase {
        name: "antiderivative-swap".into(),
        delta,
        lhs,
        rhs,
    }
}

/// `I_l^{(i)} = Σ_j ∏ C(l_g, j_g) (t - s)^{Σl - Σj} J_j^{(i)}` where `J`
/// carries the weights `(s - t_g)^{j_g}`.
pub fn binomial(i: &[usize], l: &[u32], delta: BigRational) -> IdentityCase {
    let lhs = vec![WeightedIntegral::from_left(
        BigRational::one(),
        i.to_vec(),
        l,
        &delta,
    )];
    let mut rhs = Vec::new();
    let total: u32 = l.iter().sum();
    let k = l.len();
    let n: usize = l.iter().map(|&v| v as usize + 1).product();
    for mut f in 0..n {
        let mut j = Vec::with_capacity(k);
        let mut c = BigRational::one();
        for &lg in l {
            let jg = (f % (lg as usize + 1)) as u32;
            f /= lg as usize + 1;
            c *= BigRational::from_integer(binom(lg, jg).into());
            j.push(jg);
        }
        let e = total - j.iter().sum::<u32>();
        c *= num_traits::pow(-delta.clone(), e as usize);
        rhs.push(WeightedIntegral::from_right(c, i.to_vec(), &j, &delta));
    }
    let name = format!("binomial-l{}-i{}", concat(l), concat(i));
    IdentityCase {
        name,
        delta,
        lhs,
        rhs,
    }
}

fn concat<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect()
}

fn binom(n: u32, k: u32) -> u64 {
    (0..k).fold(1u64, |acc, q| acc * u64::from(n - q) / u64::from(q + 1))
}

/// Every binomial case with `k <= 2` and weights `<= 2`.
pub fn binomial_cases(delta: &BigRational) -> Vec<IdentityCase> {
    let mut out = Vec::new();
    for l1 in 0..=2 {
        out.push(binomial(&[1], &[l1], delta.clone()));
        for l2 in 0..=2 {
            for i in [[1, 1], [1, 2], [2, 1]] {
                out.push(binomial(&i, &[l1, l2], delta.clone()));
            }
        }
    }
    out
}

pub fn trivial(delta: BigRational) -> IdentityCase {
    let t = WeightedIntegral::catalog(BigRational::one(), &ito(&[1, 2], &[1, 0]), &delta);
    IdentityCase {
        name: "trivial".into(),
        delta,
        lhs: vec![t.clone()],
        rhs: vec![t],
    }
}

/// The identities exercised by Monte Carlo.
pub fn identity_catalog(delta: &BigRational) -> Vec<IdentityCase> {
    vec![
        outer_time_double(delta.clone()),
        alternating_time_quadruple(delta.clone()),
        antiderivative_swap(delta.clone()),
        trivial(delta.clone()),
    ]
}

/// Largest absolute coefficient discrepancy, for diagnostics.
pub fn max_discrepancy(case: &IdentityCase, p: usize) -> BigRational {
    let a = side_coefficients(&case.lhs, &case.delta, p);
    let b = side_coefficients(&case.rhs, &case.delta, p);
    let mut worst = BigRational::zero();
    for key in a.keys().chain(b.keys()) {
        let (x, y) = (a.get(key), b.get(key));
        let len = x.or(y).map_or(0, Vec::len);
        for n in 0..len {
            let u = x.map_or_else(BigRational::zero, |v| v[n].clone());
            let w = y.map_or_else(BigRational::zero, |v| v[n].clone());
            let d = (u - w).abs();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::unit_coefficient as catalog_coefficient;
    use crate::mse::exact_mse_ito_unit;

    fn one() -> BigRational {
        BigRational::one()
    }

    #[test]
    fn catalog_weights_reproduce_catalog_coefficients() {
        let lab = ito(&[1, 2], &[1, 1]);
        let t = WeightedIntegral::catalog(one(), &lab, &one());
        let leg = legendre_table(3);
        for j in all_indices(2, 3) {
            // catalog coefficients use (1+x)^l and the sign (-1)^{Σl}; here Δ = 1
            // folds 2^{-Σl} into the weights
            let want = catalog_coefficient(lab.weight(), &j).unwrap() / rat(4, 1);
            assert_eq!(unit_coefficient(&t.weights, &j, &leg), want, "{j:?}");
        }
    }

    #[test]
    fn single_term_mse_matches_catalog() {
        for (i, l, p) in [
            (vec![1, 2], vec![0, 0], 3),
            (vec![1, 1], vec![1, 0], 2),
            (vec![1, 2, 1], vec![0, 0, 0], 2),
        ] {
            let lab = ito(&i, &l);
            let side = vec![WeightedIntegral::catalog(one(), &lab, &one())];
            assert_eq!(
                side_mse(&side, &one(), p).unwrap(),
                exact_mse_ito_unit(&lab, p).unwrap(),
                "{i:?} {l:?}"
            );
        }
        let delta = rat(1, 3);
        let lab = ito(&[1, 2], &[0, 0]);
        let side = vec![WeightedIntegral::catalog(one(), &lab, &delta)];
        assert_eq!(
            side_mse(&side, &delta, 4).unwrap(),
            exact_mse_ito_unit(&lab, 4).unwrap() * rat(1, 9)
        );
    }

    #[test]
    fn closed_form_terms_have_no_truncation_error() {
        let side = vec![WeightedIntegral::catalog(
            one(),
            &ito(&[1, 1], &[0, 0]),
            &one(),
        )];
        assert!(side_mse(&side, &one(), 2).unwrap().is_zero());
    }

    #[test]
    fn rewriting_a_single_time_integral() {
        let delta = rat(2, 1);
        let t = WeightedIntegral::catalog(one(), &ito(&[0], &[0]), &delta);
        let r = rewrite(&t, &delta);
        assert_eq!(r.len(), 1);
        assert!(r[0].i.is_empty());
        assert_eq!(r[0].coef, delta);
        // ∫ (t - τ) dτ = -Δ²/2
        let t = WeightedIntegral::catalog(one(), &ito(&[0], &[1]), &delta);
        assert_eq!(rewrite(&t, &delta)[0].coef, rat(-2, 1));
    }

    #[test]
    fn order_replacement_identities_hold_coefficientwise() {
        for delta in [one(), rat(3, 4)] {
            for case in identity_catalog(&delta) {
                for p in 0..=4 {
                    assert!(
                        coefficients_agree(&case, p),
                        "{} p={p}: {}",
                        case.name,
                        max_discrepancy(&case, p)
                    );
                }
            }
        }
    }

    #[test]
    fn binomial_relation_is_exact() {
        for delta in [one(), rat(5, 7)] {
            for case in binomial_cases(&delta) {
                for p in 0..=6 {
                    assert!(coefficients_agree(&case, p), "{} p={p}", case.name);
                }
            }
        }
    }

    #[test]
    fn a_wrong_identity_is_detected() {
        let mut case = outer_time_double(one());
        case.rhs.pop();
        assert!(!coefficients_agree(&case, 2));
        let r = check_identity(&case, &[2], 2000, 3).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn trivial_case_has_zero_difference() {
        let r = check_identity(&trivial(one()), &[2, 4], 200, 1).unwrap();
        assert!(r.pass);
        assert!(r.rows.iter().all(|row| row.ms_difference == 0.0));
    }

    #[test]
    fn monte_carlo_sides_agree() {
        // the repeated-index double integral's series is exact at every p,
        // so the sides agree up to rounding
        let r = check_identity(&outer_time_double(one()), &[2, 4, 8], 4000, 7).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.rows.iter().all(|row| row.ms_difference < 1e-25));
        let e: Vec<f64> = r.rows.iter().map(|row| row.truncation_mse).collect();
        assert!(e[0] > e[1] && e[1] > e[2] && e[2] > 0.0, "{e:?}");
        assert!(crate::mse::exact_mse_ito_unit(&ito(&[1, 1], &[0, 0]), 3)
            .unwrap()
            .is_zero());
    }
}
