//! Gaussian bases and truncated expansions of iterated Ito and
//! Stratonovich integrals.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeffs::{scaled_coefficient, CoeffError, ScaledTensor, SparseTensor, WeightVector};
use crate::rngstream::normal;
use crate::scalar::{Real, Ring};

#[derive(Debug, Error)]
pub enum StochError {
    #[error("label has {k} positions but {got} indices")]
    Arity { k: usize, got: usize },
    #[error("Wiener index {i} outside 0..={m}")]
    IndexRange { i: usize, m: usize },
    #[error("tensor shape {tensor:?} does not match label shape {label:?}")]
    ShapeMismatch { label: Vec<u32>, tensor: Vec<u32> },
    #[error("basis truncation {basis} is below the required {need}")]
    BasisTooSmall { basis: usize, need: usize },
    #[error("no conversion identity for {0}")]
    NoConversion(String),
    #[error("conversion of {0} needs the Gaussian basis")]
    NeedsBasis(String),
    #[error("cannot parse integral name {0:?}")]
    Parse(String),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    Ito,
    Stratonovich,
}

impl Kind {
    pub fn other(self) -> Self {
        match self {
            Kind::Ito => Kind::Stratonovich,
            Kind::Stratonovich => Kind::Ito,
        }
    }
}

/// `I^{(i_1..i_k)}_{l_1..l_k}` or its Stratonovich twin; index 0 is time.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntegralLabel {
    i: Vec<usize>,
    weight: WeightVector,
    kind: Kind,
}

impl IntegralLabel {
    pub fn new(i: Vec<usize>, l: Vec<u32>, kind: Kind) -> Result<Self, StochError> {
        if i.len() != l.len() {
            return Err(StochError::Arity {
                k: l.len(),
                got: i.len(),
            });
        }
        Ok(Self {
            i,
            weight: WeightVector::new(l)?,
            kind,
        })
    }

    pub fn ito(i: &[usize], l: &[u32]) -> Result<Self, StochError> {
        Self::new(i.to_vec(), l.to_vec(), Kind::Ito)
    }

    pub fn strat(i: &[usize], l: &[u32]) -> Result<Self, StochError> {
        Self::new(i.to_vec(), l.to_vec(), Kind::Stratonovich)
    }

    pub fn k(&self) -> usize {
        self.i.len()
    }

    pub fn i(&self) -> &[usize] {
        &self.i
    }

    pub fn l(&self) -> &[u32] {
        self.weight.l()
    }

    pub fn weight(&self) -> &WeightVector {
        &self.weight
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn with_kind(&self, kind: Kind) -> Self {
        Self {
            kind,
            ..self.clone()
        }
    }

    pub fn max_index(&self) -> usize {
        self.i.iter().copied().max().unwrap_or(0)
    }

    /// Stratonovich multiplicity 6 rests on an unproved convergence claim.
    pub fn is_hypothesis(&self) -> bool {
        self.kind == Kind::Stratonovich && self.k() == 6
    }

    pub fn has_time(&self) -> bool {
        self.i.contains(&0)
    }

    pub fn distinct_nonzero(&self) -> bool {
        let mut v = self.i.clone();
        v.sort_unstable();
        v.iter().all(|&x| x != 0) && v.windows(2).all(|w| w[0] != w[1])
    }

    pub fn name(&self) -> String {
        let star = if self.kind == Kind::Stratonovich {
            "*"
        } else {
            ""
        };
        let l: String = self.l().iter().map(|v| v.to_string()).collect();
        let i = self
            .i
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        format!("I{star}_({l})^({i})")
    }
}

impl std::str::FromStr for IntegralLabel {
    type Err = StochError;

    /// Inverse of [`IntegralLabel::name`], e.g. `I_(01)^(1,2)` or `I*_(0)^(1)`.
    fn from_str(s: &str) -> Result<Self, StochError> {
        let bad = || StochError::Parse(s.to_string());
        let rest = s.trim().strip_prefix('I').ok_or_else(bad)?;
        let (kind, rest) = match rest.strip_prefix('*') {
            Some(r) => (Kind::Stratonovich, r),
            None => (Kind::Ito, rest),
        };
        let rest = rest.strip_prefix("_(").ok_or_else(bad)?;
        let (l, rest) = rest.split_once(")^(").ok_or_else(bad)?;
        let i = rest.strip_suffix(')').ok_or_else(bad)?;
        let l = l
            .chars()
            .map(|c| c.to_digit(10).ok_or_else(bad))
            .collect::<Result<Vec<u32>, _>>()?;
        let i = i
            .split(',')
            .map(|v| v.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(i, l, kind)
    }
}

/// `ζ_j^{(i)}` for one step: i.i.d. standard normals for `i = 1..m`,
/// `j = 0..p`, plus the deterministic time column.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBasis<T> {
    m: usize,
    p: usize,
    delta: T,
    sqrt_delta: T,
    values: Vec<T>,
}

impl<T: Real> GaussianBasis<T> {
    pub fn from_values(m: usize, p: usize, delta: T, values: Vec<T>) -> Self {
        assert_eq!(values.len(), m * (p + 1), "basis value count");
        Self {
            m,
            p,
            delta,
            sqrt_delta: delta.sqrt(),
            values,
        }
    }

    /// Draws modes in order `j = 0, 1, ..`, all components per mode, so a
    /// basis at `p` is a prefix of the basis at any `p' > p` from the same
    /// stream.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, m: usize, p: usize, delta: T) -> Self {
        let mut values = vec![T::zero(); m * (p + 1)];
        for j in 0..=p {
            for i in 0..m {
                values[i * (p + 1) + j] = normal(rng);
            }
        }
        Self::from_values(m, p, delta, values)
    }

    /// The same basis cut to `p' <= p` modes.
    pub fn truncated(&self, p: usize) -> Self {
        let p = p.min(self.p);
        let mut values = Vec::with_capacity(self.m * (p + 1));
        for i in 1..=self.m {
            values.extend_from_slice(&self.column(i)[..=p]);
        }
        Self::from_values(self.m, p, self.delta, values)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn zeta(&self, i: usize, j: usize) -> T {
        if i == 0 {
            return if j == 0 { self.sqrt_delta } else { T::zero() };
        }
        if j > self.p {
            return T::zero();
        }
        self.values[(i - 1) * (self.p + 1) + j]
    }

    /// Column `i` (1-based) as a slice.
    pub fn column(&self, i: usize) -> &[T] {
        &self.values[(i - 1) * (self.p + 1)..i * (self.p + 1)]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Wiener increment of component `i` over the step.
    pub fn increment(&self, i: usize) -> T {
        self.sqrt_delta * self.zeta(i, 0)
    }
}

pub fn sample_basis<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    p: usize,
    delta: T,
) -> GaussianBasis<T> {
    GaussianBasis::sample(rng, m, p, delta)
}

/// All partial matchings of positions whose indices agree and are nonzero.
pub fn matchings(i: &[usize]) -> Vec<Vec<(usize, usize)>> {
    fn rec(
        i: &[usize],
        free: &mut Vec<usize>,
        cur: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        let Some(first) = free.first().copied() else {
            out.push(cur.clone());
            return;
        };
        free.remove(0);
        rec(i, free, cur, out);
        for idx in 0..free.len() {
            let q = free[idx];
            if i[first] != 0 && i[first] == i[q] {
                free.remove(idx);
                cur.push((first, q));
                rec(i, free, cur, out);
                cur.pop();
                free.insert(idx, q);
            }
        }
        free.insert(0, first);
    }
    let mut out = Vec::new();
    rec(i, &mut (0..i.len()).collect(), &mut Vec::new(), &mut out);
    out
}

/// Generic truncated expansion over any ring: the plain multi-sum for the
/// Stratonovich kind, with the signed matching corrections for Ito.
pub fn expansion_sum<T: Ring>(
    tensor: &SparseTensor<T>,
    i: &[usize],
    kind: Kind,
    zeta: impl Fn(usize, usize) -> T,
) -> T {
    let k = i.len();
    let ms = match kind {
        Kind::Ito => matchings(i),
        Kind::Stratonovich => vec![Vec::new()],
    };
    let mut paired = vec![false; k];
    let mut total = T::zero();
    for (j, c) in tensor.iter() {
        let z: Vec<T> = (0..k).map(|g| zeta(i[g], j[g] as usize)).collect();
        let mut w = T::zero();
        for m in &ms {
            if m.iter().any(|&(r, q)| j[r] != j[q]) {
                continue;
            }
            paired.iter_mut().for_each(|x| *x = false);
            for &(r, q) in m {
                paired[r] = true;
                paired[q] = true;
            }
            let mut term = T::one();
            for g in 0..k {
                if !paired[g] {
                    term = term * z[g].clone();
                }
            }
            if m.len() % 2 == 1 {
                term = -term;
            }
            w = w + term;
        }
        total = total + c.clone() * w;
    }
    total
}

fn check<T: Real>(
    label: &IntegralLabel,
    basis: &GaussianBasis<T>,
    tensor: &ScaledTensor<T>,
) -> Result<(), StochError> {
    if tensor.weight() != label.weight() {
        return Err(StochError::ShapeMismatch {
            label: label.l().to_vec(),
            tensor: tensor.weight().l().to_vec(),
        });
    }
    if let Some(&bad) = label.i().iter().find(|&&x| x > basis.m()) {
        return Err(StochError::IndexRange {
            i: bad,
            m: basis.m(),
        });
    }
    if basis.p() < tensor.p() {
        return Err(StochError::BasisTooSmall {
            basis: basis.p(),
            need: tensor.p(),
        });
    }
    Ok(())
}

/// Truncated Stratonovich expansion (plain multi-sum).
pub fn strat_value<T: Real>(
    label: &IntegralLabel,
    basis: &GaussianBasis<T>,
    tensor: &ScaledTensor<T>,
) -> Result<T, StochError> {
    check(label, basis, tensor)?;
    Ok(expansion_sum(
        tensor.sparse(),
        label.i(),
        Kind::Stratonovich,
        |i, j| basis.zeta(i, j),
    ))
}

/// Truncated Ito expansion with matching corrections.
pub fn ito_value<T: Real>(
    label: &IntegralLabel,
    basis: &GaussianBasis<T>,
    tensor: &ScaledTensor<T>,
) -> Result<T, StochError> {
    check(label, basis, tensor)?;
    Ok(expansion_sum(
        tensor.sparse(),
        label.i(),
        Kind::Ito,
        |i, j| basis.zeta(i, j),
    ))
}

pub fn series_value<T: Real>(
    label: &IntegralLabel,
    basis: &GaussianBasis<T>,
    tensor: &ScaledTensor<T>,
) -> Result<T, StochError> {
    match label.kind() {
        Kind::Ito => ito_value(label, basis, tensor),
        Kind::Stratonovich => strat_value(label, basis, tensor),
    }
}

/// A series expansion with the deterministic time positions contracted out
/// once, so repeated evaluation only touches Wiener positions.
#[derive(Debug, Clone)]
pub struct PreparedSeries<T> {
    label: IntegralLabel,
    wiener_i: Vec<usize>,
    reduced: SparseTensor<T>,
    matchings: Vec<Vec<(usize, usize)>>,
    p: usize,
}

impl<T: Real> PreparedSeries<T> {
    pub fn new(
        label: &IntegralLabel,
        tensor: &ScaledTensor<T>,
        delta: T,
    ) -> Result<Self, StochError> {
        if tensor.weight() != label.weight() {
            return Err(StochError::ShapeMismatch {
                label: label.l().to_vec(),
                tensor: tensor.weight().l().to_vec(),
            });
        }
        let pos: Vec<usize> = (0..label.k()).filter(|&g| label.i()[g] != 0).collect();
        let sd = delta.sqrt();
        let mut acc: BTreeMap<Vec<u16>, T> = BTreeMap::new();
        for (j, &c) in tensor.sparse().iter() {
            let mut v = c;
            let mut keep = true;
            for g in 0..label.k() {
                if label.i()[g] == 0 {
                    if j[g] != 0 {
                        keep = false;
                        break;
                    }
                    v = v * sd;
                }
            }
            if keep {
                let key: Vec<u16> = pos.iter().map(|&g| j[g]).collect();
                let e = acc.entry(key).or_insert(T::zero());
                *e = *e + v;
            }
        }
        let mut reduced = SparseTensor::empty(pos.len());
        for (key, v) in acc {
            let j: Vec<usize> = key.iter().map(|&x| x as usize).collect();
            reduced.push(&j, v);
        }
        let wiener_i: Vec<usize> = pos.iter().map(|&g| label.i()[g]).collect();
        let matchings = match label.kind() {
            Kind::Ito => matchings(&wiener_i),
            Kind::Stratonovich => vec![Vec::new()],
        };
        Ok(Self {
            label: label.clone(),
            wiener_i,
            reduced,
            matchings,
            p: tensor.p(),
        })
    }

    pub fn label(&self) -> &IntegralLabel {
        &self.label
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn eval(&self, basis: &GaussianBasis<T>) -> T {
        let k = self.wiener_i.len();
        let cols: Vec<&[T]> = self.wiener_i.iter().map(|&i| basis.column(i)).collect();
        let mut paired = [false; 6];
        let mut total = T::zero();
        for (j, &c) in self.reduced.iter() {
            let mut w = T::zero();
            for m in &self.matchings {
                if m.iter().any(|&(r, q)| j[r] != j[q]) {
                    continue;
                }
                paired.iter_mut().for_each(|x| *x = false);
                for &(r, q) in m {
                    paired[r] = true;
                    paired[q] = true;
                }
                let mut term = T::one();
                for g in 0..k {
                    if !paired[g] {
                        term = term * cols[g][j[g] as usize];
                    }
                }
                if m.len() % 2 == 1 {
                    term = -term;
                }
                w = w + term;
            }
            total = total + c * w;
        }
        total
    }
}

/// Evaluators for labels with a finite closed form in the first few
/// Gaussian modes.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm {
    /// `I_(l) = Σ_{j<=l} C_j ζ_j`.
    Single { i: usize, l: u32 },
    /// All indices equal and nonzero, all weights equal.
    Diagonal {
        i: usize,
        l: u32,
        k: usize,
        kind: Kind,
    },
}

pub fn closed_form(label: &IntegralLabel) -> Option<ClosedForm> {
    let i0 = label.i()[0];
    let l0 = label.l()[0];
    if label.k() == 1 {
        return Some(ClosedForm::Single { i: i0, l: l0 });
    }
    let same_i = label.i().iter().all(|&x| x == i0);
    let same_l = label.l().iter().all(|&x| x == l0);
    if i0 != 0 && same_i && same_l {
        return Some(ClosedForm::Diagonal {
            i: i0,
            l: l0,
            k: label.k(),
            kind: label.kind(),
        });
    }
    None
}

/// Probabilists' Hermite polynomial `He_n`.
pub fn hermite<T: Real>(n: usize, x: T) -> T {
    let mut a = T::one();
    if n == 0 {
        return a;
    }
    let mut b = x;
    for k in 1..n {
        let c = x * b - T::of(k as f64) * a;
        a = b;
        b = c;
    }
    b
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

impl ClosedForm {
    /// Highest Gaussian mode read.
    pub fn modes(&self) -> usize {
        match *self {
            ClosedForm::Single { l, .. } | ClosedForm::Diagonal { l, .. } => l as usize,
        }
    }

    pub fn eval<T: Real>(&self, basis: &GaussianBasis<T>) -> T {
        let delta = basis.delta().f64();
        match *self {
            ClosedForm::Single { i, l } => single(i, l, basis),
            ClosedForm::Diagonal { i, l, k, kind } => {
                let v = single(i, l, basis);
                let kf = T::of(factorial(k));
                match kind {
                    Kind::Stratonovich => v.powi(k as i32) / kf,
                    Kind::Ito => {
                        let var = T::of(delta.powi(2 * l as i32 + 1) / (2 * l + 1) as f64);
                        let s = var.sqrt();
                        s.powi(k as i32) * hermite(k, v / s) / kf
                    }
                }
            }
        }
    }
}

/// A closed form with its coefficients evaluated once for a step size.
#[derive(Debug, Clone)]
pub struct PreparedClosed<T> {
    form: ClosedForm,
    coef: Vec<T>,
    scale: T,
    inv_kfact: T,
}

impl<T: Real> PreparedClosed<T> {
    pub fn new(form: ClosedForm, delta: f64) -> Self {
        let (l, k) = match form {
            ClosedForm::Single { l, .. } => (l, 1),
            ClosedForm::Diagonal { l, k, .. } => (l, k),
        };
        let w = WeightVector::new(vec![l]).expect("single weight in catalog");
        let coef = (0..=l as usize)
            .map(|j| T::of(scaled_coefficient(&w, &[j], delta).expect("k = 1")))
            .collect();
        let scale = T::of((delta.powi(2 * l as i32 + 1) / (2 * l + 1) as f64).sqrt());
        Self {
            form,
            coef,
            scale,
            inv_kfact: T::of(1.0 / factorial(k)),
        }
    }

    pub fn form(&self) -> &ClosedForm {
        &self.form
    }

    pub fn eval(&self, basis: &GaussianBasis<T>) -> T {
        let i = match self.form {
            ClosedForm::Single { i, .. } | ClosedForm::Diagonal { i, .. } => i,
        };
        let v = self
            .coef
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (j, &c)| acc + c * basis.zeta(i, j));
        match self.form {
            ClosedForm::Single { .. } => v,
            ClosedForm::Diagonal {
                k,
                kind: Kind::Stratonovich,
                ..
            } => v.powi(k as i32) * self.inv_kfact,
            ClosedForm::Diagonal {
                k, kind: Kind::Ito, ..
            } => self.scale.powi(k as i32) * hermite(k, v / self.scale) * self.inv_kfact,
        }
    }
}

fn single<T: Real>(i: usize, l: u32, basis: &GaussianBasis<T>) -> T {
    let w = WeightVector::new(vec![l]).expect("single weight in catalog");
    let d = basis.delta().f64();
    (0..=l as usize).fold(T::zero(), |acc, j| {
        let c = scaled_coefficient(&w, &[j], d).expect("k = 1");
        acc + T::of(c) * basis.zeta(i, j)
    })
}

/// Maps a value of `label` to the value of its twin of the other kind.
///
/// Multiplicity 2 uses `I = I* - ½ 1{i1=i2≠0} ∫(t-s)^{l1+l2} ds`; the
/// triple `(000)` correction involves `I_(0)` and `I_(1)` and so needs the
/// basis of the step.
pub fn ito_strat_convert<T: Real>(
    label: &IntegralLabel,
    value: T,
    delta: T,
    basis: Option<&GaussianBasis<T>>,
) -> Result<T, StochError> {
    let i = label.i();
    let to_strat = label.kind() == Kind::Ito;
    let corr = match label.k() {
        1 => T::zero(),
        2 => {
            if i[0] == i[1] && i[0] != 0 {
                let e = (label.l()[0] + label.l()[1]) as i32;
                let sgn = if e % 2 == 0 { T::one() } else { -T::one() };
                T::of(0.5) * sgn * delta.powi(e + 1) / T::of((e + 1) as f64)
            } else {
                T::zero()
            }
        }
        3 if label.l() == [0, 0, 0] => {
            let a = i[0] == i[1] && i[0] != 0;
            let b = i[1] == i[2] && i[1] != 0;
            if !a && !b {
                T::zero()
            } else {
                let basis = basis.ok_or_else(|| StochError::NeedsBasis(label.name()))?;
                let half = T::of(0.5);
                let mut c = T::zero();
                // I = I* + c  with c below, so I* = I + (-c)
                if a {
                    c = c + half * single(i[2], 1, basis);
                }
                if b {
                    c = c - half * (delta * single(i[0], 0, basis) + single(i[0], 1, basis));
                }
                -c
            }
        }
        _ => return Err(StochError::NoConversion(label.name())),
    };
    Ok(if to_strat { value + corr } else { value - corr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::coefficient_tensor;
    use crate::rngstream::stream;

    fn basis_with(
        m: usize,
        p: usize,
        delta: f64,
        f: impl Fn(usize, usize) -> f64,
    ) -> GaussianBasis<f64> {
        let mut v = Vec::new();
        for i in 1..=m {
            for j in 0..=p {
                v.push(f(i, j));
            }
        }
        GaussianBasis::from_values(m, p, delta, v)
    }

    fn tensor(l: &[u32], p: usize, d: f64) -> ScaledTensor<f64> {
        coefficient_tensor(&WeightVector::new(l.to_vec()).unwrap(), p)
            .unwrap()
            .scaled(d)
    }

    #[test]
    fn matching_counts() {
        assert_eq!(matchings(&[1, 1]).len(), 2);
        assert_eq!(matchings(&[1, 1, 1]).len(), 4);
        assert_eq!(matchings(&[1, 1, 1, 1]).len(), 10);
        assert_eq!(matchings(&[1, 2, 1, 2]).len(), 4);
        assert_eq!(matchings(&[0, 0]).len(), 1);
        assert_eq!(matchings(&[1; 6]).len(), 76);
    }

    #[test]
    fn time_column() {
        let b = basis_with(1, 3, 0.25, |_, _| 1.0);
        assert_eq!(b.zeta(0, 0), 0.5);
        assert_eq!(b.zeta(0, 2), 0.0);
    }

    #[test]
    fn sampled_moments() {
        let mut rng = stream(11, 0, 0);
        let n = 1_000_000;
        let b = GaussianBasis::<f64>::sample(&mut rng, 1, 1, 1.0);
        let _ = b;
        let mut s0 = 0.0;
        let mut s1 = 0.0;
        for _ in 0..n {
            let b = GaussianBasis::<f64>::sample(&mut rng, 1, 1, 1.0);
            s0 += b.zeta(1, 0);
            s1 += b.zeta(1, 1).powi(2);
        }
        assert!((s0 / n as f64).abs() < 0.004);
        assert!((s1 / n as f64 - 1.0).abs() < 0.01);
    }

    #[test]
    fn double_strat_single_mode() {
        let d = 0.3;
        let t = tensor(&[0, 0], 4, d);
        let b = basis_with(2, 4, d, |i, j| if j == 0 { 0.7 * i as f64 } else { 0.0 });
        let l = IntegralLabel::strat(&[1, 2], &[0, 0]).unwrap();
        let v = strat_value(&l, &b, &t).unwrap();
        assert!((v - d / 2.0 * 0.7 * 1.4).abs() < 1e-15);
    }

    #[test]
    fn double_ito_diagonal_is_exact() {
        let d = 0.8;
        let mut rng = stream(3, 0, 0);
        for p in 0..6 {
            let t = tensor(&[0, 0], p, d);
            let b = GaussianBasis::<f64>::sample(&mut rng, 1, p, d);
            let l = IntegralLabel::ito(&[1, 1], &[0, 0]).unwrap();
            let v = ito_value(&l, &b, &t).unwrap();
            let z = b.zeta(1, 0);
            assert!((v - d / 2.0 * (z * z - 1.0)).abs() < 1e-13, "p={p}");
        }
        let b = basis_with(1, 3, d, |_, _| 0.0);
        let l = IntegralLabel::ito(&[1, 1], &[0, 0]).unwrap();
        assert!((ito_value(&l, &b, &tensor(&[0, 0], 3, d)).unwrap() + d / 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_closed_forms() {
        let d = 0.6f64;
        let b = basis_with(1, 3, d, |_, j| [0.3, -1.1, 0.4, 2.0][j]);
        let z = |j: usize| b.zeta(1, j);
        let i1 = -d.powf(1.5) / 2.0 * (z(0) + z(1) / 3f64.sqrt());
        let i2 = d.powf(2.5) / 3.0 * (z(0) + 3f64.sqrt() / 2.0 * z(1) + z(2) / (2.0 * 5f64.sqrt()));
        let i3 = -d.powf(3.5) / 4.0
            * (z(0)
                + 3.0 * 3f64.sqrt() / 5.0 * z(1)
                + z(2) / 5f64.sqrt()
                + z(3) / (5.0 * 7f64.sqrt()));
        for (l, want) in [(1, i1), (2, i2), (3, i3)] {
            let lab = IntegralLabel::ito(&[1], &[l]).unwrap();
            let got = closed_form(&lab).unwrap().eval(&b);
            assert!((got - want).abs() < 1e-14, "l={l}");
            let ser = ito_value(&lab, &b, &tensor(&[l], 3, d)).unwrap();
            assert!((ser - want).abs() < 1e-14, "series l={l}");
        }
    }

    #[test]
    fn diagonal_closed_forms() {
        let d = 0.9f64;
        let b = basis_with(1, 1, d, |_, j| [1.3, 0.2][j]);
        let x = b.zeta(1, 0);
        let cases = [
            (3, d.powf(1.5) / 6.0 * (x.powi(3) - 3.0 * x)),
            (4, d * d / 24.0 * (x.powi(4) - 6.0 * x * x + 3.0)),
            (
                5,
                d.powf(2.5) / 120.0 * (x.powi(5) - 10.0 * x.powi(3) + 15.0 * x),
            ),
            (
                6,
                d.powi(3) / 720.0 * (x.powi(6) - 15.0 * x.powi(4) + 45.0 * x * x - 15.0),
            ),
        ];
        for (k, want) in cases {
            let lab = IntegralLabel::new(vec![1; k], vec![0; k], Kind::Ito).unwrap();
            assert!(
                (closed_form(&lab).unwrap().eval(&b) - want).abs() < 1e-13,
                "k={k}"
            );
            let s = IntegralLabel::new(vec![1; k], vec![0; k], Kind::Stratonovich).unwrap();
            let sw = d.powf(k as f64 / 2.0) * x.powi(k as i32) / factorial(k);
            assert!((closed_form(&s).unwrap().eval(&b) - sw).abs() < 1e-13);
        }
        let i1 = closed_form(&IntegralLabel::ito(&[1], &[1]).unwrap())
            .unwrap()
            .eval(&b);
        let dl = d.powi(3) / 3.0;
        let l3 = IntegralLabel::ito(&[1, 1, 1], &[1, 1, 1]).unwrap();
        assert!(
            (closed_form(&l3).unwrap().eval(&b) - (i1.powi(3) - 3.0 * i1 * dl) / 6.0).abs() < 1e-14
        );
        let l4 = IntegralLabel::ito(&[1; 4], &[1; 4]).unwrap();
        let want = (i1.powi(4) - 6.0 * i1 * i1 * dl + 3.0 * dl * dl) / 24.0;
        assert!((closed_form(&l4).unwrap().eval(&b) - want).abs() < 1e-14);
        let s11 = IntegralLabel::strat(&[1, 1], &[1, 1]).unwrap();
        assert!((closed_form(&s11).unwrap().eval(&b) - i1 * i1 / 2.0).abs() < 1e-15);
        assert!(closed_form(&IntegralLabel::ito(&[1, 2], &[0, 0]).unwrap()).is_none());
    }

    #[test]
    fn prepared_closed_agrees() {
        let d = 0.6f64;
        let b = basis_with(2, 2, d, |i, j| 0.3 * i as f64 - 0.7 * j as f64 + 0.4);
        for (i, l, kind) in [
            (vec![2], vec![2], Kind::Ito),
            (vec![1; 3], vec![0; 3], Kind::Ito),
            (vec![2; 4], vec![1; 4], Kind::Ito),
            (vec![1; 5], vec![0; 5], Kind::Stratonovich),
        ] {
            let lab = IntegralLabel::new(i, l, kind).unwrap();
            let f = closed_form(&lab).unwrap();
            let pc = PreparedClosed::new(f.clone(), d);
            assert!((pc.eval(&b) - f.eval(&b)).abs() < 1e-14, "{}", lab.name());
        }
    }

    #[test]
    fn sampling_is_prefix_stable() {
        let a: GaussianBasis<f64> = GaussianBasis::sample(&mut stream(3, 1, 4), 3, 2, 0.5);
        let b: GaussianBasis<f64> = GaussianBasis::sample(&mut stream(3, 1, 4), 3, 7, 0.5);
        assert_eq!(b.truncated(2), a);
        for i in 1..=3 {
            assert_eq!(a.increment(i), b.increment(i));
        }
    }

    #[test]
    fn conversions() {
        let d = 0.7f64;
        let l00 = IntegralLabel::ito(&[1, 1], &[0, 0]).unwrap();
        assert!((ito_strat_convert(&l00, 0.0, d, None).unwrap() - d / 2.0).abs() < 1e-15);
        let s11 = IntegralLabel::strat(&[2, 2], &[1, 1]).unwrap();
        assert!((ito_strat_convert(&s11, 0.0, d, None).unwrap() + d.powi(3) / 6.0).abs() < 1e-15);
        let s10 = IntegralLabel::strat(&[1, 1], &[1, 0]).unwrap();
        assert!((ito_strat_convert(&s10, 0.0, d, None).unwrap() - d * d / 4.0).abs() < 1e-15);
        let s01 = IntegralLabel::strat(&[1, 1], &[0, 1]).unwrap();
        assert!((ito_strat_convert(&s01, 0.0, d, None).unwrap() - d * d / 4.0).abs() < 1e-15);
        let s02 = IntegralLabel::strat(&[1, 1], &[0, 2]).unwrap();
        assert!((ito_strat_convert(&s02, 0.0, d, None).unwrap() + d.powi(3) / 6.0).abs() < 1e-15);
        let off = IntegralLabel::ito(&[1, 2], &[1, 0]).unwrap();
        assert_eq!(ito_strat_convert(&off, 1.5, d, None).unwrap(), 1.5);
        let l000 = IntegralLabel::ito(&[1, 1, 2], &[0, 0, 0]).unwrap();
        assert!(matches!(
            ito_strat_convert(&l000, 0.0, d, None),
            Err(StochError::NeedsBasis(_))
        ));
        let bad = IntegralLabel::ito(&[1, 1, 1, 1], &[0; 4]).unwrap();
        assert!(ito_strat_convert(&bad, 0.0, d, None).is_err());
    }

    #[test]
    fn conversion_is_involutive() {
        let d = 0.45f64;
        let b = basis_with(2, 2, d, |i, j| 0.3 * i as f64 - 0.5 * j as f64 + 0.1);
        for (i, l) in [
            (vec![1, 1], vec![0, 0]),
            (vec![1, 1], vec![1, 1]),
            (vec![2, 2, 2], vec![0, 0, 0]),
            (vec![1, 2, 2], vec![0, 0, 0]),
        ] {
            let lab = IntegralLabel::new(i, l, Kind::Ito).unwrap();
            let s = ito_strat_convert(&lab, 0.123, d, Some(&b)).unwrap();
            let back =
                ito_strat_convert(&lab.with_kind(Kind::Stratonovich), s, d, Some(&b)).unwrap();
            assert!((back - 0.123).abs() < 1e-15);
        }
    }

    #[test]
    fn prepared_matches_direct() {
        let d = 0.5;
        let mut rng = stream(5, 0, 0);
        let b = GaussianBasis::<f64>::sample(&mut rng, 2, 4, d);
        for (i, l, kind) in [
            (vec![1, 1, 2], vec![0, 0, 0], Kind::Ito),
            (vec![1, 0, 1], vec![0, 0, 0], Kind::Ito),
            (vec![2, 1, 2, 1], vec![0, 0, 0, 0], Kind::Ito),
            (vec![1, 2, 1], vec![1, 0, 0], Kind::Stratonovich),
        ] {
            let lab = IntegralLabel::new(i, l.clone(), kind).unwrap();
            let t = tensor(&l, 4, d);
            let prep = PreparedSeries::new(&lab, &t, d).unwrap();
            let direct = series_value(&lab, &b, &t).unwrap();
            assert!((prep.eval(&b) - direct).abs() < 1e-14, "{}", lab.name());
        }
    }

    #[test]
    fn distinct_indices_make_kinds_agree() {
        let d = 1.0;
        let mut rng = stream(8, 0, 0);
        let b = GaussianBasis::<f64>::sample(&mut rng, 3, 3, d);
        let t = tensor(&[0, 1, 0], 3, d);
        let a = ito_value(&IntegralLabel::ito(&[3, 1, 2], &[0, 1, 0]).unwrap(), &b, &t).unwrap();
        let s = strat_value(
            &IntegralLabel::strat(&[3, 1, 2], &[0, 1, 0]).unwrap(),
            &b,
            &t,
        )
        .unwrap();
        assert_eq!(a, s);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let b = basis_with(1, 2, 1.0, |_, _| 0.0);
        let t = tensor(&[0, 0], 2, 1.0);
        let lab = IntegralLabel::ito(&[1, 1], &[1, 0]).unwrap();
        assert!(matches!(
            ito_value(&lab, &b, &t),
            Err(StochError::ShapeMismatch { .. })
        ));
        let lab = IntegralLabel::ito(&[1, 3], &[0, 0]).unwrap();
        assert!(matches!(
            ito_value(&lab, &b, &t),
            Err(StochError::IndexRange { .. })
        ));
    }

    #[test]
    fn names_parse_back() {
        for lab in [
            IntegralLabel::ito(&[1, 2], &[0, 1]).unwrap(),
            IntegralLabel::strat(&[3, 0, 1], &[0, 0, 0]).unwrap(),
        ] {
            assert_eq!(lab.name().parse::<IntegralLabel>().unwrap(), lab);
        }
        assert_eq!("I_(000)^(1,2,3)".parse::<IntegralLabel>().unwrap().k(), 3);
        for bad in ["J_(0)^(1)", "I_(0)^(1,2)", "I_(x)^(1)", "I_(0)(1)"] {
            assert!(bad.parse::<IntegralLabel>().is_err(), "{bad}");
        }
    }

    #[test]
    fn hypothesis_flag() {
        assert!(IntegralLabel::strat(&[1; 6], &[0; 6])
            .unwrap()
            .is_hypothesis());
        assert!(!IntegralLabel::ito(&[1; 6], &[0; 6])
            .unwrap()
            .is_hypothesis());
    }
}
