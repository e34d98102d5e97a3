//! Fourier-Legendre coefficients of the weighted simplex kernel
//! `K(t_1..t_k) = prod (t - t_g)^{l_g} 1{t_1 < ... < t_k}`.
//!
//! Unit values `\bar C` live on [-1, 1]; the scaled coefficient on an
//! interval of length `Δ` is
//! `sqrt(prod (2 j_g + 1)) Δ^{k/2 + Σl} / 2^{k + Σl} \bar C`.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactpoly::{legendre, nested_simplex_integral, RationalPoly};
use crate::scalar::{rat_to_f64, Real, Ring};

pub const MAX_K: usize = 6;
pub const DEFAULT_ENTRY_BUDGET: usize = 1 << 21;

#[derive(Debug, Error)]
pub enum CoeffError {
    #[error("unsupported shape k={k}, l={l:?}")]
    UnsupportedShape { k: usize, l: Vec<u32> },
    #[error("index tuple has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("tensor with {entries} entries exceeds the budget of {budget}")]
    Budget { entries: usize, budget: usize },
    #[error("cache entry {key}: {msg}")]
    Parse { key: String, msg: String },
    #[error("cache io: {0}")]
    Io(#[from] std::io::Error),
}

/// Weight exponents `l_1..l_k`, `l_1` on the innermost variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WeightVector {
    l: Vec<u32>,
}

impl WeightVector {
    /// Catalog: `k = 1` with `l <= 8`, any `k <= 6` with `Σl <= 2`, and
    /// constant vectors `(l, .., l)` with `l <= 3`.
    pub fn new(l: Vec<u32>) -> Result<Self, CoeffError> {
        let k = l.len();
        let sum: u32 = l.iter().sum();
        let constant = l.windows(2).all(|w| w[0] == w[1]);
        let ok = (1..=MAX_K).contains(&k)
            && ((k == 1 && l[0] <= 8) || sum <= 2 || (constant && l[0] <= 3));
        if ok {
            Ok(Self { l })
        } else {
            Err(CoeffError::UnsupportedShape { k, l })
        }
    }

    pub fn zeros(k: usize) -> Result<Self, CoeffError> {
        Self::new(vec![0; k])
    }

    pub fn k(&self) -> usize {
        self.l.len()
    }

    pub fn l(&self) -> &[u32] {
        &self.l
    }

    pub fn weight_sum(&self) -> u32 {
        self.l.iter().sum()
    }

    /// Exponent of `Δ` in the squared kernel norm: `k + 2Σl`.
    pub fn norm_power(&self) -> u32 {
        self.k() as u32 + 2 * self.weight_sum()
    }

    pub fn label(&self) -> String {
        self.l
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

// Legendre-series arithmetic: c[n] is the coefficient of P_n.

fn series_mul_x<T: Ring>(c: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); c.len() + 1];
    for (n, a) in c.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let d = T::from_int(2 * n as i64 + 1);
        out[n + 1] = out[n + 1].clone() + a.clone() * T::from_int(n as i64 + 1) / d.clone();
        if n > 0 {
            out[n - 1] = out[n - 1].clone() + a.clone() * T::from_int(n as i64) / d;
        }
    }
    trim(out)
}

fn series_mul_one_plus_x<T: Ring>(c: &[T], times: u32) -> Vec<T> {
    let mut cur = c.to_vec();
    for _ in 0..times {
        let x = series_mul_x(&cur);
        cur = series_add(&cur, &x);
    }
    cur
}

fn series_add<T: Ring>(a: &[T], b: &[T]) -> Vec<T> {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| {
                let x = a.get(i).cloned().unwrap_or_else(T::zero);
                let y = b.get(i).cloned().unwrap_or_else(T::zero);
                x + y
            })
            .collect(),
    )
}

/// Antiderivative vanishing at -1.
fn series_antideriv<T: Ring>(c: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); c.len() + 1];
    for (n, a) in c.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        if n == 0 {
            out[0] = out[0].clone() + a.clone();
            out[1] = out[1].clone() + a.clone();
        } else {
            let v = a.clone() / T::from_int(2 * n as i64 + 1);
            out[n + 1] = out[n + 1].clone() + v.clone();
            out[n - 1] = out[n - 1].clone() - v;
        }
    }
    trim(out)
}

fn trim<T: Ring>(mut v: Vec<T>) -> Vec<T> {
    while v.last().is_some_and(|x| x.is_zero()) {
        v.pop();
    }
    v
}

/// Iterates `P_j F` for `j = 0, 1, ...` by the Bonnet recurrence.
struct LegendreProducts<T> {
    prev: Vec<T>,
    cur: Vec<T>,
    n: usize,
}

impl<T: Ring> LegendreProducts<T> {
    fn new(f: &[T]) -> Self {
        Self {
            prev: Vec::new(),
            cur: f.to_vec(),
            n: 0,
        }
    }

    fn current(&self) -> &[T] {
        &self.cur
    }

    fn advance(&mut self) {
        let n = self.n as i64;
        let xf = series_mul_x(&self.cur);
        let a = T::from_int(2 * n + 1) / T::from_int(n + 1);
        let b = T::from_int(n) / T::from_int(n + 1);
        let len = xf.len().max(self.prev.len());
        let next: Vec<T> = (0..len)
            .map(|i| {
                let x = xf.get(i).cloned().unwrap_or_else(T::zero) * a.clone();
                let y = self.prev.get(i).cloned().unwrap_or_else(T::zero) * b.clone();
                x - y
            })
            .collect();
        self.prev = std::mem::replace(&mut self.cur, trim(next));
        self.n += 1;
    }
}

fn sign<T: Ring>(weight_sum: u32) -> T {
    if weight_sum % 2 == 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// Dense unit tensor, `j_1` varying fastest.
pub fn unit_tensor_in<T: Ring>(l: &[u32], p: usize) -> Vec<T> {
    let k = l.len();
    let n = (p + 1).pow(k as u32);
    let mut out = vec![T::zero(); n];
    let s: T = sign(l.iter().sum());
    fill(l, p, 0, &[T::one()], 0, 1, &s, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn fill<T: Ring>(
    l: &[u32],
    p: usize,
    g: usize,
    f: &[T],
    offset: usize,
    stride: usize,
    s: &T,
    out: &mut [T],
) {
    let k = l.len();
    if g + 1 == k {
        let h = series_mul_one_plus_x(f, l[g]);
        for j in 0..=p.min(h.len().saturating_sub(1)) {
            if h[j].is_zero() {
                continue;
            }
            out[offset + j * stride] =
                s.clone() * T::from_int(2) * h[j].clone() / T::from_int(2 * j as i64 + 1);
        }
        return;
    }
    let mut prods = LegendreProducts::new(f);
    for j in 0..=p {
        if j > 0 {
            prods.advance();
        }
        let h = series_mul_one_plus_x(prods.current(), l[g]);
        let next = series_antideriv(&h);
        fill(
            l,
            p,
            g + 1,
            &next,
            offset + j * stride,
            stride * (p + 1),
            s,
            out,
        );
    }
}

fn unit_single<T: Ring>(l: &[u32], j: &[usize]) -> T {
    let mut f = vec![T::one()];
    let k = l.len();
    for g in 0..k {
        let mut prods = LegendreProducts::new(&f);
        let upto = if g + 1 == k { 0 } else { j[g] };
        for _ in 0..upto {
            prods.advance();
        }
        let h = series_mul_one_plus_x(prods.current(), l[g]);
        if g + 1 == k {
            let jk = j[g];
            let v = h.get(jk).cloned().unwrap_or_else(T::zero);
            return sign::<T>(l.iter().sum()) * T::from_int(2) * v / T::from_int(2 * jk as i64 + 1);
        }
        f = series_antideriv(&h);
    }
    unreachable!("k >= 1")
}

/// Exact `\bar C_{j_k..j_1}`; `j[0]` is `j_1`.
pub fn unit_coefficient(weight: &WeightVector, j: &[usize]) -> Result<BigRational, CoeffError> {
    if j.len() != weight.k() {
        return Err(CoeffError::LengthMismatch {
            expected: weight.k(),
            got: j.len(),
        });
    }
    Ok(unit_single(weight.l(), j))
}

/// Direct nested integration in the monomial basis; slow, kept as a
/// cross-check of [`unit_coefficient`].
pub fn unit_coefficient_monomial(weight: &WeightVector, j: &[usize]) -> BigRational {
    let one_plus_x = RationalPoly::from_ints(&[1, 1]);
    let w: Vec<RationalPoly> = weight
        .l()
        .iter()
        .zip(j)
        .map(|(&l, &jj)| &legendre(jj) * &one_plus_x.pow(l))
        .collect();
    let v = nested_simplex_integral(&w);
    if weight.weight_sum() % 2 == 1 {
        -v
    } else {
        v
    }
}

/// `sqrt(prod (2 j_g + 1)) Δ^{k/2 + Σl} / 2^{k + Σl}`.
pub fn scale_factor(weight: &WeightVector, j: &[usize], delta: f64) -> f64 {
    let prod: f64 = j.iter().map(|&v| (2 * v + 1) as f64).product();
    let k = weight.k() as i32;
    let sl = weight.weight_sum() as i32;
    prod.sqrt() * delta.powf(k as f64 / 2.0 + sl as f64) / 2f64.powi(k + sl)
}

pub fn scaled_coefficient(
    weight: &WeightVector,
    j: &[usize],
    delta: f64,
) -> Result<f64, CoeffError> {
    let u = unit_coefficient(weight, j)?;
    Ok(scale_factor(weight, j, delta) * rat_to_f64(&u))
}

fn flat_index(j: &[usize], p: usize) -> usize {
    j.iter().rev().fold(0, |acc, &v| acc * (p + 1) + v)
}

fn unflatten(mut idx: usize, k: usize, p: usize) -> Vec<usize> {
    let mut j = Vec::with_capacity(k);
    for _ in 0..k {
        j.push(idx % (p + 1));
        idx /= p + 1;
    }
    j
}

/// Exact dense tensor of `\bar C` for one shape up to truncation `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientTensor {
    weight: WeightVector,
    p: usize,
    unit: Vec<BigRational>,
}

impl CoefficientTensor {
    pub fn compute(weight: &WeightVector, p: usize, budget: usize) -> Result<Self, CoeffError> {
        let entries = (p + 1).checked_pow(weight.k() as u32).unwrap_or(usize::MAX);
        if entries > budget {
            return Err(CoeffError::Budget { entries, budget });
        }
        Ok(Self {
            weight: weight.clone(),
            p,
            unit: unit_tensor_in(weight.l(), p),
        })
    }

    pub fn weight(&self) -> &WeightVector {
        &self.weight
    }

    pub fn k(&self) -> usize {
        self.weight.k()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.unit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unit.is_empty()
    }

    /// `j[0]` is `j_1`.
    pub fn unit(&self, j: &[usize]) -> &BigRational {
        &self.unit[flat_index(j, self.p)]
    }

    pub fn unit_values(&self) -> &[BigRational] {
        &self.unit
    }

    pub fn index_tuple(&self, flat: usize) -> Vec<usize> {
        unflatten(flat, self.k(), self.p)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &BigRational)> + '_ {
        self.unit
            .iter()
            .enumerate()
            .map(|(i, v)| (self.index_tuple(i), v))
    }

    pub fn scaled_value(&self, j: &[usize], delta: f64) -> f64 {
        scale_factor(&self.weight, j, delta) * rat_to_f64(self.unit(j))
    }

    /// Restriction to a smaller truncation level.
    pub fn truncate(&self, p: usize) -> Self {
        assert!(p <= self.p, "cannot extend a tensor by truncation");
        if p == self.p {
            return self.clone();
        }
        let k = self.k();
        let n = (p + 1).pow(k as u32);
        let unit = (0..n)
            .map(|i| self.unit(&unflatten(i, k, p)).clone())
            .collect();
        Self {
            weight: self.weight.clone(),
            p,
            unit,
        }
    }

    pub fn scaled<T: Real>(&self, delta: f64) -> ScaledTensor<T> {
        let mut t = ScaledTensor::empty(self.weight.clone(), self.p);
        for (i, u) in self.unit.iter().enumerate() {
            if u.is_zero() {
                continue;
            }
            let j = self.index_tuple(i);
            t.push(
                &j,
                T::of(scale_factor(&self.weight, &j, delta) * rat_to_f64(u)),
            );
        }
        t
    }

    /// Sparse map of the exact unit values, for rational-mode evaluation.
    pub fn sparse_unit(&self) -> SparseTensor<BigRational> {
        let mut t = SparseTensor::empty(self.k());
        for (i, u) in self.unit.iter().enumerate() {
            if !u.is_zero() {
                t.push(&self.index_tuple(i), u.clone());
            }
        }
        t
    }
}

/// Nonzero entries of a k-index tensor over any ring.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseTensor<T> {
    k: usize,
    js: Vec<u16>,
    vals: Vec<T>,
}

impl<T: Clone> SparseTensor<T> {
    pub fn empty(k: usize) -> Self {
        Self {
            k,
            js: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn push(&mut self, j: &[usize], v: T) {
        debug_assert_eq!(j.len(), self.k);
        self.js.extend(j.iter().map(|&x| x as u16));
        self.vals.push(v);
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn entry(&self, n: usize) -> (&[u16], &T) {
        (&self.js[n * self.k..(n + 1) * self.k], &self.vals[n])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u16], &T)> + '_ {
        (0..self.nnz()).map(move |n| self.entry(n))
    }

    pub fn max_index(&self) -> usize {
        self.js.iter().copied().max().unwrap_or(0) as usize
    }
}

/// Scaled real coefficients `C_{j_k..j_1}` on an interval of fixed length.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledTensor<T> {
    weight: WeightVector,
    p: usize,
    data: SparseTensor<T>,
}

impl<T: Real> ScaledTensor<T> {
    pub fn empty(weight: WeightVector, p: usize) -> Self {
        let k = weight.k();
        Self {
            weight,
            p,
            data: SparseTensor::empty(k),
        }
    }

    pub fn push(&mut self, j: &[usize], v: T) {
        self.data.push(j, v);
    }

    pub fn weight(&self) -> &WeightVector {
        &self.weight
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn sparse(&self) -> &SparseTensor<T> {
        &self.data
    }

    /// Sum of squared coefficients.
    pub fn parseval(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, (_, &v)| acc + v * v)
    }
}

/// Scaled tensor computed in floating arithmetic throughout; usable for
/// truncation levels where the exact tensor is too costly (e.g. a p = 200
/// reference). Values agree with the exact path to rounding.
pub fn scaled_tensor_float(weight: &WeightVector, p: usize, delta: f64) -> ScaledTensor<f64> {
    let unit: Vec<f64> = unit_tensor_in(weight.l(), p);
    let mut t = ScaledTensor::empty(weight.clone(), p);
    for (i, u) in unit.iter().enumerate() {
        if u.abs() < 1e-13 {
            continue;
        }
        let j = unflatten(i, weight.k(), p);
        t.push(&j, scale_factor(weight, &j, delta) * u);
    }
    t
}

#[derive(Serialize, Deserialize)]
struct RatJson {
    num: String,
    den: String,
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    format: String,
    version: u32,
    entries: BTreeMap<String, RatJson>,
}

const CACHE_FORMAT: &str = "sdetaylor-coefficients";

fn entry_key(weight: &WeightVector, j: &[usize]) -> String {
    let js = j
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",");
    format!("k={};l={};j={}", weight.k(), weight.label(), js)
}

fn parse_list(key: &str, s: &str) -> Result<Vec<u32>, CoeffError> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|v| {
            v.trim().parse::<u32>().map_err(|e| CoeffError::Parse {
                key: key.to_string(),
                msg: e.to_string(),
            })
        })
        .collect()
}

fn parse_key(key: &str) -> Result<(WeightVector, Vec<usize>), CoeffError> {
    let bad = |msg: &str| CoeffError::Parse {
        key: key.to_string(),
        msg: msg.to_string(),
    };
    let mut k = None;
    let mut l = None;
    let mut j = None;
    for part in key.split(';') {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| bad("expected name=value"))?;
        match name {
            "k" => k = Some(value.parse::<usize>().map_err(|e| bad(&e.to_string()))?),
            "l" => l = Some(parse_list(key, value)?),
            "j" => j = Some(parse_list(key, value)?),
            _ => return Err(bad("unknown field")),
        }
    }
    let (k, l, j) = match (k, l, j) {
        (Some(k), Some(l), Some(j)) => (k, l, j),
        _ => return Err(bad("missing k, l or j")),
    };
    if l.len() != k || j.len() != k {
        return Err(bad("k disagrees with the lengths of l and j"));
    }
    let w = WeightVector::new(l).map_err(|e| bad(&e.to_string()))?;
    Ok((w, j.into_iter().map(|v| v as usize).collect()))
}

fn parse_rat(key: &str, r: &RatJson) -> Result<BigRational, CoeffError> {
    let bad = |msg: String| CoeffError::Parse {
        key: key.to_string(),
        msg,
    };
    let num: BigInt = r.num.parse().map_err(|e| bad(format!("numerator: {e}")))?;
    let den: BigInt = r
        .den
        .parse()
        .map_err(|e| bad(format!("denominator: {e}")))?;
    if den <= BigInt::zero() {
        return Err(bad("denominator must be positive".into()));
    }
    let v = BigRational::new(num.clone(), den.clone());
    if v.numer() != &num || v.denom() != &den {
        return Err(bad("rational is not in lowest terms".into()));
    }
    Ok(v)
}

pub fn export_cache(path: &Path, tensors: &[&CoefficientTensor]) -> Result<(), CoeffError> {
    fs::write(path, cache_json(tensors))?;
    Ok(())
}

/// The cache document for `tensors`, as written by [`export_cache`].
pub fn cache_json(tensors: &[&CoefficientTensor]) -> String {
    let mut entries = BTreeMap::new();
    for t in tensors {
        for (j, v) in t.iter() {
            entries.insert(
                entry_key(&t.weight, &j),
                RatJson {
                    num: v.numer().to_string(),
                    den: v.denom().to_string(),
                },
            );
        }
    }
    let file = CacheFile {
        format: CACHE_FORMAT.into(),
        version: 1,
        entries,
    };
    serde_json::to_string_pretty(&file).expect("serializable")
}

pub fn import_cache(path: &Path) -> Result<Vec<CoefficientTensor>, CoeffError> {
    let text = fs::read_to_string(path)?;
    let file: CacheFile = serde_json::from_str(&text).map_err(|e| CoeffError::Parse {
        key: "<document>".into(),
        msg: e.to_string(),
    })?;
    if file.format != CACHE_FORMAT {
        return Err(CoeffError::Parse {
            key: "<format>".into(),
            msg: format!("unexpected format {}", file.format),
        });
    }
    let mut groups: BTreeMap<WeightVector, Vec<(Vec<usize>, BigRational)>> = BTreeMap::new();
    for (key, r) in &file.entries {
        let (w, j) = parse_key(key)?;
        let v = parse_rat(key, r)?;
        groups.entry(w).or_default().push((j, v));
    }
    let mut out = Vec::new();
    for (w, items) in groups {
        let p = items
            .iter()
            .flat_map(|(j, _)| j.iter().copied())
            .max()
            .unwrap_or(0);
        let n = (p + 1).pow(w.k() as u32);
        if items.len() != n {
            return Err(CoeffError::Parse {
                key: format!("k={};l={}", w.k(), w.label()),
                msg: format!("expected {n} entries for p={p}, found {}", items.len()),
            });
        }
        let mut unit = vec![BigRational::zero(); n];
        for (j, v) in items {
            unit[flat_index(&j, p)] = v;
        }
        out.push(CoefficientTensor { weight: w, p, unit });
    }
    Ok(out)
}

static GLOBAL_STORE: OnceLock<CoeffStore> = OnceLock::new();

/// Memoized tensors with an optional on-disk cache directory.
#[derive(Debug)]
pub struct CoeffStore {
    tensors: RwLock<HashMap<WeightVector, Arc<CoefficientTensor>>>,
    cache_dir: Option<PathBuf>,
    budget: usize,
}

impl Default for CoeffStore {
    fn default() -> Self {
        Self::new()
    }
}

impl CoeffStore {
    pub fn new() -> Self {
        Self {
            tensors: RwLock::new(HashMap::new()),
            cache_dir: None,
            budget: DEFAULT_ENTRY_BUDGET,
        }
    }

    pub fn with_cache_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.cache_dir = Some(dir.into());
        self
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn global() -> &'static CoeffStore {
        GLOBAL_STORE.get_or_init(CoeffStore::new)
    }

    /// Makes `store` the process-wide store; fails once the store is in use.
    pub fn install_global(store: CoeffStore) -> Result<(), CoeffStore> {
        GLOBAL_STORE.set(store)
    }

    fn cache_file(&self, w: &WeightVector) -> Option<PathBuf> {
        let name = format!(
            "k{}_l{}.json",
            w.k(),
            w.l()
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("-")
        );
        self.cache_dir.as_ref().map(|d| d.join(name))
    }

    pub fn tensor(
        &self,
        weight: &WeightVector,
        p: usize,
    ) -> Result<Arc<CoefficientTensor>, CoeffError> {
        if let Some(t) = self.tensors.read().expect("store lock").get(weight) {
            if t.p == p {
                return Ok(t.clone());
            }
            if t.p > p {
                return Ok(Arc::new(t.truncate(p)));
            }
        }
        let mut fresh = None;
        if let Some(path) = self.cache_file(weight) {
            if path.exists() {
                for t in import_cache(&path)? {
                    if &t.weight == weight && t.p >= p {
                        fresh = Some(t);
                    }
                }
            }
        }
        let t = match fresh {
            Some(t) => t,
            None => {
                let t = CoefficientTensor::compute(weight, p, self.budget)?;
                if let Some(path) = self.cache_file(weight) {
                    if let Some(dir) = path.parent() {
                        fs::create_dir_all(dir)?;
                    }
                    export_cache(&path, &[&t])?;
                }
                t
            }
        };
        let t = Arc::new(t);
        let mut map = self.tensors.write().expect("store lock");
        let keep = match map.get(weight) {
            Some(old) if old.p >= t.p => old.clone(),
            _ => {
                map.insert(weight.clone(), t.clone());
                t.clone()
            }
        };
        drop(map);
        if keep.p == p {
            Ok(keep)
        } else {
            Ok(Arc::new(keep.truncate(p)))
        }
    }
}

/// Tensor from the process-wide store.
pub fn coefficient_tensor(
    weight: &WeightVector,
    p: usize,
) -> Result<Arc<CoefficientTensor>, CoeffError> {
    CoeffStore::global().tensor(weight, p)
}
