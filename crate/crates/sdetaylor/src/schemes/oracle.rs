//! Evaluators for operator words at a state.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;

use super::ops::{derivative_depth, word_name, Combination, Op};
use super::SchemeError;
use crate::scalar::Real;

pub trait OperatorOracle<T>: Send + Sync {
    fn n(&self) -> usize;
    fn m(&self) -> usize;

    fn supports(&self, word: &[Op]) -> bool;

    fn apply(&self, word: &[Op], x: &[T], t: T) -> Result<Vec<T>, SchemeError>;

    /// `Some(true)` when the combination is identically zero in `(x, t)`.
    fn vanishes(&self, _combo: &Combination) -> Option<bool> {
        None
    }
}

fn gap(word: &[Op]) -> SchemeError {
    SchemeError::OracleGap(word_name(word))
}

/// Exact oracle for `dx = (A x + a0) dt + Σ_i (B_i x + b_i) df_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOracle {
    n: usize,
    a: Vec<f64>,
    a0: Vec<f64>,
    b: Vec<Vec<f64>>,
    b0: Vec<Vec<f64>>,
}

type Affine<S> = (Vec<S>, Vec<S>);

fn matmul<S: Clone + Zero + std::ops::Mul<Output = S>>(n: usize, x: &[S], y: &[S]) -> Vec<S> {
    let mut out = vec![S::zero(); n * n];
    for r in 0..n {
        for c in 0..n {
            let mut s = S::zero();
            for k in 0..n {
                s = s + x[r * n + k].clone() * y[k * n + c].clone();
            }
            out[r * n + c] = s;
        }
    }
    out
}

fn matvec<S: Clone + Zero + std::ops::Mul<Output = S>>(n: usize, x: &[S], v: &[S]) -> Vec<S> {
    (0..n)
        .map(|r| (0..n).fold(S::zero(), |s, k| s + x[r * n + k].clone() * v[k].clone()))
        .collect()
}

impl LinearOracle {
    /// Row-major `n×n` matrices.
    pub fn new(
        a: Vec<f64>,
        a0: Vec<f64>,
        b: Vec<Vec<f64>>,
        b0: Vec<Vec<f64>>,
    ) -> Result<Self, SchemeError> {
        let n = a0.len();
        let ok = a.len() == n * n
            && b.len() == b0.len()
            && b.iter().all(|m| m.len() == n * n)
            && b0.iter().all(|v| v.len() == n);
        if !ok || n == 0 || b.is_empty() {
            return Err(SchemeError::Config(
                "inconsistent linear SDE dimensions".into(),
            ));
        }
        Ok(Self { n, a, a0, b, b0 })
    }

    fn field<S>(&self, op: Op, conv: &impl Fn(f64) -> S) -> Affine<S>
    where
        S: Clone + Zero + std::ops::Mul<Output = S> + std::ops::Sub<Output = S>,
    {
        let n = self.n;
        let cv = |v: &[f64]| v.iter().map(|&x| conv(x)).collect::<Vec<S>>();
        match op {
            Op::L => (cv(&self.a), cv(&self.a0)),
            Op::G(i) => (cv(&self.b[i - 1]), cv(&self.b0[i - 1])),
            Op::Lbar => {
                let mut m = cv(&self.a);
                let mut c = cv(&self.a0);
                let half = conv(0.5);
                for (bi, b0i) in self.b.iter().zip(&self.b0) {
                    let bm = cv(bi);
                    let bb = matmul(n, &bm, &bm);
                    let bc = matvec(n, &bm, &cv(b0i));
                    for (x, y) in m.iter_mut().zip(bb) {
                        *x = x.clone() - half.clone() * y;
                    }
                    for (x, y) in c.iter_mut().zip(bc) {
                        *x = x.clone() - half.clone() * y;
                    }
                }
                (m, c)
            }
        }
    }

    /// `word` applied to the identity as the affine map `M x + c`.
    fn affine<S>(&self, word: &[Op], conv: &impl Fn(f64) -> S) -> Affine<S>
    where
        S: Clone + Zero + std::ops::Mul<Output = S> + std::ops::Sub<Output = S>,
    {
        let (inner, outer) = word.split_last().expect("nonempty word");
        let (mut m, mut c) = self.field(*inner, conv);
        for &op in outer.iter().rev() {
            let (fa, fc) = self.field(op, conv);
            c = matvec(self.n, &m, &fc);
            m = matmul(self.n, &m, &fa);
        }
        (m, c)
    }
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite coefficient")
}

impl<T: Real> OperatorOracle<T> for LinearOracle {
    fn n(&self) -> usize {
        self.n
    }

    fn m(&self) -> usize {
        self.b.len()
    }

    fn supports(&self, word: &[Op]) -> bool {
        !word.is_empty()
            && word
                .iter()
                .all(|op| !matches!(op, Op::G(i) if *i == 0 || *i > self.b.len()))
    }

    fn apply(&self, word: &[Op], x: &[T], _t: T) -> Result<Vec<T>, SchemeError> {
        if !OperatorOracle::<T>::supports(self, word) {
            return Err(gap(word));
        }
        let (m, c) = self.affine(word, &|v: f64| T::of(v));
        let mut y = matvec(self.n, &m, x);
        for (a, b) in y.iter_mut().zip(c) {
            *a = *a + b;
        }
        Ok(y)
    }

    fn vanishes(&self, combo: &Combination) -> Option<bool> {
        let mut m = vec![BigRational::zero(); self.n * self.n];
        let mut c = vec![BigRational::zero(); self.n];
        for (coef, w) in combo {
            let (wm, wc) = self.affine(w, &exact);
            for (a, b) in m.iter_mut().zip(wm) {
                *a += coef * b;
            }
            for (a, b) in c.iter_mut().zip(wc) {
                *a += coef * b;
            }
        }
        Some(m.iter().chain(&c).all(Zero::is_zero))
    }
}

pub type DriftFn<T> = Arc<dyn Fn(&[T], T) -> Vec<T> + Send + Sync>;
pub type DiffusionFn<T> = Arc<dyn Fn(&[T], T, usize) -> Vec<T> + Send + Sync>;

/// Central-difference oracle built from `a` and the columns `B_i` alone.
/// Words are accepted up to derivative depth 2; truncation error is
/// `O(h²)` per level with `h = ε^{1/3}·max(1, |x|)` for first and
/// `h = ε^{1/4}·max(1, |x|)` for second differences.
#[derive(Clone)]
pub struct FiniteDifferenceOracle<T> {
    n: usize,
    m: usize,
    drift: DriftFn<T>,
    diffusion: DiffusionFn<T>,
}

pub const FD_MAX_DEPTH: usize = 2;

impl<T: Real> FiniteDifferenceOracle<T> {
    pub fn new(n: usize, m: usize, drift: DriftFn<T>, diffusion: DiffusionFn<T>) -> Self {
        Self {
            n,
            m,
            drift,
            diffusion,
        }
    }

    fn step(x: &[T], root: f64) -> T {
        let scale = x.iter().fold(1.0f64, |s, v| s.max(v.f64().abs()));
        T::of(T::epsilon().f64().powf(root) * scale)
    }

    fn shifted(x: &[T], dir: &[T], h: T) -> Vec<T> {
        x.iter().zip(dir).map(|(&a, &d)| a + h * d).collect()
    }

    fn abar(&self, x: &[T], t: T) -> Vec<T> {
        let mut v = (self.drift)(x, t);
        let half = T::of(0.5);
        for i in 1..=self.m {
            let gb = self.directional(&[Op::G(i)], x, t, &(self.diffusion)(x, t, i));
            for (a, b) in v.iter_mut().zip(gb) {
                *a = *a - half * b;
            }
        }
        v
    }

    fn directional(&self, word: &[Op], x: &[T], t: T, dir: &[T]) -> Vec<T> {
        let h = Self::step(x, 1.0 / 3.0);
        let fp = self.eval(word, &Self::shifted(x, dir, h), t);
        let fm = self.eval(word, &Self::shifted(x, dir, -h), t);
        let two_h = h + h;
        fp.iter().zip(fm).map(|(&a, b)| (a - b) / two_h).collect()
    }

    fn time_derivative(&self, word: &[Op], x: &[T], t: T) -> Vec<T> {
        let h = Self::step(&[t], 1.0 / 3.0);
        let fp = self.eval(word, x, t + h);
        let fm = self.eval(word, x, t - h);
        let two_h = h + h;
        fp.iter().zip(fm).map(|(&a, b)| (a - b) / two_h).collect()
    }

    fn second_directional(&self, word: &[Op], x: &[T], t: T, dir: &[T]) -> Vec<T> {
        let h = Self::step(x, 0.25);
        let f0 = self.eval(word, x, t);
        let fp = self.eval(word, &Self::shifted(x, dir, h), t);
        let fm = self.eval(word, &Self::shifted(x, dir, -h), t);
        let two = T::of(2.0);
        f0.iter()
            .zip(fp)
            .zip(fm)
            .map(|((&c, p), m)| (p - two * c + m) / (h * h))
            .collect()
    }

    fn eval(&self, word: &[Op], x: &[T], t: T) -> Vec<T> {
        let (first, rest) = word.split_first().expect("nonempty word");
        if rest.is_empty() {
            return match *first {
                Op::L => (self.drift)(x, t),
                Op::G(i) => (self.diffusion)(x, t, i),
                Op::Lbar => self.abar(x, t),
            };
        }
        match *first {
            Op::G(i) => self.directional(rest, x, t, &(self.diffusion)(x, t, i)),
            Op::Lbar => {
                let mut v = self.time_derivative(rest, x, t);
                let d = self.directional(rest, x, t, &self.abar(x, t));
                v.iter_mut().zip(d).for_each(|(a, b)| *a = *a + b);
                v
            }
            Op::L => {
                let mut v = self.time_derivative(rest, x, t);
                let d = self.directional(rest, x, t, &(self.drift)(x, t));
                v.iter_mut().zip(d).for_each(|(a, b)| *a = *a + b);
                let half = T::of(0.5);
                for i in 1..=self.m {
                    let s = self.second_directional(rest, x, t, &(self.diffusion)(x, t, i));
                    v.iter_mut().zip(s).for_each(|(a, b)| *a = *a + half * b);
                }
                v
            }
        }
    }
}

impl<T: Real> OperatorOracle<T> for FiniteDifferenceOracle<T> {
    fn n(&self) -> usize {
        self.n
    }

    fn m(&self) -> usize {
        self.m
    }

    fn supports(&self, word: &[Op]) -> bool {
        !word.is_empty()
            && derivative_depth(word) <= FD_MAX_DEPTH
            && word
                .iter()
                .all(|op| !matches!(op, Op::G(i) if *i == 0 || *i > self.m))
    }

    fn apply(&self, word: &[Op], x: &[T], t: T) -> Result<Vec<T>, SchemeError> {
        if !self.supports(word) {
            return Err(gap(word));
        }
        Ok(self.eval(word, x, t))
    }
}
