//! Test problems: scalar GBM, additive-noise Ornstein-Uhlenbeck and a
//! two-dimensional linear system with non-commuting diffusion.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex};

use gauss_quad::legendre::GaussLegendre;

use super::oracle::LinearOracle;
use super::refine::legendre_values;
use super::{ExactSolution, SdeProblem};
use crate::rngstream::{normal, StepRng};
use crate::scalar::Real;
use crate::stochint::GaussianBasis;

pub const BUILTIN_IDS: [&str; 3] = ["gbm", "ou", "linear2d"];

/// `dx = μx dt + σx df`.
pub fn gbm<T: Real>(mu: f64, sigma: f64, x0: f64, horizon: f64) -> SdeProblem<T> {
    let oracle =
        LinearOracle::new(vec![mu], vec![0.0], vec![vec![sigma]], vec![vec![0.0]]).expect("scalar");
    SdeProblem::new("gbm", Arc::new(oracle), vec![T::of(x0)], T::of(horizon))
        .expect("consistent")
        .with_exact(Arc::new(GbmExact { mu, sigma }))
}

#[derive(Debug, Clone, Copy)]
pub struct GbmExact {
    pub mu: f64,
    pub sigma: f64,
}

impl<T: Real> ExactSolution<T> for GbmExact {
    fn advance(&self, x: &[T], _t: T, basis: &GaussianBasis<T>, _rng: &mut StepRng) -> Vec<T> {
        let d = basis.delta();
        let drift = T::of(self.mu - 0.5 * self.sigma * self.sigma) * d;
        vec![x[0] * (drift + T::of(self.sigma) * basis.increment(1)).exp()]
    }
}

/// `dx = θ(μ - x) dt + σ df`.
pub fn ornstein_uhlenbeck<T: Real>(
    theta: f64,
    mean: f64,
    sigma: f64,
    x0: f64,
    horizon: f64,
) -> SdeProblem<T> {
    let oracle = LinearOracle::new(
        vec![-theta],
        vec![theta * mean],
        vec![vec![0.0]],
        vec![vec![sigma]],
    )
    .expect("scalar");
    SdeProblem::new("ou", Arc::new(oracle), vec![T::of(x0)], T::of(horizon))
        .expect("consistent")
        .with_exact(Arc::new(OuExact::new(theta, mean, sigma)))
}

/// Exact OU transition. The stochastic convolution is projected onto the
/// step's Legendre modes; the orthogonal remainder is an independent normal.
#[derive(Debug)]
pub struct OuExact {
    pub theta: f64,
    pub mean: f64,
    pub sigma: f64,
    cache: Mutex<HashMap<(u64, usize), Arc<Vec<f64>>>>,
}

impl OuExact {
    pub fn new(theta: f64, mean: f64, sigma: f64) -> Self {
        Self {
            theta,
            mean,
            sigma,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// `c_j = ∫ e^{-θ(t+Δ-s)} φ_j(s) ds` for `j <= p`.
    pub fn projections(&self, delta: f64, p: usize) -> Arc<Vec<f64>> {
        let key = (delta.to_bits(), p);
        if let Some(c) = self.cache.lock().expect("cache").get(&key) {
            return c.clone();
        }
        let deg = NonZeroUsize::new(p + 48).expect("positive");
        let rule = GaussLegendre::new(deg);
        let a = self.theta * delta / 2.0;
        let mut c = vec![0.0; p + 1];
        for (y, w) in rule.iter() {
            let g = (-a * (1.0 - y)).exp();
            for (j, pj) in legendre_values(p, *y).into_iter().enumerate() {
                c[j] += w * g * pj;
            }
        }
        for (j, v) in c.iter_mut().enumerate() {
            *v *= ((2 * j + 1) as f64 / delta).sqrt() * delta / 2.0;
        }
        let c = Arc::new(c);
        self.cache.lock().expect("cache").insert(key, c.clone());
        c
    }

    pub fn convolution_variance(&self, delta: f64) -> f64 {
        -(-2.0 * self.theta * delta).exp_m1() / (2.0 * self.theta)
    }
}

impl<T: Real> ExactSolution<T> for OuExact {
    fn advance(&self, x: &[T], _t: T, basis: &GaussianBasis<T>, rng: &mut StepRng) -> Vec<T> {
        let d = basis.delta().f64();
        let c = self.projections(d, basis.p());
        let mut proj = 0.0;
        let mut captured = 0.0;
        for (j, &cj) in c.iter().enumerate() {
            proj += cj * basis.zeta(1, j).f64();
            captured += cj * cj;
        }
        let rest = (self.convolution_variance(d) - captured).max(0.0).sqrt();
        let xi: f64 = normal(rng);
        let e = (-self.theta * d).exp();
        let v = e * x[0].f64() + self.mean * (1.0 - e) + self.sigma * (proj + rest * xi);
        vec![T::of(v)]
    }
}

/// Two-dimensional linear SDE with `B_1 B_2 != B_2 B_1`; no closed-form
/// solution.
pub fn linear2d<T: Real>(horizon: f64) -> SdeProblem<T> {
    let oracle = LinearOracle::new(
        vec![-0.5, 0.2, -0.1, -0.4],
        vec![0.0, 0.0],
        vec![vec![0.2, 0.1, 0.0, 0.15], vec![0.1, 0.0, 0.2, 0.1]],
        vec![vec![0.0, 0.0], vec![0.0, 0.0]],
    )
    .expect("2x2");
    SdeProblem::new(
        "linear2d",
        Arc::new(oracle),
        vec![T::of(1.0), T::of(0.5)],
        T::of(horizon),
    )
    .expect("consistent")
}

pub fn builtin_problem<T: Real>(id: &str) -> Option<SdeProblem<T>> {
    match id {
        "gbm" => Some(gbm(0.06, 0.3, 1.0, 1.0)),
        "ou" => Some(ornstein_uhlenbeck(1.0, 0.5, 0.3, 1.0, 1.0)),
        "linear2d" => Some(linear2d(1.0)),
        _ => None,
    }
}

pub fn builtin_problems<T: Real>() -> Vec<SdeProblem<T>> {
    BUILTIN_IDS
        .iter()
        .filter_map(|id| builtin_problem(id))
        .collect()
}
