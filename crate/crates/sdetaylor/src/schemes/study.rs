//! Strong-error studies: terminal errors of a scheme over a sweep of grid
//! sizes, coupled to an exact solution through the step bases or to a
//! fine-grid reference through refined bases of the same Brownian path.

use serde::Serialize;

use super::{PreparedScheme, Refinement, SchemeConfig, SchemeError, SdeProblem, Truncation};
use crate::rngstream::stream;
use crate::scalar::Real;
use crate::stochint::{GaussianBasis, Kind};

/// Grid refinement factor of the self-reference over the finest grid.
pub const REFERENCE_FACTOR: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceKind {
    Exact,
    FineGrid { steps: usize, p: usize },
}

enum Reference<T> {
    Exact,
    Fine {
        scheme: PreparedScheme<T>,
        steps: usize,
        p: usize,
        maps: Vec<Refinement>,
    },
}

/// A study prepared for one problem, one scheme and a grid sweep.
pub struct Study<T> {
    problem: SdeProblem<T>,
    grid: Vec<usize>,
    schemes: Vec<PreparedScheme<T>>,
    twins: Option<Vec<PreparedScheme<T>>>,
    reference: Reference<T>,
    p: Vec<usize>,
}

/// Squared terminal errors of one trial, per grid size.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialErrors {
    pub error: Vec<f64>,
    pub twin_difference: Vec<f64>,
}

fn sq_dist<T: Real>(a: &[T], b: &[T]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.f64() - y.f64()).powi(2))
        .sum()
}

/// Configuration of the fine-grid reference. Its accumulated truncation
/// error is held to `1/REFERENCE_FACTOR` of the finest grid's budget rather
/// than to the per-step target at its own step size.
pub fn reference_config(config: &SchemeConfig) -> SchemeConfig {
    let mut cfg = config.clone();
    if let Truncation::Target { constant, p_max } = config.truncation {
        let f = REFERENCE_FACTOR as f64;
        cfg.truncation = Truncation::Target {
            constant: constant * f.powi(config.r as i32 - 1),
            p_max,
        };
    }
    cfg
}

fn stream_key(g: usize, step: usize) -> u64 {
    ((g as u64) << 40) | step as u64
}

impl<T: Real> Study<T> {
    /// With `compare_families`, the same bases also drive the scheme of the
    /// other family so the two terminal states can be compared.
    pub fn new(
        problem: &SdeProblem<T>,
        config: &SchemeConfig,
        grid: &[usize],
        compare_families: bool,
    ) -> Result<Self, SchemeError> {
        if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] == 0 {
            return Err(SchemeError::Config(
                "grid sizes must be positive and strictly increasing".into(),
            ));
        }
        let horizon = problem.horizon.f64();
        let prep =
            |cfg: &SchemeConfig, n: usize| PreparedScheme::new(problem, cfg, horizon / n as f64);
        let schemes = grid
            .iter()
            .map(|&n| prep(config, n))
            .collect::<Result<Vec<_>, _>>()?;
        let twins = if compare_families {
            let mut other = config.clone();
            other.family = match config.family {
                Kind::Ito => Kind::Stratonovich,
                Kind::Stratonovich => Kind::Ito,
            };
            Some(
                grid.iter()
                    .map(|&n| prep(&other, n))
                    .collect::<Result<Vec<_>, _>>()?,
            )
        } else {
            None
        };
        let p: Vec<usize> = (0..grid.len())
            .map(|g| {
                let t = twins.as_ref().map_or(0, |t| t[g].p_required());
                schemes[g].p_required().max(t)
            })
            .collect();
        let reference = if problem.exact.is_some() {
            Reference::Exact
        } else {
            let max_n = *grid.last().expect("nonempty");
            let steps = REFERENCE_FACTOR * max_n;
            if let Some(&n) = grid.iter().find(|&&n| steps % n != 0) {
                return Err(SchemeError::Config(format!(
                    "grid size {n} does not divide the reference grid {steps}"
                )));
            }
            let scheme = prep(&reference_config(config), steps)?;
            let pf = p
                .iter()
                .copied()
                .chain([scheme.p_required()])
                .max()
                .unwrap_or(0);
            let maps = grid
                .iter()
                .zip(&p)
                .map(|(&n, &pc)| Refinement::new(steps / n, pc, pf))
                .collect::<Result<Vec<_>, _>>()?;
            Reference::Fine {
                scheme,
                steps,
                p: pf,
                maps,
            }
        };
        Ok(Self {
            problem: problem.clone(),
            grid: grid.to_vec(),
            schemes,
            twins,
            reference,
            p,
        })
    }

    pub fn grid(&self) -> &[usize] {
        &self.grid
    }

    pub fn schemes(&self) -> &[PreparedScheme<T>] {
        &self.schemes
    }

    pub fn basis_levels(&self) -> &[usize] {
        &self.p
    }

    pub fn reference(&self) -> ReferenceKind {
        match &self.reference {
            Reference::Exact => ReferenceKind::Exact,
            Reference::Fine { steps, p, .. } => ReferenceKind::FineGrid {
                steps: *steps,
                p: *p,
            },
        }
    }

    fn run(
        &self,
        g: usize,
        bases: impl Iterator<Item = GaussianBasis<T>>,
        exact: &mut dyn FnMut(&[T], T, &GaussianBasis<T>, usize) -> Vec<T>,
    ) -> Result<(Vec<T>, Vec<T>, Option<Vec<T>>), SchemeError> {
        let pb = &self.problem;
        let sch = &self.schemes[g];
        let delta = sch.delta();
        let mut x = pb.x0.clone();
        let mut xe = pb.x0.clone();
        let mut xt = self.twins.as_ref().map(|_| pb.x0.clone());
        for (s, basis) in bases.enumerate() {
            let t = T::of(s as f64) * delta;
            xe = exact(&xe, t, &basis, s);
            x = sch.step(pb, &x, t, &basis)?;
            if let (Some(tw), Some(y)) = (&self.twins, xt.as_mut()) {
                *y = tw[g].step(pb, y, t, &basis)?;
            }
        }
        Ok((x, xe, xt))
    }

    /// Squared terminal errors of trial `trial` for every grid size.
    pub fn trial(&self, seed: u64, trial: u64) -> Result<TrialErrors, SchemeError> {
        let mut out = TrialErrors {
            error: Vec::new(),
            twin_difference: Vec::new(),
        };
        let pb = &self.problem;
        match &self.reference {
            Reference::Exact => {
                let exact = pb.exact.as_ref().expect("exact reference");
                for (g, &n) in self.grid.iter().enumerate() {
                    let sch = &self.schemes[g];
                    let mut rngs: Vec<_> = (0..n)
                        .map(|s| stream(seed, trial, stream_key(g, s)))
                        .collect();
                    let bases: Vec<GaussianBasis<T>> = rngs
                        .iter_mut()
                        .map(|r| GaussianBasis::sample(r, pb.m, self.p[g], sch.delta()))
                        .collect();
                    let mut adv = |x: &[T], t: T, b: &GaussianBasis<T>, s: usize| {
                        exact.advance(x, t, b, &mut rngs[s])
                    };
                    let (x, xe, xt) = self.run(g, bases.into_iter(), &mut adv)?;
                    out.error.push(sq_dist(&x, &xe));
                    out.twin_difference
                        .push(xt.map_or(0.0, |y| sq_dist(&x, &y)));
                }
            }
            Reference::Fine {
                scheme,
                steps,
                p,
                maps,
            } => {
                let fine: Vec<GaussianBasis<T>> = (0..*steps)
                    .map(|s| {
                        GaussianBasis::sample(
                            &mut stream(seed, trial, s as u64),
                            pb.m,
                            *p,
                            scheme.delta(),
                        )
                    })
                    .collect();
                let mut xr = pb.x0.clone();
                for (s, b) in fine.iter().enumerate() {
                    xr = scheme.step(pb, &xr, T::of(s as f64) * scheme.delta(), b)?;
                }
                for (g, map) in maps.iter().enumerate() {
                    let r = map.ratio();
                    let bases = fine
                        .chunks(r)
                        .map(|c| map.coarse(c))
                        .collect::<Result<Vec<_>, _>>()?;
                    let mut keep = |x: &[T], _: T, _: &GaussianBasis<T>, _: usize| x.to_vec();
                    let (x, _, xt) = self.run(g, bases.into_iter(), &mut keep)?;
                    out.error.push(sq_dist(&x, &xr));
                    out.twin_difference
                        .push(xt.map_or(0.0, |y| sq_dist(&x, &y)));
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRow {
    pub n: usize,
    pub delta: f64,
    pub p: usize,
    pub rms_error: f64,
    pub std_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family_rms_difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudySummary {
    pub rows: Vec<ErrorRow>,
    pub slope: f64,
    pub intercept: f64,
}

/// Ordinary least squares of `log y` on `log x`; returns `(slope, intercept)`.
pub fn fit_loglog(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Aggregates trials in the order given.
pub fn summarize<T: Real>(study: &Study<T>, trials: &[TrialErrors]) -> StudySummary {
    let nt = trials.len() as f64;
    let horizon = study.problem.horizon.f64();
    let twins = study.twins.is_some();
    let rows: Vec<ErrorRow> = study
        .grid
        .iter()
        .enumerate()
        .map(|(g, &n)| {
            let (mut s, mut s2, mut d) = (0.0, 0.0, 0.0);
            for t in trials {
                s += t.error[g];
                s2 += t.error[g] * t.error[g];
                d += t.twin_difference[g];
            }
            let ms = s / nt;
            let var = (s2 / nt - ms * ms).max(0.0);
            let rms = ms.sqrt();
            ErrorRow {
                n,
                delta: horizon / n as f64,
                p: study.p[g],
                rms_error: rms,
                std_error: if rms > 0.0 {
                    (var / nt).sqrt() / (2.0 * rms)
                } else {
                    0.0
                },
                family_rms_difference: twins.then(|| (d / nt).sqrt()),
            }
        })
        .collect();
    let dx: Vec<f64> = rows.iter().map(|r| r.delta).collect();
    let ey: Vec<f64> = rows.iter().map(|r| r.rms_error).collect();
    let (slope, intercept) = if rows.len() >= 2 {
        fit_loglog(&dx, &ey)
    } else {
        (f64::NAN, f64::NAN)
    };
    StudySummary {
        rows,
        slope,
        intercept,
    }
}

impl StudySummary {
    /// Fitted strong error at step size `delta`.
    pub fn fitted(&self, delta: f64) -> f64 {
        (self.intercept + self.slope * delta.ln()).exp()
    }

    /// Whether the two families stay within `factor` times the fitted error.
    pub fn families_agree(&self, factor: f64) -> Option<bool> {
        self.rows
            .iter()
            .map(|r| {
                r.family_rms_difference
                    .map(|d| d <= factor * self.fitted(r.delta))
            })
            .collect::<Option<Vec<bool>>>()
            .map(|v| v.into_iter().all(|b| b))
    }
}
