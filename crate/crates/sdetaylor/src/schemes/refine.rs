//! Coarse-step Gaussian bases assembled from fine-step bases of the same
//! Brownian path.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use super::SchemeError;
use crate::scalar::Real;
use crate::stochint::GaussianBasis;

/// `P_0(y), .., P_p(y)` by the three-term recurrence.
pub fn legendre_values(p: usize, y: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(p + 1);
    v.push(1.0);
    if p >= 1 {
        v.push(y);
    }
    for n in 1..p {
        let nf = n as f64;
        v.push(((2.0 * nf + 1.0) * y * v[n] - nf * v[n - 1]) / (nf + 1.0));
    }
    v
}

/// Linear map from `ratio` consecutive fine bases (modes `0..=p_fine`) to
/// the coarse basis (modes `0..=p_coarse`). Exact whenever
/// `p_fine >= p_coarse`, since a degree-`j` polynomial on the coarse step
/// restricts to degree `j` on each fine step.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    ratio: usize,
    p_coarse: usize,
    p_fine: usize,
    w: Vec<f64>,
}

impl Refinement {
    pub fn new(ratio: usize, p_coarse: usize, p_fine: usize) -> Result<Self, SchemeError> {
        if ratio == 0 || p_fine < p_coarse {
            return Err(SchemeError::Config(format!(
                "refinement needs ratio >= 1 and p_fine >= p_coarse (got {ratio}, {p_fine} < {p_coarse})"
            )));
        }
        let rule = GaussLegendre::new(NonZeroUsize::new(p_coarse + 2).expect("positive"));
        let (pc, pf) = (p_coarse + 1, p_fine + 1);
        let mut w = vec![0.0; ratio * pc * pf];
        let rf = ratio as f64;
        for r in 0..ratio {
            for (y, wt) in rule.iter() {
                let yc = ((2 * r + 1) as f64 + y) / rf - 1.0;
                let coarse = legendre_values(p_coarse, yc);
                let fine = legendre_values(p_coarse, *y);
                for j in 0..pc {
                    for jf in 0..=j {
                        w[(r * pc + j) * pf + jf] += wt * coarse[j] * fine[jf];
                    }
                }
            }
            for j in 0..pc {
                for jf in 0..=j {
                    w[(r * pc + j) * pf + jf] *=
                        (((2 * j + 1) * (2 * jf + 1)) as f64).sqrt() / (2.0 * rf.sqrt());
                }
            }
        }
        Ok(Self {
            ratio,
            p_coarse,
            p_fine,
            w,
        })
    }

    pub fn ratio(&self) -> usize {
        self.ratio
    }

    pub fn weight(&self, r: usize, j: usize, jf: usize) -> f64 {
        self.w[(r * (self.p_coarse + 1) + j) * (self.p_fine + 1) + jf]
    }

    pub fn coarse<T: Real>(
        &self,
        fine: &[GaussianBasis<T>],
    ) -> Result<GaussianBasis<T>, SchemeError> {
        if fine.len() != self.ratio || fine.iter().any(|b| b.p() < self.p_coarse) {
            return Err(SchemeError::Config(
                "fine bases do not match the refinement".into(),
            ));
        }
        let m = fine[0].m();
        let delta = fine[0].delta() * T::of(self.ratio as f64);
        let pc = self.p_coarse + 1;
        let mut values = vec![T::zero(); m * pc];
        for i in 1..=m {
            for (r, b) in fine.iter().enumerate() {
                let col = b.column(i);
                for j in 0..pc {
                    let mut s = T::zero();
                    for (jf, &z) in col.iter().enumerate().take(j + 1) {
                        s = s + T::of(self.weight(r, j, jf)) * z;
                    }
                    values[(i - 1) * pc + j] = values[(i - 1) * pc + j] + s;
                }
            }
        }
        Ok(GaussianBasis::from_values(m, self.p_coarse, delta, values))
    }
}
