//! Strong Taylor-Ito and Taylor-Stratonovich schemes for Ito SDEs, with
//! iterated stochastic integrals approximated by multiple Fourier-Legendre
//! series and an exact mean-square error calculus.

pub mod coeffs;
pub mod exactpoly;
pub mod mse;
pub mod problemsval;
pub mod ranks;
pub mod rngstream;
pub mod scalar;
pub mod schemes;
pub mod stochint;

pub use num_rational::BigRational;
pub use scalar::{Real, Ring};

pub type Basis = stochint::GaussianBasis<f64>;
pub type Basis32 = stochint::GaussianBasis<f32>;
pub type Scaled = coeffs::ScaledTensor<f64>;
pub type Problem = schemes::SdeProblem<f64>;
pub type Scheme = schemes::PreparedScheme<f64>;
