use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};

/// Commutative ring used by exact and floating code paths alike.
pub trait Ring: Clone + Debug + Num + Neg<Output = Self> {
    fn from_int(n: i64) -> Self;
}

impl Ring for BigRational {
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
}

impl Ring for f64 {
    fn from_int(n: i64) -> Self {
        n as f64
    }
}

impl Ring for f32 {
    fn from_int(n: i64) -> Self {
        n as f32
    }
}

/// Floating scalar for sampled quantities: f32 or f64.
pub trait Real:
    Ring + Float + FloatConst + FromPrimitive + ToPrimitive + Copy + Send + Sync + Default + 'static
{
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64")
    }
    fn f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Nearest f64 to an exact rational.
pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
