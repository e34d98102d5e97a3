//! Exact polynomial arithmetic over the rationals and Legendre polynomials
//! on [-1, 1].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::rat;

pub const DEFAULT_DEGREE_CAP: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("degree {degree} exceeds the configured cap {cap}")]
    DegreeCap { degree: usize, cap: usize },
}

/// Univariate polynomial with exact rational coefficients, index = power.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

impl RationalPoly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The polynomial `x`.
    pub fn x() -> Self {
        Self::from_coeffs(vec![BigRational::zero(), BigRational::one()])
    }

    /// `a + b x`.
    pub fn linear(a: BigRational, b: BigRational) -> Self {
        Self::from_coeffs(vec![a, b])
    }

    pub fn from_coeffs(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::from_coeffs(c.iter().map(|&v| rat(v, 1)).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, n: usize) -> BigRational {
        self.coeffs
            .get(n)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(n, c)| c * BigRational::from_integer(BigInt::from(n)))
                .collect(),
        )
    }

    /// `F` with `F' = self` and `F(lower) = 0`.
    pub fn antiderivative(&self, lower: &BigRational) -> Self {
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(BigRational::zero());
        for (n, a) in self.coeffs.iter().enumerate() {
            c.push(a / BigRational::from_integer(BigInt::from(n + 1)));
        }
        let f = Self::from_coeffs(c);
        let shift = f.eval(lower);
        &f - &Self::constant(shift)
    }

    pub fn definite_integral(&self, a: &BigRational, b: &BigRational) -> BigRational {
        let f = self.antiderivative(&BigRational::zero());
        f.eval(b) - f.eval(a)
    }

    /// `self(a x + b)`.
    pub fn compose_affine(&self, a: &BigRational, b: &BigRational) -> Self {
        let inner = Self::linear(b.clone(), a.clone());
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &inner) + &Self::constant(c.clone());
        }
        acc
    }

    pub fn check_cap(&self, cap: usize) -> Result<(), PolyError> {
        match self.degree() {
            Some(d) if d > cap => Err(PolyError::DegreeCap { degree: d, cap }),
            _ => Ok(()),
        }
    }
}

impl fmt::Debug for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match n {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})x")?,
                _ => write!(f, "({c})x^{n}")?,
            }
        }
        Ok(())
    }
}

impl Add for &RationalPoly {
    type Output = RationalPoly;
    fn add(self, rhs: &RationalPoly) -> RationalPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RationalPoly::from_coeffs((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &RationalPoly {
    type Output = RationalPoly;
    fn sub(self, rhs: &RationalPoly) -> RationalPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RationalPoly::from_coeffs((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &RationalPoly {
    type Output = RationalPoly;
    fn mul(self, rhs: &RationalPoly) -> RationalPoly {
        if self.is_zero() || rhs.is_zero() {
            return RationalPoly::zero();
        }
        let mut c = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        RationalPoly::from_coeffs(c)
    }
}

impl Neg for &RationalPoly {
    type Output = RationalPoly;
    fn neg(self) -> RationalPoly {
        RationalPoly::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! owned_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for RationalPoly {
            type Output = RationalPoly;
            fn $m(self, rhs: RationalPoly) -> RationalPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

/// Degree-`n` Legendre polynomial by the Bonnet recurrence, capped at
/// [`DEFAULT_DEGREE_CAP`].
pub fn legendre(n: usize) -> RationalPoly {
    legendre_capped(n, DEFAULT_DEGREE_CAP).expect("degree within default cap")
}

pub fn legendre_capped(n: usize, cap: usize) -> Result<RationalPoly, PolyError> {
    if n > cap {
        return Err(PolyError::DegreeCap { degree: n, cap });
    }
    Ok(legendre_table(n).pop().expect("nonempty table"))
}

/// `P_0, ..., P_n`.
pub fn legendre_table(n: usize) -> Vec<RationalPoly> {
    let mut out = vec![RationalPoly::one()];
    if n == 0 {
        return out;
    }
    out.push(RationalPoly::x());
    let x = RationalPoly::x();
    for k in 1..n {
        let kk = k as i64;
        let a = (&x * &out[k]).scale(&rat(2 * kk + 1, kk + 1));
        let b = out[k - 1].scale(&rat(kk, kk + 1));
        out.push(&a - &b);
    }
    out
}

pub fn antiderivative(p: &RationalPoly, lower: &BigRational) -> RationalPoly {
    p.antiderivative(lower)
}

pub fn definite_integral(p: &RationalPoly, a: &BigRational, b: &BigRational) -> BigRational {
    p.definite_integral(a, b)
}

/// Exact value of the nested integral
/// `∫_{-1}^{1} w_k(x_k) ∫_{-1}^{x_k} ... ∫_{-1}^{x_2} w_1(x_1) dx_1 ... dx_k`,
/// with `weights[0]` attached to the innermost variable.
pub fn nested_simplex_integral(weights: &[RationalPoly]) -> BigRational {
    let lower = rat(-1, 1);
    let mut f = RationalPoly::one();
    for w in weights {
        f = (w * &f).antiderivative(&lower);
    }
    f.eval(&rat(1, 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m1() -> BigRational {
        rat(-1, 1)
    }
    fn p1() -> BigRational {
        rat(1, 1)
    }

    #[test]
    fn legendre_low_degrees() {
        assert_eq!(legendre(0), RationalPoly::one());
        assert_eq!(legendre(1), RationalPoly::x());
        let p2 = RationalPoly::from_coeffs(vec![rat(-1, 2), rat(0, 1), rat(3, 2)]);
        assert_eq!(legendre(2), p2);
        let p3 = RationalPoly::from_coeffs(vec![rat(0, 1), rat(-3, 2), rat(0, 1), rat(5, 2)]);
        assert_eq!(legendre(3), p3);
    }

    #[test]
    fn legendre_endpoint_values() {
        for n in 0..=12 {
            assert_eq!(legendre(n).eval(&p1()), p1());
            let sign = if n % 2 == 0 { 1 } else { -1 };
            assert_eq!(legendre(n).eval(&m1()), rat(sign, 1));
        }
    }

    #[test]
    fn orthogonality_and_normalization() {
        let t = legendre_table(12);
        for j in 0..=12 {
            for k in 0..=12 {
                let v = (&t[j] * &t[k]).definite_integral(&m1(), &p1());
                if j == k {
                    assert_eq!(v, rat(2, 2 * j as i64 + 1));
                } else {
                    assert!(v.is_zero(), "P{j} P{k}");
                }
            }
        }
    }

    #[test]
    fn antiderivative_examples() {
        assert_eq!(
            RationalPoly::one().antiderivative(&m1()),
            RationalPoly::from_ints(&[1, 1])
        );
        let half = RationalPoly::from_coeffs(vec![rat(-1, 2), rat(0, 1), rat(1, 2)]);
        assert_eq!(RationalPoly::x().antiderivative(&m1()), half);
        assert_eq!(legendre(1).antiderivative(&m1()), half);
    }

    #[test]
    fn definite_integral_examples() {
        assert_eq!(
            RationalPoly::one().definite_integral(&m1(), &p1()),
            rat(2, 1)
        );
        let p11 = &legendre(1) * &legendre(1);
        assert_eq!(p11.definite_integral(&m1(), &p1()), rat(2, 3));
        let p23 = &legendre(2) * &legendre(3);
        assert!(p23.definite_integral(&m1(), &p1()).is_zero());
    }

    #[test]
    fn nested_integral_of_one_is_simplex_volume() {
        let one = RationalPoly::one();
        assert_eq!(nested_simplex_integral(&[one.clone()]), rat(2, 1));
        assert_eq!(
            nested_simplex_integral(&[one.clone(), one.clone()]),
            rat(2, 1)
        );
        assert_eq!(
            nested_simplex_integral(&[one.clone(), one.clone(), one]),
            rat(4, 3)
        );
    }

    #[test]
    fn degree_cap_is_enforced() {
        assert_eq!(
            legendre_capped(10, 8),
            Err(PolyError::DegreeCap { degree: 10, cap: 8 })
        );
        assert!(legendre_capped(8, 8).is_ok());
    }

    #[test]
    fn compose_affine_matches_evaluation() {
        let p = legendre(4);
        let a = rat(1, 3);
        let b = rat(-2, 5);
        let q = p.compose_affine(&a, &b);
        for x in [rat(0, 1), rat(1, 7), rat(-3, 2)] {
            assert_eq!(q.eval(&x), p.eval(&(&a * &x + &b)));
        }
    }

    fn arb_poly() -> impl Strategy<Value = RationalPoly> {
        prop::collection::vec((-50i64..50, 1i64..20), 0..7).prop_map(|v| {
            RationalPoly::from_coeffs(v.into_iter().map(|(n, d)| rat(n, d)).collect())
        })
    }

    proptest! {
        #[test]
        fn addition_is_associative(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        }

        #[test]
        fn antiderivative_inverts_derivative(a in arb_poly(), n in -5i64..5, d in 1i64..5) {
            let f = a.antiderivative(&rat(n, d));
            prop_assert_eq!(f.derivative(), a);
            prop_assert!(f.eval(&rat(n, d)).is_zero());
        }

        #[test]
        fn canonical_form_has_no_trailing_zero(a in arb_poly(), b in arb_poly()) {
            let s = &a - &a;
            prop_assert!(s.is_zero());
            let m = &a * &b;
            prop_assert!(m.coeffs().last().map_or(true, |c| !c.is_zero()));
        }

        #[test]
        fn multiplication_distributes(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        }
    }
}
