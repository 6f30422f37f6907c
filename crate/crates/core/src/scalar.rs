//! Coefficient types.
//!
//! Every kernel, decomposition and enumeration routine is generic over
//! [`Scalar`], so the same code runs in double precision and in exact
//! rational arithmetic. The rational backend makes identities such as the
//! isometry and the product formula assertable with `==`.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational coefficients.
pub type Rational = BigRational;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Identifier recorded in reports (`float` or `rational`).
    const MODE: &'static str;

    fn from_i64(v: i64) -> Self;
    /// Exact conversion for rationals (every finite double is a dyadic rational).
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;

    fn factorial(n: usize) -> Self {
        let mut acc = Self::one();
        for k in 2..=n {
            acc = acc * Self::from_i64(k as i64);
        }
        acc
    }

    /// Equality up to `tol` in float mode, exact equality in rational mode.
    fn close_to(&self, other: &Self, tol: f64) -> bool;
}

impl Scalar for f64 {
    const MODE: &'static str = "float";

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn close_to(&self, other: &Self, tol: f64) -> bool {
        (self - other).abs() <= tol
    }
}

impl Scalar for BigRational {
    const MODE: &'static str = "rational";

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite coefficient")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn close_to(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }
}

pub(crate) fn factorial_u64(n: usize) -> u64 {
    (1..=n as u64).product()
}

pub(crate) fn binomial_u64(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}
