//! Numeric abstraction for proportion arithmetic.
//!
//! Metrics are computed over any [`Scalar`]: `f32`, `f64`, or exact
//! rationals (`Ratio<i64>`, [`BigRational`]). Exact types make the
//! normalisation and closure identities hold with no drift at all.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// A signed number type usable for proportions and deltas.
pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug {
    /// Converts a slot count into the scalar domain.
    fn from_count(n: u64) -> Self;

    /// Best-effort conversion from a float, used for thresholds and
    /// rounded reference values. Exact types take the float's binary value.
    fn from_f64_lossy(x: f64) -> Option<Self>;

    fn to_f64_lossy(&self) -> f64;

    fn half(&self) -> Self {
        self.clone() / (Self::one() + Self::one())
    }
}

impl Scalar for f64 {
    fn from_count(n: u64) -> Self {
        n as f64
    }

    fn from_f64_lossy(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn from_count(n: u64) -> Self {
        n as f32
    }

    fn from_f64_lossy(x: f64) -> Option<Self> {
        x.is_finite().then_some(x as f32)
    }

    fn to_f64_lossy(&self) -> f64 {
        f64::from(*self)
    }
}

impl Scalar for Ratio<i64> {
    fn from_count(n: u64) -> Self {
        let n = i64::try_from(n).expect("slot count exceeds i64");
        Ratio::from_integer(n)
    }

    fn from_f64_lossy(x: f64) -> Option<Self> {
        Ratio::<i64>::from_f64(x)
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for BigRational {
    fn from_count(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_f64_lossy(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// The rational a float's shortest decimal rendering denotes, so `0.07`
/// becomes exactly 7/100 rather than its binary neighbour.
pub fn rational_from_decimal(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let text = format!("{x}");
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.as_str()),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    let numer: BigInt = format!("{int}{frac}").parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(numer, denom);
    Some(if negative { -r } else { r })
}
