//! Scalar abstraction shared by the cost model and the solvers.
//!
//! Cost evaluation (path costs, social cost, potential) only needs field
//! arithmetic and an ordering, so it is generic over [`Scalar`] and works
//! with exact rationals as well as floats. The iterative solvers need
//! roots and transcendental operations and are generic over [`Real`].

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Field-like scalar used for every cost evaluation.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + Send + Sync + 'static
{
    /// Exact conversion from a rational literal (rounded for floats).
    fn from_ratio(value: &BigRational) -> Self;

    /// Lossy conversion from `f64`; panics on non-finite input.
    fn from_f64(value: f64) -> Self;

    fn to_f64(&self) -> f64;

    /// Unit roundoff; zero for exact types.
    fn unit_roundoff() -> f64 {
        0.0
    }

    fn from_usize(value: usize) -> Self {
        Self::from_f64(value as f64)
    }

    /// `self^exp` by repeated squaring.
    fn powu(&self, exp: u32) -> Self {
        num_traits::pow(self.clone(), exp as usize)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

/// Floating-point scalar used by the iterative solvers.
pub trait Real: Scalar + Float + Copy {}

impl Scalar for f64 {
    fn from_ratio(value: &BigRational) -> Self {
        ToPrimitive::to_f64(value).unwrap_or(f64::NAN)
    }

    fn from_f64(value: f64) -> Self {
        value
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn unit_roundoff() -> f64 {
        f64::EPSILON
    }

    fn powu(&self, exp: u32) -> Self {
        self.powi(exp as i32)
    }
}

impl Scalar for f32 {
    fn from_ratio(value: &BigRational) -> Self {
        ToPrimitive::to_f32(value).unwrap_or(f32::NAN)
    }

    fn from_f64(value: f64) -> Self {
        value as f32
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn unit_roundoff() -> f64 {
        f32::EPSILON as f64
    }

    fn powu(&self, exp: u32) -> Self {
        self.powi(exp as i32)
    }
}

impl Scalar for BigRational {
    fn from_ratio(value: &BigRational) -> Self {
        value.clone()
    }

    fn from_f64(value: f64) -> Self {
        <BigRational as FromPrimitive>::from_f64(value).expect("finite value")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Real for f64 {}
impl Real for f32 {}

/// Parses a numeric literal exactly: integers, decimals with an optional
/// exponent (`"2.5"`, `"1e-3"`), or fractions (`"4/21"`).
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_rational(num)?;
        let den = parse_rational(den)?;
        if den.is_zero() {
            return None;
        }
        return Some(num / den);
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().ok()?;
    let scale = exponent - frac_part.len() as i32 - 1;
    let ten = BigInt::from(10u8);
    let mut value = BigRational::from_integer(digits);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if negative { -value } else { value })
}
