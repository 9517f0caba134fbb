//! The arithmetic contract shared by every algorithm in the crate.
//!
//! Two implementations exist: [`Rational`] (arbitrary-precision, exact) and
//! `f64` (absolute tolerance, see [`float_tolerance`]). Sign and equality
//! tests always go through the trait so that exact mode never rounds.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Default absolute tolerance of float mode.
pub const DEFAULT_FLOAT_TOLERANCE: f64 = 1e-9;

static FLOAT_TOLERANCE: AtomicU64 = AtomicU64::new(0x3E11_2E0B_E826_D695); // 1e-9

/// Current absolute tolerance used by `f64` comparisons.
pub fn float_tolerance() -> f64 {
    f64::from_bits(FLOAT_TOLERANCE.load(Ordering::Relaxed))
}

/// Sets the process-wide float tolerance. Panics on non-positive input.
pub fn set_float_tolerance(tol: f64) {
    assert!(tol > 0.0 && tol.is_finite(), "tolerance must be positive");
    FLOAT_TOLERANCE.store(tol.to_bits(), Ordering::Relaxed);
}

pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
    + Sum
{
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;
    fn ratio(num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Absolute tolerance; zero for exact arithmetic.
    fn tolerance() -> f64;
    fn abs_val(&self) -> Self;

    fn is_negligible(&self) -> bool;

    /// Hashable key; floats are snapped to the tolerance grid first.
    fn grid_key(&self) -> String;

    fn is_positive(&self) -> bool {
        !self.is_negligible() && *self > Self::zero()
    }

    fn is_negative(&self) -> bool {
        !self.is_negligible() && *self < Self::zero()
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).is_negligible()
    }

    /// `self <= other` up to tolerance.
    fn approx_le(&self, other: &Self) -> bool {
        !(self.clone() - other.clone()).is_positive()
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn half() -> Self {
        Self::ratio(1, 2)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn tolerance() -> f64 {
        0.0
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn grid_key(&self) -> String {
        self.to_string()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn tolerance() -> f64 {
        float_tolerance()
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= float_tolerance()
    }

    fn grid_key(&self) -> String {
        format!("{}", (self / float_tolerance()).round() as i64)
    }
}

/// Shorthand for an exact `num/den`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::ratio(num, den)
}

/// Best rational approximation of `x` with denominator at most `max_den`
/// (continued-fraction convergents and semiconvergents).
pub fn snap_to_rational(x: f64, max_den: u64) -> Rational {
    assert!(max_den >= 1);
    if !x.is_finite() {
        return Rational::zero();
    }
    let negative = x < 0.0;
    let target = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    let mut frac = target;
    let max_den = max_den as u128;
    let mut best = (target.round() as u128, 1u128);
    for _ in 0..64 {
        let a = frac.floor();
        let ai = a as u128;
        let p2 = ai.saturating_mul(p1).saturating_add(p0);
        let q2 = ai.saturating_mul(q1).saturating_add(q0);
        if q2 > max_den {
            // semiconvergent with the largest admissible partial quotient
            let k = (max_den - q0) / q1.max(1);
            let ps = k * p1 + p0;
            let qs = k * q1 + q0;
            let err_s = (ps as f64 / qs as f64 - target).abs();
            let err_c = (p1 as f64 / q1.max(1) as f64 - target).abs();
            best = if q1 != 0 && err_c <= err_s { (p1, q1) } else { (ps, qs) };
            break;
        }
        best = (p2, q2);
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let rem = frac - a;
        if rem < 1e-15 {
            break;
        }
        frac = 1.0 / rem;
    }
    let r = Rational::new(BigInt::from(best.0), BigInt::from(best.1.max(1)));
    if negative {
        -r
    } else {
        r
    }
}

/// Exact rational value of a finite float's shortest decimal rendering.
pub fn rational_from_decimal_str(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
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
    let digits = format!("{int_part}{frac_part}");
    let digits: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    Some(if negative { -value } else { value })
}
