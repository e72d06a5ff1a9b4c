use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use super::{BigFloat, Precision};

/// Real scalar contract shared by the binary64 and the extended-precision backend.
///
/// Every value created inside one computation carries the same precision; the
/// constructors take it explicitly so generic code never guesses.
pub trait Real:
    Clone
    + Debug
    + Send
    + Sync
    + PartialEq
    + PartialOrd
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
    + for<'a> DivAssign<&'a Self>
{
    fn from_f64(x: f64, prec: Precision) -> Self;
    /// Rounds `x` to `prec` (binary64 ignores `prec`).
    fn from_big(x: &BigFloat, prec: Precision) -> Self;
    /// Exact widening to the extended type at this value's precision.
    fn to_big(&self) -> BigFloat;
    fn precision(&self) -> Precision;
    fn to_f64(&self) -> f64;

    /// Exact power of two `2^e`.
    fn pow2(e: i64, prec: Precision) -> Self;
    fn sqrt(&self) -> Self;
    fn abs(&self) -> Self;
    fn hypot(&self, other: &Self) -> Self;
    fn ln(&self) -> Self;
    fn exp(&self) -> Self;
    fn is_finite(&self) -> bool;
    fn is_zero(&self) -> bool;
    fn is_sign_negative(&self) -> bool;

    /// `self += a * b` with a single rounding where the backend supports it.
    fn mul_add_assign(&mut self, a: &Self, b: &Self);
    /// `self -= a * b`.
    fn mul_sub_assign(&mut self, a: &Self, b: &Self);

    /// `log2 |self|` to roughly binary64 accuracy; `-inf` for zero.
    fn log2_abs(&self) -> f64;
    /// Largest `log2` magnitude representable by the backend.
    fn max_log2() -> f64;
    /// Scientific notation with `digits` significant digits.
    fn to_sci_string(&self, digits: usize) -> String;

    fn zero(prec: Precision) -> Self {
        Self::from_f64(0.0, prec)
    }

    fn one(prec: Precision) -> Self {
        Self::from_f64(1.0, prec)
    }

    fn from_usize(n: usize, prec: Precision) -> Self {
        Self::from_f64(n as f64, prec)
    }

    /// Converts between backends (and precisions) through the extended type.
    fn convert<S: Real>(&self, prec: Precision) -> S {
        S::from_big(&self.to_big(), prec)
    }

    /// Unit roundoff-scale epsilon `2^(1-p)`.
    fn epsilon(prec: Precision) -> Self {
        Self::pow2(1 - prec.bits() as i64, prec)
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

    /// Integer power by repeated squaring.
    fn powu(&self, mut n: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.precision());
        while n > 0 {
            if n & 1 == 1 {
                acc *= &base;
            }
            n >>= 1;
            if n > 0 {
                base = base.clone() * &base;
            }
        }
        acc
    }

    /// Number of significant decimal digits that this precision carries.
    fn decimal_digits(&self) -> usize {
        (self.precision().bits() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1
    }
}

impl Real for f64 {
    fn from_f64(x: f64, _prec: Precision) -> Self {
        x
    }

    fn from_big(x: &BigFloat, _prec: Precision) -> Self {
        x.to_f64()
    }

    fn to_big(&self) -> BigFloat {
        BigFloat::with_f64(*self, Precision::DOUBLE)
    }

    fn precision(&self) -> Precision {
        Precision::DOUBLE
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn pow2(e: i64, _prec: Precision) -> Self {
        2f64.powi(e.clamp(-1100, 1100) as i32)
    }

    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn hypot(&self, other: &Self) -> Self {
        f64::hypot(*self, *other)
    }

    fn ln(&self) -> Self {
        f64::ln(*self)
    }

    fn exp(&self) -> Self {
        f64::exp(*self)
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn is_sign_negative(&self) -> bool {
        *self < 0.0
    }

    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        *self = a.mul_add(*b, *self);
    }

    fn mul_sub_assign(&mut self, a: &Self, b: &Self) {
        *self = (-a).mul_add(*b, *self);
    }

    fn log2_abs(&self) -> f64 {
        f64::abs(*self).log2()
    }

    fn max_log2() -> f64 {
        f64::MAX_EXP as f64
    }

    fn to_sci_string(&self, digits: usize) -> String {
        format!("{:.*e}", digits.max(1) - 1, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powu_matches_powi() {
        let x = 1.0001f64;
        assert!((x.powu(1000) - x.powi(1000)).abs() < 1e-12 * x.powi(1000));
        assert_eq!(3f64.powu(0), 1.0);
    }

    #[test]
    fn sci_string_digits() {
        assert_eq!(1.0f64.to_sci_string(3), "1.00e0");
        assert_eq!(Real::decimal_digits(&1.0f64), 17);
    }
}
