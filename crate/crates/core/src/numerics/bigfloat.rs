use std::cmp::Ordering;
use std::ffi::{CStr, CString};
use std::fmt;
use std::mem::MaybeUninit;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::ptr;

use gmp_mpfr_sys::mpfr;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Precision, Real};

const RND: mpfr::rnd_t = mpfr::rnd_t::RNDN;

/// Extended-precision binary float backed by MPFR, rounding to nearest.
///
/// The precision is fixed at construction; binary operations round to the
/// precision of the left operand.
pub struct BigFloat {
    raw: mpfr::mpfr_t,
}

// SAFETY: a BigFloat exclusively owns its limb buffer and MPFR functions only
// read through `*const` arguments, so shared references never race.
unsafe impl Send for BigFloat {}
unsafe impl Sync for BigFloat {}

impl BigFloat {
    /// Zero at `prec` bits.
    pub fn new(prec: Precision) -> Self {
        Self::with_bits(prec.bits())
    }

    fn with_bits(bits: u32) -> Self {
        let mut raw = MaybeUninit::uninit();
        // SAFETY: init2 fully initialises the struct; set_zero writes a valid value.
        unsafe {
            mpfr::init2(raw.as_mut_ptr(), bits as mpfr::prec_t);
            let mut raw = raw.assume_init();
            mpfr::set_zero(&mut raw, 1);
            BigFloat { raw }
        }
    }

    pub fn with_f64(x: f64, prec: Precision) -> Self {
        let mut out = Self::new(prec);
        unsafe {
            mpfr::set_d(&mut out.raw, x, RND);
        }
        out
    }

    /// `x` rounded to `prec` bits.
    pub fn with_big(x: &BigFloat, prec: Precision) -> Self {
        let mut out = Self::new(prec);
        unsafe {
            mpfr::set(&mut out.raw, &x.raw, RND);
        }
        out
    }

    /// Parses a decimal string such as `"1.0206e-37"`.
    pub fn parse(s: &str, prec: Precision) -> Option<Self> {
        let c = CString::new(s.trim()).ok()?;
        let mut out = Self::new(prec);
        let rc = unsafe { mpfr::set_str(&mut out.raw, c.as_ptr(), 10, RND) };
        (rc == 0).then_some(out)
    }

    pub fn bits(&self) -> u32 {
        unsafe { mpfr::get_prec(&self.raw) as u32 }
    }

    pub fn is_nan(&self) -> bool {
        unsafe { mpfr::nan_p(&self.raw) != 0 }
    }

    fn ptr(&mut self) -> *mut mpfr::mpfr_t {
        &mut self.raw
    }

    fn unary(&self, f: unsafe extern "C" fn(*mut mpfr::mpfr_t, *const mpfr::mpfr_t, mpfr::rnd_t) -> i32) -> Self {
        let mut out = Self::with_bits(self.bits());
        unsafe {
            f(&mut out.raw, &self.raw, RND);
        }
        out
    }

    /// Decimal scientific notation with `digits` significant digits.
    pub fn to_sci(&self, digits: usize) -> String {
        unsafe {
            if mpfr::nan_p(&self.raw) != 0 {
                return "NaN".into();
            }
            if mpfr::inf_p(&self.raw) != 0 {
                return if mpfr::sgn(&self.raw) < 0 { "-inf".into() } else { "inf".into() };
            }
            if mpfr::zero_p(&self.raw) != 0 {
                return format!("{:.*e}", digits.max(1) - 1, 0.0);
            }
            let mut exp: mpfr::exp_t = 0;
            let s = mpfr::get_str(ptr::null_mut(), &mut exp, 10, digits.max(1), &self.raw, RND);
            let text = CStr::from_ptr(s).to_string_lossy().into_owned();
            mpfr::free_str(s);
            let (sign, mantissa) = match text.strip_prefix('-') {
                Some(rest) => ("-", rest),
                None => ("", text.as_str()),
            };
            let (head, tail) = mantissa.split_at(1);
            if tail.is_empty() {
                format!("{sign}{head}e{}", exp - 1)
            } else {
                format!("{sign}{head}.{tail}e{}", exp - 1)
            }
        }
    }
}

impl Drop for BigFloat {
    fn drop(&mut self) {
        unsafe { mpfr::clear(&mut self.raw) }
    }
}

impl Clone for BigFloat {
    fn clone(&self) -> Self {
        let mut out = Self::with_bits(self.bits());
        unsafe {
            mpfr::set(&mut out.raw, &self.raw, RND);
        }
        out
    }
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.to_sci(20), self.bits())
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sci(self.decimal_digits()))
    }
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        unsafe { mpfr::equal_p(&self.raw, &other.raw) != 0 }
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        unsafe {
            if mpfr::unordered_p(&self.raw, &other.raw) != 0 {
                None
            } else {
                Some(mpfr::cmp(&self.raw, &other.raw).cmp(&0))
            }
        }
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $assign_trait:ident, $assign_method:ident, $f:path) => {
        impl<'a> $assign_trait<&'a BigFloat> for BigFloat {
            fn $assign_method(&mut self, rhs: &'a BigFloat) {
                let p = self.ptr();
                unsafe {
                    $f(p, p, &rhs.raw, RND);
                }
            }
        }
        impl $assign_trait for BigFloat {
            fn $assign_method(&mut self, rhs: BigFloat) {
                $assign_trait::$assign_method(self, &rhs);
            }
        }
        impl<'a> $trait<&'a BigFloat> for BigFloat {
            type Output = BigFloat;
            fn $method(mut self, rhs: &'a BigFloat) -> BigFloat {
                $assign_trait::$assign_method(&mut self, rhs);
                self
            }
        }
        impl $trait for BigFloat {
            type Output = BigFloat;
            fn $method(mut self, rhs: BigFloat) -> BigFloat {
                $assign_trait::$assign_method(&mut self, &rhs);
                self
            }
        }
    };
}

binary_op!(Add, add, AddAssign, add_assign, mpfr::add);
binary_op!(Sub, sub, SubAssign, sub_assign, mpfr::sub);
binary_op!(Mul, mul, MulAssign, mul_assign, mpfr::mul);
binary_op!(Div, div, DivAssign, div_assign, mpfr::div);

impl Neg for BigFloat {
    type Output = BigFloat;
    fn neg(mut self) -> BigFloat {
        let p = self.ptr();
        unsafe {
            mpfr::neg(p, p, RND);
        }
        self
    }
}

impl Real for BigFloat {
    fn from_f64(x: f64, prec: Precision) -> Self {
        BigFloat::with_f64(x, prec)
    }

    fn from_big(x: &BigFloat, prec: Precision) -> Self {
        BigFloat::with_big(x, prec)
    }

    fn to_big(&self) -> BigFloat {
        self.clone()
    }

    fn precision(&self) -> Precision {
        Precision::at_least(self.bits())
    }

    fn to_f64(&self) -> f64 {
        unsafe { mpfr::get_d(&self.raw, RND) }
    }

    fn pow2(e: i64, prec: Precision) -> Self {
        let mut out = Self::new(prec);
        unsafe {
            mpfr::set_si(&mut out.raw, 1, RND);
            let p = out.ptr();
            mpfr::mul_2si(p, p, e as _, RND);
        }
        out
    }

    fn sqrt(&self) -> Self {
        self.unary(mpfr::sqrt)
    }

    fn abs(&self) -> Self {
        self.unary(mpfr::abs)
    }

    fn hypot(&self, other: &Self) -> Self {
        let mut out = Self::with_bits(self.bits());
        unsafe {
            mpfr::hypot(&mut out.raw, &self.raw, &other.raw, RND);
        }
        out
    }

    fn ln(&self) -> Self {
        self.unary(mpfr::log)
    }

    fn exp(&self) -> Self {
        self.unary(mpfr::exp)
    }

    fn is_finite(&self) -> bool {
        unsafe { mpfr::number_p(&self.raw) != 0 }
    }

    fn is_zero(&self) -> bool {
        unsafe { mpfr::zero_p(&self.raw) != 0 }
    }

    fn is_sign_negative(&self) -> bool {
        unsafe { mpfr::sgn(&self.raw) < 0 }
    }

    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        let p = self.ptr();
        unsafe {
            mpfr::fma(p, &a.raw, &b.raw, p, RND);
        }
    }

    fn mul_sub_assign(&mut self, a: &Self, b: &Self) {
        // fms computes a*b - self; negate afterwards.
        let p = self.ptr();
        unsafe {
            mpfr::fms(p, &a.raw, &b.raw, p, RND);
            mpfr::neg(p, p, RND);
        }
    }

    fn log2_abs(&self) -> f64 {
        unsafe {
            if mpfr::zero_p(&self.raw) != 0 {
                return f64::NEG_INFINITY;
            }
            if mpfr::number_p(&self.raw) == 0 {
                return f64::INFINITY;
            }
            let mut exp: std::os::raw::c_long = 0;
            let m = mpfr::get_d_2exp(&mut exp, &self.raw, RND);
            m.abs().log2() + exp as f64
        }
    }

    fn max_log2() -> f64 {
        // MPFR's default exponent range.
        ((1u64 << 30) - 1) as f64
    }

    fn to_sci_string(&self, digits: usize) -> String {
        self.to_sci(digits)
    }
}

impl Serialize for BigFloat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BigFloat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        let digits = text
            .trim_start_matches('-')
            .split(['e', 'E'])
            .next()
            .map(|m| m.chars().filter(char::is_ascii_digit).count())
            .unwrap_or(17);
        let bits = (digits as f64 / std::f64::consts::LOG10_2).ceil() as u32;
        let prec = Precision::at_least(bits);
        BigFloat::parse(&text, prec)
            .ok_or_else(|| serde::de::Error::custom(format!("invalid decimal `{text}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(bits: u32) -> Precision {
        Precision::new(bits).unwrap()
    }

    #[test]
    fn arithmetic_beyond_binary64() {
        let one = BigFloat::with_f64(1.0, p(256));
        let tiny = BigFloat::pow2(-200, p(256));
        let sum = one.clone() + &tiny;
        assert!(sum > one);
        assert_eq!((sum - &one), tiny);
    }

    #[test]
    fn sqrt_two_digits() {
        let two = BigFloat::with_f64(2.0, p(128));
        let s = two.sqrt().to_sci(30);
        assert_eq!(s, "1.41421356237309504880168872421e0");
    }

    #[test]
    fn fused_updates() {
        let prec = p(128);
        let mut acc = BigFloat::with_f64(10.0, prec);
        let a = BigFloat::with_f64(3.0, prec);
        let b = BigFloat::with_f64(4.0, prec);
        acc.mul_add_assign(&a, &b);
        assert_eq!(acc.to_f64(), 22.0);
        acc.mul_sub_assign(&a, &b);
        assert_eq!(acc.to_f64(), 10.0);
    }

    #[test]
    fn string_round_trip() {
        let x = BigFloat::parse("1.0206e-37", p(128)).unwrap();
        assert_eq!(x.to_sci(5), "1.0206e-37");
        let json = serde_json::to_string(&x).unwrap();
        let back: BigFloat = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_sci(30), x.to_sci(30));
        assert_eq!(BigFloat::new(p(64)).to_sci(3), "0.00e0");
    }

    #[test]
    fn log2_of_huge_values() {
        let x = BigFloat::pow2(5000, p(64));
        assert_eq!(x.log2_abs(), 5000.0);
        assert!(x.is_finite());
    }
}
