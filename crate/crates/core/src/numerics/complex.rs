use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use super::{Precision, Real};

/// Complex number over a [`Real`] backend.
#[derive(Clone, Debug, PartialEq)]
pub struct Complex<R> {
    pub re: R,
    pub im: R,
}

/// Binary64 complex number.
pub type C64 = Complex<f64>;

impl<R: Real> Complex<R> {
    pub fn new(re: R, im: R) -> Self {
        Complex { re, im }
    }

    pub fn zero(prec: Precision) -> Self {
        Complex::new(R::zero(prec), R::zero(prec))
    }

    pub fn one(prec: Precision) -> Self {
        Complex::new(R::one(prec), R::zero(prec))
    }

    pub fn from_f64(re: f64, im: f64, prec: Precision) -> Self {
        Complex::new(R::from_f64(re, prec), R::from_f64(im, prec))
    }

    pub fn from_real(re: R) -> Self {
        let im = R::zero(re.precision());
        Complex { re, im }
    }

    pub fn precision(&self) -> Precision {
        self.re.precision()
    }

    pub fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> R {
        let mut s = self.re.clone() * &self.re;
        s.mul_add_assign(&self.im, &self.im);
        s
    }

    pub fn abs(&self) -> R {
        self.re.hypot(&self.im)
    }

    pub fn scale(&self, k: &R) -> Self {
        Complex::new(self.re.clone() * k, self.im.clone() * k)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    /// `self += a * b`.
    pub fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        self.re.mul_add_assign(&a.re, &b.re);
        self.re.mul_sub_assign(&a.im, &b.im);
        self.im.mul_add_assign(&a.re, &b.im);
        self.im.mul_add_assign(&a.im, &b.re);
    }

    /// `self -= a * b`.
    pub fn mul_sub_assign(&mut self, a: &Self, b: &Self) {
        self.re.mul_sub_assign(&a.re, &b.re);
        self.re.mul_add_assign(&a.im, &b.im);
        self.im.mul_sub_assign(&a.re, &b.im);
        self.im.mul_sub_assign(&a.im, &b.re);
    }

    /// `self += a * conj(b)`.
    pub fn mul_conj_add_assign(&mut self, a: &Self, b: &Self) {
        self.re.mul_add_assign(&a.re, &b.re);
        self.re.mul_add_assign(&a.im, &b.im);
        self.im.mul_add_assign(&a.im, &b.re);
        self.im.mul_sub_assign(&a.re, &b.im);
    }

    /// `self += a * k` for real `k`.
    pub fn real_mul_add_assign(&mut self, a: &Self, k: &R) {
        self.re.mul_add_assign(&a.re, k);
        self.im.mul_add_assign(&a.im, k);
    }

    /// Unit-modulus phase `z / |z|` (one for zero).
    pub fn phase(&self) -> Self {
        let r = self.abs();
        if r.is_zero() {
            Complex::one(self.precision())
        } else {
            Complex::new(self.re.clone() / &r, self.im.clone() / &r)
        }
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        let prec = self.precision();
        if self.is_zero() {
            return Complex::zero(prec);
        }
        let r = self.abs();
        let half = R::from_f64(0.5, prec);
        if !self.re.is_sign_negative() {
            let s = ((r + &self.re) * &half).sqrt();
            let im = self.im.clone() / (s.clone() + &s);
            Complex::new(s, im)
        } else {
            let t = ((r - &self.re) * &half).sqrt();
            let re = self.im.abs() / (t.clone() + &t);
            let im = if self.im.is_sign_negative() { -t } else { t };
            Complex::new(re, im)
        }
    }

    pub fn to_c64(&self) -> C64 {
        Complex::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn convert<S: Real>(&self, prec: Precision) -> Complex<S> {
        Complex::new(self.re.convert(prec), self.im.convert(prec))
    }
}

impl C64 {
    pub const ZERO: C64 = Complex { re: 0.0, im: 0.0 };
    pub const ONE: C64 = Complex { re: 1.0, im: 0.0 };
    pub const I: C64 = Complex { re: 0.0, im: 1.0 };

    pub fn c(re: f64, im: f64) -> C64 {
        Complex { re, im }
    }

    pub fn re_only(re: f64) -> C64 {
        Complex { re, im: 0.0 }
    }

    pub fn from_polar(r: f64, theta: f64) -> C64 {
        Complex { re: r * theta.cos(), im: r * theta.sin() }
    }

    pub fn arg(&self) -> f64 {
        self.im.atan2(self.re)
    }

    pub fn powi(&self, n: u32) -> C64 {
        let mut acc = C64::ONE;
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }
}

impl<'a, R: Real> Add<&'a Complex<R>> for &'a Complex<R> {
    type Output = Complex<R>;
    fn add(self, rhs: &'a Complex<R>) -> Complex<R> {
        Complex::new(self.re.clone() + &rhs.re, self.im.clone() + &rhs.im)
    }
}

impl<'a, R: Real> Sub<&'a Complex<R>> for &'a Complex<R> {
    type Output = Complex<R>;
    fn sub(self, rhs: &'a Complex<R>) -> Complex<R> {
        Complex::new(self.re.clone() - &rhs.re, self.im.clone() - &rhs.im)
    }
}

impl<'a, R: Real> Mul<&'a Complex<R>> for &'a Complex<R> {
    type Output = Complex<R>;
    fn mul(self, rhs: &'a Complex<R>) -> Complex<R> {
        let mut re = self.re.clone() * &rhs.re;
        re.mul_sub_assign(&self.im, &rhs.im);
        let mut im = self.re.clone() * &rhs.im;
        im.mul_add_assign(&self.im, &rhs.re);
        Complex::new(re, im)
    }
}

impl<'a, R: Real> Div<&'a Complex<R>> for &'a Complex<R> {
    type Output = Complex<R>;
    /// Smith's algorithm, avoiding overflow in `|rhs|^2`.
    fn div(self, rhs: &'a Complex<R>) -> Complex<R> {
        if rhs.re.abs() >= rhs.im.abs() {
            let ratio = rhs.im.clone() / &rhs.re;
            let mut den = rhs.re.clone();
            den.mul_add_assign(&rhs.im, &ratio);
            let mut re = self.re.clone();
            re.mul_add_assign(&self.im, &ratio);
            let mut im = self.im.clone();
            im.mul_sub_assign(&self.re, &ratio);
            Complex::new(re / &den, im / &den)
        } else {
            let ratio = rhs.re.clone() / &rhs.im;
            let mut den = rhs.im.clone();
            den.mul_add_assign(&rhs.re, &ratio);
            let mut re = self.im.clone();
            re.mul_add_assign(&self.re, &ratio);
            let mut im = self.im.clone() * &ratio;
            im -= &self.re;
            Complex::new(re / &den, im / &den)
        }
    }
}

impl<'a, R: Real> AddAssign<&'a Complex<R>> for Complex<R> {
    fn add_assign(&mut self, rhs: &'a Complex<R>) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl<'a, R: Real> SubAssign<&'a Complex<R>> for Complex<R> {
    fn sub_assign(&mut self, rhs: &'a Complex<R>) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl<'a, R: Real> MulAssign<&'a Complex<R>> for Complex<R> {
    fn mul_assign(&mut self, rhs: &'a Complex<R>) {
        *self = &*self * rhs;
    }
}

impl<R: Real> Neg for Complex<R> {
    type Output = Complex<R>;
    fn neg(self) -> Complex<R> {
        Complex::new(-self.re, -self.im)
    }
}

impl Copy for C64 {}

macro_rules! c64_value_op {
    ($tr:ident, $f:ident) => {
        impl $tr for C64 {
            type Output = C64;
            fn $f(self, rhs: C64) -> C64 {
                $tr::$f(&self, &rhs)
            }
        }
    };
}

c64_value_op!(Add, add);
c64_value_op!(Sub, sub);
c64_value_op!(Mul, mul);
c64_value_op!(Div, div);

impl Serialize for C64 {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.re, self.im].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for C64 {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(deserializer)?;
        Ok(C64::c(re, im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::BigFloat;

    #[test]
    fn division_inverts_multiplication() {
        let a = C64::c(1.5, -2.0);
        let b = C64::c(-0.25, 3.0);
        let q = &(&a * &b) / &b;
        assert!((q.re - a.re).abs() < 1e-15 && (q.im - a.im).abs() < 1e-15);
        let tiny = C64::c(1e-200, 1e-200);
        let r = &tiny / &tiny;
        assert!((r.re - 1.0).abs() < 1e-15 && r.im.abs() < 1e-15);
    }

    #[test]
    fn sqrt_branches() {
        for z in [C64::c(-4.0, 0.0), C64::c(3.0, 4.0), C64::c(-3.0, -4.0), C64::c(0.0, 2.0)] {
            let s = z.sqrt();
            let back = &s * &s;
            assert!((back.re - z.re).abs() < 1e-14 && (back.im - z.im).abs() < 1e-14, "{z:?}");
            assert!(s.re >= 0.0);
        }
    }

    #[test]
    fn fused_complex_updates_match_plain_product() {
        let prec = Precision::new(128).unwrap();
        let a = Complex::<BigFloat>::from_f64(1.0, 2.0, prec);
        let b = Complex::<BigFloat>::from_f64(3.0, -1.0, prec);
        let mut acc = Complex::<BigFloat>::zero(prec);
        acc.mul_add_assign(&a, &b);
        assert_eq!(acc.to_c64(), C64::c(5.0, 5.0));
        let mut acc2 = Complex::<BigFloat>::zero(prec);
        acc2.mul_conj_add_assign(&a, &b);
        assert_eq!(acc2.to_c64(), C64::c(1.0, 7.0));
    }
}
