use serde::Serialize;

use crate::numerics::{Precision, Real};

/// `x^n` as a combination of Chebyshev polynomials `T_k`, possibly truncated.
#[derive(Clone, Debug, Serialize)]
pub struct ChebyshevExpansion<R> {
    pub n: usize,
    /// `(k, coefficient of T_k)`, `k = n - 2i` descending.
    pub terms: Vec<(usize, R)>,
}

/// Coefficient of `T_{n-2i}` in `x^n`: `2^(1-n) C(n,i)`, halved when `i = n/2`.
fn coefficients<R: Real>(n: usize, prec: Precision) -> Vec<R> {
    let mut out = Vec::with_capacity(n / 2 + 1);
    let mut c = R::pow2(1 - n as i64, prec);
    for i in 0..=n / 2 {
        if 2 * i == n {
            out.push(c.clone() * R::pow2(-1, prec));
        } else {
            out.push(c.clone());
        }
        c = c * R::from_usize(n - i, prec) / R::from_usize(i + 1, prec);
    }
    out
}

impl<R: Real> ChebyshevExpansion<R> {
    /// Full expansion of `x^n`.
    pub fn power(n: usize, prec: Precision) -> Self {
        let terms = coefficients::<R>(n, prec).into_iter().enumerate().map(|(i, c)| (n - 2 * i, c)).collect();
        ChebyshevExpansion { n, terms }
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.0).max().unwrap_or(0)
    }

    /// Evaluates by the three-term recurrence for `T_k(x)`.
    pub fn eval(&self, x: &R) -> R {
        let prec = x.precision();
        let top = self.degree();
        let mut t = vec![R::one(prec), x.clone()];
        let two_x = x.clone() * R::from_f64(2.0, prec);
        while t.len() <= top {
            let k = t.len();
            let next = two_x.clone() * &t[k - 1] - &t[k - 2];
            t.push(next);
        }
        let mut acc = R::zero(prec);
        for (k, c) in &self.terms {
            acc.mul_add_assign(c, &t[*k]);
        }
        acc
    }
}

/// The degree-`m` truncation of `x^n` and a bound on its sup error over `[-1,1]`.
#[derive(Clone, Debug, Serialize)]
pub struct Truncation<R> {
    pub poly: ChebyshevExpansion<R>,
    /// First kept index `i' = ceil((n - m) / 2)`.
    pub first_kept: usize,
    /// `2^(1-n) sum_{i < i'} C(n,i)`.
    pub tail_bound: R,
}

pub fn cheb_truncation_at<R: Real>(n: usize, m: usize, prec: Precision) -> Truncation<R> {
    assert!(m <= n && n >= 1, "need 1 <= n and m <= n");
    let first_kept = (n - m).div_ceil(2);
    let full = ChebyshevExpansion::<R>::power(n, prec);
    let mut tail_bound = R::zero(prec);
    let mut c = R::pow2(1 - n as i64, prec);
    for i in 0..first_kept {
        tail_bound += &c;
        c = c * R::from_usize(n - i, prec) / R::from_usize(i + 1, prec);
    }
    let terms = full.terms.into_iter().skip(first_kept).collect();
    Truncation { poly: ChebyshevExpansion { n, terms }, first_kept, tail_bound }
}

pub fn cheb_truncation(n: usize, m: usize) -> Truncation<f64> {
    cheb_truncation_at(n, m, Precision::DOUBLE)
}

/// `2 exp(-m^2 / (2n))`.
pub fn phi_hoeffding(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    2.0 * (-m * m / (2.0 * n)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::BigFloat;

    fn cheb_nodes(count: usize) -> Vec<f64> {
        (0..count).map(|j| ((2 * j + 1) as f64 * std::f64::consts::PI / (2 * count) as f64).cos()).collect()
    }

    #[test]
    fn full_expansion_reproduces_power() {
        for n in [1, 2, 7, 30] {
            let e = ChebyshevExpansion::<f64>::power(n, Precision::DOUBLE);
            for x in cheb_nodes(33) {
                assert!((e.eval(&x) - x.powi(n as i32)).abs() <= 2f64.powi(20 - 53) * x.abs().powi(n as i32).max(1e-300) + 1e-15);
            }
        }
        let prec = Precision::new(256).unwrap();
        let e = ChebyshevExpansion::<BigFloat>::power(60, prec);
        for x in cheb_nodes(33) {
            let xb = BigFloat::with_f64(x, prec);
            let exact = xb.powu(60);
            let diff = (e.eval(&xb) - &exact).abs().to_f64();
            assert!(diff <= 2f64.powi(20 - 256), "{diff}");
        }
    }

    #[test]
    fn truncation_examples() {
        let t = cheb_truncation(5, 5);
        assert_eq!(t.tail_bound, 0.0);
        assert_eq!(t.poly.terms.len(), 3);
        let t = cheb_truncation(2, 1);
        assert_eq!(t.first_kept, 1);
        assert_eq!(t.tail_bound, 0.5);
        assert_eq!(t.poly.terms, vec![(0, 0.5)]);
        let t = cheb_truncation(10, 4);
        assert!(t.tail_bound <= 2.0 * (-16.0f64 / 20.0).exp());
    }

    #[test]
    fn hoeffding_values() {
        assert!((phi_hoeffding(1, 1) - 1.2131).abs() < 1e-4);
        assert!((phi_hoeffding(2, 1) - 1.5576).abs() < 1e-4);
        assert!((phi_hoeffding(50, 30) - 2.4682e-4).abs() < 1e-7);
    }
}
