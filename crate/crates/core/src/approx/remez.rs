use std::f64::consts::FRAC_PI_2;

use super::chebyshev::cheb_truncation;
use super::{ApproxError, CoefficientBasis, MinimaxResult};
use crate::numerics::{CMatrix, Lu, C64};

const MAX_EXCHANGES: usize = 200;
const GOLDEN_STEPS: usize = 60;

/// Error curve `e(θ) = tail(cos θ) - q(cos θ)` for `x^n`, where the tail holds
/// the Chebyshev terms of index above `m` and `q` spans `T_k`, `k ≤ m`, of
/// the parity of `n`. Working on the tail keeps the arithmetic at the scale
/// of the error rather than of `x^n`.
struct Curve {
    tail: Vec<(usize, f64)>,
    basis: Vec<usize>,
    q: Vec<f64>,
}

impl Curve {
    fn tail_at(&self, theta: f64) -> f64 {
        self.tail.iter().map(|&(k, c)| c * (k as f64 * theta).cos()).sum()
    }

    fn eval(&self, theta: f64) -> f64 {
        let q: f64 = self.basis.iter().zip(&self.q).map(|(&k, d)| d * (k as f64 * theta).cos()).sum();
        self.tail_at(theta) - q
    }

    /// Largest `|e|` on `[0, π/2]`: dense scan, then golden refinement of the
    /// best few local maxima.
    fn max_abs(&self, n: usize) -> (f64, f64) {
        let steps = 16 * n + 64;
        let h = FRAC_PI_2 / steps as f64;
        let vals: Vec<f64> = (0..=steps).map(|i| self.eval(i as f64 * h).abs()).collect();
        let mut peaks: Vec<usize> = (0..=steps)
            .filter(|&i| (i == 0 || vals[i] >= vals[i - 1]) && (i == steps || vals[i] >= vals[i + 1]))
            .collect();
        peaks.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
        let mut best = (0.0, 0.0);
        for &i in peaks.iter().take(4) {
            let lo = (i as f64 - 1.0).max(0.0) * h;
            let hi = (i as f64 + 1.0).min(steps as f64) * h;
            let (t, v) = golden(|t| self.eval(t).abs(), lo, hi);
            for (t, v) in [(t, v), (i as f64 * h, vals[i])] {
                if v > best.1 {
                    best = (t, v);
                }
            }
        }
        best
    }
}

fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_STEPS {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Solves `q(θ_j) + (-1)^j E = tail(θ_j)` on the reference.
fn level_solve(curve: &mut Curve, reference: &[f64]) -> Result<f64, ApproxError> {
    let size = reference.len();
    let mut entries = Vec::with_capacity(size * size);
    for (j, &t) in reference.iter().enumerate() {
        for &k in &curve.basis {
            entries.push((k as f64 * t).cos());
        }
        entries.push(if j % 2 == 0 { 1.0 } else { -1.0 });
    }
    let a = CMatrix::from_real(size, size, &entries)?;
    let rhs: Vec<C64> = reference.iter().map(|&t| C64::re_only(curve.tail_at(t))).collect();
    let sol = Lu::new(&a)?.solve(&rhs)?;
    curve.q = sol[..size - 1].iter().map(|c| c.re).collect();
    Ok(sol[size - 1].re)
}

/// Inserts `t` keeping the reference sorted and the error signs alternating.
fn exchange(curve: &Curve, reference: &mut Vec<f64>, t: f64) -> bool {
    let sign = |x: f64| curve.eval(x) >= 0.0;
    let s = sign(t);
    let last = reference.len() - 1;
    if reference.iter().any(|&r| (r - t).abs() <= 1e-15) {
        return false;
    }
    if t < reference[0] {
        if sign(reference[0]) == s {
            reference[0] = t;
        } else {
            reference.pop();
            reference.insert(0, t);
        }
    } else if t > reference[last] {
        if sign(reference[last]) == s {
            reference[last] = t;
        } else {
            reference.remove(0);
            reference.push(t);
        }
    } else {
        let j = reference.partition_point(|&r| r < t);
        if sign(reference[j - 1]) == s {
            reference[j - 1] = t;
        } else {
            reference[j] = t;
        }
    }
    true
}

/// Alternations of the error on `[-1,1]`, from the reference mirrored by parity.
fn alternations(curve: &Curve, reference: &[f64], n: usize, level: f64) -> usize {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for &t in reference {
        let x = t.cos();
        let e = curve.eval(t);
        pts.push((x, e));
        if x.abs() > 1e-14 {
            pts.push((-x, if n % 2 == 0 { e } else { -e }));
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut count = 0;
    let mut last: Option<bool> = None;
    for (_, e) in pts {
        if e.abs() < level * (1.0 - 1e-6) {
            continue;
        }
        let s = e > 0.0;
        if last != Some(s) {
            count += 1;
            last = Some(s);
        }
    }
    count
}

/// Best uniform approximation of `x^n` on `[-1,1]` by real polynomials of
/// degree `≤ m`, by Remez single-point exchange started from Chebyshev
/// extrema. Coefficients are returned in the Chebyshev basis.
pub fn phi_exact(n: usize, m: usize) -> Result<MinimaxResult, ApproxError> {
    if m > n || n == 0 {
        return Err(ApproxError::InvalidArgument(format!("need 0 <= m <= n and n >= 1, got n = {n}, m = {m}")));
    }
    if n > 200 {
        return Err(ApproxError::InvalidArgument(format!("n = {n} exceeds the supported 200")));
    }
    let trunc = cheb_truncation(n, m);
    let full = super::chebyshev::ChebyshevExpansion::<f64>::power(n, crate::numerics::Precision::DOUBLE);
    let tail: Vec<(usize, f64)> = full.terms.iter().take(trunc.first_kept).cloned().collect();
    let basis: Vec<usize> = (0..=m).filter(|k| k % 2 == n % 2).collect();
    let mut curve = Curve { tail, basis, q: Vec::new() };
    let mut result = MinimaxResult {
        l: n,
        m,
        error: 0.0,
        certified_gap: 0.0,
        grid_size: 16 * n + 65,
        coefficients: Vec::new(),
        basis: CoefficientBasis::Chebyshev,
        solve_error: 0.0,
        lower_bound: 0.0,
        iterations: 0,
        alternation_points: None,
        degenerate: false,
        fit: None,
    };
    let chebyshev = |curve: &Curve| -> Vec<C64> {
        let mut c = vec![C64::ZERO; m + 1];
        for (k, v) in &trunc.poly.terms {
            c[*k] = C64::re_only(*v);
        }
        for (&k, d) in curve.basis.iter().zip(&curve.q) {
            c[k] = &c[k] + &C64::re_only(*d);
        }
        c
    };
    if curve.tail.is_empty() {
        result.coefficients = chebyshev(&curve);
        return Ok(result);
    }
    let size = curve.basis.len();
    if size == 0 {
        // No admissible basis function: q = 0 and the error peaks at x = 1.
        let e = curve.tail_at(0.0);
        result.error = e;
        result.solve_error = e;
        result.lower_bound = e;
        result.alternation_points = Some(alternations(&curve, &[0.0], n, e));
        result.coefficients = chebyshev(&curve);
        return Ok(result);
    }
    let denom = if n % 2 == 0 { 2 * size } else { 2 * size + 1 };
    let mut reference: Vec<f64> = (0..=size).map(|j| j as f64 * std::f64::consts::PI / denom as f64).collect();

    for it in 1..=MAX_EXCHANGES {
        let level = level_solve(&mut curve, &reference)?.abs();
        let (t, emax) = curve.max_abs(n);
        let gap = (emax - level).max(0.0);
        result.iterations = it;
        if gap <= 1e-9 * emax || !exchange(&curve, &mut reference, t) {
            if gap > 1e-3 * emax {
                return Err(ApproxError::NoConvergence(format!("Remez stalled at gap {gap:e} for n = {n}, m = {m}")));
            }
            result.error = emax;
            result.solve_error = emax;
            result.lower_bound = level;
            result.certified_gap = gap;
            result.alternation_points = Some(alternations(&curve, &reference, n, level));
            result.coefficients = chebyshev(&curve);
            return Ok(result);
        }
    }
    Err(ApproxError::NoConvergence(format!("Remez exchange cap reached for n = {n}, m = {m}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::phi_hoeffding;

    #[test]
    fn quadratic_by_constant() {
        let r = phi_exact(2, 1).unwrap();
        assert!((r.error - 0.5).abs() < 1e-12);
        assert!((r.coefficients[0].re - 0.5).abs() < 1e-12 && r.coefficients[1].re.abs() < 1e-12);
        assert!(r.alternation_points.unwrap() >= 3);
    }

    #[test]
    fn exact_when_degrees_match() {
        assert_eq!(phi_exact(7, 7).unwrap().error, 0.0);
    }

    #[test]
    fn monic_chebyshev_cases() {
        // Degree n-1 and n-2 approximations leave 2^(1-n) T_n.
        for n in [3, 10, 41, 120, 200] {
            for m in [n - 1, n - 2] {
                let r = phi_exact(n, m).unwrap();
                let want = 2f64.powi(1 - n as i32);
                assert!((r.error - want).abs() <= 1e-9 * want, "n={n} m={m}: {} vs {want}", r.error);
            }
        }
    }

    #[test]
    fn dominated_by_truncation_and_hoeffding() {
        for (n, m) in [(10, 4), (30, 5), (60, 17), (120, 40), (9, 2)] {
            let r = phi_exact(n, m).unwrap();
            let t = cheb_truncation(n, m).tail_bound;
            assert!(r.error <= t * (1.0 + 1e-12), "n={n} m={m}");
            assert!(t <= phi_hoeffding(n, m));
            assert!(r.certified_gap <= 1e-3 * r.error);
            assert!(r.alternation_points.unwrap() >= m + 2, "n={n} m={m}: {:?}", r.alternation_points);
        }
    }

    #[test]
    fn odd_power_constant_approximation() {
        // Best constant for odd x^n on [-1,1] is 0, error 1.
        let r = phi_exact(5, 0).unwrap();
        assert!((r.error - 1.0).abs() < 1e-12);
    }
}
