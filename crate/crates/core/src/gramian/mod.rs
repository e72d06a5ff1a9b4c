//! Controllability Gramians `W(t) = sum_{i<=t} A^i B B^* (A^*)^i`, their
//! extreme eigenvalues at escalating precision, and minimum-energy control.

mod steer;

pub use steer::{steer, steer_with, worst_direction, SteeringPlan, WorstDirection};

use serde::Serialize;
use thiserror::Error;

use crate::numerics::{
    eig_hermitian, eigvals_hermitian, run_at, BigFloat, CMatrix, Complex, Matrix, NumericsError, Precision,
    PrecisionTask, Real, Tolerances, TOLERANCES,
};
use crate::system::{LinearSystem, SystemError};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum GramianError {
    #[error("Gramian entries exceed the range of the {bits}-bit backend (log2 magnitude {log2:.0})")]
    Overflow { bits: u32, log2: f64 },
    #[error("target is outside the range of W(t-1) (relative distance {distance:e})")]
    Unreachable { distance: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Precision ladder used by [`gramian_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GramianOptions {
    pub start: Precision,
    pub max: Precision,
}

impl Default for GramianOptions {
    fn default() -> Self {
        GramianOptions { start: Precision::DOUBLE, max: Precision::MAX }
    }
}

impl GramianOptions {
    pub fn starting_at(start: Precision) -> Self {
        GramianOptions { start, ..Self::default() }
    }
}

/// `W(t)` and its extreme eigenvalues.
#[derive(Clone, Debug, Serialize)]
pub struct GramianReport {
    pub t: usize,
    /// `W(t)` rounded to binary64.
    #[serde(skip)]
    pub w: CMatrix,
    pub lambda_min: BigFloat,
    pub lambda_max: BigFloat,
    pub precision_bits_used: u32,
    /// `lambda_min` cleared the escalation threshold (or is exactly zero by rank).
    pub resolved: bool,
}

impl GramianReport {
    /// `1 / lambda_min`, `+inf` when `W` is singular.
    pub fn energy(&self) -> f64 {
        let l = self.lambda_min.to_f64();
        if self.lambda_min.is_zero() || l <= 0.0 || !self.resolved {
            f64::INFINITY
        } else {
            1.0 / l
        }
    }
}

/// `S(t) = [B, AB, ..., A^t B]` at precision `prec`.
pub fn controllability_matrix_at<R: Real>(sys: &LinearSystem, t: usize, prec: Precision) -> Result<Matrix<R>, GramianError> {
    let a = sys.a_at::<R>(prec);
    let mut blk = sys.b_at::<R>(prec);
    let mut s = blk.clone();
    for _ in 0..t {
        blk = a.mul(&blk)?;
        s = s.hcat(&blk)?;
    }
    Ok(s)
}

/// `W(t)` at precision `prec` by rank-`k` Gram updates, one per power of `A`.
pub fn gramian_matrix_at<R: Real>(sys: &LinearSystem, t: usize, prec: Precision) -> Result<Matrix<R>, GramianError> {
    let a = sys.a_at::<R>(prec);
    let mut blk = sys.b_at::<R>(prec);
    let mut w = Matrix::zeros(sys.n(), sys.n(), prec);
    w.add_gram(&blk)?;
    for _ in 0..t {
        blk = a.mul(&blk)?;
        w.add_gram(&blk)?;
    }
    Ok(w)
}

/// `(sum_{i<terms} x^i, x^terms)` by binary splitting, which keeps the
/// absolute error at the scale of the sum even for `x` near `1`.
fn geometric<R: Real>(x: &R, terms: u64) -> (R, R) {
    let prec = x.precision();
    if terms == 0 {
        return (R::zero(prec), R::one(prec));
    }
    if terms % 2 == 1 {
        let (s, p) = geometric(x, terms - 1);
        (R::one(prec) + x.clone() * s, p * x)
    } else {
        let (s, p) = geometric(x, terms / 2);
        (s * (R::one(prec) + &p), p.clone() * &p)
    }
}

/// Spectral form of `W(t)` for exactly Hermitian `A = U diag(l) U^*`:
/// `U^* W U = C o K` with `C = (U^*B)(U^*B)^*` and `K_ab = sum_{i<=t} (l_a l_b)^i`.
/// Returns `(U^* W U, U)`.
pub fn spectral_gramian_at<R: Real>(sys: &LinearSystem, t: usize, prec: Precision) -> Result<(Matrix<R>, Matrix<R>), GramianError> {
    let eig = eig_hermitian(&sys.a_at::<R>(prec))?;
    let c = eig.vectors.adjoint().mul(&sys.b_at::<R>(prec))?;
    let n = sys.n();
    let mut g = Matrix::zeros(n, n, prec);
    let terms = t as u64 + 1;
    for i in 0..n {
        for j in i..n {
            let (k, _) = geometric(&(eig.values[i].clone() * &eig.values[j]), terms);
            let mut acc = Complex::zero(prec);
            for l in 0..sys.k() {
                acc.mul_conj_add_assign(&c[(i, l)], &c[(j, l)]);
            }
            let entry = acc.scale(&k);
            if i == j {
                g[(i, i)] = Complex::from_real(entry.re);
            } else {
                g[(j, i)] = entry.conj();
                g[(i, j)] = entry;
            }
        }
    }
    Ok((g, eig.vectors))
}

/// True when the spectral route applies: `A` equal to its adjoint bit for bit.
pub fn is_exactly_hermitian(a: &CMatrix) -> bool {
    a.hermitian_defect() == 0.0
}

pub fn gramian(sys: &LinearSystem, t: usize) -> Result<GramianReport, GramianError> {
    gramian_with(sys, t, &GramianOptions::default())
}

struct Rung<'a> {
    sys: &'a LinearSystem,
    t: usize,
    spectral: bool,
    want_matrix: bool,
}

struct RungResult {
    lambda_min: BigFloat,
    lambda_max: BigFloat,
    w: Option<CMatrix>,
}

impl PrecisionTask for Rung<'_> {
    type Output = RungResult;
    type Error = GramianError;

    fn run<R: Real>(&self, prec: Precision) -> Result<RungResult, GramianError> {
        let (values, w) = if self.spectral {
            let (g, u) = spectral_gramian_at::<R>(self.sys, self.t, prec)?;
            let w = if self.want_matrix { Some(u.mul(&g)?.mul(&u.adjoint())?.hermitize().to_c64()) } else { None };
            (eigvals_hermitian(&g)?, w)
        } else {
            let w = gramian_matrix_at::<R>(self.sys, self.t, prec)?;
            (eigvals_hermitian(&w)?, self.want_matrix.then(|| w.to_c64()))
        };
        let lo = values.first().expect("n >= 1").to_big();
        let hi = values.last().expect("n >= 1").to_big();
        Ok(RungResult { lambda_min: lo, lambda_max: hi, w })
    }
}

/// `log2` of the smallest and largest diagonal entries of `W(t)`, from a
/// 64-bit pass (its exponent range cannot overflow at these sizes).
fn diagonal_range(sys: &LinearSystem, t: usize, spectral: bool) -> Result<(f64, f64), GramianError> {
    let prec = Precision::new(64).expect("valid precision");
    let diag: Vec<BigFloat> = if spectral {
        let (g, _) = spectral_gramian_at::<BigFloat>(sys, t, prec)?;
        (0..sys.n()).map(|i| g[(i, i)].re.clone()).collect()
    } else {
        let a = sys.a_at::<BigFloat>(prec);
        let mut blk = sys.b_at::<BigFloat>(prec);
        let mut d = vec![BigFloat::zero(prec); sys.n()];
        for step in 0..=t {
            if step > 0 {
                blk = a.mul(&blk)?;
            }
            for (i, di) in d.iter_mut().enumerate() {
                for x in blk.row(i) {
                    *di += x.norm_sqr();
                }
            }
        }
        d
    };
    let logs: Vec<f64> = diag.iter().map(Real::log2_abs).collect();
    let lo = logs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// Escalation threshold: `lambda_min` must exceed `2^(20-p) (t+1) n lambda_max`.
/// The `(t+1) n` factor covers error growth in the accumulated sum.
pub fn resolution_floor(prec: Precision, t: usize, n: usize) -> BigFloat {
    let growth = BigFloat::from_usize((t + 1) * n, prec);
    Tolerances::factor::<BigFloat>(TOLERANCES.escalation, prec) * growth
}

/// [`gramian`] with an explicit precision ladder. Rungs that the diagonal
/// of `W` already rules out (`lambda_min <= min W_ii`, `lambda_max >= max W_ii`)
/// are skipped.
pub fn gramian_with(sys: &LinearSystem, t: usize, opts: &GramianOptions) -> Result<GramianReport, GramianError> {
    let n = sys.n();
    let spectral = is_exactly_hermitian(sys.a());
    let rank_deficient = (t + 1) * sys.k() < n;

    let a_norm = sys.a().fro_norm().max(1.0);
    let rough = 2.0 * t as f64 * a_norm.log2() + 2.0 * sys.b_fro().max(1e-300).log2() + (t as f64 + 1.0).log2();
    if rough > BigFloat::max_log2() / 2.0 {
        return Err(GramianError::Overflow { bits: Precision::MAX.bits(), log2: rough });
    }
    let (diag_lo, diag_hi) = diagonal_range(sys, t, spectral)?;
    let spread = if rank_deficient { 0.0 } else { diag_hi - diag_lo };

    let mut prec = opts.start;
    loop {
        let floor_bits = resolution_floor(prec, t, n).log2_abs();
        let fits = !prec.is_double() || diag_hi < f64::MAX_EXP as f64 - 8.0;
        let hopeless = -spread < floor_bits - 2.0;
        if (fits && !hopeless) || prec >= opts.max {
            if !fits {
                return Err(GramianError::Overflow { bits: prec.bits(), log2: diag_hi });
            }
            let rung = Rung { sys, t, spectral, want_matrix: true };
            let r = run_at(&rung, prec)?;
            let bits = prec.bits();
            if rank_deficient {
                return Ok(GramianReport {
                    t,
                    w: r.w.expect("matrix requested"),
                    lambda_min: BigFloat::zero(prec),
                    lambda_max: r.lambda_max,
                    precision_bits_used: bits,
                    resolved: true,
                });
            }
            let floor = resolution_floor(prec, t, n) * &r.lambda_max;
            let resolved = r.lambda_min > floor;
            if resolved || prec >= opts.max {
                return Ok(GramianReport {
                    t,
                    w: r.w.expect("matrix requested"),
                    lambda_min: r.lambda_min,
                    lambda_max: r.lambda_max,
                    precision_bits_used: bits,
                    resolved,
                });
            }
        }
        prec = match prec.escalate() {
            Some(p) if p <= opts.max => p,
            _ => opts.max,
        };
    }
}

/// `E(A,B,t) = 1 / lambda_min(W(t-1))`, `+inf` when `W(t-1)` is singular.
pub fn control_energy(sys: &LinearSystem, t: usize) -> Result<f64, GramianError> {
    if t == 0 {
        return Err(GramianError::InvalidArgument("control energy needs t >= 1".into()));
    }
    if t * sys.k() < sys.n() {
        return Ok(f64::INFINITY);
    }
    Ok(gramian(sys, t - 1)?.energy())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::Region;
    use crate::numerics::{singular_values, C64};
    use crate::system::{generate, SystemSpec};

    fn scalar(a: f64, b: f64) -> LinearSystem {
        LinearSystem::new(CMatrix::diag_real(&[a]), CMatrix::diag_real(&[b])).unwrap()
    }

    fn shift(n: usize) -> LinearSystem {
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        LinearSystem::new(CMatrix::lower_shift(n), CMatrix::from_real(n, 1, &e1).unwrap()).unwrap()
    }

    #[test]
    fn scalar_examples() {
        let r = gramian(&scalar(0.0, 1.0), 5).unwrap();
        assert_eq!(r.lambda_min.to_f64(), 1.0);
        assert_eq!(r.precision_bits_used, 53);
        let r = gramian(&scalar(0.5, 1.0), 1).unwrap();
        assert_eq!(r.w[(0, 0)].re, 1.25);
        assert_eq!(control_energy(&scalar(0.0, 1.0), 3).unwrap(), 1.0);
    }

    #[test]
    fn shift_gives_identity() {
        for n in [1, 4, 9] {
            for t in [n - 1, n + 3] {
                let r = gramian(&shift(n), t).unwrap();
                assert_eq!(r.lambda_min.to_f64(), 1.0);
                assert_eq!(r.lambda_max.to_f64(), 1.0);
            }
            assert_eq!(control_energy(&shift(n), n).unwrap(), 1.0);
        }
        let r = gramian(&shift(4), 2).unwrap();
        assert!(r.lambda_min.is_zero() && r.resolved);
        assert_eq!(control_energy(&shift(3), 2).unwrap(), f64::INFINITY);
    }

    #[test]
    fn geometric_sums() {
        let (s, p) = geometric(&0.5f64, 10);
        assert!((s - (1.0 - 0.5f64.powi(10)) / 0.5).abs() < 1e-15);
        assert_eq!(p, 0.5f64.powi(10));
        let (s, _) = geometric(&1.0f64, 1001);
        assert_eq!(s, 1001.0);
        let (s, _) = geometric(&-1.0f64, 1001);
        assert_eq!(s, 1.0);
        let (s, _) = geometric(&0.3f64, 0);
        assert_eq!(s, 0.0);
    }

    #[test]
    fn spectral_route_matches_direct_sum() {
        let spec = SystemSpec::new(7, 2, Region::interval(-1.0, 1.0), 5).hermitian(5);
        let sys = generate(&spec).unwrap();
        assert!(is_exactly_hermitian(sys.a()));
        let prec = Precision::new(128).unwrap();
        for t in [0, 3, 12] {
            let direct = gramian_matrix_at::<BigFloat>(&sys, t, prec).unwrap();
            let (g, u) = spectral_gramian_at::<BigFloat>(&sys, t, prec).unwrap();
            let w = u.mul(&g).unwrap().mul(&u.adjoint()).unwrap();
            let diff = w.sub(&direct).unwrap().max_abs().to_f64();
            assert!(diff <= 1e-30 * direct.max_abs().to_f64(), "t={t}: {diff}");
        }
    }

    #[test]
    fn escalates_for_tiny_lambda_min() {
        let spec = SystemSpec::new(12, 1, Region::interval(-0.5, 0.5), 1);
        let sys = generate(&spec).unwrap();
        let r = gramian(&sys, 11).unwrap();
        assert!(r.resolved);
        assert!(r.lambda_min.to_f64() < 1e-12);
        assert!(r.precision_bits_used > 53);
        // Agrees with the next rung.
        let hi = Precision::new(r.precision_bits_used * 2).unwrap();
        let again = gramian_with(&sys, 11, &GramianOptions::starting_at(hi)).unwrap();
        let rel = ((r.lambda_min.to_f64() - again.lambda_min.to_f64()) / again.lambda_min.to_f64()).abs();
        assert!(rel < 1e-6, "{rel}");
    }

    #[test]
    fn lambda_min_is_sigma_min_squared() {
        let spec = SystemSpec::new(6, 2, Region::disk(0.0, 0.0, 0.8), 8).with_cond(10.0);
        let sys = generate(&spec).unwrap();
        let prec = Precision::new(212).unwrap();
        for t in [2, 5, 9] {
            let r = gramian_with(&sys, t, &GramianOptions::starting_at(prec)).unwrap();
            let s = controllability_matrix_at::<BigFloat>(&sys, t, prec).unwrap();
            let sig = singular_values(&s).unwrap();
            let smin = sig.last().unwrap().clone();
            let rel = ((r.lambda_min.clone() / (smin.clone() * &smin) - BigFloat::one(prec)).abs()).to_f64();
            assert!(rel < 1e-20, "t={t}: {rel}");
        }
    }

    #[test]
    fn hermitian_with_unstable_modes_resolves() {
        let spec = SystemSpec::new(12, 1, Region::interval(-1.0, 1.0), 2).hermitian(8);
        let sys = generate(&spec).unwrap();
        let r = gramian(&sys, 400).unwrap();
        assert!(r.resolved, "{:?}", r.precision_bits_used);
        assert!(r.lambda_max.log2_abs() > 300.0);
        let r2 = gramian(&sys, 401).unwrap();
        assert!(r2.lambda_min >= r.lambda_min);
    }

    #[test]
    fn overflow_is_reported() {
        let sys = scalar(2.0, 1.0);
        assert!(matches!(gramian(&sys, 1usize << 40), Err(GramianError::Overflow { .. })));
        // Beyond binary64 range but fine for the extended backend.
        let r = gramian(&sys, 600).unwrap();
        assert!(r.precision_bits_used > 53 && r.lambda_min.log2_abs() > 1100.0);
    }

    #[test]
    fn report_json() {
        let r = gramian(&scalar(0.5, 1.0), 1).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["t"], 1);
        assert!(v["lambda_min"].is_string());
        assert_eq!(v["precision_bits_used"], 53);
        assert!(v.get("w").is_none());
        let _ = C64::ZERO;
    }
}
