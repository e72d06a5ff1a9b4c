use serde::Serialize;

use super::{gramian, gramian_matrix_at, GramianError};
use crate::numerics::{
    eig_hermitian, run_at, vec_norm, vec_sub, Complex, HermitianEigen, Precision, PrecisionTask, Real, Tolerances, C64,
    TOLERANCES,
};
use crate::system::{simulate_at, LinearSystem};

/// Targets farther than this (relative to `||xf - A^t x0||`) from the range
/// of `W(t-1)` are unreachable.
pub const UNREACHABLE_TOLERANCE: f64 = 1e-8;

/// Minimum-energy open-loop input sequence.
#[derive(Clone, Debug, Serialize)]
pub struct SteeringPlan {
    /// `u(0), ..., u(t-1)`.
    pub inputs: Vec<Vec<C64>>,
    /// `sum ||u(i)||^2`.
    pub energy: f64,
    /// `d^* W(t-1)^+ d` with `d = xf - A^t x0`.
    pub quadratic_form: f64,
    /// `||x(t) - xf||` when simulating the plan at the working precision.
    pub target_residual: f64,
    pub precision_bits: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct WorstDirection {
    /// Unit eigenvector of `W(t-1)` for its smallest eigenvalue.
    pub y: Vec<C64>,
    /// Energy of the plan that steers `0 -> y`.
    pub energy: f64,
    /// `1 / lambda_min(W(t-1))`.
    pub lambda_energy: f64,
    pub precision_bits: u32,
}

fn check_t(t: usize) -> Result<(), GramianError> {
    if t == 0 {
        return Err(GramianError::InvalidArgument("steering needs t >= 1".into()));
    }
    Ok(())
}

/// Working precision for problems on `W(t-1)`: the rung at which its
/// smallest eigenvalue resolves.
fn working_precision(sys: &LinearSystem, t: usize) -> Result<Precision, GramianError> {
    Ok(Precision::new(gramian(sys, t - 1)?.precision_bits_used)?)
}

struct Plan<R> {
    inputs: Vec<Vec<Complex<R>>>,
    energy: R,
    quadratic_form: R,
    target_residual: R,
}

/// `u(i) = B^* (A^*)^(t-1-i) W^+ d`, with the pseudoinverse cut at
/// `2^(16-p) lambda_max`.
fn plan_at<R: Real>(
    sys: &LinearSystem,
    eig: &HermitianEigen<R>,
    x0: &[Complex<R>],
    xf: &[Complex<R>],
    t: usize,
    prec: Precision,
) -> Result<Plan<R>, GramianError> {
    let a = sys.a_at::<R>(prec);
    let b = sys.b_at::<R>(prec);
    let mut ax = x0.to_vec();
    for _ in 0..t {
        ax = a.matvec(&ax)?;
    }
    let d = vec_sub(xf, &ax);
    let d_norm = vec_norm(&d, prec);
    let lambda_max = eig.values.last().expect("n >= 1").clone();
    let cutoff = lambda_max * Tolerances::factor::<R>(TOLERANCES.cutoff, prec);

    let coeffs = eig.vectors.adjoint_matvec(&d)?;
    let mut scaled = Vec::with_capacity(coeffs.len());
    let mut null = R::zero(prec);
    let mut quadratic_form = R::zero(prec);
    for (c, l) in coeffs.iter().zip(&eig.values) {
        if *l > cutoff {
            quadratic_form += c.norm_sqr() / l;
            scaled.push(c.scale(&(R::one(prec) / l)));
        } else {
            null += c.norm_sqr();
            scaled.push(Complex::zero(prec));
        }
    }
    let distance = null.sqrt();
    if !d_norm.is_zero() && distance.to_f64() > UNREACHABLE_TOLERANCE * d_norm.to_f64() {
        return Err(GramianError::Unreachable { distance: (distance / d_norm).to_f64() });
    }

    let mut g = eig.vectors.matvec(&scaled)?;
    let mut inputs = vec![Vec::new(); t];
    let a_adj = a.adjoint();
    for i in (0..t).rev() {
        if i + 1 < t {
            g = a_adj.matvec(&g)?;
        }
        inputs[i] = b.adjoint_matvec(&g)?;
    }
    let mut energy = R::zero(prec);
    for u in &inputs {
        for x in u {
            energy += x.norm_sqr();
        }
    }
    let x = simulate_at(&a, &b, x0, &inputs)?;
    let target_residual = vec_norm(&vec_sub(&x, xf), prec);
    Ok(Plan { inputs, energy, quadratic_form, target_residual })
}

fn finish<R: Real>(plan: Plan<R>, prec: Precision) -> SteeringPlan {
    SteeringPlan {
        inputs: plan.inputs.iter().map(|u| u.iter().map(Complex::to_c64).collect()).collect(),
        energy: plan.energy.to_f64(),
        quadratic_form: plan.quadratic_form.to_f64(),
        target_residual: plan.target_residual.to_f64(),
        precision_bits: prec.bits(),
    }
}

struct SteerTask<'a> {
    sys: &'a LinearSystem,
    x0: &'a [C64],
    xf: &'a [C64],
    t: usize,
}

impl PrecisionTask for SteerTask<'_> {
    type Output = SteeringPlan;
    type Error = GramianError;

    fn run<R: Real>(&self, prec: Precision) -> Result<SteeringPlan, GramianError> {
        let w = gramian_matrix_at::<R>(self.sys, self.t - 1, prec)?;
        let eig = eig_hermitian(&w)?;
        let x0: Vec<Complex<R>> = self.x0.iter().map(|z| z.convert(prec)).collect();
        let xf: Vec<Complex<R>> = self.xf.iter().map(|z| z.convert(prec)).collect();
        Ok(finish(plan_at(self.sys, &eig, &x0, &xf, self.t, prec)?, prec))
    }
}

/// Minimum-energy input steering `x0 -> xf` in `t` steps.
pub fn steer(sys: &LinearSystem, x0: &[C64], xf: &[C64], t: usize) -> Result<SteeringPlan, GramianError> {
    check_t(t)?;
    let prec = working_precision(sys, t)?;
    steer_with(sys, x0, xf, t, prec)
}

/// [`steer`] at a fixed precision.
pub fn steer_with(sys: &LinearSystem, x0: &[C64], xf: &[C64], t: usize, prec: Precision) -> Result<SteeringPlan, GramianError> {
    check_t(t)?;
    let n = sys.n();
    if x0.len() != n || xf.len() != n {
        return Err(GramianError::InvalidArgument(format!("states must have {n} entries")));
    }
    run_at(&SteerTask { sys, x0, xf, t }, prec)
}

struct WorstTask<'a> {
    sys: &'a LinearSystem,
    t: usize,
}

impl PrecisionTask for WorstTask<'_> {
    type Output = WorstDirection;
    type Error = GramianError;

    fn run<R: Real>(&self, prec: Precision) -> Result<WorstDirection, GramianError> {
        let w = gramian_matrix_at::<R>(self.sys, self.t - 1, prec)?;
        let eig = eig_hermitian(&w)?;
        let lambda_min = eig.values[0].clone();
        let cutoff = eig.values.last().expect("n >= 1").clone() * Tolerances::factor::<R>(TOLERANCES.cutoff, prec);
        if lambda_min <= cutoff {
            return Err(GramianError::Unreachable { distance: 1.0 });
        }
        let y = eig.vectors.column(0);
        let zero = vec![Complex::zero(prec); y.len()];
        let plan = plan_at(self.sys, &eig, &zero, &y, self.t, prec)?;
        Ok(WorstDirection {
            y: y.iter().map(Complex::to_c64).collect(),
            energy: plan.energy.to_f64(),
            lambda_energy: (R::one(prec) / lambda_min).to_f64(),
            precision_bits: prec.bits(),
        })
    }
}

/// Hardest unit target: the eigenvector of `W(t-1)` for `lambda_min`, and the
/// energy needed to reach it from the origin.
pub fn worst_direction(sys: &LinearSystem, t: usize) -> Result<WorstDirection, GramianError> {
    check_t(t)?;
    let prec = working_precision(sys, t)?;
    run_at(&WorstTask { sys, t }, prec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::Region;
    use crate::gramian::control_energy;
    use crate::numerics::CMatrix;
    use crate::system::{generate, simulate, SystemSpec};

    fn scalar(a: f64) -> LinearSystem {
        LinearSystem::new(CMatrix::diag_real(&[a]), CMatrix::diag_real(&[1.0])).unwrap()
    }

    #[test]
    fn scalar_examples() {
        let p = steer(&scalar(0.0), &[C64::ZERO], &[C64::ONE], 1).unwrap();
        assert_eq!(p.inputs, vec![vec![C64::ONE]]);
        assert_eq!(p.energy, 1.0);
        let p = steer(&scalar(0.5), &[C64::ZERO], &[C64::ONE], 2).unwrap();
        assert!((p.energy - 0.8).abs() < 1e-15 && (p.quadratic_form - 0.8).abs() < 1e-15);
        let p = steer(&scalar(0.5), &[C64::ZERO], &[C64::ZERO], 2).unwrap();
        assert_eq!(p.energy, 0.0);
        assert!(p.inputs.iter().flatten().all(|z| *z == C64::ZERO));
    }

    #[test]
    fn diagonal_worst_direction() {
        // W(0) = B B^* = diag(1, 4).
        let sys = LinearSystem::new(CMatrix::diag_real(&[0.0, 0.0]), CMatrix::diag_real(&[1.0, 2.0])).unwrap();
        let w = worst_direction(&sys, 1).unwrap();
        assert!((w.y[0].abs() - 1.0).abs() < 1e-15 && w.y[1].abs() < 1e-15);
        assert!((w.energy - 1.0).abs() < 1e-15);
        let iso = LinearSystem::new(CMatrix::diag_real(&[0.0, 0.0]), CMatrix::diag_real(&[1.0, 1.0])).unwrap();
        assert!((worst_direction(&iso, 1).unwrap().energy - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_system_cross_check() {
        let spec = SystemSpec::new(4, 1, Region::disk(0.0, 0.0, 0.9), 17).with_cond(10.0);
        let sys = generate(&spec).unwrap();
        for t in [4, 7, 20] {
            let w = worst_direction(&sys, t).unwrap();
            assert!((w.energy / w.lambda_energy - 1.0).abs() < 1e-6);
            assert!((w.lambda_energy / control_energy(&sys, t).unwrap() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn plan_hits_target() {
        let spec = SystemSpec::new(5, 2, Region::disk(0.1, 0.0, 0.7), 4).with_cond(10.0);
        let sys = generate(&spec).unwrap();
        let x0: Vec<C64> = (0..5).map(|i| C64::c(i as f64, -1.0)).collect();
        let xf: Vec<C64> = (0..5).map(|i| C64::c(0.5, i as f64 * 0.3)).collect();
        let p = steer(&sys, &x0, &xf, 6).unwrap();
        let xf_norm = vec_norm(&xf, Precision::DOUBLE);
        assert!(p.target_residual <= 1e-8 * xf_norm);
        assert!((p.energy / p.quadratic_form - 1.0).abs() < 1e-8);
        let reached = simulate(&sys, &x0, &p.inputs).unwrap();
        assert!(vec_norm(&vec_sub(&reached, &xf), Precision::DOUBLE) <= 1e-8 * xf_norm);
    }

    #[test]
    fn unreachable_targets() {
        // Lower shift with b = e1 cannot reach e3 in two steps.
        let sys = LinearSystem::new(CMatrix::lower_shift(3), CMatrix::from_real(3, 1, &[1.0, 0.0, 0.0]).unwrap()).unwrap();
        let target = [C64::ZERO, C64::ZERO, C64::ONE];
        assert!(matches!(steer(&sys, &[C64::ZERO; 3], &target, 2), Err(GramianError::Unreachable { .. })));
        let ok = steer(&sys, &[C64::ZERO; 3], &[C64::ZERO, C64::ONE, C64::ZERO], 2).unwrap();
        assert!((ok.energy - 1.0).abs() < 1e-15);
        assert!(matches!(worst_direction(&sys, 2), Err(GramianError::Unreachable { .. })));
        assert!(steer(&sys, &[C64::ZERO; 3], &target, 0).is_err());
    }
}
