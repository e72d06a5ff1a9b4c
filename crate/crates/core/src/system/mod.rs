//! Discrete-time linear systems `x(t+1) = A x(t) + B u(t)`: storage,
//! diagonalization, simulation, and a seeded generator of test systems.

mod generate;

pub use generate::{generate, generate_with_eigenvalues, random_unitary, Generated, SystemSpec};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{
    cond2, eig_general, eig_hermitian, inverse, BigFloat, CMatrix, Complex, Matrix, NumericsError, Precision, Real,
    Tolerances, C64, TOLERANCES,
};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SystemError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("A is not diagonalizable within working precision (cond(V) = {cond:e})")]
    Defective { cond: f64 },
    #[error("infeasible system spec: {0}")]
    InfeasibleSpec(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// `cond(V)` above which a diagonalization is treated as defective.
pub const DEFECT_THRESHOLD: f64 = 1e8;
/// Precision used to re-check a suspected defect.
pub const DEFECT_RECHECK_BITS: u32 = 256;

/// The pair `(A, B)` with `A` square of order `n` and `B` of size `n x k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemJson", into = "SystemJson")]
pub struct LinearSystem {
    a: CMatrix,
    b: CMatrix,
    b_fro: f64,
}

/// Wire format: row-major `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
struct SystemJson {
    n: usize,
    k: usize,
    #[serde(rename = "A")]
    a: Vec<C64>,
    #[serde(rename = "B")]
    b: Vec<C64>,
}

impl TryFrom<SystemJson> for LinearSystem {
    type Error = SystemError;
    fn try_from(j: SystemJson) -> Result<Self, SystemError> {
        let a = CMatrix::from_rows(j.n, j.n, &j.a)?;
        let b = CMatrix::from_rows(j.n, j.k, &j.b)?;
        LinearSystem::new(a, b)
    }
}

impl From<LinearSystem> for SystemJson {
    fn from(s: LinearSystem) -> Self {
        SystemJson { n: s.n(), k: s.k(), a: s.a.data().to_vec(), b: s.b.data().to_vec() }
    }
}

impl LinearSystem {
    pub fn new(a: CMatrix, b: CMatrix) -> Result<Self, SystemError> {
        if !a.is_square() || a.rows() == 0 {
            return Err(SystemError::DimensionMismatch(format!("A is {}x{}", a.rows(), a.cols())));
        }
        if b.rows() != a.rows() || b.cols() == 0 || b.cols() > b.rows() {
            return Err(SystemError::DimensionMismatch(format!(
                "B is {}x{} for n = {}; need n rows and 1 <= k <= n",
                b.rows(),
                b.cols(),
                a.rows()
            )));
        }
        if !a.is_finite() || !b.is_finite() {
            return Err(SystemError::DimensionMismatch("non-finite entries".into()));
        }
        let b_fro = b.fro_norm();
        if !b_fro.is_finite() {
            return Err(SystemError::DimensionMismatch("||B||_F overflows".into()));
        }
        Ok(LinearSystem { a, b, b_fro })
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn k(&self) -> usize {
        self.b.cols()
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn b(&self) -> &CMatrix {
        &self.b
    }

    pub fn b_fro(&self) -> f64 {
        self.b_fro
    }

    /// `A` widened exactly to precision `prec`.
    pub fn a_at<R: Real>(&self, prec: Precision) -> Matrix<R> {
        self.a.convert(prec)
    }

    pub fn b_at<R: Real>(&self, prec: Precision) -> Matrix<R> {
        self.b.convert(prec)
    }
}

/// `V A V^-1 = D`, with `V^-1` holding unit-norm eigenvector columns.
#[derive(Clone, Debug)]
pub struct Diagonalization<R> {
    pub v: Matrix<R>,
    pub v_inv: Matrix<R>,
    pub eigenvalues: Vec<Complex<R>>,
    pub cond_v: f64,
    /// Binary64 arithmetic saw `cond(V) > 1e8`; the result comes from the
    /// extended-precision recheck.
    pub defect_flag: bool,
    pub precision: Precision,
}

impl<R: Real> Diagonalization<R> {
    pub fn d(&self) -> Matrix<R> {
        Matrix::from_diag(&self.eigenvalues, self.precision)
    }

    /// `||V A V^-1 - D||_F`.
    pub fn residual(&self, a: &Matrix<R>) -> Result<R, NumericsError> {
        let vav = self.v.mul(a)?.mul(&self.v_inv)?;
        Ok(vav.sub(&self.d())?.fro_norm())
    }
}

pub fn diagonalize(a: &CMatrix) -> Result<Diagonalization<f64>, SystemError> {
    diagonalize_at(a)
}

/// Eigen-decomposition at the precision of `a`. Hermitian input takes the
/// unitary route (`cond(V) = 1`).
pub fn diagonalize_at<R: Real>(a: &Matrix<R>) -> Result<Diagonalization<R>, SystemError> {
    if !a.is_square() {
        return Err(SystemError::DimensionMismatch(format!("A is {}x{}", a.rows(), a.cols())));
    }
    let prec = a.precision();
    if a.is_hermitian() {
        let eig = eig_hermitian(&a.hermitize())?;
        let eigenvalues = eig.values.iter().map(|x| Complex::from_real(x.clone())).collect();
        return Ok(Diagonalization {
            v: eig.vectors.adjoint(),
            v_inv: eig.vectors,
            eigenvalues,
            cond_v: 1.0,
            defect_flag: false,
            precision: prec,
        });
    }
    let (x, eigenvalues, cond_v) = eigenvectors(a)?;
    if cond_v <= DEFECT_THRESHOLD {
        let v = inverse(&x).map_err(|_| SystemError::Defective { cond: f64::INFINITY })?;
        return Ok(Diagonalization { v, v_inv: x, eigenvalues, cond_v, defect_flag: false, precision: prec });
    }
    if prec.bits() >= DEFECT_RECHECK_BITS {
        return Err(SystemError::Defective { cond: cond_v });
    }
    let hi = Precision::new(DEFECT_RECHECK_BITS).expect("valid precision");
    let (xh, values_h, cond_h) = eigenvectors::<BigFloat>(&a.convert(hi))?;
    if cond_h > DEFECT_THRESHOLD {
        return Err(SystemError::Defective { cond: cond_h });
    }
    let vh = inverse(&xh).map_err(|_| SystemError::Defective { cond: f64::INFINITY })?;
    Ok(Diagonalization {
        v: vh.convert(prec),
        v_inv: xh.convert(prec),
        eigenvalues: values_h.iter().map(|z| z.convert(prec)).collect(),
        cond_v: cond_h,
        defect_flag: true,
        precision: prec,
    })
}

type Eigenvectors<R> = (Matrix<R>, Vec<Complex<R>>, f64);

fn eigenvectors<R: Real>(a: &Matrix<R>) -> Result<Eigenvectors<R>, SystemError> {
    let eig = eig_general(a)?;
    let cond = match cond2(&eig.vectors) {
        Ok(c) => c.to_f64(),
        Err(NumericsError::Singular) => f64::INFINITY,
        Err(e) => return Err(e.into()),
    };
    Ok((eig.vectors, eig.values, cond))
}

/// `ceil(n/k) - 1`, the first `t` at which `W(t)` can be nonsingular.
pub fn t_min(n: usize, k: usize) -> usize {
    assert!(k >= 1 && k <= n, "t_min needs 1 <= k <= n, got n = {n}, k = {k}");
    n.div_ceil(k) - 1
}

/// Runs the recursion from `x0` under `inputs` at the precision of `a`.
pub fn simulate_at<R: Real>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    x0: &[Complex<R>],
    inputs: &[Vec<Complex<R>>],
) -> Result<Vec<Complex<R>>, SystemError> {
    if x0.len() != a.rows() {
        return Err(SystemError::DimensionMismatch(format!("x0 has {} entries, n = {}", x0.len(), a.rows())));
    }
    let mut x = x0.to_vec();
    for (i, u) in inputs.iter().enumerate() {
        if u.len() != b.cols() {
            return Err(SystemError::DimensionMismatch(format!("input {i} has {} entries, k = {}", u.len(), b.cols())));
        }
        let ax = a.matvec(&x)?;
        let bu = b.matvec(u)?;
        x = ax.iter().zip(&bu).map(|(p, q)| p + q).collect();
    }
    Ok(x)
}

/// `x(t)` for `x(0) = x0` and `t = inputs.len()`.
pub fn simulate(sys: &LinearSystem, x0: &[C64], inputs: &[Vec<C64>]) -> Result<Vec<C64>, SystemError> {
    simulate_at(sys.a(), sys.b(), x0, inputs)
}

/// `2^(16-p) ||A||_F cond(V)`, the accepted diagonalization residual.
pub fn diagonalization_tolerance<R: Real>(a: &Matrix<R>, cond_v: f64) -> f64 {
    Tolerances::factor::<f64>(TOLERANCES.diagonalization, a.precision()) * a.fro_norm().to_f64() * cond_v
}
