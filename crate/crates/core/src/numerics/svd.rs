use super::complex::Complex;
use super::matrix::{vec_norm, Matrix};
use super::{NumericsError, Precision, Real, Tolerances, TOLERANCES};

/// Thin singular value decomposition `M = U diag(sigma) V^*`.
#[derive(Clone, Debug)]
pub struct Svd<R> {
    /// Descending, nonnegative; length `min(rows, cols)`.
    pub sigma: Vec<R>,
    /// `rows x r` with orthonormal columns (zero columns for zero `sigma`).
    pub u: Matrix<R>,
    /// `r x cols`, the adjoint of the right singular vectors.
    pub vt: Matrix<R>,
}

const MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd<R: Real>(m: &Matrix<R>) -> Result<Svd<R>, NumericsError> {
    if m.rows() >= m.cols() {
        jacobi(m, true).map(|(sigma, u, v)| Svd { sigma, u, vt: v.expect("vectors").adjoint() })
    } else {
        let (sigma, u, v) = jacobi(&m.adjoint(), true)?;
        Ok(Svd { sigma, u: v.expect("vectors"), vt: u.adjoint() })
    }
}

/// Singular values only, descending.
pub fn singular_values<R: Real>(m: &Matrix<R>) -> Result<Vec<R>, NumericsError> {
    if m.rows() >= m.cols() {
        Ok(jacobi(m, false)?.0)
    } else {
        Ok(jacobi(&m.adjoint(), false)?.0)
    }
}

/// Tall case (`rows >= cols`): orthogonalizes the columns of a working copy.
#[allow(clippy::type_complexity)]
fn jacobi<R: Real>(m: &Matrix<R>, want_v: bool) -> Result<(Vec<R>, Matrix<R>, Option<Matrix<R>>), NumericsError> {
    let prec = m.precision();
    let (rows, n) = (m.rows(), m.cols());
    let mut cols: Vec<Vec<Complex<R>>> = (0..n).map(|j| m.column(j)).collect();
    let mut v: Option<Vec<Vec<Complex<R>>>> = want_v.then(|| {
        (0..n)
            .map(|j| (0..n).map(|i| if i == j { Complex::one(prec) } else { Complex::zero(prec) }).collect())
            .collect()
    });
    let eps = R::pow2(-(prec.bits() as i64), prec) * R::from_usize(rows.max(1), prec);
    let one = R::one(prec);
    let half = R::from_f64(0.5, prec);
    let mut norms: Vec<R> = cols.iter().map(|c| sq_norm(c, prec)).collect();

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = norms[p].clone();
                let beta = norms[q].clone();
                if alpha.is_zero() || beta.is_zero() {
                    continue;
                }
                let mut gamma = Complex::zero(prec);
                for (a, b) in cols[p].iter().zip(&cols[q]) {
                    gamma.mul_conj_add_assign(b, a);
                }
                let g_abs = gamma.abs();
                if g_abs <= eps.clone() * (alpha.clone() * &beta).sqrt() {
                    continue;
                }
                rotated = true;
                let g_conj = Complex::new(gamma.re.clone() / &g_abs, -(gamma.im.clone() / &g_abs));
                let zeta = (beta.clone() - &alpha) * &half / &g_abs;
                let t = {
                    let mag = one.clone() / (zeta.abs() + (one.clone() + zeta.clone() * &zeta).sqrt());
                    if zeta.is_sign_negative() {
                        -mag
                    } else {
                        mag
                    }
                };
                let c = one.clone() / (one.clone() + t.clone() * &t).sqrt();
                let s = c.clone() * &t;
                rotate(&mut cols, p, q, &g_conj, &c, &s);
                if let Some(v) = v.as_mut() {
                    rotate(v, p, q, &g_conj, &c, &s);
                }
                // Exact 2x2 update of the squared norms.
                let tg = t.clone() * &g_abs;
                norms[p] = (alpha - &tg).max_of(R::zero(prec));
                norms[q] = (beta + &tg).max_of(R::zero(prec));
            }
        }
        // Refresh the norms to avoid drift in the cheap updates.
        norms = cols.iter().map(|c| sq_norm(c, prec)).collect();
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(NumericsError::NoConvergence("one-sided Jacobi SVD".into()));
    }

    let sigma_raw: Vec<R> = cols.iter().map(|c| vec_norm(c, prec)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sigma_raw[b].partial_cmp(&sigma_raw[a]).unwrap_or(std::cmp::Ordering::Equal));
    let sigma: Vec<R> = order.iter().map(|&j| sigma_raw[j].clone()).collect();
    let u = Matrix::from_fn(rows, n, prec, |i, j| {
        let src = order[j];
        if sigma_raw[src].is_zero() {
            Complex::zero(prec)
        } else {
            Complex::new(
                cols[src][i].re.clone() / &sigma_raw[src],
                cols[src][i].im.clone() / &sigma_raw[src],
            )
        }
    });
    let v = v.map(|v| Matrix::from_fn(n, n, prec, |i, j| v[order[j]][i].clone()));
    Ok((sigma, u, v))
}

fn sq_norm<R: Real>(c: &[Complex<R>], prec: Precision) -> R {
    let mut acc = R::zero(prec);
    for z in c {
        acc.mul_add_assign(&z.re, &z.re);
        acc.mul_add_assign(&z.im, &z.im);
    }
    acc
}

/// Columns `p, q` become `c a_p - s g a_q` and `s a_p + c g a_q`, where `g` is the
/// conjugate phase of their inner product.
fn rotate<R: Real>(cols: &mut [Vec<Complex<R>>], p: usize, q: usize, g: &Complex<R>, c: &R, s: &R) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
        let w = &*b * g;
        let new_a = Complex::new(
            c.clone() * &a.re - s.clone() * &w.re,
            c.clone() * &a.im - s.clone() * &w.im,
        );
        let new_b = Complex::new(
            s.clone() * &a.re + c.clone() * &w.re,
            s.clone() * &a.im + c.clone() * &w.im,
        );
        *a = new_a;
        *b = new_b;
    }
}

/// Minimum-norm least-squares solution.
#[derive(Clone, Debug)]
pub struct LeastSquares<R> {
    pub coefficients: Vec<Complex<R>>,
    pub residual_norm: R,
    /// `target - Basis * coefficients`, projected onto `col(Basis)^perp`.
    pub residual: Vec<Complex<R>>,
}

/// `min_alpha ||target - basis alpha||_2`, rank-deficient bases handled by the
/// pseudoinverse with cutoff `2^(16-p) sigma_max`.
pub fn least_squares<R: Real>(basis: &Matrix<R>, target: &[Complex<R>]) -> Result<LeastSquares<R>, NumericsError> {
    let prec = basis.precision();
    if basis.rows() != target.len() {
        return Err(NumericsError::DimensionMismatch(format!(
            "basis has {} rows, target {}",
            basis.rows(),
            target.len()
        )));
    }
    if basis.cols() == 0 {
        return Ok(LeastSquares {
            coefficients: Vec::new(),
            residual_norm: vec_norm(target, prec),
            residual: target.to_vec(),
        });
    }
    let dec = svd(basis)?;
    let cutoff = match dec.sigma.first() {
        Some(s) => s.clone() * Tolerances::factor::<R>(TOLERANCES.cutoff, prec),
        None => R::zero(prec),
    };
    let rank = dec.sigma.iter().take_while(|s| !s.is_zero() && **s > cutoff).count();
    let ur = dec.u.columns(0, rank);

    let ut_b = ur.adjoint_matvec(target)?;
    let mut scaled = ut_b.clone();
    for (x, s) in scaled.iter_mut().zip(&dec.sigma) {
        *x = Complex::new(x.re.clone() / s, x.im.clone() / s);
    }
    let coefficients = dec.vt.adjoint().columns(0, rank).matvec(&scaled)?;

    // Project twice for a residual accurate relative to its own size.
    let mut residual = target.to_vec();
    for pass in 0..2 {
        let proj = if pass == 0 { ut_b.clone() } else { ur.adjoint_matvec(&residual)? };
        let back = ur.matvec(&proj)?;
        for (r, b) in residual.iter_mut().zip(&back) {
            *r -= b;
        }
    }
    let residual_norm = vec_norm(&residual, prec);
    Ok(LeastSquares { coefficients, residual_norm, residual })
}

/// `sigma_max / sigma_min`.
pub fn cond2<R: Real>(m: &Matrix<R>) -> Result<R, NumericsError> {
    if !m.is_square() {
        return Err(NumericsError::DimensionMismatch(format!("cond2 of {}x{}", m.rows(), m.cols())));
    }
    let prec = m.precision();
    let s = singular_values(m)?;
    let (Some(max), Some(min)) = (s.first(), s.last()) else {
        return Ok(R::one(prec));
    };
    if *min <= max.clone() * Tolerances::factor::<R>(TOLERANCES.singular, prec) {
        return Err(NumericsError::Singular);
    }
    Ok(max.clone() / min)
}
