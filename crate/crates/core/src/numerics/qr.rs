use super::complex::Complex;
use super::matrix::{vec_norm, Matrix};
use super::svd::LeastSquares;
use super::{NumericsError, Real, Tolerances, TOLERANCES};

/// Least squares by Householder QR. Columns whose pivot falls below
/// `2^(16-p)` times the largest column norm get a zero coefficient.
///
/// Cheaper than the SVD route; meant for well-conditioned bases solved many
/// times, such as reweighted minimax iterations.
pub fn qr_least_squares<R: Real>(basis: &Matrix<R>, target: &[Complex<R>]) -> Result<LeastSquares<R>, NumericsError> {
    let prec = basis.precision();
    let (rows, cols) = (basis.rows(), basis.cols());
    if rows != target.len() {
        return Err(NumericsError::DimensionMismatch(format!("basis has {rows} rows, target {}", target.len())));
    }
    // Column-major working copy.
    let mut a: Vec<Vec<Complex<R>>> = (0..cols).map(|j| basis.column(j)).collect();
    let mut b = target.to_vec();
    let col_scale = a.iter().map(|c| vec_norm(c, prec)).fold(R::zero(prec), |m, x| m.max_of(x));
    let cutoff = col_scale * Tolerances::factor::<R>(TOLERANCES.cutoff, prec);
    let two = R::from_f64(2.0, prec);
    let steps = cols.min(rows);
    let mut diag = Vec::with_capacity(steps);

    for k in 0..steps {
        let xnorm = vec_norm(&a[k][k..], prec);
        if xnorm <= cutoff {
            diag.push(None);
            continue;
        }
        let alpha = -a[k][k].phase().scale(&xnorm);
        let mut v: Vec<Complex<R>> = a[k][k..].to_vec();
        v[0] = &v[0] - &alpha;
        let mut vv = R::zero(prec);
        for c in &v {
            vv += c.norm_sqr();
        }
        let tau = two.clone() / vv;
        let reflect = |col: &mut [Complex<R>]| {
            let mut s = Complex::zero(prec);
            for (x, vi) in col.iter().zip(&v) {
                s.mul_conj_add_assign(x, vi);
            }
            let s = -s.scale(&tau);
            for (x, vi) in col.iter_mut().zip(&v) {
                x.mul_add_assign(vi, &s);
            }
        };
        for col in a.iter_mut().skip(k + 1) {
            reflect(&mut col[k..]);
        }
        reflect(&mut b[k..]);
        diag.push(Some(alpha));
    }

    // Back substitution on R, skipping dropped pivots.
    let mut coefficients = vec![Complex::zero(prec); cols];
    for k in (0..steps).rev() {
        let Some(pivot) = &diag[k] else { continue };
        let mut acc = b[k].clone();
        for (j, cj) in coefficients.iter().enumerate().take(steps).skip(k + 1) {
            acc.mul_sub_assign(&a[j][k], cj);
        }
        coefficients[k] = &acc / pivot;
    }
    let fitted = basis.matvec(&coefficients)?;
    let residual: Vec<Complex<R>> = target.iter().zip(&fitted).map(|(t, f)| t - f).collect();
    let residual_norm = vec_norm(&residual, prec);
    Ok(LeastSquares { coefficients, residual_norm, residual })
}
