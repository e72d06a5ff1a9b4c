use crate::numerics::{least_squares, BigFloat, Complex, Matrix, NumericsError, Precision, Real};

/// `min ||p(D) z||_2` over monic `p` of the given degree, as the residual of
/// `D^degree z` against `{z, Dz, ..., D^(degree-1) z}`.
///
/// The Krylov basis is badly conditioned, so callers pick the precision; see
/// [`monic_residual_auto`].
pub fn monic_residual<R: Real>(d: &[Complex<R>], z: &[Complex<R>], degree: usize) -> Result<R, NumericsError> {
    if d.len() != z.len() {
        return Err(NumericsError::DimensionMismatch(format!("diagonal {} vs vector {}", d.len(), z.len())));
    }
    if degree == 0 {
        return Err(NumericsError::DimensionMismatch("monic degree must be >= 1".into()));
    }
    let n = z.len();
    let prec = z.first().map_or(Precision::DOUBLE, |c| c.precision());
    let mut cols: Vec<Vec<Complex<R>>> = Vec::with_capacity(degree + 1);
    cols.push(z.to_vec());
    for j in 0..degree {
        let next: Vec<Complex<R>> = cols[j].iter().zip(d).map(|(v, di)| v * di).collect();
        cols.push(next);
    }
    let target = cols.pop().expect("degree >= 1");
    let basis = Matrix::from_columns(&cols, n, prec);
    Ok(least_squares(&basis, &target)?.residual_norm)
}

/// [`monic_residual`] in extended precision, climbing the precision ladder
/// from `start` until two consecutive rungs agree to relative `2^-40`.
/// Returns the value and the precision of the accepted rung.
pub fn monic_residual_auto(
    d: &[Complex<BigFloat>],
    z: &[Complex<BigFloat>],
    degree: usize,
    start: Precision,
) -> Result<(BigFloat, Precision), NumericsError> {
    let at = |p: Precision| {
        let dp: Vec<Complex<BigFloat>> = d.iter().map(|c| c.convert(p)).collect();
        let zp: Vec<Complex<BigFloat>> = z.iter().map(|c| c.convert(p)).collect();
        monic_residual(&dp, &zp, degree)
    };
    let mut prec = start;
    let mut prev = at(prec)?;
    while let Some(next_prec) = prec.escalate() {
        let next = at(next_prec)?;
        let diff = (next.clone() - prev.convert::<BigFloat>(next_prec)).abs();
        let tol = next.abs() * BigFloat::pow2(-40, next_prec);
        if diff <= tol {
            return Ok((next, next_prec));
        }
        prev = next;
        prec = next_prec;
    }
    Err(NumericsError::NoConvergence(format!("monic residual unresolved at {} bits", prec.bits())))
}
