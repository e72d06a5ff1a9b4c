use super::complex::Complex;
use super::matrix::{vec_norm, Matrix};
use super::{NumericsError, Precision, Real};

/// Eigenpairs of a general square matrix, `M X = X diag(values)`.
#[derive(Clone, Debug)]
pub struct GeneralEigen<R> {
    pub values: Vec<Complex<R>>,
    /// Unit-norm eigenvector columns.
    pub vectors: Matrix<R>,
}

const QR_ITERATIONS_PER_VALUE: usize = 60;

/// Complex Schur form by Hessenberg reduction and shifted QR, then
/// eigenvectors by back substitution on the triangular factor.
///
/// Defective or nearly defective input yields nearly parallel eigenvectors
/// rather than an error; callers judge that through the condition number.
pub fn eig_general<R: Real>(m: &Matrix<R>) -> Result<GeneralEigen<R>, NumericsError> {
    if !m.is_square() {
        return Err(NumericsError::DimensionMismatch(format!("eig of {}x{}", m.rows(), m.cols())));
    }
    let prec = m.precision();
    let n = m.rows();
    let (mut t, mut z) = hessenberg(m);
    schur(&mut t, &mut z)?;

    let values: Vec<Complex<R>> = (0..n).map(|i| t[(i, i)].clone()).collect();
    let tnorm = t.max_abs().max_of(R::pow2(-(prec.bits() as i64), prec));
    let small = tnorm * R::pow2(-(prec.bits() as i64), prec);

    let mut y = Matrix::zeros(n, n, prec);
    for k in 0..n {
        let mut col = vec![Complex::zero(prec); n];
        col[k] = Complex::one(prec);
        for i in (0..k).rev() {
            let mut acc = Complex::zero(prec);
            for (j, cj) in col.iter().enumerate().take(k + 1).skip(i + 1) {
                acc.mul_add_assign(&t[(i, j)], cj);
            }
            let mut pivot = &t[(i, i)] - &values[k];
            if pivot.abs() < small {
                pivot = Complex::from_real(small.clone());
            }
            col[i] = -(&acc / &pivot);
        }
        y.set_column(k, &col);
    }
    let mut x = z.mul(&y)?;
    for j in 0..n {
        let col = x.column(j);
        let norm = vec_norm(&col, prec);
        if !norm.is_zero() {
            let inv = R::one(prec) / norm;
            let scaled: Vec<Complex<R>> = col.iter().map(|c| c.scale(&inv)).collect();
            x.set_column(j, &scaled);
        }
    }
    Ok(GeneralEigen { values, vectors: x })
}

/// Householder reduction `M = Z H Z^*` with `H` upper Hessenberg.
fn hessenberg<R: Real>(m: &Matrix<R>) -> (Matrix<R>, Matrix<R>) {
    let prec = m.precision();
    let n = m.rows();
    let mut h = m.clone();
    let mut z = Matrix::identity(n, prec);
    let two = R::from_f64(2.0, prec);
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let x: Vec<Complex<R>> = (0..len).map(|i| h[(k + 1 + i, k)].clone()).collect();
        let xnorm = vec_norm(&x, prec);
        if xnorm.is_zero() {
            continue;
        }
        let alpha = -x[0].phase().scale(&xnorm);
        let mut v = x;
        v[0] = &v[0] - &alpha;
        let mut vv = R::zero(prec);
        for c in &v {
            vv += c.norm_sqr();
        }
        if vv.is_zero() {
            continue;
        }
        let tau = two.clone() / vv;
        // H <- (I - tau v v^*) H
        for j in 0..n {
            let mut s = Complex::zero(prec);
            for (i, vi) in v.iter().enumerate() {
                s.mul_conj_add_assign(&h[(k + 1 + i, j)], vi);
            }
            let s = -s.scale(&tau);
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, j)].mul_add_assign(vi, &s);
            }
        }
        // H <- H (I - tau v v^*), Z <- Z (I - tau v v^*)
        for target in [&mut h, &mut z] {
            for r in 0..n {
                let mut s = Complex::zero(prec);
                for (i, vi) in v.iter().enumerate() {
                    s.mul_add_assign(&target[(r, k + 1 + i)], vi);
                }
                let s = -s.scale(&tau);
                for (i, vi) in v.iter().enumerate() {
                    target[(r, k + 1 + i)].mul_conj_add_assign(&s, vi);
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex::zero(prec);
        }
    }
    (h, z)
}

/// Rotation `G = [[c, s], [-conj(s), c]]` with `G (x, y)^T = (r, 0)^T`.
fn givens<R: Real>(x: &Complex<R>, y: &Complex<R>, prec: Precision) -> (R, Complex<R>) {
    let r = x.abs().hypot(&y.abs());
    if r.is_zero() {
        return (R::one(prec), Complex::zero(prec));
    }
    let c = x.abs() / &r;
    let s = (&x.phase() * &y.conj()).scale(&(R::one(prec) / r));
    (c, s)
}

/// Reduces Hessenberg `h` to upper triangular form in place, accumulating the
/// unitary factor into `z`.
fn schur<R: Real>(h: &mut Matrix<R>, z: &mut Matrix<R>) -> Result<(), NumericsError> {
    let prec = h.precision();
    let n = h.rows();
    if n == 0 {
        return Ok(());
    }
    let eps = R::pow2(-(prec.bits() as i64), prec);
    let hnorm = h.max_abs();
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        // Deflate negligible subdiagonals inside the active window.
        let mut lo = hi;
        while lo > 0 {
            let scale = h[(lo, lo)].abs() + h[(lo - 1, lo - 1)].abs();
            let scale = if scale.is_zero() { hnorm.clone() } else { scale };
            if h[(lo, lo - 1)].abs() <= eps.clone() * &scale {
                h[(lo, lo - 1)] = Complex::zero(prec);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > QR_ITERATIONS_PER_VALUE * n {
            return Err(NumericsError::NoConvergence("complex Schur QR".into()));
        }

        let mu = if iter % 11 == 10 {
            // Exceptional shift to break cycles.
            let kick = h[(hi, hi - 1)].abs() * R::from_f64(0.75, prec);
            &h[(hi, hi)] + &Complex::from_real(kick)
        } else {
            wilkinson(h, hi)
        };

        let mut rotations = Vec::with_capacity(hi - lo);
        for i in lo..=hi {
            h[(i, i)] = &h[(i, i)] - &mu;
        }
        for k in lo..hi {
            let (c, s) = givens(&h[(k, k)], &h[(k + 1, k)], prec);
            let s_conj = s.conj();
            for j in k..n {
                let a = h[(k, j)].clone();
                let b = h[(k + 1, j)].clone();
                let mut top = a.scale(&c);
                top.mul_add_assign(&s, &b);
                let mut bottom = b.scale(&c);
                bottom.mul_sub_assign(&s_conj, &a);
                h[(k, j)] = top;
                h[(k + 1, j)] = bottom;
            }
            h[(k + 1, k)] = Complex::zero(prec);
            rotations.push((c, s));
        }
        for (offset, (c, s)) in rotations.iter().enumerate() {
            let k = lo + offset;
            let s_conj = s.conj();
            let neg_s = -s.clone();
            let last = (k + 2).min(hi);
            apply_right(h, k, c, &s_conj, &neg_s, 0..=last);
            apply_right(z, k, c, &s_conj, &neg_s, 0..=n - 1);
        }
        for i in lo..=hi {
            h[(i, i)] = &h[(i, i)] + &mu;
        }
    }
    Ok(())
}

/// Columns `k, k+1` of rows in `range` times `G^*`.
fn apply_right<R: Real>(
    m: &mut Matrix<R>,
    k: usize,
    c: &R,
    s_conj: &Complex<R>,
    neg_s: &Complex<R>,
    range: std::ops::RangeInclusive<usize>,
) {
    for r in range {
        let a = m[(r, k)].clone();
        let b = m[(r, k + 1)].clone();
        let mut left = a.scale(c);
        left.mul_add_assign(&b, s_conj);
        let mut right = b.scale(c);
        right.mul_add_assign(&a, neg_s);
        m[(r, k)] = left;
        m[(r, k + 1)] = right;
    }
}

/// Eigenvalue of the trailing 2x2 block closest to its last diagonal entry.
fn wilkinson<R: Real>(h: &Matrix<R>, hi: usize) -> Complex<R> {
    let prec = h.precision();
    let a = &h[(hi - 1, hi - 1)];
    let b = &h[(hi - 1, hi)];
    let c = &h[(hi, hi - 1)];
    let d = &h[(hi, hi)];
    let half = R::from_f64(0.5, prec);
    let mean = (a + d).scale(&half);
    let diff = (a - d).scale(&half);
    let disc = (&(&diff * &diff) + &(b * c)).sqrt();
    let l1 = &mean + &disc;
    let l2 = &mean - &disc;
    if (&l1 - d).abs() <= (&l2 - d).abs() {
        l1
    } else {
        l2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::complex::C64;
    use crate::numerics::{BigFloat, CMatrix};

    fn check_pairs<R: Real>(m: &Matrix<R>, e: &GeneralEigen<R>, tol: f64) {
        let n = m.rows();
        for j in 0..n {
            let x = e.vectors.column(j);
            let mx = m.matvec(&x).unwrap();
            let lx: Vec<Complex<R>> = x.iter().map(|c| c * &e.values[j]).collect();
            let diff: Vec<Complex<R>> = mx.iter().zip(&lx).map(|(a, b)| a - b).collect();
            let res = vec_norm(&diff, m.precision()).to_f64();
            assert!(res < tol, "pair {j}: residual {res}");
        }
    }

    #[test]
    fn nonnormal_real_matrix() {
        let m = CMatrix::from_real(3, 3, &[1.0, 2.0, 3.0, 0.5, -1.0, 4.0, 0.0, 2.0, 0.25]).unwrap();
        let e = eig_general(&m).unwrap();
        check_pairs(&m, &e, 1e-12);
        let trace: C64 = e.values.iter().fold(C64::ZERO, |acc, v| &acc + v);
        assert!((trace.re - 0.25).abs() < 1e-12 && trace.im.abs() < 1e-12);
    }

    #[test]
    fn rotation_has_complex_spectrum() {
        let m = CMatrix::from_real(2, 2, &[0.0, -1.0, 1.0, 0.0]).unwrap();
        let e = eig_general(&m).unwrap();
        let mut ims: Vec<f64> = e.values.iter().map(|v| v.im).collect();
        ims.sort_by(f64::total_cmp);
        assert!((ims[0] + 1.0).abs() < 1e-14 && (ims[1] - 1.0).abs() < 1e-14);
        check_pairs(&m, &e, 1e-13);
    }

    #[test]
    fn larger_complex_matrix_extended_precision() {
        let prec = Precision::new(192).unwrap();
        let m: Matrix<BigFloat> = CMatrix::from_fn(8, 8, Precision::DOUBLE, |i, j| {
            C64::c(((i * 3 + j * 5) % 7) as f64 - 3.0, ((2 * i + j) % 5) as f64 - 2.0)
        })
        .convert(prec);
        let e = eig_general(&m).unwrap();
        check_pairs(&m, &e, 1e-45);
    }

    #[test]
    fn jordan_block_gives_parallel_vectors() {
        let m = CMatrix::lower_shift(2);
        let e = eig_general(&m).unwrap();
        let a = e.vectors.column(0);
        let b = e.vectors.column(1);
        let overlap = (&a[0] * &b[0].conj()).abs() + (&a[1] * &b[1].conj()).abs();
        assert!(overlap > 1.0 - 1e-10);
    }
}
