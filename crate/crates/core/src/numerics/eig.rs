use super::complex::Complex;
use super::matrix::{vec_norm, Matrix};
use super::{NumericsError, Precision, Real};

/// Eigen-decomposition `M = U diag(values) U^*` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen<R> {
    /// Ascending.
    pub values: Vec<R>,
    /// Unitary; column `j` belongs to `values[j]`.
    pub vectors: Matrix<R>,
}

/// QL sweeps allowed per eigenvalue before giving up.
const QL_ITERATIONS_PER_VALUE: usize = 64;

/// Hermitian eigensolver: Householder tridiagonalization followed by
/// implicit QL with Wilkinson-type shifts.
pub fn eig_hermitian<R: Real>(m: &Matrix<R>) -> Result<HermitianEigen<R>, NumericsError> {
    let (values, vectors) = solve(m, true)?;
    Ok(HermitianEigen { values, vectors: vectors.expect("vectors requested") })
}

/// Eigenvalues only (ascending); skips all vector accumulation.
pub fn eigvals_hermitian<R: Real>(m: &Matrix<R>) -> Result<Vec<R>, NumericsError> {
    Ok(solve(m, false)?.0)
}

fn solve<R: Real>(m: &Matrix<R>, want_vectors: bool) -> Result<(Vec<R>, Option<Matrix<R>>), NumericsError> {
    if !m.is_square() {
        return Err(NumericsError::DimensionMismatch(format!("eig of {}x{}", m.rows(), m.cols())));
    }
    if !m.is_hermitian() {
        return Err(NumericsError::NotHermitian);
    }
    let prec = m.precision();
    let n = m.rows();
    if n == 0 {
        return Ok((Vec::new(), want_vectors.then(|| Matrix::zeros(0, 0, prec))));
    }
    let (d, e, q) = tridiagonalize(&m.hermitize(), want_vectors);
    let mut z = want_vectors.then(|| real_identity::<R>(n, prec));
    let mut d = d;
    let mut e = e;
    tql(&mut d, &mut e, z.as_mut(), prec)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
    let values: Vec<R> = order.iter().map(|&i| d[i].clone()).collect();
    let vectors = match (q, z) {
        (Some(q), Some(z)) => Some(Matrix::from_fn(n, n, prec, |r, j| {
            let col = order[j];
            let mut acc = Complex::zero(prec);
            for l in 0..n {
                acc.real_mul_add_assign(&q[(r, l)], &z[l][col]);
            }
            acc
        })),
        _ => None,
    };
    Ok((values, vectors))
}

fn real_identity<R: Real>(n: usize, prec: Precision) -> Vec<Vec<R>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { R::one(prec) } else { R::zero(prec) }).collect())
        .collect()
}

/// Reduces Hermitian `a` to a real symmetric tridiagonal `(d, e)` with
/// `a = Q T Q^*`; `e[i]` couples `i` and `i + 1`, `e[n-1] = 0`.
fn tridiagonalize<R: Real>(a: &Matrix<R>, want_q: bool) -> (Vec<R>, Vec<R>, Option<Matrix<R>>) {
    let prec = a.precision();
    let n = a.rows();
    let mut a = a.clone();
    let mut q = want_q.then(|| Matrix::identity(n, prec));
    let two = R::from_f64(2.0, prec);
    let half = R::from_f64(0.5, prec);

    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x: Vec<Complex<R>> = (0..m).map(|i| a[(k + 1 + i, k)].clone()).collect();
        let xnorm = vec_norm(&x, prec);
        if xnorm.is_zero() {
            continue;
        }
        let ph = x[0].phase();
        let alpha = -ph.scale(&xnorm);
        let mut v = x;
        v[0] = &v[0] - &alpha;
        let mut vv = R::zero(prec);
        for z in &v {
            vv += z.norm_sqr();
        }
        if vv.is_zero() {
            continue;
        }
        let tau = two.clone() / &vv;

        // p = tau * A_sub v; q = p - (tau v^* p / 2) v
        let mut p = vec![Complex::zero(prec); m];
        for (i, pi) in p.iter_mut().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                pi.mul_add_assign(&a[(k + 1 + i, k + 1 + j)], vj);
            }
            *pi = pi.scale(&tau);
        }
        let mut vp = Complex::zero(prec);
        for (vi, pi) in v.iter().zip(&p) {
            vp.mul_conj_add_assign(pi, vi);
        }
        let kk = vp.scale(&(tau.clone() * &half));
        let w: Vec<Complex<R>> = v.iter().zip(&p).map(|(vi, pi)| pi - &(&kk * vi)).collect();

        let neg_v: Vec<Complex<R>> = v.iter().map(|x| -x.clone()).collect();
        let neg_w: Vec<Complex<R>> = w.iter().map(|x| -x.clone()).collect();
        for i in 0..m {
            for j in 0..m {
                let entry = &mut a[(k + 1 + i, k + 1 + j)];
                entry.mul_conj_add_assign(&neg_v[i], &w[j]);
                entry.mul_conj_add_assign(&neg_w[i], &v[j]);
            }
        }
        a[(k + 1, k)] = alpha.clone();
        a[(k, k + 1)] = alpha.conj();
        for i in 1..m {
            a[(k + 1 + i, k)] = Complex::zero(prec);
            a[(k, k + 1 + i)] = Complex::zero(prec);
        }

        if let Some(q) = q.as_mut() {
            for r in 0..n {
                let mut s = Complex::zero(prec);
                for (j, vj) in v.iter().enumerate() {
                    s.mul_add_assign(&q[(r, k + 1 + j)], vj);
                }
                let s = -s.scale(&tau);
                for (j, vj) in v.iter().enumerate() {
                    q[(r, k + 1 + j)].mul_conj_add_assign(&s, vj);
                }
            }
        }
    }

    // Phase-normalize the subdiagonal to real nonnegative values.
    let mut d: Vec<R> = (0..n).map(|i| a[(i, i)].re.clone()).collect();
    let mut e = vec![R::zero(prec); n];
    let mut phase = Complex::one(prec);
    for k in 0..n.saturating_sub(1) {
        let off = a[(k + 1, k)].clone();
        e[k] = off.abs();
        phase = &phase * &off.phase();
        if let Some(q) = q.as_mut() {
            for r in 0..n {
                let scaled = &q[(r, k + 1)] * &phase;
                q[(r, k + 1)] = scaled;
            }
        }
    }
    for x in d.iter_mut() {
        if !x.is_finite() {
            *x = R::zero(prec);
        }
    }
    (d, e, q)
}

fn sign_of<R: Real>(magnitude: &R, sign: &R) -> R {
    if sign.is_sign_negative() {
        -magnitude.abs()
    } else {
        magnitude.abs()
    }
}

/// Implicit QL on a symmetric tridiagonal matrix; rotations are accumulated
/// into the columns of `z` when present.
fn tql<R: Real>(d: &mut [R], e: &mut [R], mut z: Option<&mut Vec<Vec<R>>>, prec: Precision) -> Result<(), NumericsError> {
    let n = d.len();
    let eps = R::pow2(-(prec.bits() as i64), prec);
    let one = R::one(prec);
    let two = R::from_f64(2.0, prec);
    for l in 0..n {
        let mut iter = 0usize;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps.clone() * &dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_ITERATIONS_PER_VALUE {
                return Err(NumericsError::NoConvergence("tridiagonal QL".into()));
            }
            let mut g = (d[l + 1].clone() - &d[l]) / (two.clone() * &e[l]);
            let mut r = g.hypot(&one);
            g = d[m].clone() - &d[l] + e[l].clone() / (g.clone() + sign_of(&r, &g));
            let mut s = one.clone();
            let mut c = one.clone();
            let mut p = R::zero(prec);
            let mut early = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s.clone() * &e[i];
                let b = c.clone() * &e[i];
                r = f.hypot(&g);
                e[i + 1] = r.clone();
                if r.is_zero() {
                    d[i + 1] -= &p;
                    e[m] = R::zero(prec);
                    early = true;
                    break;
                }
                s = f / &r;
                c = g.clone() / &r;
                g = d[i + 1].clone() - &p;
                r = (d[i].clone() - &g) * &s + two.clone() * &c * &b;
                p = s.clone() * &r;
                d[i + 1] = g.clone() + &p;
                g = c.clone() * &r - &b;
                if let Some(z) = z.as_deref_mut() {
                    for row in z.iter_mut() {
                        let f = row[i + 1].clone();
                        let zi = row[i].clone();
                        row[i + 1] = s.clone() * &zi + c.clone() * &f;
                        row[i] = c.clone() * &zi - s.clone() * &f;
                    }
                }
            }
            if early {
                continue;
            }
            d[l] -= &p;
            e[l] = g;
            e[m] = R::zero(prec);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::complex::C64;
    use crate::numerics::{BigFloat, CMatrix};

    fn reconstruct<R: Real>(e: &HermitianEigen<R>) -> Matrix<R> {
        let prec = e.vectors.precision();
        let d: Vec<Complex<R>> = e.values.iter().cloned().map(Complex::from_real).collect();
        e.vectors
            .mul(&Matrix::from_diag(&d, prec))
            .unwrap()
            .mul_adjoint(&e.vectors)
            .unwrap()
    }

    fn hermitian_sample(n: usize) -> CMatrix {
        let mut m = CMatrix::from_fn(n, n, Precision::DOUBLE, |i, j| {
            C64::c(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i * 11 + j) % 3) as f64 - 1.0)
        });
        m = m.hermitize();
        m
    }

    #[test]
    fn two_by_two_symmetric() {
        let m = CMatrix::from_real(2, 2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let e = eig_hermitian(&m).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15);
        assert!((e.values[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_and_identity() {
        let e = eig_hermitian(&CMatrix::identity(3, Precision::DOUBLE)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        let e = eig_hermitian(&CMatrix::diag_real(&[2.0, 0.5])).unwrap();
        assert_eq!(e.values, vec![0.5, 2.0]);
    }

    #[test]
    fn complex_hermitian_reconstructs() {
        let m = hermitian_sample(7);
        let e = eig_hermitian(&m).unwrap();
        let r = reconstruct(&e);
        assert!(r.sub(&m).unwrap().max_abs() < 1e-13);
        let u = &e.vectors;
        let gram = u.adjoint_mul(u).unwrap();
        assert!(gram.sub(&CMatrix::identity(7, Precision::DOUBLE)).unwrap().max_abs() < 1e-13);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn extended_precision_reconstructs() {
        let prec = Precision::new(256).unwrap();
        let m: Matrix<BigFloat> = hermitian_sample(6).convert(prec);
        let e = eig_hermitian(&m).unwrap();
        let r = reconstruct(&e);
        assert!(r.sub(&m).unwrap().max_abs().log2_abs() < -240.0);
        let vals = eigvals_hermitian(&m).unwrap();
        for (a, b) in vals.iter().zip(&e.values) {
            assert!((a.clone() - b).abs().log2_abs() < -240.0);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(eig_hermitian(&m), Err(NumericsError::NotHermitian)));
    }
}
