use super::complex::Complex;
use super::matrix::Matrix;
use super::{NumericsError, Real};

/// LU factorization with partial pivoting, `P M = L U`.
#[derive(Clone, Debug)]
pub struct Lu<R> {
    lu: Matrix<R>,
    perm: Vec<usize>,
}

impl<R: Real> Lu<R> {
    pub fn new(m: &Matrix<R>) -> Result<Self, NumericsError> {
        if !m.is_square() {
            return Err(NumericsError::DimensionMismatch(format!("LU of {}x{}", m.rows(), m.cols())));
        }
        let n = m.rows();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let pivot = (k..n)
                .max_by(|&a, &b| {
                    lu[(a, k)]
                        .abs()
                        .partial_cmp(&lu[(b, k)].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .expect("non-empty range");
            if lu[(pivot, k)].is_zero() {
                return Err(NumericsError::Singular);
            }
            lu.swap_rows(k, pivot);
            perm.swap(k, pivot);
            let diag = lu[(k, k)].clone();
            for i in k + 1..n {
                let factor = &lu[(i, k)] / &diag;
                for j in k + 1..n {
                    let ukj = lu[(k, j)].clone();
                    lu[(i, j)].mul_sub_assign(&factor, &ukj);
                }
                lu[(i, k)] = factor;
            }
        }
        Ok(Lu { lu, perm })
    }

    pub fn solve(&self, b: &[Complex<R>]) -> Result<Vec<Complex<R>>, NumericsError> {
        let n = self.lu.rows();
        if b.len() != n {
            return Err(NumericsError::DimensionMismatch(format!("rhs of length {} for n = {n}", b.len())));
        }
        let mut x: Vec<Complex<R>> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            for j in 0..i {
                let xj = x[j].clone();
                x[i].mul_sub_assign(&self.lu[(i, j)], &xj);
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let xj = x[j].clone();
                x[i].mul_sub_assign(&self.lu[(i, j)], &xj);
            }
            x[i] = &x[i] / &self.lu[(i, i)];
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Matrix<R>, NumericsError> {
        let n = self.lu.rows();
        let prec = self.lu.precision();
        let mut inv = Matrix::zeros(n, n, prec);
        for j in 0..n {
            let mut e = vec![Complex::zero(prec); n];
            e[j] = Complex::one(prec);
            inv.set_column(j, &self.solve(&e)?);
        }
        Ok(inv)
    }
}

pub fn inverse<R: Real>(m: &Matrix<R>) -> Result<Matrix<R>, NumericsError> {
    Lu::new(m)?.inverse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::complex::C64;
    use crate::numerics::{CMatrix, Precision};

    #[test]
    fn inverse_times_matrix_is_identity() {
        let m = CMatrix::from_rows(
            3,
            3,
            &[
                C64::c(0.0, 1.0), C64::c(2.0, 0.0), C64::c(1.0, 1.0),
                C64::c(1.0, 0.0), C64::c(0.0, 0.0), C64::c(3.0, -1.0),
                C64::c(2.0, 2.0), C64::c(1.0, 0.0), C64::c(0.0, 0.0),
            ],
        )
        .unwrap();
        let inv = inverse(&m).unwrap();
        let id = m.mul(&inv).unwrap();
        assert!(id.sub(&CMatrix::identity(3, Precision::DOUBLE)).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn singular_detected() {
        let m = CMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(matches!(inverse(&m), Err(NumericsError::Singular)));
    }
}
