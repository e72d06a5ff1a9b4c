use std::ops::{Index, IndexMut};

use super::complex::{Complex, C64};
use super::{NumericsError, Precision, Real, Tolerances, TOLERANCES};

/// Dense row-major complex matrix; every entry carries the same precision.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<R> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<R>>,
    prec: Precision,
}

/// Binary64 matrix, the storage format of systems and regions.
pub type CMatrix = Matrix<f64>;

impl<R: Real> Matrix<R> {
    pub fn zeros(rows: usize, cols: usize, prec: Precision) -> Self {
        Matrix { rows, cols, data: vec![Complex::zero(prec); rows * cols], prec }
    }

    pub fn identity(n: usize, prec: Precision) -> Self {
        let mut m = Self::zeros(n, n, prec);
        for i in 0..n {
            m[(i, i)] = Complex::one(prec);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, prec: Precision, mut f: impl FnMut(usize, usize) -> Complex<R>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data, prec }
    }

    pub fn from_diag(d: &[Complex<R>], prec: Precision) -> Self {
        let mut m = Self::zeros(d.len(), d.len(), prec);
        for (i, x) in d.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }

    pub fn from_columns(cols: &[Vec<Complex<R>>], rows: usize, prec: Precision) -> Self {
        Self::from_fn(rows, cols.len(), prec, |i, j| cols[j][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn data(&self) -> &[Complex<R>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<R>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex<R>> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[Complex<R>]) {
        for (i, x) in v.iter().enumerate() {
            self[(i, j)] = x.clone();
        }
    }

    pub fn diagonal(&self) -> Vec<Complex<R>> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).collect()
    }

    /// Columns `start..end`.
    pub fn columns(&self, start: usize, end: usize) -> Self {
        Self::from_fn(self.rows, end - start, self.prec, |i, j| self[(i, start + j)].clone())
    }

    /// Horizontal concatenation `[self, other]`.
    pub fn hcat(&self, other: &Self) -> Result<Self, NumericsError> {
        if self.rows != other.rows {
            return Err(NumericsError::DimensionMismatch(format!(
                "hcat of {} and {} rows",
                self.rows, other.rows
            )));
        }
        Ok(Self::from_fn(self.rows, self.cols + other.cols, self.prec, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                other[(i, j - self.cols)].clone()
            }
        }))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, self.prec, |i, j| self[(j, i)].conj())
    }

    fn check_product(&self, inner_self: usize, inner_other: usize) -> Result<(), NumericsError> {
        if inner_self != inner_other {
            Err(NumericsError::DimensionMismatch(format!(
                "product inner dimensions {inner_self} and {inner_other}"
            )))
        } else {
            Ok(())
        }
    }

    /// `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self, NumericsError> {
        self.check_product(self.cols, other.rows)?;
        let mut out = Self::zeros(self.rows, other.cols, self.prec);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = &self.data[i * self.cols + l];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j].mul_add_assign(a, &other.data[l * other.cols + j]);
                }
            }
        }
        Ok(out)
    }

    /// `self * other^*` without forming the adjoint.
    pub fn mul_adjoint(&self, other: &Self) -> Result<Self, NumericsError> {
        self.check_product(self.cols, other.cols)?;
        let mut out = Self::zeros(self.rows, other.rows, self.prec);
        for i in 0..self.rows {
            for j in 0..other.rows {
                let acc = &mut out.data[i * other.rows + j];
                for l in 0..self.cols {
                    acc.mul_conj_add_assign(&self.data[i * self.cols + l], &other.data[j * other.cols + l]);
                }
            }
        }
        Ok(out)
    }

    /// `self^* * other` without forming the adjoint.
    pub fn adjoint_mul(&self, other: &Self) -> Result<Self, NumericsError> {
        self.check_product(self.rows, other.rows)?;
        let mut out = Self::zeros(self.cols, other.cols, self.prec);
        for l in 0..self.rows {
            for i in 0..self.cols {
                let a = self.data[l * self.cols + i].conj();
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j].mul_add_assign(&a, &other.data[l * other.cols + j]);
                }
            }
        }
        Ok(out)
    }

    /// Adds `blk * blk^*` into the Hermitian matrix `self`, touching the upper
    /// triangle only and mirroring afterwards.
    pub fn add_gram(&mut self, blk: &Self) -> Result<(), NumericsError> {
        if self.rows != blk.rows || !self.is_square() {
            return Err(NumericsError::DimensionMismatch("gram update".into()));
        }
        let n = self.rows;
        for i in 0..n {
            for j in i..n {
                let acc = &mut self.data[i * n + j];
                for l in 0..blk.cols {
                    acc.mul_conj_add_assign(&blk.data[i * blk.cols + l], &blk.data[j * blk.cols + l]);
                }
            }
        }
        for i in 0..n {
            let d = &mut self.data[i * n + i];
            d.im = R::zero(self.prec);
            for j in 0..i {
                self.data[i * n + j] = self.data[j * n + i].conj();
            }
        }
        Ok(())
    }

    pub fn matvec(&self, v: &[Complex<R>]) -> Result<Vec<Complex<R>>, NumericsError> {
        self.check_product(self.cols, v.len())?;
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = Complex::zero(self.prec);
                for (a, x) in self.row(i).iter().zip(v) {
                    acc.mul_add_assign(a, x);
                }
                acc
            })
            .collect())
    }

    /// `self^* v`.
    pub fn adjoint_matvec(&self, v: &[Complex<R>]) -> Result<Vec<Complex<R>>, NumericsError> {
        self.check_product(self.rows, v.len())?;
        let mut out = vec![Complex::zero(self.prec); self.cols];
        for (i, x) in v.iter().enumerate() {
            for (j, o) in out.iter_mut().enumerate() {
                o.mul_conj_add_assign(x, &self.data[i * self.cols + j]);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self, NumericsError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, NumericsError> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Complex<R>, &Complex<R>) -> Complex<R>) -> Result<Self, NumericsError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(NumericsError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data, prec: self.prec })
    }

    pub fn scale(&self, k: &R) -> Self {
        let data = self.data.iter().map(|a| a.scale(k)).collect();
        Matrix { rows: self.rows, cols: self.cols, data, prec: self.prec }
    }

    pub fn fro_norm(&self) -> R {
        vec_norm(&self.data, self.prec)
    }

    pub fn max_abs(&self) -> R {
        self.data
            .iter()
            .map(Complex::abs)
            .fold(R::zero(self.prec), R::max_of)
    }

    pub fn trace(&self) -> Complex<R> {
        let mut acc = Complex::zero(self.prec);
        for i in 0..self.rows.min(self.cols) {
            acc += &self[(i, i)];
        }
        acc
    }

    /// `max|M - M^*|`.
    pub fn hermitian_defect(&self) -> R {
        let mut worst = R::zero(self.prec);
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (&self[(i, j)] - &self[(j, i)].conj()).abs();
                worst = worst.max_of(d);
            }
        }
        worst
    }

    /// Hermitian within `2^(c-p) max|M|` with `c` from [`TOLERANCES`].
    pub fn is_hermitian(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let tol = self.max_abs() * Tolerances::factor::<R>(TOLERANCES.hermitian, self.prec);
        self.hermitian_defect() <= tol
    }

    /// `(M + M^*) / 2`.
    pub fn hermitize(&self) -> Self {
        let half = R::from_f64(0.5, self.prec);
        Self::from_fn(self.rows, self.cols, self.prec, |i, j| {
            (&self[(i, j)] + &self[(j, i)].conj()).scale(&half)
        })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(Complex::is_finite)
    }

    pub fn convert<S: Real>(&self, prec: Precision) -> Matrix<S> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.convert(prec)).collect(),
            prec,
        }
    }

    pub fn to_c64(&self) -> CMatrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(Complex::to_c64).collect(),
            prec: Precision::DOUBLE,
        }
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }
}

impl CMatrix {
    /// Builds a binary64 matrix from row-major entries.
    pub fn from_rows(rows: usize, cols: usize, entries: &[C64]) -> Result<Self, NumericsError> {
        if entries.len() != rows * cols {
            return Err(NumericsError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(Matrix { rows, cols, data: entries.to_vec(), prec: Precision::DOUBLE })
    }

    /// Real row-major entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self, NumericsError> {
        let c: Vec<C64> = entries.iter().map(|&x| C64::re_only(x)).collect();
        Self::from_rows(rows, cols, &c)
    }

    pub fn diag_real(d: &[f64]) -> Self {
        let c: Vec<C64> = d.iter().map(|&x| C64::re_only(x)).collect();
        Self::from_diag(&c, Precision::DOUBLE)
    }

    /// Lower shift: ones on the first subdiagonal.
    pub fn lower_shift(n: usize) -> Self {
        Self::from_fn(n, n, Precision::DOUBLE, |i, j| if i == j + 1 { C64::ONE } else { C64::ZERO })
    }
}

impl<R> Index<(usize, usize)> for Matrix<R> {
    type Output = Complex<R>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<R> {
        &self.data[i * self.cols + j]
    }
}

impl<R> IndexMut<(usize, usize)> for Matrix<R> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<R> {
        &mut self.data[i * self.cols + j]
    }
}

/// Euclidean norm, scaled to avoid overflow.
pub fn vec_norm<R: Real>(v: &[Complex<R>], prec: Precision) -> R {
    let scale = v.iter().map(Complex::abs).fold(R::zero(prec), R::max_of);
    if scale.is_zero() || !scale.is_finite() {
        return scale;
    }
    let mut acc = R::zero(prec);
    for z in v {
        let re = z.re.clone() / &scale;
        let im = z.im.clone() / &scale;
        acc.mul_add_assign(&re, &re);
        acc.mul_add_assign(&im, &im);
    }
    acc.sqrt() * scale
}

/// `sum conj(a_i) b_i`.
pub fn dot<R: Real>(a: &[Complex<R>], b: &[Complex<R>], prec: Precision) -> Complex<R> {
    let mut acc = Complex::zero(prec);
    for (x, y) in a.iter().zip(b) {
        acc.mul_conj_add_assign(y, x);
    }
    acc
}

pub fn vec_sub<R: Real>(a: &[Complex<R>], b: &[Complex<R>]) -> Vec<Complex<R>> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_convert<R: Real, S: Real>(v: &[Complex<R>], prec: Precision) -> Vec<Complex<S>> {
    v.iter().map(|z| z.convert(prec)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::BigFloat;

    fn sample() -> CMatrix {
        CMatrix::from_rows(
            2,
            3,
            &[C64::c(1.0, 1.0), C64::c(2.0, 0.0), C64::c(0.0, -1.0), C64::c(-1.0, 0.5), C64::c(0.0, 0.0), C64::c(3.0, 2.0)],
        )
        .unwrap()
    }

    #[test]
    fn adjoint_products_agree_with_explicit_adjoint() {
        let a = sample();
        let b = sample();
        let direct = a.mul(&b.adjoint()).unwrap();
        let fused = a.mul_adjoint(&b).unwrap();
        assert!(direct.sub(&fused).unwrap().max_abs() < 1e-14);
        let left = a.adjoint().mul(&b).unwrap();
        let fused_left = a.adjoint_mul(&b).unwrap();
        assert!(left.sub(&fused_left).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn gram_update_is_hermitian() {
        let a = sample();
        let mut w = CMatrix::zeros(2, 2, Precision::DOUBLE);
        w.add_gram(&a).unwrap();
        let expected = a.mul_adjoint(&a).unwrap();
        assert!(w.sub(&expected).unwrap().max_abs() < 1e-14);
        assert!(w.is_hermitian());
        assert_eq!(w.hermitian_defect(), 0.0);
    }

    #[test]
    fn conversion_round_trip() {
        let a = sample();
        let big: Matrix<BigFloat> = a.convert(Precision::new(256).unwrap());
        assert_eq!(big.to_c64(), a);
        assert!((big.fro_norm().to_f64() - a.fro_norm()).abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = sample();
        assert!(matches!(a.mul(&a), Err(NumericsError::DimensionMismatch(_))));
        assert!(a.matvec(&[C64::ONE]).is_err());
    }

    #[test]
    fn norm_survives_huge_entries() {
        let v = [C64::c(3e300, 0.0), C64::c(0.0, 4e300)];
        assert!((vec_norm(&v, Precision::DOUBLE) - 5e300).abs() < 1e286);
    }
}
