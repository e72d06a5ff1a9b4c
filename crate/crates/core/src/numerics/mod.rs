//! Precision-generic scalars and dense complex linear algebra.

mod bigfloat;
mod complex;
mod eig;
mod lu;
mod matrix;
mod precision;
mod qr;
mod real;
mod schur;
mod svd;

pub use bigfloat::BigFloat;
pub use complex::{Complex, C64};
pub use eig::{eig_hermitian, eigvals_hermitian, HermitianEigen};
pub use lu::{inverse, Lu};
pub use matrix::{dot, vec_convert, vec_norm, vec_sub, CMatrix, Matrix};
pub use precision::{run_at, Precision, PrecisionTask, Tolerances, TOLERANCES};
pub use qr::qr_least_squares;
pub use real::Real;
pub use schur::{eig_general, GeneralEigen};
pub use svd::{cond2, least_squares, singular_values, svd, LeastSquares, Svd};

use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum NumericsError {
    #[error("matrix is not Hermitian within tolerance")]
    NotHermitian,
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("matrix is singular within working precision")]
    Singular,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid precision {0} (expected 53 or 64..=4096 bits)")]
    InvalidPrecision(u32),
    #[error("magnitude exceeds the range of the {0}-bit backend")]
    Overflow(u32),
}
