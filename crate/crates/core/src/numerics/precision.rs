use serde::{Deserialize, Serialize};

use super::{BigFloat, NumericsError, Real};

/// Mantissa width, in bits, of the arithmetic backend used for one computation.
///
/// `53` selects native binary64; anything in `64..=4096` selects the
/// MPFR-backed [`BigFloat`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Precision(u32);

impl Precision {
    pub const DOUBLE: Precision = Precision(53);
    pub const MIN_EXTENDED_BITS: u32 = 64;
    pub const MAX_BITS: u32 = 4096;
    pub const MAX: Precision = Precision(Self::MAX_BITS);

    pub fn new(bits: u32) -> Result<Self, NumericsError> {
        if bits == 53 || (Self::MIN_EXTENDED_BITS..=Self::MAX_BITS).contains(&bits) {
            Ok(Precision(bits))
        } else {
            Err(NumericsError::InvalidPrecision(bits))
        }
    }

    /// Smallest valid precision that is at least `bits` (clamped to the cap).
    pub fn at_least(bits: u32) -> Self {
        if bits <= 53 {
            Self::DOUBLE
        } else {
            Precision(bits.clamp(Self::MIN_EXTENDED_BITS, Self::MAX_BITS))
        }
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn is_double(self) -> bool {
        self.0 == 53
    }

    /// Next rung of the escalation ladder: the precision doubled, capped at 4096.
    pub fn escalate(self) -> Option<Precision> {
        if self.0 >= Self::MAX_BITS {
            None
        } else {
            Some(Precision((self.0 * 2).min(Self::MAX_BITS)))
        }
    }

    /// This precision followed by every escalation step up to the cap.
    pub fn ladder(self) -> impl Iterator<Item = Precision> {
        std::iter::successors(Some(self), |p| p.escalate())
    }

    /// First rung of the ladder starting at `self` with at least `bits` bits.
    pub fn ladder_at_least(self, bits: u32) -> Precision {
        self.ladder()
            .find(|p| p.0 >= bits)
            .unwrap_or(Self::MAX)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Self::DOUBLE
    }
}

impl TryFrom<u32> for Precision {
    type Error = NumericsError;
    fn try_from(bits: u32) -> Result<Self, Self::Error> {
        Precision::new(bits)
    }
}

impl From<Precision> for u32 {
    fn from(p: Precision) -> u32 {
        p.0
    }
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Exponents `c` of the `2^(c-p)` tolerance factors used throughout the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Tolerances {
    /// Hermitian tag: `max|M - M*| <= 2^(c-p) max|M|`.
    pub hermitian: i32,
    /// PSD tag: eigenvalues `>= -2^(c-p) lambda_max`.
    pub psd: i32,
    /// Reconstruction / residual checks of eigen, SVD and least squares.
    pub residual: i32,
    /// `cond2` reports `Singular` below `2^(c-p) sigma_max`.
    pub singular: i32,
    /// Escalation trigger: a minimum below `2^(c-p)` times the maximum is unresolved.
    pub escalation: i32,
    /// Pseudoinverse and rank cutoff.
    pub cutoff: i32,
    /// Diagonalization residual `||V A V^-1 - D|| <= 2^(c-p) ||A|| cond(V)`.
    pub diagonalization: i32,
}

pub const TOLERANCES: Tolerances = Tolerances {
    hermitian: 4,
    psd: 8,
    residual: 12,
    singular: 12,
    escalation: 20,
    cutoff: 16,
    diagonalization: 16,
};

impl Tolerances {
    /// `2^(c-p)` as a scalar of the working type (exact; no f64 underflow at large `p`).
    pub fn factor<R: Real>(c: i32, prec: Precision) -> R {
        R::pow2(c as i64 - prec.bits() as i64, prec)
    }
}

/// A computation that can run at any precision.
///
/// [`run_at`] dispatches to `f64` for 53 bits and to [`BigFloat`] otherwise.
pub trait PrecisionTask {
    type Output;
    type Error;
    fn run<R: Real>(&self, prec: Precision) -> Result<Self::Output, Self::Error>;
}

pub fn run_at<T: PrecisionTask>(task: &T, prec: Precision) -> Result<T::Output, T::Error> {
    if prec.is_double() {
        task.run::<f64>(prec)
    } else {
        task.run::<BigFloat>(prec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_doubles_to_cap() {
        let rungs: Vec<u32> = Precision::DOUBLE.ladder().map(|p| p.bits()).collect();
        assert_eq!(rungs, vec![53, 106, 212, 424, 848, 1696, 3392, 4096]);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(Precision::new(52).is_err());
        assert!(Precision::new(60).is_err());
        assert!(Precision::new(4097).is_err());
        assert!(Precision::new(64).is_ok());
    }

    #[test]
    fn tolerance_factor_is_exact_at_high_precision() {
        let p = Precision::MAX;
        let f: BigFloat = Tolerances::factor(TOLERANCES.escalation, p);
        assert_eq!(f.log2_abs(), (20 - 4096) as f64);
        let g: f64 = Tolerances::factor(TOLERANCES.residual, Precision::DOUBLE);
        assert_eq!(g, 2f64.powi(12 - 53));
    }
}
