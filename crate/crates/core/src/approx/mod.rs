//! Polynomial approximation: minimax error of `z^l` on regions, best
//! approximation of `x^n` on `[-1,1]`, and the monic residual on Krylov bases.

mod chebyshev;
mod lawson;
mod monic;
mod remez;

pub use chebyshev::{cheb_truncation, cheb_truncation_at, phi_hoeffding, ChebyshevExpansion, Truncation};
pub use lawson::{err_region, err_region_with, RegionPoly, SOLVE_GRID, VALIDATION_FACTOR};
pub use monic::{monic_residual, monic_residual_auto};
pub use remez::phi_exact;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::capacity::Region;
use crate::numerics::{NumericsError, C64};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ApproxError {
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientBasis {
    Monomial,
    Chebyshev,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimaxResult {
    /// Degree of the approximated power (`l` or `n`).
    pub l: usize,
    /// Maximal degree of the approximant.
    pub m: usize,
    /// Sup error, measured on the validation grid.
    #[serde(with = "crate::text::f64_string")]
    pub error: f64,
    pub certified_gap: f64,
    pub grid_size: usize,
    /// Coefficients of the approximant, ascending, in `basis`.
    pub coefficients: Vec<C64>,
    pub basis: CoefficientBasis,
    /// Sup error on the solve grid.
    pub solve_error: f64,
    /// Lower bound on the minimax value over the solve grid.
    pub lower_bound: f64,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alternation_points: Option<usize>,
    /// The set has at most `l` points and the approximant interpolates.
    #[serde(default)]
    pub degenerate: bool,
    #[serde(skip)]
    pub fit: Option<RegionPoly>,
}

impl MinimaxResult {
    /// `z^l - p(z)` for region fits.
    pub fn residual(&self, z: C64) -> Option<C64> {
        self.fit.as_ref().map(|f| f.residual(z))
    }
}

/// `(l, Err(l, X)^(1/l))` for `l = 1..=l_max`.
pub fn err_capacity_trend(region: &Region, l_max: usize) -> Result<Vec<(usize, f64)>, ApproxError> {
    if l_max == 0 || l_max > 60 {
        return Err(ApproxError::InvalidArgument(format!("l_max must be in 1..=60, got {l_max}")));
    }
    (1..=l_max)
        .map(|l| err_region(l, region).map(|r| (l, r.error.powf(1.0 / l as f64))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trend_examples() {
        let disk = Region::disk(0.0, 0.0, 0.5);
        for (_, root) in err_capacity_trend(&disk, 8).unwrap() {
            assert!((root - 0.5).abs() < 1e-9);
        }
        let point = Region::point(C64::c(0.2, 0.0));
        assert!(err_capacity_trend(&point, 5).unwrap().iter().all(|&(_, r)| r == 0.0));
        assert!(err_capacity_trend(&disk, 61).is_err());
    }

    #[test]
    fn result_serializes_error_as_string() {
        let r = err_region(2, &Region::interval(-1.0, 1.0)).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert!(json["error"].is_string());
        assert!(json.get("fit").is_none());
    }
}
