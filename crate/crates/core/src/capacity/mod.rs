//! Logarithmic capacity: closed forms for catalog shapes and a Fekete-point
//! estimator that works on any region.

mod fekete;
mod region;

pub use fekete::{cap_estimate, cap_estimate_with, fekete_points, FeketeOptions, FeketeResult};
pub use region::{distinct, polygon_area, Boundary, Component, Piece, Region, RegionError, Shape, Transform};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum CapacityError {
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("need at least {needed} distinct points, region has {available}")]
    TooFewPoints { needed: usize, available: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Fekete,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub value: f64,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    /// Mean pairwise log-distance at the largest configuration.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    /// `(n, d_n)` pairs, nonincreasing in `d_n`.
    pub d_sequence: Vec<(usize, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_residual: Option<f64>,
    /// Max minus min of the extrapolated value over restarts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spread: Option<f64>,
    #[serde(default)]
    pub stalled: bool,
}

impl CapacityEstimate {
    pub fn closed_form(value: f64) -> Self {
        CapacityEstimate {
            value,
            method: Method::ClosedForm,
            n_points: None,
            energy: None,
            d_sequence: Vec::new(),
            fit_residual: None,
            spread: None,
            stalled: false,
        }
    }
}

/// Capacity of the regular `n`-gon with unit side.
pub fn ngon_constant(n: u32) -> f64 {
    let n = n as f64;
    gamma(1.0 / n) / (2f64.powf(1.0 + 2.0 / n) * PI.sqrt() * gamma(0.5 + 1.0 / n))
}

/// Exact capacity for catalog shapes; `None` for polygons, curves and clouds.
pub fn cap_closed_form(region: &Region) -> Option<f64> {
    let local = match &region.shape {
        Shape::Interval { a, b } => (b - a) / 4.0,
        Shape::TwoIntervals { a, b } => (b * b - a * a).sqrt() / 2.0,
        Shape::Ellipse { a, b } => (a + b) / 2.0,
        Shape::Disk { r, .. } => *r,
        Shape::HalfDisk { r } => 4.0 * r / 3f64.powf(1.5),
        Shape::Square { l } => ngon_constant(4) * l,
        Shape::EquilateralTriangle { l } => ngon_constant(3) * l,
        Shape::RegularNgon { n, h } => ngon_constant(*n) * h,
        Shape::Polygon { .. } | Shape::Curve { .. } | Shape::PointCloud { .. } => return None,
    };
    Some(local * region.transform.scale)
}

/// `D/2`, an upper bound on the capacity of any set of diameter `D`.
pub fn diameter_bound(region: &Region) -> f64 {
    region.diameter() / 2.0
}

/// `l/4` for a connected curve of length `l`; `None` for other shapes.
pub fn curve_length_bound(region: &Region) -> Option<f64> {
    match region.shape {
        Shape::Interval { .. } | Shape::Curve { .. } => region.curve_length().map(|l| l / 4.0),
        _ => None,
    }
}
