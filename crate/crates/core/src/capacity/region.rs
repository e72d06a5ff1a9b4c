use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::C64;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum RegionError {
    #[error("invalid region: {0}")]
    Invalid(String),
    #[error("cannot parse region `{0}`: {1}")]
    Parse(String, String),
}

/// Shape in local coordinates, before the affine transform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// Real segment `[a, b]`.
    Interval { a: f64, b: f64 },
    /// `[-b, -a] ∪ [a, b]`.
    TwoIntervals { a: f64, b: f64 },
    /// Filled ellipse with semi-axes `a` (real direction) and `b`, centred at 0.
    Ellipse { a: f64, b: f64 },
    Disk { cx: f64, cy: f64, r: f64 },
    /// Upper half of the disk of radius `r` about 0.
    HalfDisk { r: f64 },
    /// Axis-aligned square of side `l` centred at 0.
    Square { l: f64 },
    /// Regular `n`-gon with side `h`, centred at 0, one side horizontal.
    RegularNgon { n: u32, h: f64 },
    EquilateralTriangle { l: f64 },
    /// Filled simple polygon.
    Polygon { vertices: Vec<C64> },
    /// Open polyline.
    Curve { points: Vec<C64> },
    PointCloud { points: Vec<C64> },
}

/// `z -> shift + scale * e^{i rotation} * z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub shift: C64,
    pub rotation: f64,
    pub scale: f64,
}

impl Default for Transform {
    fn default() -> Self {
        Transform { shift: C64::ZERO, rotation: 0.0, scale: 1.0 }
    }
}

impl Transform {
    pub fn multiplier(&self) -> C64 {
        C64::from_polar(self.scale, self.rotation)
    }

    pub fn apply(&self, z: C64) -> C64 {
        &self.shift + &(&self.multiplier() * &z)
    }

    pub fn invert(&self, z: C64) -> C64 {
        &(&z - &self.shift) / &self.multiplier()
    }

    /// `self` after `inner`.
    pub fn compose(&self, inner: &Transform) -> Transform {
        Transform {
            shift: self.apply(inner.shift),
            rotation: self.rotation + inner.rotation,
            scale: self.scale * inner.scale,
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Transform::default()
    }
}

/// A compact subset of the complex plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub shape: Shape,
    #[serde(default, skip_serializing_if = "Transform::is_identity")]
    pub transform: Transform,
}

/// One smooth piece of a boundary, in world coordinates.
#[derive(Clone, Debug)]
pub enum Piece {
    Segment { from: C64, to: C64 },
    /// `center + axis * (ra cos θ + i rb sin θ)` for `θ ∈ [t0, t1]`.
    Arc { center: C64, axis: C64, ra: f64, rb: f64, t0: f64, t1: f64, table: Vec<(f64, f64)> },
}

const ARC_TABLE_STEPS: usize = 2048;

impl Piece {
    fn arc(center: C64, axis: C64, ra: f64, rb: f64, t0: f64, t1: f64) -> Piece {
        let table = if (ra - rb).abs() <= 1e-14 * ra.max(rb) {
            Vec::new()
        } else {
            let scale = axis.abs();
            let speed = |t: f64| scale * (ra * ra * t.sin().powi(2) + rb * rb * t.cos().powi(2)).sqrt();
            let h = (t1 - t0) / ARC_TABLE_STEPS as f64;
            let mut acc = 0.0;
            let mut table = Vec::with_capacity(ARC_TABLE_STEPS + 1);
            table.push((t0, 0.0));
            for i in 0..ARC_TABLE_STEPS {
                let a = t0 + h * i as f64;
                acc += h / 6.0 * (speed(a) + 4.0 * speed(a + h / 2.0) + speed(a + h));
                table.push((a + h, acc));
            }
            table
        };
        Piece::Arc { center, axis, ra, rb, t0, t1, table }
    }

    pub fn length(&self) -> f64 {
        match self {
            Piece::Segment { from, to } => (to - from).abs(),
            Piece::Arc { axis, ra, t0, t1, table, .. } => match table.last() {
                Some((_, s)) => *s,
                None => axis.abs() * ra * (t1 - t0),
            },
        }
    }

    /// Point at arc-length fraction `u ∈ [0, 1]`.
    pub fn point(&self, u: f64) -> C64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            Piece::Segment { from, to } => C64::c(from.re + u * (to.re - from.re), from.im + u * (to.im - from.im)),
            Piece::Arc { center, axis, ra, rb, t0, t1, table } => {
                let theta = if table.is_empty() {
                    t0 + u * (t1 - t0)
                } else {
                    let target = u * table.last().map(|x| x.1).unwrap_or(0.0);
                    let idx = table.partition_point(|&(_, s)| s < target).clamp(1, table.len() - 1);
                    let (ta, sa) = table[idx - 1];
                    let (tb, sb) = table[idx];
                    if sb > sa {
                        ta + (tb - ta) * (target - sa) / (sb - sa)
                    } else {
                        ta
                    }
                };
                let local = C64::c(ra * theta.cos(), rb * theta.sin());
                center + &(axis * &local)
            }
        }
    }

    fn transformed(&self, t: &Transform) -> Piece {
        match self {
            Piece::Segment { from, to } => Piece::Segment { from: t.apply(*from), to: t.apply(*to) },
            Piece::Arc { center, axis, ra, rb, t0, t1, .. } => {
                Piece::arc(t.apply(*center), &t.multiplier() * axis, *ra, *rb, *t0, *t1)
            }
        }
    }
}

/// Connected chain of pieces.
#[derive(Clone, Debug)]
pub struct Component {
    pub pieces: Vec<Piece>,
    pub closed: bool,
    offsets: Vec<f64>,
    length: f64,
}

impl Component {
    fn new(pieces: Vec<Piece>, closed: bool) -> Self {
        let mut offsets = Vec::with_capacity(pieces.len());
        let mut length = 0.0;
        for p in &pieces {
            offsets.push(length);
            length += p.length();
        }
        Component { pieces, closed, offsets, length }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Point at arc length `s ∈ [0, length]`.
    pub fn point(&self, s: f64) -> C64 {
        let s = s.clamp(0.0, self.length);
        let idx = self.offsets.partition_point(|&o| o <= s).saturating_sub(1);
        let piece = &self.pieces[idx];
        let len = piece.length();
        if len == 0.0 {
            piece.point(0.0)
        } else {
            piece.point((s - self.offsets[idx]) / len)
        }
    }

    /// Arc-length positions of the piece joints, including both ends of an open chain.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = self.offsets.clone();
        if !self.closed {
            out.push(self.length);
        }
        out
    }
}

/// Boundary of a region as a list of components (empty for point clouds).
#[derive(Clone, Debug)]
pub struct Boundary {
    pub components: Vec<Component>,
}

impl Boundary {
    pub fn length(&self) -> f64 {
        self.components.iter().map(Component::length).sum()
    }

    /// Splits `count` points over the pieces proportionally to length and
    /// samples each piece uniformly by arc length.
    pub fn grid(&self, count: usize) -> Vec<C64> {
        self.refined_grid(count, 1)
    }

    /// `grid(count)` with every piece subdivided `factor` times further, so
    /// the result contains `grid(count)`.
    pub fn refined_grid(&self, count: usize, factor: usize) -> Vec<C64> {
        let pieces: Vec<(&Piece, bool)> = self
            .components
            .iter()
            .flat_map(|c| {
                let last = c.pieces.len() - 1;
                c.pieces.iter().enumerate().map(move |(i, p)| (p, !c.closed && i == last))
            })
            .collect();
        let total: f64 = pieces.iter().map(|(p, _)| p.length()).sum();
        if pieces.is_empty() {
            return Vec::new();
        }
        let alloc = allocate(count, &pieces.iter().map(|(p, _)| p.length()).collect::<Vec<_>>(), total);
        let mut out = Vec::with_capacity(count + pieces.len());
        for ((piece, closing), k) in pieces.iter().zip(alloc) {
            let k = k * factor.max(1);
            for i in 0..k {
                out.push(piece.point(i as f64 / k as f64));
            }
            if *closing {
                out.push(piece.point(1.0));
            }
        }
        out
    }
}

/// Largest-remainder apportionment with at least one point per piece.
fn allocate(count: usize, lengths: &[f64], total: f64) -> Vec<usize> {
    let n = lengths.len();
    let count = count.max(n);
    if total <= 0.0 {
        let mut out = vec![count / n; n];
        out[0] += count % n;
        return out;
    }
    let spare = count - n;
    let quotas: Vec<f64> = lengths.iter().map(|l| spare as f64 * l / total).collect();
    let mut out: Vec<usize> = quotas.iter().map(|q| 1 + q.floor() as usize).collect();
    let mut remaining = count - out.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if remaining == 0 {
            break;
        }
        out[i] += 1;
        remaining -= 1;
    }
    out
}

fn ngon_vertices(n: u32, h: f64) -> Vec<C64> {
    let radius = h / (2.0 * (PI / n as f64).sin());
    let start = -PI / 2.0 - PI / n as f64;
    (0..n)
        .map(|k| C64::from_polar(radius, start + 2.0 * PI * k as f64 / n as f64))
        .collect()
}

fn polygon_pieces(vertices: &[C64], closed: bool) -> Vec<Piece> {
    let m = vertices.len();
    let edges = if closed { m } else { m - 1 };
    (0..edges)
        .map(|i| Piece::Segment { from: vertices[i], to: vertices[(i + 1) % m] })
        .collect()
}

fn segments_cross(p1: C64, p2: C64, q1: C64, q2: C64) -> bool {
    let cross = |o: C64, a: C64, b: C64| (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re);
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

fn point_segment_distance(z: C64, a: C64, b: C64) -> f64 {
    let ab = &b - &a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (&z - &a).abs();
    }
    let az = &z - &a;
    let u = ((az.re * ab.re + az.im * ab.im) / len2).clamp(0.0, 1.0);
    (&z - &C64::c(a.re + u * ab.re, a.im + u * ab.im)).abs()
}

fn point_in_polygon(z: C64, vertices: &[C64]) -> bool {
    let mut inside = false;
    let m = vertices.len();
    for i in 0..m {
        let a = vertices[i];
        let b = vertices[(i + 1) % m];
        if (a.im > z.im) != (b.im > z.im) {
            let x = a.re + (z.im - a.im) / (b.im - a.im) * (b.re - a.re);
            if z.re < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Shoelace area (signed, positive for counter-clockwise order).
pub fn polygon_area(vertices: &[C64]) -> f64 {
    let m = vertices.len();
    (0..m)
        .map(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % m];
            a.re * b.im - b.re * a.im
        })
        .sum::<f64>()
        / 2.0
}

impl Region {
    pub fn new(shape: Shape) -> Result<Self, RegionError> {
        let region = Region { shape, transform: Transform::default() };
        region.validate()?;
        Ok(region)
    }

    pub fn with_transform(mut self, transform: Transform) -> Result<Self, RegionError> {
        self.transform = transform.compose(&self.transform);
        self.validate()?;
        Ok(self)
    }

    pub fn interval(a: f64, b: f64) -> Self {
        Region::new(Shape::Interval { a, b }).expect("valid interval")
    }

    pub fn disk(cx: f64, cy: f64, r: f64) -> Self {
        Region::new(Shape::Disk { cx, cy, r }).expect("valid disk")
    }

    pub fn point(z: C64) -> Self {
        Region::new(Shape::PointCloud { points: vec![z] }).expect("valid point")
    }

    pub fn validate(&self) -> Result<(), RegionError> {
        let bad = |msg: &str| Err(RegionError::Invalid(msg.to_string()));
        let t = &self.transform;
        if !(t.scale.is_finite() && t.scale > 0.0 && t.rotation.is_finite() && t.shift.is_finite()) {
            return bad("transform needs a finite positive scale");
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        match &self.shape {
            Shape::Interval { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return bad("interval needs a < b");
                }
            }
            Shape::TwoIntervals { a, b } => {
                if !(a.is_finite() && *a >= 0.0 && b.is_finite() && a < b) {
                    return bad("two intervals need 0 <= a < b");
                }
            }
            Shape::Ellipse { a, b } => {
                if !(positive(*a) && positive(*b)) {
                    return bad("ellipse semi-axes must be positive");
                }
            }
            Shape::Disk { cx, cy, r } => {
                if !(cx.is_finite() && cy.is_finite() && positive(*r)) {
                    return bad("disk radius must be positive");
                }
            }
            Shape::HalfDisk { r } => {
                if !positive(*r) {
                    return bad("half-disk radius must be positive");
                }
            }
            Shape::Square { l } | Shape::EquilateralTriangle { l } => {
                if !positive(*l) {
                    return bad("side length must be positive");
                }
            }
            Shape::RegularNgon { n, h } => {
                if *n < 3 || !positive(*h) {
                    return bad("regular n-gon needs n >= 3 and positive side");
                }
            }
            Shape::Polygon { vertices } => {
                if vertices.len() < 3 || vertices.iter().any(|v| !v.is_finite()) {
                    return bad("polygon needs at least three finite vertices");
                }
                if polygon_area(vertices).abs() <= 0.0 {
                    return bad("polygon has zero area");
                }
                let m = vertices.len();
                for i in 0..m {
                    for j in i + 1..m {
                        let adjacent = j == i + 1 || (i == 0 && j == m - 1);
                        if !adjacent
                            && segments_cross(vertices[i], vertices[(i + 1) % m], vertices[j], vertices[(j + 1) % m])
                        {
                            return bad("polygon is self-intersecting");
                        }
                    }
                }
            }
            Shape::Curve { points } => {
                if points.len() < 2 || points.iter().any(|v| !v.is_finite()) {
                    return bad("curve needs at least two finite points");
                }
                if points.windows(2).all(|w| w[0] == w[1]) {
                    return bad("curve has zero length");
                }
            }
            Shape::PointCloud { points } => {
                if points.is_empty() || points.iter().any(|v| !v.is_finite()) {
                    return bad("point cloud must be nonempty and finite");
                }
            }
        }
        Ok(())
    }

    pub fn transformed(&self, transform: Transform) -> Self {
        Region { shape: self.shape.clone(), transform: transform.compose(&self.transform) }
    }

    pub fn is_point_cloud(&self) -> bool {
        matches!(self.shape, Shape::PointCloud { .. })
    }

    /// Cloud points in world coordinates (`None` for continuous shapes).
    pub fn cloud(&self) -> Option<Vec<C64>> {
        match &self.shape {
            Shape::PointCloud { points } => Some(points.iter().map(|z| self.transform.apply(*z)).collect()),
            _ => None,
        }
    }

    /// Number of distinct points, `None` when infinite.
    pub fn distinct_points(&self) -> Option<usize> {
        self.cloud().map(|pts| distinct(&pts).len())
    }

    /// True for one-dimensional shapes (segments and curves): eigenvalues are
    /// sampled by arc length and the set equals its own boundary.
    pub fn is_one_dimensional(&self) -> bool {
        matches!(self.shape, Shape::Interval { .. } | Shape::TwoIntervals { .. } | Shape::Curve { .. })
    }

    /// Boundary in world coordinates. One-dimensional shapes are their own
    /// boundary; point clouds have none.
    pub fn boundary(&self) -> Boundary {
        let local: Vec<Component> = match &self.shape {
            Shape::Interval { a, b } => {
                vec![Component::new(vec![Piece::Segment { from: C64::re_only(*a), to: C64::re_only(*b) }], false)]
            }
            Shape::TwoIntervals { a, b } => vec![
                Component::new(vec![Piece::Segment { from: C64::re_only(-b), to: C64::re_only(-a) }], false),
                Component::new(vec![Piece::Segment { from: C64::re_only(*a), to: C64::re_only(*b) }], false),
            ],
            Shape::Ellipse { a, b } => {
                vec![Component::new(vec![Piece::arc(C64::ZERO, C64::ONE, *a, *b, 0.0, 2.0 * PI)], true)]
            }
            Shape::Disk { cx, cy, r } => {
                vec![Component::new(vec![Piece::arc(C64::c(*cx, *cy), C64::ONE, *r, *r, 0.0, 2.0 * PI)], true)]
            }
            Shape::HalfDisk { r } => vec![Component::new(
                vec![
                    Piece::arc(C64::ZERO, C64::ONE, *r, *r, 0.0, PI),
                    Piece::Segment { from: C64::re_only(-r), to: C64::re_only(*r) },
                ],
                true,
            )],
            Shape::Square { .. } | Shape::RegularNgon { .. } | Shape::EquilateralTriangle { .. } => {
                vec![Component::new(polygon_pieces(&self.local_vertices(), true), true)]
            }
            Shape::Polygon { vertices } => vec![Component::new(polygon_pieces(vertices, true), true)],
            Shape::Curve { points } => vec![Component::new(polygon_pieces(points, false), false)],
            Shape::PointCloud { .. } => Vec::new(),
        };
        let components = local
            .into_iter()
            .map(|c| {
                let pieces = c.pieces.iter().map(|p| p.transformed(&self.transform)).collect();
                Component::new(pieces, c.closed)
            })
            .collect();
        Boundary { components }
    }

    fn local_vertices(&self) -> Vec<C64> {
        match &self.shape {
            Shape::Square { l } => {
                let h = l / 2.0;
                vec![C64::c(-h, -h), C64::c(h, -h), C64::c(h, h), C64::c(-h, h)]
            }
            Shape::RegularNgon { n, h } => ngon_vertices(*n, *h),
            Shape::EquilateralTriangle { l } => ngon_vertices(3, *l),
            Shape::Polygon { vertices } => vertices.clone(),
            _ => Vec::new(),
        }
    }

    /// Discretization used by the approximation solvers: the boundary grid for
    /// continuous shapes, the distinct points for clouds.
    pub fn sample_grid(&self, count: usize) -> Vec<C64> {
        self.refined_sample_grid(count, 1)
    }

    /// Validation counterpart of `sample_grid`, nested in it.
    pub fn refined_sample_grid(&self, count: usize, factor: usize) -> Vec<C64> {
        match self.cloud() {
            Some(pts) => distinct(&pts),
            None => self.boundary().refined_grid(count, factor),
        }
    }

    /// Membership with absolute tolerance `tol` (world units).
    pub fn contains(&self, z: C64, tol: f64) -> bool {
        let w = self.transform.invert(z);
        let tol = tol / self.transform.scale;
        match &self.shape {
            Shape::Interval { a, b } => w.im.abs() <= tol && w.re >= a - tol && w.re <= b + tol,
            Shape::TwoIntervals { a, b } => w.im.abs() <= tol && w.re.abs() >= a - tol && w.re.abs() <= b + tol,
            Shape::Ellipse { a, b } => {
                let (x, y) = (w.re / (a + tol), w.im / (b + tol));
                x * x + y * y <= 1.0
            }
            Shape::Disk { cx, cy, r } => (&w - &C64::c(*cx, *cy)).abs() <= r + tol,
            Shape::HalfDisk { r } => w.abs() <= r + tol && w.im >= -tol,
            Shape::Square { .. } | Shape::RegularNgon { .. } | Shape::EquilateralTriangle { .. } | Shape::Polygon { .. } => {
                let v = self.local_vertices();
                point_in_polygon(w, &v)
                    || (0..v.len()).any(|i| point_segment_distance(w, v[i], v[(i + 1) % v.len()]) <= tol)
            }
            Shape::Curve { points } => points.windows(2).any(|s| point_segment_distance(w, s[0], s[1]) <= tol),
            Shape::PointCloud { points } => points.iter().any(|p| (&w - p).abs() <= tol),
        }
    }

    /// Local-coordinate bounding box `(min, max)` of a two-dimensional shape.
    fn local_box(&self) -> (C64, C64) {
        match &self.shape {
            Shape::Ellipse { a, b } => (C64::c(-a, -b), C64::c(*a, *b)),
            Shape::Disk { cx, cy, r } => (C64::c(cx - r, cy - r), C64::c(cx + r, cy + r)),
            Shape::HalfDisk { r } => (C64::c(-r, 0.0), C64::c(*r, *r)),
            _ => {
                let v = self.local_vertices();
                let (mut lo, mut hi) = (v[0], v[0]);
                for p in &v {
                    lo = C64::c(lo.re.min(p.re), lo.im.min(p.im));
                    hi = C64::c(hi.re.max(p.re), hi.im.max(p.im));
                }
                (lo, hi)
            }
        }
    }

    /// A point drawn uniformly: by area for two-dimensional shapes, by arc
    /// length for segments and curves, by index for clouds.
    pub fn sample_uniform<G: Rng + ?Sized>(&self, rng: &mut G) -> C64 {
        if let Some(pts) = self.cloud() {
            return pts[rng.random_range(0..pts.len())];
        }
        if self.is_one_dimensional() {
            let boundary = self.boundary();
            let mut s = rng.random::<f64>() * boundary.length();
            for c in &boundary.components {
                if s <= c.length() {
                    return c.point(s);
                }
                s -= c.length();
            }
            let last = boundary.components.last().expect("nonempty boundary");
            return last.point(last.length());
        }
        let (lo, hi) = self.local_box();
        loop {
            let w = C64::c(lo.re + rng.random::<f64>() * (hi.re - lo.re), lo.im + rng.random::<f64>() * (hi.im - lo.im));
            let z = self.transform.apply(w);
            if self.contains(z, 0.0) {
                return z;
            }
        }
    }

    /// True when every point of the region lies on the real axis.
    pub fn is_real(&self) -> bool {
        let pts: Vec<C64> = match self.cloud() {
            Some(pts) => pts,
            None if self.is_one_dimensional() => self.boundary().grid(64),
            None => return false,
        };
        let size = pts.iter().map(|z| z.abs()).fold(1.0, f64::max);
        pts.iter().all(|z| z.im.abs() <= 1e-12 * size)
    }

    /// Real extent `(min, max)` of a real region.
    pub fn real_extent(&self) -> Option<(f64, f64)> {
        if !self.is_real() {
            return None;
        }
        let pts = match self.cloud() {
            Some(pts) => pts,
            None => self.boundary().grid(64),
        };
        let lo = pts.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        Some((lo, hi))
    }

    /// Area of two-dimensional shapes (0 for segments, curves and clouds).
    pub fn area(&self) -> f64 {
        let s2 = self.transform.scale * self.transform.scale;
        let local = match &self.shape {
            Shape::Ellipse { a, b } => PI * a * b,
            Shape::Disk { r, .. } => PI * r * r,
            Shape::HalfDisk { r } => PI * r * r / 2.0,
            Shape::Square { .. } | Shape::RegularNgon { .. } | Shape::EquilateralTriangle { .. } | Shape::Polygon { .. } => {
                polygon_area(&self.local_vertices()).abs()
            }
            _ => 0.0,
        };
        local * s2
    }

    /// Diameter, estimated from a dense boundary sample (exact for clouds and
    /// polygons, whose extreme points are sampled).
    pub fn diameter(&self) -> f64 {
        let pts = self.sample_grid(720);
        let mut best: f64 = 0.0;
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                best = best.max((a - b).abs());
            }
        }
        best
    }

    /// Length of a curve-like region (segments, curves); `None` otherwise.
    pub fn curve_length(&self) -> Option<f64> {
        if self.is_one_dimensional() {
            Some(self.boundary().length())
        } else {
            None
        }
    }
}

/// Removes exact duplicates, keeping first occurrences.
pub fn distinct(points: &[C64]) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| q == p) {
            out.push(*p);
        }
    }
    out
}

fn parse_numbers(body: &str) -> Result<Vec<f64>, String> {
    body.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("`{}`: {e}", s.trim())))
        .collect()
}

fn parse_points(body: &str) -> Result<Vec<C64>, String> {
    body.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| match parse_numbers(pair)?.as_slice() {
            [x, y] => Ok(C64::c(*x, *y)),
            [x] => Ok(C64::re_only(*x)),
            _ => Err(format!("expected `x,y`, got `{pair}`")),
        })
        .collect()
}

impl FromStr for Region {
    type Err = RegionError;

    /// Parses `kind:params`, e.g. `interval:-1,1`, `disk:0,0,0.9`, `ngon:6,1`,
    /// `twointervals:0.5,1`, `halfdisk:1`, `ellipse:2,1`, `square:1`,
    /// `triangle:2`, `polygon:0,0;1,0;0,1`, `curve:0,0;1,1`, `points:0,0;1,0`,
    /// `point:0.5,0`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fail = |msg: String| RegionError::Parse(s.to_string(), msg);
        let (kind, body) = s.split_once(':').ok_or_else(|| fail("expected `kind:params`".into()))?;
        let nums = |count: usize| -> Result<Vec<f64>, RegionError> {
            let v = parse_numbers(body).map_err(fail)?;
            if v.len() != count {
                return Err(RegionError::Parse(s.to_string(), format!("expected {count} numbers, got {}", v.len())));
            }
            Ok(v)
        };
        let shape = match kind.trim().to_ascii_lowercase().as_str() {
            "interval" => {
                let v = nums(2)?;
                Shape::Interval { a: v[0], b: v[1] }
            }
            "twointervals" => {
                let v = nums(2)?;
                Shape::TwoIntervals { a: v[0], b: v[1] }
            }
            "ellipse" => {
                let v = nums(2)?;
                Shape::Ellipse { a: v[0], b: v[1] }
            }
            "disk" => {
                let v = nums(3)?;
                Shape::Disk { cx: v[0], cy: v[1], r: v[2] }
            }
            "halfdisk" => Shape::HalfDisk { r: nums(1)?[0] },
            "square" => Shape::Square { l: nums(1)?[0] },
            "triangle" => Shape::EquilateralTriangle { l: nums(1)?[0] },
            "ngon" => {
                let v = nums(2)?;
                if v[0].fract() != 0.0 || v[0] < 3.0 {
                    return Err(fail("n-gon order must be an integer >= 3".into()));
                }
                Shape::RegularNgon { n: v[0] as u32, h: v[1] }
            }
            "polygon" => Shape::Polygon { vertices: parse_points(body).map_err(fail)? },
            "curve" => Shape::Curve { points: parse_points(body).map_err(fail)? },
            "points" | "point" => Shape::PointCloud { points: parse_points(body).map_err(fail)? },
            other => return Err(fail(format!("unknown region kind `{other}`"))),
        };
        Region::new(shape)
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pts = |v: &[C64]| v.iter().map(|z| format!("{},{}", z.re, z.im)).collect::<Vec<_>>().join(";");
        match &self.shape {
            Shape::Interval { a, b } => write!(f, "interval:{a},{b}"),
            Shape::TwoIntervals { a, b } => write!(f, "twointervals:{a},{b}"),
            Shape::Ellipse { a, b } => write!(f, "ellipse:{a},{b}"),
            Shape::Disk { cx, cy, r } => write!(f, "disk:{cx},{cy},{r}"),
            Shape::HalfDisk { r } => write!(f, "halfdisk:{r}"),
            Shape::Square { l } => write!(f, "square:{l}"),
            Shape::RegularNgon { n, h } => write!(f, "ngon:{n},{h}"),
            Shape::EquilateralTriangle { l } => write!(f, "triangle:{l}"),
            Shape::Polygon { vertices } => write!(f, "polygon:{}", pts(vertices)),
            Shape::Curve { points } => write!(f, "curve:{}", pts(points)),
            Shape::PointCloud { points } => write!(f, "points:{}", pts(points)),
        }?;
        if !self.transform.is_identity() {
            let t = &self.transform;
            write!(f, " @ shift {},{} rot {} scale {}", t.shift.re, t.shift.im, t.rotation, t.scale)?;
        }
        Ok(())
    }
}
