use crate::capacity::{distinct, Region};
use crate::numerics::{qr_least_squares, CMatrix, Precision, C64};

use super::{ApproxError, CoefficientBasis, MinimaxResult};

pub const SOLVE_GRID: usize = 512;
pub const VALIDATION_FACTOR: usize = 4;
const MAX_ITERATIONS: usize = 500;
const DAMPING: f64 = 0.5;
const STALL_WINDOW: usize = 30;
const WARM_START: usize = 40;
const EXCHANGES: usize = 60;
const RELATIVE_GAP: f64 = 1e-10;
/// Rounding allowance folded into the certified gap, relative to the error.
const ROUNDING: f64 = 1.0 / (1u64 << 44) as f64;

/// Maps the sample to `w = rot (z - center) / s` with the point set centred in
/// a box of half-widths `hx ≥ hy` and `s = (hx + hy) / 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Frame {
    center: C64,
    rot: C64,
    s: f64,
    /// Squared focal half-distance of the box ellipse, in `w` units.
    focal_sq: f64,
}

impl Frame {
    fn fit(points: &[C64]) -> Frame {
        let n = points.len() as f64;
        let mean = points.iter().fold(C64::ZERO, |a, z| a + *z);
        let mean = C64::c(mean.re / n, mean.im / n);
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for z in points {
            let d = *z - mean;
            sxx += d.re * d.re;
            syy += d.im * d.im;
            sxy += d.re * d.im;
        }
        let mut phi = 0.5 * (2.0 * sxy).atan2(sxx - syy);
        let bbox = |phi: f64| {
            let rot = C64::from_polar(1.0, -phi);
            let (mut lo, mut hi) = (C64::c(f64::INFINITY, f64::INFINITY), C64::c(f64::NEG_INFINITY, f64::NEG_INFINITY));
            for z in points {
                let w = rot * (*z - mean);
                lo = C64::c(lo.re.min(w.re), lo.im.min(w.im));
                hi = C64::c(hi.re.max(w.re), hi.im.max(w.im));
            }
            (rot, lo, hi)
        };
        let (mut rot, mut lo, mut hi) = bbox(phi);
        if hi.im - lo.im > hi.re - lo.re {
            phi += std::f64::consts::FRAC_PI_2;
            (rot, lo, hi) = bbox(phi);
        }
        let hx = (hi.re - lo.re) / 2.0;
        let hy = (hi.im - lo.im) / 2.0;
        let mid = C64::c((hi.re + lo.re) / 2.0, (hi.im + lo.im) / 2.0);
        let center = mean + rot.conj() * mid;
        let s = (hx + hy) / 2.0;
        let focal_sq = if s > 0.0 { ((hx * hx - hy * hy) / (s * s)).max(0.0) } else { 0.0 };
        Frame { center, rot, s, focal_sq }
    }

    fn to_w(&self, z: C64) -> C64 {
        let d = self.rot * (z - self.center);
        C64::c(d.re / self.s, d.im / self.s)
    }
}

/// Monic polynomials `φ_0..φ_l` of the focal segment: scaled Chebyshev for an
/// elongated box, plain powers for a square one.
fn basis_values(w: C64, l: usize, focal_sq: f64) -> Vec<C64> {
    let mut out = Vec::with_capacity(l + 1);
    out.push(C64::ONE);
    if l >= 1 {
        out.push(w);
    }
    for j in 1..l {
        let c = if j == 1 { focal_sq / 2.0 } else { focal_sq / 4.0 };
        let next = w * out[j] - C64::re_only(c) * out[j - 1];
        out.push(next);
    }
    out
}

/// Monomial coefficients (ascending in `w`) of `φ_0..φ_l`.
fn basis_monomials(l: usize, focal_sq: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![vec![1.0]];
    if l >= 1 {
        out.push(vec![0.0, 1.0]);
    }
    for j in 1..l {
        let c = if j == 1 { focal_sq / 2.0 } else { focal_sq / 4.0 };
        let mut next = vec![0.0; j + 2];
        for (k, v) in out[j].iter().enumerate() {
            next[k + 1] += v;
        }
        for (k, v) in out[j - 1].iter().enumerate() {
            next[k] -= c * v;
        }
        out.push(next);
    }
    out
}

/// The computed approximant in a form that can be evaluated anywhere.
#[derive(Clone, Debug, PartialEq)]
pub enum RegionPoly {
    /// `z^l - p(z) = s^l e^{ilφ} (φ_l(w) - Σ c_j φ_j(w))`.
    Faber { frame_center: C64, frame_rot: C64, s: f64, focal_sq: f64, l: usize, coeffs: Vec<C64> },
    /// `p` interpolates `z^l` at every point of a set with at most `l` points.
    Interpolant { l: usize, nodes: Vec<C64>, newton: Vec<C64> },
}

impl RegionPoly {
    /// `z^l - p(z)`.
    pub fn residual(&self, z: C64) -> C64 {
        match self {
            RegionPoly::Faber { frame_center, frame_rot, s, focal_sq, l, coeffs } => {
                let frame = Frame { center: *frame_center, rot: *frame_rot, s: *s, focal_sq: *focal_sq };
                let phi = basis_values(frame.to_w(z), *l, *focal_sq);
                let mut r = phi[*l];
                for (c, p) in coeffs.iter().zip(&phi) {
                    r = r - *c * *p;
                }
                let factor = C64::from_polar(s.powi(*l as i32), -(*l as f64) * frame_rot.arg());
                factor * r
            }
            RegionPoly::Interpolant { l, nodes, newton } => {
                let mut p = C64::ZERO;
                for (k, c) in newton.iter().enumerate().rev() {
                    p = p * (z - nodes[k]) + *c;
                }
                z.powi(*l as u32) - p
            }
        }
    }

    /// Monomial coefficients of `p`, ascending, length `l`.
    pub fn monomial_coefficients(&self) -> Vec<C64> {
        match self {
            RegionPoly::Faber { frame_center, frame_rot, s, focal_sq, l, coeffs } => {
                let l = *l;
                let mono = basis_monomials(l, *focal_sq);
                // r(w) = φ_l(w) - Σ c_j φ_j(w) in powers of w.
                let mut r: Vec<C64> = mono[l].iter().map(|&v| C64::re_only(v)).collect();
                for (c, m) in coeffs.iter().zip(&mono) {
                    for (k, v) in m.iter().enumerate() {
                        r[k] = r[k] - *c * C64::re_only(*v);
                    }
                }
                // w = alpha (z - center), scaled back by alpha^{-l}.
                let alpha = C64::c(frame_rot.re / s, frame_rot.im / s);
                let mut out = vec![C64::ZERO; l + 1];
                let mut alpha_k = C64::ONE;
                for (k, rk) in r.iter().enumerate() {
                    // (z - center)^k by the binomial theorem.
                    let coef = *rk * alpha_k;
                    let mut binom = 1.0;
                    let mut shift_pow = C64::ONE;
                    let neg_c = C64::ZERO - *frame_center;
                    for i in (0..=k).rev() {
                        out[i] = out[i] + coef * C64::re_only(binom) * shift_pow;
                        binom = binom * i as f64 / (k - i + 1) as f64;
                        shift_pow = shift_pow * neg_c;
                    }
                    alpha_k = alpha_k * alpha;
                }
                let scale = C64::ONE / alpha.powi(l as u32);
                out.iter().take(l).map(|v| C64::ZERO - scale * *v).collect()
            }
            RegionPoly::Interpolant { l, nodes, newton } => {
                let mut p = vec![C64::ZERO; *l];
                // Horner on the Newton form, in monomials.
                let mut acc: Vec<C64> = vec![C64::ZERO];
                for (k, c) in newton.iter().enumerate().rev() {
                    let mut next = vec![C64::ZERO; acc.len() + 1];
                    for (i, a) in acc.iter().enumerate() {
                        next[i + 1] = next[i + 1] + *a;
                        next[i] = next[i] - *a * nodes[k];
                    }
                    next[0] = next[0] + *c;
                    acc = next;
                }
                for (i, a) in acc.into_iter().enumerate().take(*l) {
                    p[i] = a;
                }
                p
            }
        }
    }
}

fn interpolant(l: usize, nodes: Vec<C64>) -> RegionPoly {
    let mut table: Vec<C64> = nodes.iter().map(|z| z.powi(l as u32)).collect();
    let count = nodes.len();
    let mut newton = Vec::with_capacity(count);
    for k in 0..count {
        newton.push(table[k]);
        for i in (k + 1..count).rev() {
            table[i] = (table[i] - table[i - 1]) / (nodes[i] - nodes[i - k - 1]);
        }
    }
    RegionPoly::Interpolant { l, nodes, newton }
}

struct Lawson {
    coeffs: Vec<C64>,
    solve_error: f64,
    lower: f64,
    iterations: usize,
}

/// Lawson's iteration restricted to `rows`: weighted least squares with the
/// weights multiplied by `|r|^DAMPING` each step.
///
/// For probability weights `u` with least-squares residual `r`, both
/// `sqrt(Σ u|r|^2)` and `Σ u|r|^2 / Σ u|r|` bound the minimax error over
/// `rows` from below; the second is the value of the annihilating functional
/// `u conj(r)` supplied by the normal equations.
fn lawson(phi: &CMatrix, target: &[C64], rows: &[usize], max_iterations: usize) -> Result<Lawson, ApproxError> {
    let cols = phi.cols();
    let sub = CMatrix::from_fn(rows.len(), cols, Precision::DOUBLE, |i, j| phi[(rows[i], j)]);
    let f: Vec<C64> = rows.iter().map(|&i| target[i]).collect();
    let mut u = vec![1.0 / rows.len() as f64; rows.len()];
    let mut best = Lawson { coeffs: vec![C64::ZERO; cols], solve_error: f64::INFINITY, lower: 0.0, iterations: 0 };
    let mut since_best = 0;
    for it in 1..=max_iterations {
        let w: Vec<f64> = u.iter().map(|x| x.sqrt()).collect();
        let a = CMatrix::from_fn(rows.len(), cols, Precision::DOUBLE, |i, j| C64::re_only(w[i]) * sub[(i, j)]);
        let b: Vec<C64> = f.iter().zip(&w).map(|(t, wi)| C64::re_only(*wi) * *t).collect();
        let ls = qr_least_squares(&a, &b)?;
        let fitted = sub.matvec(&ls.coefficients)?;
        let r: Vec<f64> = f.iter().zip(&fitted).map(|(t, x)| (*t - *x).abs()).collect();
        let upper = r.iter().cloned().fold(0.0, f64::max);
        let m2: f64 = u.iter().zip(&r).map(|(ui, ri)| ui * ri * ri).sum();
        let m1: f64 = u.iter().zip(&r).map(|(ui, ri)| ui * ri).sum();
        best.lower = best.lower.max(m2.sqrt());
        if m1 > 0.0 {
            best.lower = best.lower.max(m2 / m1);
        }
        best.iterations = it;
        if upper < best.solve_error {
            best.solve_error = upper;
            best.coeffs = ls.coefficients;
            since_best = 0;
        } else {
            since_best += 1;
        }
        if best.solve_error - best.lower <= RELATIVE_GAP * best.solve_error || upper == 0.0 {
            break;
        }
        if since_best >= STALL_WINDOW {
            // Restart: blend the weights back towards uniform.
            let uniform = 1.0 / u.len() as f64;
            for x in u.iter_mut() {
                *x = 0.5 * (*x + uniform);
            }
            since_best = 0;
        }
        for (x, ri) in u.iter_mut().zip(&r) {
            *x *= ri.powf(DAMPING);
        }
        let total: f64 = u.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            break;
        }
        for x in u.iter_mut() {
            *x /= total;
        }
    }
    Ok(best)
}

/// Indices where `|r|` has a local maximum along the sample order (all
/// points are candidates for clouds), largest first.
fn peaks(r: &[f64], ordered: bool, limit: usize) -> Vec<usize> {
    let n = r.len();
    let mut idx: Vec<usize> = if ordered {
        (0..n)
            .filter(|&i| (i == 0 || r[i] > r[i - 1]) && (i + 1 == n || r[i] >= r[i + 1]))
            .collect()
    } else {
        (0..n).collect()
    };
    idx.sort_by(|&a, &b| r[b].total_cmp(&r[a]).then(a.cmp(&b)));
    idx.truncate(limit);
    idx.sort_unstable();
    idx
}

/// Discrete minimax on the solve grid: a short Lawson run on the whole grid,
/// then Lawson on the peaks of the current error, exchanging peaks until the
/// bounds meet. Lawson alone stalls on fine grids because neighbours of an
/// extremal point keep almost all of their weight.
fn minimax(phi: &CMatrix, target: &[C64], ordered: bool) -> Result<Lawson, ApproxError> {
    let all: Vec<usize> = (0..phi.rows()).collect();
    let mut best = lawson(phi, target, &all, WARM_START)?;
    let mut coeffs = best.coeffs.clone();
    let limit = 4 * phi.cols() + 8;
    for _ in 0..EXCHANGES {
        let fitted = phi.matvec(&coeffs)?;
        let r: Vec<f64> = target.iter().zip(&fitted).map(|(t, x)| (*t - *x).abs()).collect();
        let upper = r.iter().cloned().fold(0.0, f64::max);
        if upper < best.solve_error {
            best.solve_error = upper;
            best.coeffs = coeffs.clone();
        }
        if best.solve_error - best.lower <= RELATIVE_GAP * best.solve_error {
            break;
        }
        let set = peaks(&r, ordered, limit);
        let inner = lawson(phi, target, &set, MAX_ITERATIONS)?;
        best.lower = best.lower.max(inner.lower);
        best.iterations += inner.iterations;
        coeffs = inner.coeffs;
    }
    Ok(best)
}

/// `Err(l, X)`: minimax error of `z^l` by polynomials of degree `< l` on the
/// boundary of `X` (all of `X` for point clouds), solved on `solve_grid`
/// points and measured on a grid `VALIDATION_FACTOR` times denser.
pub fn err_region_with(l: usize, region: &Region, solve_grid: usize) -> Result<MinimaxResult, ApproxError> {
    if l == 0 {
        return Err(ApproxError::InvalidArgument("degree l must be >= 1".into()));
    }
    let sample = region.sample_grid(solve_grid);
    let check = region.refined_sample_grid(solve_grid, VALIDATION_FACTOR);
    let nodes = distinct(&sample);

    let mut result = MinimaxResult {
        l,
        m: l - 1,
        error: 0.0,
        certified_gap: 0.0,
        grid_size: check.len(),
        coefficients: Vec::new(),
        basis: CoefficientBasis::Monomial,
        solve_error: 0.0,
        lower_bound: 0.0,
        iterations: 0,
        alternation_points: None,
        degenerate: false,
        fit: None,
    };

    let frame = Frame::fit(&nodes);
    if nodes.len() <= l || frame.s == 0.0 {
        // Interpolation is exact on at most l points.
        let fit = interpolant(l, nodes);
        result.coefficients = fit.monomial_coefficients();
        result.degenerate = true;
        result.fit = Some(fit);
        return Ok(result);
    }

    let values: Vec<Vec<C64>> = sample.iter().map(|z| basis_values(frame.to_w(*z), l, frame.focal_sq)).collect();
    let phi = CMatrix::from_fn(sample.len(), l, Precision::DOUBLE, |i, j| values[i][j]);
    let target: Vec<C64> = values.iter().map(|v| v[l]).collect();
    let sol = minimax(&phi, &target, !region.is_point_cloud())?;

    let fit = RegionPoly::Faber {
        frame_center: frame.center,
        frame_rot: frame.rot,
        s: frame.s,
        focal_sq: frame.focal_sq,
        l,
        coeffs: sol.coeffs,
    };
    let scale = frame.s.powi(l as i32);
    let validation = check.iter().map(|z| fit.residual(*z).abs()).fold(0.0, f64::max);
    let solve_error = sol.solve_error * scale;
    result.solve_error = solve_error;
    result.lower_bound = sol.lower * scale;
    result.error = validation.max(solve_error);
    result.certified_gap = (solve_error - result.lower_bound).max(0.0) + ROUNDING * result.error;
    result.iterations = sol.iterations;
    result.coefficients = fit.monomial_coefficients();
    result.fit = Some(fit);
    Ok(result)
}

pub fn err_region(l: usize, region: &Region) -> Result<MinimaxResult, ApproxError> {
    err_region_with(l, region, SOLVE_GRID)
}
