use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::region::{distinct, Boundary, Region};
use super::{CapacityError, CapacityEstimate, Method};
use crate::numerics::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeketeOptions {
    pub restarts: usize,
    pub max_sweeps: usize,
    pub seed: u64,
    /// Candidate grid size for greedy insertion and global moves.
    pub grid: usize,
    /// Stop once a sweep raises the mean log-distance by less than this.
    pub tolerance: f64,
}

impl Default for FeketeOptions {
    fn default() -> Self {
        FeketeOptions { restarts: 8, max_sweeps: 200, seed: 0, grid: 512, tolerance: 1e-9 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeketeResult {
    pub points: Vec<C64>,
    pub d_n: f64,
    /// Sweep budget ran out before the tolerance was met.
    pub stalled: bool,
}

/// Position on the boundary: component index and arc length.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Slot {
    comp: usize,
    s: f64,
}

#[derive(Clone, Debug)]
struct Config {
    slots: Vec<Slot>,
    z: Vec<C64>,
}

fn log_sum(z: C64, others: &[C64], skip: usize) -> f64 {
    let mut acc = 0.0;
    for (j, w) in others.iter().enumerate() {
        if j != skip {
            acc += (&z - w).abs().ln();
        }
    }
    acc
}

/// Mean of `ln|z_i - z_j|` over pairs, i.e. `ln d_n`.
fn mean_log(z: &[C64]) -> f64 {
    let n = z.len();
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            acc += (&z[i] - &z[j]).abs().ln();
        }
    }
    2.0 * acc / (n * (n - 1)) as f64
}

fn contributions(z: &[C64]) -> Vec<f64> {
    (0..z.len()).map(|i| log_sum(z[i], z, i)).collect()
}

/// Coordinate ascent on a boundary parameterization.
struct Ascent<'a> {
    boundary: &'a Boundary,
    candidates: Vec<Slot>,
    opts: &'a FeketeOptions,
}

const GOLDEN_STEPS: usize = 40;
const GLOBAL_EVERY: usize = 10;

impl<'a> Ascent<'a> {
    fn new(boundary: &'a Boundary, opts: &'a FeketeOptions) -> Self {
        let total = boundary.length();
        let mut candidates = Vec::new();
        for (c, comp) in boundary.components.iter().enumerate() {
            let share = ((opts.grid as f64 * comp.length() / total).round() as usize).max(2);
            let stop = if comp.closed { share } else { share + 1 };
            candidates.extend((0..stop).map(|i| Slot { comp: c, s: comp.length() * i as f64 / share as f64 }));
            candidates.extend(comp.breakpoints().into_iter().map(|s| Slot { comp: c, s }));
        }
        Ascent { boundary, candidates, opts }
    }

    fn point(&self, slot: Slot) -> C64 {
        let comp = &self.boundary.components[slot.comp];
        let s = if comp.closed { slot.s.rem_euclid(comp.length()) } else { slot.s };
        comp.point(s)
    }

    fn config(&self, slots: Vec<Slot>) -> Config {
        let z = slots.iter().map(|&s| self.point(s)).collect();
        Config { slots, z }
    }

    fn random_slot<G: Rng>(&self, rng: &mut G) -> Slot {
        let mut s = rng.random::<f64>() * self.boundary.length();
        for (c, comp) in self.boundary.components.iter().enumerate() {
            if s <= comp.length() {
                return Slot { comp: c, s };
            }
            s -= comp.length();
        }
        let last = self.boundary.components.len() - 1;
        Slot { comp: last, s: self.boundary.components[last].length() }
    }

    /// Adds points one at a time at the best candidate (lowest index on ties).
    fn grow(&self, cfg: &mut Config, n: usize) {
        while cfg.slots.len() < n {
            let mut best = (f64::NEG_INFINITY, None);
            for cand in &self.candidates {
                let z = self.point(*cand);
                let v = if cfg.z.is_empty() { 0.0 } else { log_sum(z, &cfg.z, usize::MAX) };
                if v > best.0 {
                    best = (v, Some((*cand, z)));
                }
            }
            let (slot, z) = best.1.unwrap_or_else(|| (self.candidates[0], self.point(self.candidates[0])));
            cfg.slots.push(slot);
            cfg.z.push(z);
        }
    }

    /// Drops the point with the smallest log-distance sum until `n` remain.
    /// Each removal cannot lower the mean log-distance.
    fn shrink(&self, cfg: &mut Config, n: usize) {
        while cfg.slots.len() > n {
            let contrib = contributions(&cfg.z);
            let (k, _) = contrib
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
            cfg.slots.remove(k);
            cfg.z.remove(k);
        }
    }

    /// Returns true if the tolerance was met within the sweep budget.
    fn ascend(&self, cfg: &mut Config) -> bool {
        let n = cfg.slots.len();
        if n < 2 {
            return true;
        }
        let mut energy = mean_log(&cfg.z);
        for sweep in 0..self.opts.max_sweeps {
            if sweep % GLOBAL_EVERY == 0 {
                self.global_moves(cfg);
            }
            self.local_sweep(cfg);
            let next = mean_log(&cfg.z);
            let gain = next - energy;
            energy = next;
            if sweep > 0 && gain < self.opts.tolerance {
                return true;
            }
        }
        false
    }

    fn global_moves(&self, cfg: &mut Config) {
        for i in 0..cfg.slots.len() {
            let current = log_sum(cfg.z[i], &cfg.z, i);
            let mut best = (current, None);
            for cand in &self.candidates {
                let z = self.point(*cand);
                let v = log_sum(z, &cfg.z, i);
                if v > best.0 + 1e-12 * best.0.abs().max(1.0) {
                    best = (v, Some((*cand, z)));
                }
            }
            if let Some((slot, z)) = best.1 {
                cfg.slots[i] = slot;
                cfg.z[i] = z;
            }
        }
    }

    fn local_sweep(&self, cfg: &mut Config) {
        for (c, comp) in self.boundary.components.iter().enumerate() {
            let mut idx: Vec<usize> = (0..cfg.slots.len()).filter(|&i| cfg.slots[i].comp == c).collect();
            if idx.is_empty() {
                continue;
            }
            let len = comp.length();
            for slot in cfg.slots.iter_mut().filter(|s| s.comp == c) {
                if comp.closed {
                    slot.s = slot.s.rem_euclid(len);
                }
            }
            idx.sort_by(|&a, &b| cfg.slots[a].s.total_cmp(&cfg.slots[b].s).then(a.cmp(&b)));
            let m = idx.len();
            for p in 0..m {
                let i = idx[p];
                let s = cfg.slots[i].s;
                let (lo, hi, lo_open, hi_open) = if comp.closed {
                    let prev = if m == 1 { s - len / 2.0 } else if p == 0 { cfg.slots[idx[m - 1]].s - len } else { cfg.slots[idx[p - 1]].s };
                    let next = if m == 1 { s + len / 2.0 } else if p == m - 1 { cfg.slots[idx[0]].s + len } else { cfg.slots[idx[p + 1]].s };
                    (prev, next, true, true)
                } else {
                    let prev = if p == 0 { 0.0 } else { cfg.slots[idx[p - 1]].s };
                    let next = if p == m - 1 { len } else { cfg.slots[idx[p + 1]].s };
                    (prev, next, p > 0, p < m - 1)
                };
                if hi <= lo {
                    continue;
                }
                let f = |t: f64| log_sum(self.point(Slot { comp: c, s: t }), &cfg.z, i);
                let mut best = (f(s), s);
                let consider = |t: f64, best: &mut (f64, f64)| {
                    let v = f(t);
                    if v > best.0 {
                        *best = (v, t);
                    }
                };
                let (t, _) = golden_max(&f, lo, hi);
                consider(t, &mut best);
                if !lo_open {
                    consider(lo, &mut best);
                }
                if !hi_open {
                    consider(hi, &mut best);
                }
                for b in comp.breakpoints() {
                    for shifted in [b - len, b, b + len] {
                        if shifted > lo && shifted < hi {
                            consider(shifted, &mut best);
                        }
                    }
                }
                if best.1 != s {
                    cfg.slots[i].s = best.1;
                    cfg.z[i] = self.point(cfg.slots[i]);
                }
            }
        }
    }
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..GOLDEN_STEPS {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Greedy selection followed by single-point swaps over a finite cloud.
fn cloud_fekete(points: &[C64], n: usize, max_sweeps: usize) -> (Vec<usize>, bool) {
    let mut chosen: Vec<usize> = vec![0];
    while chosen.len() < n {
        let z: Vec<C64> = chosen.iter().map(|&i| points[i]).collect();
        let next = (0..points.len())
            .filter(|i| !chosen.contains(i))
            .map(|i| (i, log_sum(points[i], &z, usize::MAX)))
            .fold((usize::MAX, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        chosen.push(next.0);
    }
    for _ in 0..max_sweeps {
        let mut improved = false;
        for slot in 0..n {
            let z: Vec<C64> = chosen.iter().map(|&i| points[i]).collect();
            let current = log_sum(z[slot], &z, slot);
            let mut best = (current, None);
            for cand in 0..points.len() {
                if chosen.contains(&cand) {
                    continue;
                }
                let v = log_sum(points[cand], &z, slot);
                if v > best.0 + 1e-12 * best.0.abs().max(1.0) {
                    best = (v, Some(cand));
                }
            }
            if let Some(c) = best.1 {
                chosen[slot] = c;
                improved = true;
            }
        }
        if !improved {
            return (chosen, false);
        }
    }
    (chosen, true)
}

fn check_n(region: &Region, n: usize) -> Result<Option<Vec<C64>>, CapacityError> {
    if n < 2 {
        return Err(CapacityError::InvalidArgument(format!("need n >= 2, got {n}")));
    }
    match region.cloud() {
        Some(pts) => {
            let pts = distinct(&pts);
            if pts.len() < n {
                return Err(CapacityError::TooFewPoints { needed: n, available: pts.len() });
            }
            Ok(Some(pts))
        }
        None => Ok(None),
    }
}

/// Approximate `n`-point Fekete configuration and its `d_n`, best of
/// `opts.restarts` starts (restart 0 is greedy, the others random).
pub fn fekete_points(region: &Region, n: usize, opts: &FeketeOptions) -> Result<FeketeResult, CapacityError> {
    if let Some(pts) = check_n(region, n)? {
        let (chosen, stalled) = cloud_fekete(&pts, n, opts.max_sweeps);
        let z: Vec<C64> = chosen.iter().map(|&i| pts[i]).collect();
        return Ok(FeketeResult { d_n: mean_log(&z).exp(), points: z, stalled });
    }
    let boundary = region.boundary();
    let ascent = Ascent::new(&boundary, opts);
    let runs: Vec<(Config, bool)> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut cfg = initial(&ascent, n, r, opts.seed);
            let ok = ascent.ascend(&mut cfg);
            (cfg, !ok)
        })
        .collect();
    let (cfg, stalled) = best_of(runs);
    Ok(FeketeResult { d_n: mean_log(&cfg.z).exp(), points: cfg.z, stalled })
}

fn initial(ascent: &Ascent<'_>, n: usize, restart: usize, seed: u64) -> Config {
    if restart == 0 {
        let mut cfg = Config { slots: Vec::new(), z: Vec::new() };
        ascent.grow(&mut cfg, n);
        cfg
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(restart as u64));
        ascent.config((0..n).map(|_| ascent.random_slot(&mut rng)).collect())
    }
}

/// Highest `d_n`; ties go to the lowest restart index.
fn best_of(runs: Vec<(Config, bool)>) -> (Config, bool) {
    let mut best: Option<(f64, Config, bool)> = None;
    for (cfg, stalled) in runs {
        let e = mean_log(&cfg.z);
        if best.as_ref().map_or(true, |b| e > b.0) {
            best = Some((e, cfg, stalled));
        }
    }
    let (_, cfg, stalled) = best.expect("at least one restart");
    (cfg, stalled)
}

fn sizes(n_max: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (1..=n_max / 4).map(|i| 4 * i).collect();
    if n_max % 4 != 0 {
        out.push(n_max);
    }
    out
}

/// Least-squares fit of `d_n ≈ cap + c/n`; returns `(cap, rms residual)`.
fn extrapolate(seq: &[(usize, f64)]) -> (f64, f64) {
    if seq.len() < 2 {
        return (seq.last().map_or(0.0, |p| p.1), 0.0);
    }
    let m = seq.len() as f64;
    let xs: Vec<f64> = seq.iter().map(|&(n, _)| 1.0 / n as f64).collect();
    let ys: Vec<f64> = seq.iter().map(|&(_, d)| d).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let cap = my - slope * mx;
    let rms = (xs.iter().zip(&ys).map(|(x, y)| (y - cap - slope * x).powi(2)).sum::<f64>() / m).sqrt();
    (cap, rms)
}

/// Portion of the `d_n` sequence used for extrapolation: `n >= n_max / 2`.
fn tail(seq: &[(usize, f64)], n_max: usize) -> &[(usize, f64)] {
    let start = seq.iter().position(|&(n, _)| 2 * n >= n_max).unwrap_or(0);
    &seq[start..]
}

pub fn cap_estimate(region: &Region, n_max: usize) -> Result<CapacityEstimate, CapacityError> {
    cap_estimate_with(region, n_max, &FeketeOptions::default())
}

/// Fekete chains `n = 4, 8, ..., n_max` and extrapolation of `d_n` to `n = ∞`.
/// Point clouds report `d_n` at the largest feasible `n` without extrapolation.
pub fn cap_estimate_with(region: &Region, n_max: usize, opts: &FeketeOptions) -> Result<CapacityEstimate, CapacityError> {
    if n_max < 4 {
        return Err(CapacityError::InvalidArgument(format!("n_max must be >= 4, got {n_max}")));
    }
    if let Some(pts) = region.cloud() {
        let pts = distinct(&pts);
        if pts.len() < 2 {
            return Err(CapacityError::TooFewPoints { needed: 2, available: pts.len() });
        }
        let top = n_max.min(pts.len());
        let mut seq = Vec::new();
        let mut stalled = false;
        let mut energy = 0.0;
        for n in sizes(top).into_iter().filter(|&n| n >= 2).chain(if top < 4 { Some(top) } else { None }) {
            let (chosen, st) = cloud_fekete(&pts, n, opts.max_sweeps);
            let z: Vec<C64> = chosen.iter().map(|&i| pts[i]).collect();
            energy = mean_log(&z);
            stalled |= st;
            seq.push((n, energy.exp()));
        }
        enforce_cloud_monotone(&mut seq);
        let value = seq.last().expect("nonempty").1;
        return Ok(CapacityEstimate {
            value,
            method: Method::Fekete,
            n_points: Some(top),
            energy: Some(energy),
            d_sequence: seq,
            fit_residual: None,
            spread: None,
            stalled,
        });
    }

    let boundary = region.boundary();
    let ascent = Ascent::new(&boundary, opts);
    let ns = sizes(n_max);
    let chains: Vec<Vec<(Config, bool)>> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut out: Vec<(Config, bool)> = Vec::with_capacity(ns.len());
            for (k, &n) in ns.iter().enumerate() {
                let mut cfg = if k == 0 {
                    initial(&ascent, n, r, opts.seed)
                } else {
                    let mut c = out[k - 1].0.clone();
                    ascent.grow(&mut c, n);
                    c
                };
                let ok = ascent.ascend(&mut cfg);
                out.push((cfg, !ok));
            }
            out
        })
        .collect();

    let per_restart: Vec<f64> = chains
        .iter()
        .map(|chain| {
            let seq: Vec<(usize, f64)> = chain.iter().zip(&ns).map(|((c, _), &n)| (n, mean_log(&c.z).exp())).collect();
            extrapolate(tail(&seq, n_max)).0
        })
        .collect();

    let mut best: Vec<(Config, bool)> = (0..ns.len())
        .map(|k| best_of(chains.iter().map(|chain| chain[k].clone()).collect()))
        .collect();
    // A larger configuration thinned by greedy removal has d_n at least as
    // large, so any inversion in the sequence is repaired from above.
    for k in (1..ns.len()).rev() {
        if mean_log(&best[k].0.z) > mean_log(&best[k - 1].0.z) {
            let mut cfg = best[k].0.clone();
            ascent.shrink(&mut cfg, ns[k - 1]);
            let ok = ascent.ascend(&mut cfg);
            best[k - 1] = (cfg, best[k - 1].1 || !ok);
        }
    }
    let seq: Vec<(usize, f64)> = best.iter().zip(&ns).map(|((c, _), &n)| (n, mean_log(&c.z).exp())).collect();
    let (value, residual) = extrapolate(tail(&seq, n_max));
    let spread = per_restart.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - per_restart.iter().cloned().fold(f64::INFINITY, f64::min);
    let last = best.last().expect("nonempty");
    Ok(CapacityEstimate {
        value,
        method: Method::Fekete,
        n_points: Some(*ns.last().expect("nonempty")),
        energy: Some(mean_log(&last.0.z)),
        d_sequence: seq,
        fit_residual: Some(residual),
        spread: Some(spread),
        stalled: best.iter().any(|b| b.1),
    })
}

/// Swap search from greedy starts is not nested across `n`; clamp upward
/// inversions, which a thinning argument shows are attainable.
fn enforce_cloud_monotone(seq: &mut [(usize, f64)]) {
    for k in (1..seq.len()).rev() {
        if seq[k].1 > seq[k - 1].1 {
            seq[k - 1].1 = seq[k].1;
        }
    }
}
