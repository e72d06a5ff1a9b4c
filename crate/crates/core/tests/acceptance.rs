//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gramian_bounds::approx::err_region;
use gramian_bounds::bounds::{
    dominance_chain, reproduce, thm2, verify_thm1, verify_thm2, BoundsError, ProofIdentities, THM2_DESK_N,
};
use gramian_bounds::capacity::{cap_closed_form, cap_estimate, polygon_area, Region, Shape};
use gramian_bounds::gramian::{control_energy, gramian_with, steer, worst_direction, GramianOptions};
use gramian_bounds::numerics::{vec_norm, Precision, Real, C64};
use gramian_bounds::system::{generate, t_min, SystemSpec};

const THM2_REL: f64 = 0.02;
const EQ1_REL: f64 = 0.01;
const EQ2_REL: f64 = 0.002;
const CAP_REL: f64 = 0.05;
const TREND_REL: f64 = 0.10;
const DISK_ABS: f64 = 1e-12;
const ENERGY_REL: f64 = 1e-6;
const STEER_REL: f64 = 1e-8;
const MONOTONE_REL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn ok(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    if took > limit {
        out.pass = false;
        out.detail.push_str(&format!("; runtime {took:?} over limit {limit:?}"));
    } else {
        out.detail.push_str(&format!("; {took:.2?}"));
    }
    out
}

fn criterion_1() -> Outcome {
    let (tq1, b1) = thm2(5000, 1, 99.0, 1.0).unwrap();
    let (tq2, b2) = thm2(5000, 1, 24.0, 1.0).unwrap();
    let d1 = (b1 - 1.03e-37).abs() / 1.03e-37;
    let d2 = (b2 - 1.58e-4).abs() / 1.58e-4;
    ok(
        d1 <= THM2_REL && tq1 >= 250_000.0 && d2 <= THM2_REL && tq2 >= 1e6,
        format!("q=99: {b1:.4e} (dev {d1:.4}), t_quad {tq1:.1}; q=24: {b2:.4e} (dev {d2:.4}), t_quad {tq2:.1}"),
    )
}

fn criterion_2() -> Outcome {
    let lines = reproduce();
    let (eq1, eq2) = (&lines[0], &lines[1]);
    ok(
        eq1.relative_deviation <= EQ1_REL && eq2.relative_deviation <= EQ2_REL && eq1.note.contains("inconsistent"),
        format!(
            "0.133 <- {:.5} (dev {:.4}), 0.552 <- {:.5} (dev {:.5}), discrepancy note attached",
            eq1.recomputed, eq1.relative_deviation, eq2.recomputed, eq2.relative_deviation
        ),
    )
}

fn criterion_3() -> Outcome {
    let specs = ["interval:-1,1", "disk:0,0,1", "ellipse:2,1", "twointervals:0.5,1", "halfdisk:1", "ngon:4,1"];
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for s in specs {
        let r: Region = s.parse().unwrap();
        let est = cap_estimate(&r, 40).unwrap().value;
        let exact = cap_closed_form(&r).unwrap();
        let rel = (est - exact).abs() / exact;
        worst = worst.max(rel);
        parts.push(format!("{s} {rel:.4}"));
    }
    ok(worst <= CAP_REL, format!("max relative error {worst:.4} [{}]", parts.join(", ")))
}

fn criterion_4() -> Outcome {
    let interval = Region::interval(-1.0, 1.0);
    let disk = Region::disk(0.0, 0.0, 0.7);
    let mut pass = true;
    let mut parts = Vec::new();
    for r in [&interval, &disk] {
        let e = err_region(30, r).unwrap();
        let root = e.error.powf(1.0 / 30.0);
        let cap = cap_closed_form(r).unwrap();
        let rel = (root - cap).abs() / cap;
        pass &= rel <= TREND_REL;
        parts.push(format!("{r}: Err^(1/30) {root:.5} vs cap {cap:.5} ({rel:.4})"));
    }
    let mut worst_excess = 0.0f64;
    for l in 1..=30 {
        let e = err_region(l, &disk).unwrap();
        let want = 0.7f64.powi(l as i32);
        let excess = (e.error - want).abs() - e.certified_gap;
        worst_excess = worst_excess.max(excess / want);
    }
    pass &= worst_excess <= DISK_ABS;
    parts.push(format!("disk |Err - r^l| beyond gap, relative: {worst_excess:.2e}"));
    ok(pass, parts.join("; "))
}

fn criterion_5() -> Outcome {
    let mut pairs = Vec::new();
    for n in 1..=120usize {
        let s = (n as f64).sqrt().ceil() as usize;
        let mut ms = vec![1, n, n.saturating_sub(1), n.saturating_sub(2), n / 2, n / 3, s, (3 * n) / 4];
        ms.retain(|&m| m >= 1 && m <= n);
        ms.sort_unstable();
        ms.dedup();
        pairs.extend(ms.into_iter().map(|m| (n, m)));
    }
    let even = pairs.iter().filter(|(n, m)| (n - m) % 2 == 0).count();
    let mut violations = Vec::new();
    for &(n, m) in &pairs {
        match dominance_chain(n, m) {
            Ok(row) if row.holds() => {}
            Ok(row) => violations.push(format!("({n},{m}): {} {} {}", row.phi_exact, row.tail, row.hoeffding)),
            Err(e) => violations.push(format!("({n},{m}): {e}")),
        }
    }
    ok(
        violations.is_empty() && pairs.len() >= 450,
        format!(
            "{} pairs ({even} with n-m even), {} violations{}",
            pairs.len(),
            violations.len(),
            violations.first().map_or(String::new(), |v| format!(", first {v}"))
        ),
    )
}

/// Random convex polygon of area 1 around a random centre.
fn area_one_polygon(rng: &mut ChaCha8Rng) -> Region {
    let sides = rng.random_range(3..=7);
    let mut angles: Vec<f64> = (0..sides).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    angles.sort_by(f64::total_cmp);
    let mut v: Vec<C64> = angles.iter().map(|&a| C64::from_polar(1.0, a)).collect();
    let area = polygon_area(&v).abs();
    if area < 0.3 {
        return area_one_polygon(rng);
    }
    let scale = 1.0 / area.sqrt();
    let centre = C64::c(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2));
    v.iter_mut().for_each(|z| *z = &z.scale(&scale) + &centre);
    Region::new(Shape::Polygon { vertices: v }).unwrap()
}

struct Thm1Summary {
    trials: usize,
    failures: Vec<String>,
    escalation_misses: usize,
    unresolved: usize,
    identity_failures: Vec<String>,
    max_ratio: f64,
}

fn thm1_trials() -> Thm1Summary {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7431);
    let mut s = Thm1Summary {
        trials: 200,
        failures: Vec::new(),
        escalation_misses: 0,
        unresolved: 0,
        identity_failures: Vec::new(),
        max_ratio: 0.0,
    };
    for trial in 0..s.trials {
        let n = rng.random_range(4..=30);
        let k = rng.random_range(1..=3);
        let cond = [1.0, 10.0, 100.0][trial % 3];
        let region = match rng.random_range(0..3) {
            0 => {
                let c = rng.random_range(-0.5..0.5);
                let h = rng.random_range(0.05..0.6);
                Region::interval(c - h, c + h)
            }
            1 => Region::disk(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3), rng.random_range(0.1..=0.9)),
            _ => area_one_polygon(&mut rng),
        };
        let seed = rng.random::<u64>();
        let spec = SystemSpec::new(n, k, region.clone(), seed).with_cond(cond);
        let label = format!("trial {trial} (n={n}, k={k}, cond={cond}, {region})");
        match verify_thm1(&spec, &region) {
            Ok(r) => {
                let lambda = r.empirical_value.unwrap();
                if r.holds != Some(true) {
                    s.failures.push(format!("{label}: {lambda:e} > {:e}", r.bound_value));
                }
                s.max_ratio = s.max_ratio.max(r.ratio.unwrap_or(0.0));
                if lambda < 1e-12 && r.precision_bits_used.unwrap() <= Precision::DOUBLE.bits() {
                    s.escalation_misses += 1;
                }
                match &r.proof {
                    Some(ProofIdentities::Thm1(p)) if p.holds => {}
                    other => s.identity_failures.push(format!("{label}: {other:?}")),
                }
            }
            Err(BoundsError::Unresolved { .. }) => {
                s.unresolved += 1;
                s.failures.push(format!("{label}: unresolved"));
            }
            Err(e) => s.failures.push(format!("{label}: {e}")),
        }
    }
    s
}

fn criterion_6(s: &Thm1Summary) -> Outcome {
    ok(
        s.failures.is_empty() && s.escalation_misses == 0 && s.unresolved == 0,
        format!(
            "{} trials, {} failures, {} unresolved, {} missed escalations, max ratio {:.3e}{}",
            s.trials,
            s.failures.len(),
            s.unresolved,
            s.escalation_misses,
            s.max_ratio,
            s.failures.first().map_or(String::new(), |f| format!(", first: {f}"))
        ),
    )
}

fn criterion_8(s: &Thm1Summary) -> Outcome {
    ok(
        s.identity_failures.is_empty() && s.failures.is_empty(),
        format!(
            "lambda_min(Q) = sigma_n(S)^2, ||S-L||_F^2 bound, rank(L) < n over {} trials: {} violations{}",
            s.trials,
            s.identity_failures.len(),
            s.identity_failures.first().map_or(String::new(), |f| format!(", first: {f}"))
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7432);
    let mut failures = Vec::new();
    let mut max_t = 0;
    let trials = 100;
    for trial in 0..trials {
        let n = rng.random_range(6..=THM2_DESK_N);
        let k = rng.random_range(1..=2);
        let m = rng.random_range((2 * k + 1).max(3)..=n);
        let q = [2.0, 4.0, 8.0][rng.random_range(0..3)];
        let (t_quad, _) = thm2(m, k, q, 1.0).unwrap();
        let t = (t_quad.floor() as usize).min(2000);
        max_t = max_t.max(t);
        let spec = SystemSpec::new(n, k, Region::interval(-1.0, 1.0), rng.random()).hermitian(m);
        match verify_thm2(&spec, q, t) {
            Ok(r) if r.holds == Some(true) => {}
            Ok(r) => failures.push(format!("trial {trial} (n={n}, m={m}, k={k}, q={q}, t={t}): {:?}", r.ratio)),
            Err(e) => failures.push(format!("trial {trial} (n={n}, m={m}, k={k}, q={q}, t={t}): {e}")),
        }
    }
    ok(
        failures.is_empty(),
        format!(
            "{trials} Hermitian trials up to t = {max_t}, {} failures{}",
            failures.len(),
            failures.first().map_or(String::new(), |f| format!(", first: {f}"))
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7439);
    let mut problems = Vec::new();
    let (mut worst_energy, mut worst_steer) = (0.0f64, 0.0f64);
    // Extended start so rounding stays far below the monotonicity tolerance.
    let monotone_opts = GramianOptions::starting_at(Precision::new(212).unwrap());
    for trial in 0..50 {
        let n = rng.random_range(2..=8);
        let k = rng.random_range(1..=2).min(n);
        let cond = [1.0, 10.0][trial % 2];
        let region = Region::disk(0.0, 0.0, rng.random_range(0.3..0.95));
        let sys = generate(&SystemSpec::new(n, k, region, rng.random()).with_cond(cond)).unwrap();
        let tm = t_min(n, k);
        let mut ts: Vec<usize> = (tm..tm + 4).chain([20, 50, 100, 199, 200]).filter(|&t| t <= 200).collect();
        ts.sort_unstable();
        ts.dedup();
        let mut prev: Option<f64> = None;
        for &t in &ts {
            let l = gramian_with(&sys, t, &monotone_opts).unwrap().lambda_min.to_f64();
            if let Some(p) = prev {
                if l < p * (1.0 - MONOTONE_REL) {
                    problems.push(format!("trial {trial}: lambda_min drops at t={t}: {p:e} -> {l:e}"));
                }
            }
            prev = Some(l);
        }
        let t = tm + 1 + trial % 5;
        let e = control_energy(&sys, t).unwrap();
        let w = worst_direction(&sys, t).unwrap();
        let rel = (w.energy - e).abs() / e;
        worst_energy = worst_energy.max(rel);
        let x0: Vec<C64> = (0..n).map(|_| C64::c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let xf: Vec<C64> = (0..n).map(|_| C64::c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let plan = steer(&sys, &x0, &xf, t).unwrap();
        let res = plan.target_residual / vec_norm(&xf, Precision::DOUBLE);
        worst_steer = worst_steer.max(res);
    }
    let pass = problems.is_empty() && worst_energy <= ENERGY_REL && worst_steer <= STEER_REL;
    ok(
        pass,
        format!(
            "50 systems: {} monotonicity drops, energy vs worst-direction rel {worst_energy:.2e}, steering residual rel {worst_steer:.2e}{}",
            problems.len(),
            problems.first().map_or(String::new(), |p| format!(", first: {p}"))
        ),
    )
}

fn criterion_10() -> Outcome {
    // Scope statement: the n = 10000, t = 1e6 experiments are out of reach and
    // are refused rather than attempted. Criteria 1 and 7 stand in for them.
    let spec = SystemSpec::new(10_000, 1, Region::interval(-1.0, 1.0), 0).hermitian(5000);
    let refused = matches!(verify_thm2(&spec, 99.0, 1_000_000), Err(BoundsError::InvalidArgument(_)));
    ok(
        refused,
        "full-scale empirical runs (n = 10000, t = 1e6) not reproducible at desk scale and refused; \
         substituted by formula reproduction (criterion 1) and desk-scale verification (criterion 7)",
    )
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |id: u32, out: Outcome| {
        all &= out.pass;
        println!("criterion {id:>2}: {} {}", if out.pass { "PASS" } else { "FAIL" }, out.detail);
    };
    report(1, timed(Duration::from_millis(1), criterion_1));
    report(2, timed(Duration::from_millis(1), criterion_2));
    report(3, timed(Duration::from_secs(60), criterion_3));
    report(4, timed(Duration::from_secs(300), criterion_4));
    report(5, timed(Duration::from_secs(600), criterion_5));
    let start = Instant::now();
    let summary = thm1_trials();
    let took = start.elapsed();
    let limit = Duration::from_secs(1800);
    let mut c6 = criterion_6(&summary);
    if took > limit {
        c6.pass = false;
    }
    c6.detail.push_str(&format!("; {took:.2?}"));
    report(6, c6);
    report(7, timed(Duration::from_secs(1800), criterion_7));
    report(8, criterion_8(&summary));
    report(9, timed(Duration::from_secs(300), criterion_9));
    report(10, criterion_10());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
