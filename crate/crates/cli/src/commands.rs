use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use gramian_bounds::approx::{err_capacity_trend, err_region};
use gramian_bounds::bounds::{
    conjecture_scan, reproduce, thm1_indicator, thm2, trial_rows_csv, verify_thm1_system_with, verify_thm1_with,
    verify_thm2_system_with, verify_thm2_with, BoundReport, BoundsError, TrialRow,
};
use gramian_bounds::capacity::{cap_closed_form, cap_estimate, curve_length_bound, diameter_bound, Region};
use gramian_bounds::gramian::{gramian_with, GramianOptions, GramianReport};
use gramian_bounds::numerics::{Precision, Real};
use gramian_bounds::system::{LinearSystem, SystemSpec};

use crate::args::{Command, RunConfig};

/// What a command produced, in every output form.
pub struct Artifact {
    pub json: Value,
    pub csv: String,
    /// Printed to stdout regardless of `--out`.
    pub text: Option<String>,
    /// Some bound check failed.
    pub violated: bool,
}

#[derive(Debug, Serialize)]
pub struct CliError {
    pub error: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl CliError {
    pub fn new(kind: &str, message: impl Into<String>) -> Self {
        CliError { error: kind.into(), message: message.into(), seed: None }
    }

    fn bounds(e: impl Into<BoundsError>) -> Self {
        let e = e.into();
        CliError::new(e.kind(), e.to_string())
    }
}

fn sci(x: f64) -> String {
    gramian_bounds::text::sci(x)
}

fn csv_table(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = format!("{header}\n");
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

fn load_system(path: &Path) -> Result<LinearSystem, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::new("Io", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::new("InvalidInput", format!("{}: {e}", path.display())))
}

pub fn run(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let prec = Precision::new(cfg.global.precision_bits)
        .map_err(|e| CliError::new("InvalidArgument", format!("--precision-bits: {e}")))?;
    let opts = GramianOptions::starting_at(prec);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.global.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::new("InvalidArgument", format!("--jobs: {e}")))?;
    let seed = cfg.global.seed;
    match &cfg.command {
        Command::Reproduce => Ok(cmd_reproduce()),
        Command::Capacity { region, n_max } => cmd_capacity(region, *n_max),
        Command::Err { region, l, trend } => cmd_err(region, *l, *trend),
        Command::Gramian { system, t, series } => cmd_gramian(&load_system(system)?, *t, *series, &opts),
        Command::VerifyThm1 { region, system, eigen_region, n, k, cond, trials } => {
            let reports = match system {
                Some(path) => {
                    let sys = load_system(path)?;
                    let mut r = verify_thm1_system_with(&sys, region, &opts).map_err(CliError::bounds)?;
                    r.seed = Some(seed);
                    vec![(sys.n(), r)]
                }
                None => {
                    let eig = eigen_region.as_ref().unwrap_or(region);
                    batch(&pool, seed, *trials, |s| {
                        let spec = SystemSpec::new(*n, *k, eig.clone(), s).with_cond(*cond);
                        verify_thm1_with(&spec, region, &opts).map(|r| (*n, r))
                    })?
                }
            };
            Ok(verify_artifact("verify-thm1", prec, reports))
        }
        Command::VerifyThm2 { q, t, system, n, m, k, trials } => {
            let horizon = |m: usize, k: usize| -> Result<usize, CliError> {
                match t {
                    Some(t) => Ok(*t),
                    None => {
                        let (tq, _) = thm2(m, k, *q, 1.0).map_err(CliError::bounds)?;
                        Ok((tq.floor() as usize).min(2000))
                    }
                }
            };
            let reports = match system {
                Some(path) => {
                    let sys = load_system(path)?;
                    let stable = stable_count(&sys)?;
                    let t = horizon(stable, sys.k())?;
                    let mut r = verify_thm2_system_with(&sys, *q, t, &opts).map_err(CliError::bounds)?;
                    r.seed = Some(seed);
                    vec![(sys.n(), r)]
                }
                None => {
                    let m = m.unwrap_or(*n);
                    let t = horizon(m, *k)?;
                    batch(&pool, seed, *trials, |s| {
                        let spec = SystemSpec::new(*n, *k, Region::interval(-1.0, 1.0), s).hermitian(m);
                        verify_thm2_with(&spec, *q, t, &opts).map(|r| (*n, r))
                    })?
                }
            };
            Ok(verify_artifact("verify-thm2", prec, reports))
        }
        Command::Conjecture { n, multipliers, trials } => {
            let rows = pool.install(|| conjecture_scan(n, multipliers, *trials, seed)).map_err(CliError::bounds)?;
            let csv = csv_table(
                "n,t,multiplier,lambda_min_max,best_placement,unresolved",
                rows.iter().map(|r| {
                    let placement = serde_json::to_value(r.best_placement).expect("enum serializes");
                    format!(
                        "{},{},{},{},{},{}",
                        r.n,
                        r.t,
                        r.multiplier,
                        sci(r.lambda_min_max),
                        placement.as_str().unwrap_or_default(),
                        r.unresolved
                    )
                }),
            );
            Ok(Artifact {
                json: json!({ "command": "conjecture", "seed": seed, "exploratory": true, "rows": rows }),
                csv,
                text: None,
                violated: false,
            })
        }
    }
}

fn stable_count(sys: &LinearSystem) -> Result<usize, CliError> {
    let values = gramian_bounds::numerics::eigvals_hermitian(&sys.a().hermitize()).map_err(CliError::bounds)?;
    Ok(values.iter().filter(|x| x.abs() <= 1.0 + 64.0 * f64::EPSILON).count())
}

/// Runs `trials` seeds on the pool, results in seed order. The first failure
/// (in seed order) aborts the batch.
fn batch<T: Send>(
    pool: &rayon::ThreadPool,
    seed: u64,
    trials: usize,
    f: impl Fn(u64) -> Result<T, BoundsError> + Sync,
) -> Result<Vec<T>, CliError> {
    if trials == 0 {
        return Err(CliError::new("InvalidArgument", "--trials must be at least 1"));
    }
    let seeds: Vec<u64> = (0..trials as u64).map(|i| seed.wrapping_add(i)).collect();
    let results: Vec<(u64, Result<T, BoundsError>)> = pool.install(|| seeds.par_iter().map(|&s| (s, f(s))).collect());
    results
        .into_iter()
        .map(|(s, r)| {
            r.map_err(|e| {
                let mut err = CliError::bounds(e);
                err.seed = Some(s);
                err
            })
        })
        .collect()
}

fn verify_artifact(name: &str, prec: Precision, reports: Vec<(usize, BoundReport)>) -> Artifact {
    let all_hold = reports.iter().all(|(_, r)| r.holds == Some(true) && r.proof.as_ref().is_none_or(|p| p.holds()));
    let rows: Vec<TrialRow> = reports.iter().filter_map(|(n, r)| TrialRow::from_report(*n, r)).collect();
    let indicators: Vec<BoundReport> = reports.iter().filter_map(|(_, r)| thm1_indicator(r)).collect();
    let mut json = json!({
        "command": name,
        "precision_bits": prec.bits(),
        "all_hold": all_hold,
        "reports": reports.iter().map(|(_, r)| r).collect::<Vec<_>>(),
    });
    if !indicators.is_empty() {
        json["asymptotic_indicators"] = serde_json::to_value(&indicators).expect("reports serialize");
    }
    Artifact { json, csv: trial_rows_csv(&rows), text: None, violated: !all_hold }
}

fn cmd_reproduce() -> Artifact {
    let lines = reproduce();
    let mut text = String::new();
    for c in &lines {
        let _ = writeln!(
            text,
            "{:<24} reference {:.3e}  recomputed {:.4e}  deviation {:.2}%  ({})",
            c.label,
            c.reference,
            c.recomputed,
            100.0 * c.relative_deviation,
            c.note
        );
    }
    let csv = csv_table(
        "label,reference,recomputed,relative_deviation",
        lines.iter().map(|c| format!("{},{},{},{}", c.label, sci(c.reference), sci(c.recomputed), sci(c.relative_deviation))),
    );
    Artifact { json: json!({ "command": "reproduce", "values": lines }), csv, text: Some(text), violated: false }
}

fn cmd_capacity(region: &Region, n_max: usize) -> Result<Artifact, CliError> {
    let closed = cap_closed_form(region);
    let est = cap_estimate(region, n_max).map_err(CliError::bounds)?;
    let value = closed.unwrap_or(est.value);
    let json = json!({
        "command": "capacity",
        "region": region.to_string(),
        "value": sci(value),
        "closed_form": closed.map(sci),
        "estimate": est,
        "diameter_bound": sci(diameter_bound(region)),
        "curve_length_bound": curve_length_bound(region).map(sci),
    });
    let csv = csv_table("n,d_n", est.d_sequence.iter().map(|(n, d)| format!("{n},{}", sci(*d))));
    Ok(Artifact { json, csv, text: None, violated: false })
}

fn cmd_err(region: &Region, l: usize, trend: bool) -> Result<Artifact, CliError> {
    let r = err_region(l, region).map_err(CliError::bounds)?;
    let mut json = json!({ "command": "err", "region": region.to_string(), "result": r });
    let csv = if trend {
        let pairs = err_capacity_trend(region, l).map_err(CliError::bounds)?;
        json["trend"] = pairs.iter().map(|(l, v)| json!([l, sci(*v)])).collect();
        csv_table("l,err_root", pairs.iter().map(|(l, v)| format!("{l},{}", sci(*v))))
    } else {
        csv_table("l,error,certified_gap", [format!("{l},{},{}", sci(r.error), sci(r.certified_gap))])
    };
    Ok(Artifact { json, csv, text: None, violated: false })
}

fn gramian_row(r: &GramianReport) -> String {
    format!(
        "{},{},{},{},{}",
        r.t,
        sci(r.lambda_min.to_f64()),
        sci(r.lambda_max.to_f64()),
        r.precision_bits_used,
        r.resolved
    )
}

fn cmd_gramian(sys: &LinearSystem, t: usize, series: bool, opts: &GramianOptions) -> Result<Artifact, CliError> {
    let horizons: Vec<usize> = if series { (0..=t).collect() } else { vec![t] };
    let reports: Vec<GramianReport> =
        horizons.iter().map(|&h| gramian_with(sys, h, opts)).collect::<Result<_, _>>().map_err(CliError::bounds)?;
    let last = reports.last().expect("at least one horizon");
    let json = json!({
        "command": "gramian",
        "n": sys.n(),
        "k": sys.k(),
        "report": last,
        "energy_next_step": sci(last.energy()),
        "series": if series { serde_json::to_value(&reports).expect("reports serialize") } else { Value::Null },
    });
    let csv = csv_table("t,lambda_min,lambda_max,precision_bits,resolved", reports.iter().map(gramian_row));
    Ok(Artifact { json, csv, text: None, violated: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use gramian_bounds::bounds::{BoundName, InputsDigest};

    fn report(bound: f64, empirical: f64) -> BoundReport {
        let digest = InputsDigest { t: Some(3), k: Some(1), ..Default::default() };
        BoundReport::formula(BoundName::Thm2, bound, digest).with_empirical(empirical)
    }

    #[test]
    fn violated_trial_marks_artifact() {
        let p = Precision::DOUBLE;
        let ok = verify_artifact("verify-thm2", p, vec![(4, report(1.0, 0.5))]);
        assert!(!ok.violated);
        let bad = verify_artifact("verify-thm2", p, vec![(4, report(1.0, 0.5)), (4, report(1.0, 2.0))]);
        assert!(bad.violated);
        assert_eq!(bad.json["all_hold"], false);
        assert!(bad.csv.lines().nth(2).unwrap().ends_with(",false"));
    }

    #[test]
    fn empty_batch_is_rejected() {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let r = batch(&pool, 0, 0, |_| Ok(()));
        assert_eq!(r.unwrap_err().error, "InvalidArgument");
    }
}
