use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::BoundsError;
use crate::gramian::gramian;
use crate::numerics::{CMatrix, Real, C64};
use crate::system::LinearSystem;

/// Largest `n` and `t` accepted by [`conjecture_scan`].
pub const SCAN_MAX_N: usize = 60;
pub const SCAN_MAX_T: usize = 20 * SCAN_MAX_N * SCAN_MAX_N;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Chebyshev,
    Equispaced,
    Random,
}

impl Placement {
    pub const ALL: [Placement; 3] = [Placement::Chebyshev, Placement::Equispaced, Placement::Random];

    fn eigenvalues(self, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self {
            Placement::Chebyshev => {
                (0..n).map(|j| ((2 * j + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos()).collect()
            }
            Placement::Equispaced if n == 1 => vec![0.0],
            Placement::Equispaced => (0..n).map(|j| -1.0 + 2.0 * j as f64 / (n - 1) as f64).collect(),
            Placement::Random => (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjectureRow {
    pub n: usize,
    pub t: usize,
    pub multiplier: f64,
    /// Largest `lambda_min(W(t))` over all trials and placements.
    pub lambda_min_max: f64,
    pub best_placement: Placement,
    /// Systems whose `lambda_min` stayed below the resolution floor; they count as `0`.
    pub unresolved: usize,
}

fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for q in &cols {
                let h: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= h * qi);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.iter().map(|x| x / norm).collect());
        }
    }
    cols
}

/// Real symmetric `A = Q diag(l) Q^T` with a random unit `b`.
fn scan_system(n: usize, placement: Placement, seed: u64) -> LinearSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = placement.eigenvalues(n, &mut rng);
    let q = random_orthogonal(n, &mut rng);
    let a = CMatrix::from_fn(n, n, crate::numerics::Precision::DOUBLE, |i, j| {
        C64::re_only((0..n).map(|r| q[r][i] * l[r] * q[r][j]).sum())
    })
    .hermitize();
    let mut b: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let norm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    b.iter_mut().for_each(|x| *x /= norm);
    LinearSystem::new(a, CMatrix::from_real(n, 1, &b).expect("n x 1")).expect("valid shapes")
}

fn system_seed(seed: u64, n: usize, placement: usize, trial: usize) -> u64 {
    seed ^ ((n as u64) << 40) ^ ((placement as u64) << 32) ^ trial as u64
}

/// Tabulates how large `lambda_min(W(t))` gets for single-input symmetric
/// systems with spectrum in `[-1,1]` at `t = round(multiplier n^2)`. The same
/// systems are used for every `t`, so each row is monotone in `t`.
pub fn conjecture_scan(
    n_list: &[usize],
    t_multipliers: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<ConjectureRow>, BoundsError> {
    if trials == 0 {
        return Err(BoundsError::InvalidArgument("need at least one trial".into()));
    }
    if let Some(&n) = n_list.iter().find(|&&n| n == 0 || n > SCAN_MAX_N) {
        return Err(BoundsError::InvalidArgument(format!("n = {n} outside 1..={SCAN_MAX_N}")));
    }
    if let Some(&m) = t_multipliers.iter().find(|&&m| !(m.is_finite() && m >= 0.0)) {
        return Err(BoundsError::InvalidArgument(format!("multiplier {m} must be finite and nonnegative")));
    }
    let mut rows = Vec::new();
    for &n in n_list {
        let ts: Vec<usize> = t_multipliers.iter().map(|m| (m * (n * n) as f64).round() as usize).collect();
        if let Some(&t) = ts.iter().find(|&&t| t > SCAN_MAX_T) {
            return Err(BoundsError::InvalidArgument(format!("t = {t} exceeds {SCAN_MAX_T}")));
        }
        let jobs: Vec<(usize, usize)> = (0..Placement::ALL.len()).flat_map(|p| (0..trials).map(move |t| (p, t))).collect();
        let results: Vec<Vec<Option<f64>>> = jobs
            .par_iter()
            .map(|&(p, trial)| {
                let sys = scan_system(n, Placement::ALL[p], system_seed(seed, n, p, trial));
                ts.iter()
                    .map(|&t| gramian(&sys, t).map(|r| r.resolved.then(|| r.lambda_min.to_f64())))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        for (ti, (&t, &mult)) in ts.iter().zip(t_multipliers).enumerate() {
            let mut best = (0.0, Placement::Chebyshev);
            let mut unresolved = 0;
            for (&(p, _), r) in jobs.iter().zip(&results) {
                match r[ti] {
                    Some(v) if v > best.0 => best = (v, Placement::ALL[p]),
                    Some(_) => {}
                    None => unresolved += 1,
                }
            }
            rows.push(ConjectureRow { n, t, multiplier: mult, lambda_min_max: best.0, best_placement: best.1, unresolved });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gramian::is_exactly_hermitian;

    #[test]
    fn placements() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = Placement::Chebyshev.eigenvalues(4, &mut rng);
        assert!((c[0] - (std::f64::consts::PI / 8.0).cos()).abs() < 1e-15);
        assert_eq!(Placement::Equispaced.eigenvalues(3, &mut rng), vec![-1.0, 0.0, 1.0]);
        assert!(Placement::Random.eigenvalues(50, &mut rng).iter().all(|x| x.abs() <= 1.0));
    }

    #[test]
    fn systems_are_symmetric_with_unit_input() {
        let sys = scan_system(6, Placement::Random, 3);
        assert!(is_exactly_hermitian(sys.a()));
        assert!((sys.b_fro() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn scan_rows() {
        let rows = conjecture_scan(&[4], &[0.1, 2.0, 3.0], 2, 1).unwrap();
        assert_eq!(rows.len(), 3);
        // t = 2 < t_min = 3.
        assert_eq!(rows[0].t, 2);
        assert_eq!(rows[0].lambda_min_max, 0.0);
        assert!(rows[1].lambda_min_max > 0.0);
        assert!(rows[2].lambda_min_max >= rows[1].lambda_min_max);
    }

    #[test]
    fn chebyshev_at_long_horizon() {
        let rows = conjecture_scan(&[4], &[62.5], 1, 5).unwrap();
        assert_eq!(rows[0].t, 1000);
        assert!(rows[0].lambda_min_max > 0.0);
        assert!(conjecture_scan(&[61], &[1.0], 1, 0).is_err());
        assert!(conjecture_scan(&[60], &[21.0], 1, 0).is_err());
    }
}
