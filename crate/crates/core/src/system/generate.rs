use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{LinearSystem, SystemError};
use crate::capacity::Region;
use crate::numerics::{dot, vec_norm, CMatrix, Precision, C64};

/// Input of the test-system generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub n: usize,
    pub k: usize,
    pub eigenvalue_region: Region,
    #[serde(default = "one")]
    pub target_cond_v: f64,
    #[serde(default)]
    pub hermitian: bool,
    /// Eigenvalues placed in `[-1,1]` (Hermitian mode only; default `n`).
    #[serde(default)]
    pub stable_count: Option<usize>,
    pub seed: u64,
    /// `||B||_F` after scaling (default 1).
    #[serde(default)]
    pub b_fro: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl SystemSpec {
    pub fn new(n: usize, k: usize, eigenvalue_region: Region, seed: u64) -> Self {
        SystemSpec { n, k, eigenvalue_region, target_cond_v: 1.0, hermitian: false, stable_count: None, seed, b_fro: None }
    }

    pub fn with_cond(mut self, target: f64) -> Self {
        self.target_cond_v = target;
        self
    }

    pub fn hermitian(mut self, stable_count: usize) -> Self {
        self.hermitian = true;
        self.stable_count = Some(stable_count);
        self
    }

    pub fn validate(&self) -> Result<(), SystemError> {
        let bad = |m: String| Err(SystemError::InfeasibleSpec(m));
        if self.n == 0 || self.k == 0 || self.k > self.n {
            return bad(format!("need 1 <= k <= n, got n = {}, k = {}", self.n, self.k));
        }
        if !(self.target_cond_v.is_finite() && self.target_cond_v >= 1.0) {
            return bad(format!("target cond(V) must be >= 1, got {}", self.target_cond_v));
        }
        if let Some(b) = self.b_fro {
            if !(b.is_finite() && b > 0.0) {
                return bad(format!("||B||_F must be positive, got {b}"));
            }
        }
        self.eigenvalue_region.validate().map_err(|e| SystemError::InfeasibleSpec(e.to_string()))?;
        if self.hermitian {
            if self.target_cond_v != 1.0 {
                return bad("Hermitian systems have cond(V) = 1".into());
            }
            match self.eigenvalue_region.real_extent() {
                Some((lo, hi)) if lo >= -1.0 - 1e-12 && hi <= 1.0 + 1e-12 => {}
                Some(_) => return bad("stable eigenvalues must come from a subset of [-1,1]".into()),
                None => return bad("Hermitian mode needs a real eigenvalue region".into()),
            }
            if self.stable_count.is_some_and(|m| m > self.n) {
                return bad(format!("stable count exceeds n = {}", self.n));
            }
        } else if self.stable_count.is_some() {
            return bad("stable count applies to Hermitian mode only".into());
        }
        Ok(())
    }
}

/// A generated system with the eigenvalues it was built from.
#[derive(Clone, Debug)]
pub struct Generated {
    pub system: LinearSystem,
    pub eigenvalues: Vec<C64>,
    /// Eigenvector matrix used in the construction (`A = X D X^-1`).
    pub x: CMatrix,
}

pub fn generate(spec: &SystemSpec) -> Result<LinearSystem, SystemError> {
    Ok(generate_with_eigenvalues(spec)?.system)
}

/// Builds `A = X D X^-1` with `X = U diag(s) F P Phi`: `U` Haar unitary, `s`
/// geometric from 1 to the target condition number, `F` the unitary DFT,
/// `P` a permutation and `Phi` random phases. Every column of `X` then has
/// the same norm, so `cond(X)` equals the target even after the columns are
/// normalized.
pub fn generate_with_eigenvalues(spec: &SystemSpec) -> Result<Generated, SystemError> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let region = &spec.eigenvalue_region;

    let eigenvalues: Vec<C64> = if spec.hermitian {
        let m = spec.stable_count.unwrap_or(n);
        let mut vals: Vec<C64> = (0..m).map(|_| C64::re_only(region.sample_uniform(&mut rng).re)).collect();
        for _ in m..n {
            let magnitude = 2.0 - rng.random::<f64>();
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            vals.push(C64::re_only(sign * magnitude));
        }
        vals
    } else {
        (0..n).map(|_| region.sample_uniform(&mut rng)).collect()
    };

    let u = random_unitary(n, &mut rng);
    let s: Vec<f64> = (0..n)
        .map(|i| if n == 1 { 1.0 } else { spec.target_cond_v.powf(i as f64 / (n - 1) as f64) })
        .collect();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let phases: Vec<C64> = (0..n).map(|_| C64::from_polar(1.0, 2.0 * PI * rng.random::<f64>())).collect();
    let dft = |r: usize, c: usize| C64::from_polar(1.0 / (n as f64).sqrt(), -2.0 * PI * ((r * c) % n) as f64 / n as f64);

    // X[:, j] = U diag(s) F[:, perm[j]] phase[j];  X^-1[j, :] = conj(phase[j]) F[:, perm[j]]^* diag(1/s) U^*.
    let f_cols: Vec<Vec<C64>> = (0..n).map(|j| (0..n).map(|r| dft(r, perm[j])).collect()).collect();
    let x = CMatrix::from_fn(n, n, Precision::DOUBLE, |i, j| {
        let mut acc = C64::ZERO;
        for r in 0..n {
            acc = acc + u[(i, r)] * C64::re_only(s[r]) * f_cols[j][r];
        }
        acc * phases[j]
    });
    let x_inv = CMatrix::from_fn(n, n, Precision::DOUBLE, |j, i| {
        let mut acc = C64::ZERO;
        for r in 0..n {
            acc = acc + f_cols[j][r].conj() * C64::re_only(1.0 / s[r]) * u[(i, r)].conj();
        }
        acc * phases[j].conj()
    });
    let xd = CMatrix::from_fn(n, n, Precision::DOUBLE, |i, j| x[(i, j)] * eigenvalues[j]);
    let mut a = xd.mul(&x_inv)?;
    if spec.hermitian {
        a = a.hermitize();
    }

    let k = spec.k;
    let mut b = CMatrix::from_fn(n, k, Precision::DOUBLE, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::c(re, im)
    });
    let scale = spec.b_fro.unwrap_or(1.0) / b.fro_norm();
    b = b.scale(&scale);

    Ok(Generated { system: LinearSystem::new(a, b)?, eigenvalues, x })
}

/// Haar-distributed unitary: Gram-Schmidt (two passes) on a complex Gaussian matrix.
pub fn random_unitary<G: Rng + ?Sized>(n: usize, rng: &mut G) -> CMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<C64> = (0..n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                C64::c(re, im)
            })
            .collect();
        for _ in 0..2 {
            for q in &cols {
                let h = dot(q, &v, Precision::DOUBLE);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi = *vi - h * *qi;
                }
            }
        }
        let norm = vec_norm(&v, Precision::DOUBLE);
        if norm > 1e-8 {
            cols.push(v.iter().map(|z| z.scale(&(1.0 / norm))).collect());
        }
    }
    CMatrix::from_columns(&cols, n, Precision::DOUBLE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::cond2;
    use crate::system::diagonalize;

    #[test]
    fn singleton_region_gives_scalar_matrix() {
        let spec = SystemSpec::new(3, 1, Region::point(C64::re_only(0.5)), 7).hermitian(3);
        let sys = generate(&spec).unwrap();
        let d = diagonalize(sys.a()).unwrap();
        assert!(d.eigenvalues.iter().all(|z| (z.re - 0.5).abs() < 1e-14));
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 0.5 } else { 0.0 };
                assert!((sys.a()[(i, j)] - C64::re_only(want)).abs() < 1e-14);
            }
        }
        assert!((sys.b_fro() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn disk_with_condition_target() {
        let spec = SystemSpec::new(8, 1, Region::disk(0.0, 0.0, 0.9), 11).with_cond(10.0);
        let g = generate_with_eigenvalues(&spec).unwrap();
        let d = diagonalize(g.system.a()).unwrap();
        assert!(d.eigenvalues.iter().all(|z| z.abs() <= 0.9 + 1e-12));
        assert!((5.0..=20.0).contains(&d.cond_v), "{}", d.cond_v);
        assert!((cond2(&g.x).unwrap() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn deterministic_in_seed() {
        let spec = SystemSpec::new(6, 2, Region::interval(-0.5, 0.5), 42).with_cond(100.0);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = SystemSpec { seed: 43, ..spec.clone() };
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn hermitian_mode() {
        let spec = SystemSpec::new(10, 2, Region::interval(-1.0, 1.0), 3).hermitian(4);
        let g = generate_with_eigenvalues(&spec).unwrap();
        assert_eq!(g.system.a().hermitian_defect(), 0.0);
        let stable = g.eigenvalues.iter().filter(|z| z.re.abs() <= 1.0).count();
        assert_eq!(stable, 4);
        assert!(g.eigenvalues.iter().all(|z| z.im == 0.0 && z.re.abs() <= 2.0));
        let d = diagonalize(g.system.a()).unwrap();
        for z in &d.eigenvalues {
            assert!(g.eigenvalues.iter().any(|w| (z - w).abs() < 1e-10));
        }
    }

    #[test]
    fn infeasible_specs() {
        let disk = SystemSpec::new(4, 1, Region::disk(0.0, 0.0, 0.5), 0).hermitian(4);
        assert!(matches!(generate(&disk), Err(SystemError::InfeasibleSpec(_))));
        let wide = SystemSpec::new(4, 1, Region::interval(-2.0, 2.0), 0).hermitian(4);
        assert!(generate(&wide).is_err());
        let cond = SystemSpec::new(4, 1, Region::interval(-1.0, 1.0), 0).hermitian(2).with_cond(3.0);
        assert!(generate(&cond).is_err());
        assert!(generate(&SystemSpec::new(2, 3, Region::disk(0.0, 0.0, 0.5), 0)).is_err());
        assert!(generate(&SystemSpec::new(2, 1, Region::disk(0.0, 0.0, 0.5), 0).with_cond(0.5)).is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = SystemSpec::new(5, 1, Region::disk(0.0, 0.0, 0.8), 9).with_cond(10.0);
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<SystemSpec>(&text).unwrap(), spec);
    }
}
