use serde::{Deserialize, Serialize};

use super::{thm1_capacity, thm1_nonasymptotic, thm2, BoundName, BoundReport, BoundsError, InputsDigest};
use crate::approx::err_region;
use crate::capacity::{cap_closed_form, Region};
use crate::gramian::{gramian_with, gramian_matrix_at, GramianOptions, resolution_floor, spectral_gramian_at, GramianReport};
use crate::numerics::{
    eigvals_hermitian, least_squares, singular_values, vec_norm, BigFloat, Complex, Matrix, Precision, Real, C64,
};
use crate::system::{diagonalize, diagonalize_at, generate_with_eigenvalues, t_min, LinearSystem, SystemSpec};

/// Largest state dimension for clustering-bound verification.
pub const THM1_DESK_N: usize = 40;
/// Largest state dimension and horizon for Hermitian-bound verification.
pub const THM2_DESK_N: usize = 60;
pub const THM2_DESK_T: usize = 5000;

/// Relative slack on the proof inequalities, for rounding at the working precision.
const IDENTITY_SLACK: f64 = 1e-9;
/// Required agreement of `lambda_min(Q)` and `sigma_n(S)^2`.
const Q_VS_S_TOLERANCE: f64 = 1e-6;
/// `sigma_j(L) <= 2^(RANK_BITS - p) sigma_1(L)` counts as zero.
const RANK_BITS: i64 = 24;

/// Numbers along the proof chains, recomputed for one system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProofIdentities {
    Thm1(Thm1Identities),
    Thm2(Thm2Intermediate),
}

impl ProofIdentities {
    pub fn holds(&self) -> bool {
        match self {
            ProofIdentities::Thm1(p) => p.holds,
            ProofIdentities::Thm2(p) => p.holds,
        }
    }
}

/// With `V A V^-1 = D`, `Z = VB`, `S = [Z, DZ, ..., D^t_min Z]`, `Q = S S^*`,
/// and `L` equal to `S` except that the last block column is replaced by its
/// projection onto the lower Krylov blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thm1Identities {
    pub precision_bits: u32,
    pub lambda_min_q: f64,
    pub sigma_n_s_sq: f64,
    /// `|lambda_min(Q) / sigma_n(S)^2 - 1|`.
    pub q_vs_s_relative: f64,
    pub s_minus_l_fro_sq: f64,
    /// `sum_i ||(D^t - p(D)) z_i||^2` with the region polynomial `p`.
    pub poly_residual_sq: f64,
    /// `Err^2 ||V||_2^2 ||B||_F^2`.
    pub s_minus_l_bound: f64,
    pub rank_l: usize,
    pub rank_l_max: usize,
    pub lambda_min_w: f64,
    /// `||V^-1||_2^2 lambda_min(Q)`.
    pub transfer_bound: f64,
    pub holds: bool,
}

/// `lambda_min(W(t)) <= lambda_min(G_ss)`, with `G_ss` the principal block of
/// the Gramian in the eigenbasis of `A` on the stable eigenvalues.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thm2Intermediate {
    pub stable_count: usize,
    pub lambda_min_stable_block: f64,
    pub stable_block_bits: u32,
    pub holds: bool,
}

fn check_desk(n: usize, limit: usize) -> Result<(), BoundsError> {
    if n > limit {
        return Err(BoundsError::InvalidArgument(format!("n = {n} exceeds the desk-scale limit {limit}")));
    }
    Ok(())
}

fn contained(region: &Region, eigenvalues: &[C64]) -> Result<(), BoundsError> {
    let tol = 1e-9 * region.diameter().max(1.0);
    match eigenvalues.iter().find(|z| !region.contains(**z, tol)) {
        Some(z) => Err(BoundsError::HypothesisViolated(format!("eigenvalue {} {:+}i lies outside the region", z.re, z.im))),
        None => Ok(()),
    }
}

fn resolved(report: GramianReport) -> Result<GramianReport, BoundsError> {
    if report.resolved {
        Ok(report)
    } else {
        Err(BoundsError::Unresolved { bits: report.precision_bits_used })
    }
}

/// Generates the system of `spec` and verifies the clustering bound on `region`.
pub fn verify_thm1(spec: &SystemSpec, region: &Region) -> Result<BoundReport, BoundsError> {
    verify_thm1_with(spec, region, &GramianOptions::default())
}

/// [`verify_thm1`] with an explicit precision ladder for the Gramian.
pub fn verify_thm1_with(spec: &SystemSpec, region: &Region, opts: &GramianOptions) -> Result<BoundReport, BoundsError> {
    spec.validate()?;
    check_desk(spec.n, THM1_DESK_N)?;
    let generated = generate_with_eigenvalues(spec)?;
    contained(region, &generated.eigenvalues)?;
    let mut report = verify_thm1_system_with(&generated.system, region, opts)?;
    report.seed = Some(spec.seed);
    Ok(report)
}

/// `lambda_min(W(t_min))` against `cond(V)^2 Err^2 ||B||_F^2`. `Err` is the
/// solver's sup error plus its certified gap, and at least the residual of the
/// fitted polynomial at the eigenvalues themselves.
pub fn verify_thm1_system(sys: &LinearSystem, region: &Region) -> Result<BoundReport, BoundsError> {
    verify_thm1_system_with(sys, region, &GramianOptions::default())
}

pub fn verify_thm1_system_with(sys: &LinearSystem, region: &Region, opts: &GramianOptions) -> Result<BoundReport, BoundsError> {
    let n = sys.n();
    check_desk(n, THM1_DESK_N)?;
    let diag = diagonalize(sys.a())?;
    let eigenvalues: Vec<C64> = diag.eigenvalues.clone();
    contained(region, &eigenvalues)?;
    let t = t_min(n, sys.k());
    let gram = resolved(gramian_with(sys, t, opts)?)?;

    let fit = if t == 0 { None } else { Some(err_region(t, region)?) };
    let err_used = match &fit {
        None => 1.0,
        Some(f) => {
            let at_eigs = eigenvalues.iter().filter_map(|z| f.residual(*z)).map(|r| r.abs()).fold(0.0, f64::max);
            (f.error + f.certified_gap).max(at_eigs)
        }
    };

    let identities = thm1_identities(sys, t, err_used, &gram, fit.as_ref())?;
    let cond_v = diag.cond_v.max(identities.1);
    let bound = thm1_nonasymptotic(cond_v, sys.b_fro(), err_used);
    let digest = InputsDigest {
        cond_v: Some(cond_v),
        b_fro: Some(sys.b_fro()),
        t: Some(t),
        k: Some(sys.k()),
        err: Some(err_used),
        cap: cap_closed_form(region),
        ..Default::default()
    };
    let mut report = BoundReport::formula(BoundName::Thm1Nonasymptotic, bound, digest).with_empirical(gram.lambda_min.to_f64());
    report.precision_bits_used = Some(gram.precision_bits_used);
    report.proof = Some(ProofIdentities::Thm1(identities.0));
    Ok(report)
}

/// The capacity form as an indicator next to a verified system.
pub fn thm1_indicator(report: &BoundReport) -> Option<BoundReport> {
    let d = &report.inputs_digest;
    let (cap, t, cond, bfro) = (d.cap?, d.t?, d.cond_v?, d.b_fro?);
    let value = thm1_capacity(cap, t, cond, bfro);
    Some(BoundReport::formula(BoundName::Thm1Capacity, value, d.clone()))
}

fn spectral_norm(m: &Matrix<BigFloat>) -> Result<BigFloat, BoundsError> {
    Ok(singular_values(m)?.swap_remove(0))
}

/// Recomputes the proof chain at a precision above the one that resolved
/// `lambda_min(W)`. Also returns `cond(V)` measured at that precision.
fn thm1_identities(
    sys: &LinearSystem,
    t: usize,
    err_used: f64,
    gram: &GramianReport,
    fit: Option<&crate::approx::MinimaxResult>,
) -> Result<(Thm1Identities, f64), BoundsError> {
    let n = sys.n();
    let k = sys.k();
    let prec = Precision::DOUBLE.ladder_at_least((2 * gram.precision_bits_used).max(106));
    let a = sys.a_at::<BigFloat>(prec);
    let diag = diagonalize_at(&a)?;
    let d = &diag.eigenvalues;
    let v = &diag.v;
    let z = v.mul(&sys.b_at::<BigFloat>(prec))?;

    // Krylov blocks of every input column.
    let mut s = Matrix::zeros(n, k * (t + 1), prec);
    for i in 0..k {
        let mut col = z.column(i);
        for j in 0..=t {
            if j > 0 {
                col = col.iter().zip(d).map(|(x, l)| x * l).collect();
            }
            s.set_column(j * k + i, &col);
        }
    }

    let mut l = s.clone();
    let mut s_minus_l_sq = BigFloat::zero(prec);
    for i in 0..k {
        let target = s.column(t * k + i);
        let projected = if t == 0 {
            vec![Complex::zero(prec); n]
        } else {
            let basis = Matrix::from_columns(&(0..t).map(|j| s.column(j * k + i)).collect::<Vec<_>>(), n, prec);
            let ls = least_squares(&basis, &target)?;
            basis.matvec(&ls.coefficients)?
        };
        let r: Vec<_> = target.iter().zip(&projected).map(|(y, p)| y - p).collect();
        let norm = vec_norm(&r, prec);
        s_minus_l_sq += norm.clone() * &norm;
        l.set_column(t * k + i, &projected);
    }

    // Same residual through the region polynomial: sum_i sum_j |r(lambda_j)|^2 |z_ji|^2.
    let mut poly_sq = 0.0;
    for j in 0..n {
        let rj = match fit {
            Some(f) => f.residual(d[j].to_c64()).map_or(1.0, |r| r.abs()),
            None => 1.0,
        };
        for i in 0..k {
            poly_sq += rj * rj * z[(j, i)].norm_sqr().to_f64();
        }
    }

    let sigma_s = singular_values(&s)?;
    let sigma_n_s = if sigma_s.len() >= n { sigma_s[n - 1].clone() } else { BigFloat::zero(prec) };
    let sigma_n_s_sq = sigma_n_s.clone() * &sigma_n_s;

    let w = gramian_matrix_at::<BigFloat>(sys, t, prec)?;
    let q = v.mul(&w)?.mul_adjoint(v)?.hermitize();
    let lambda_min_q = eigvals_hermitian(&q)?.swap_remove(0);
    let lambda_min_w = eigvals_hermitian(&w)?.swap_remove(0);

    let sigma_l = singular_values(&l)?;
    let cutoff = sigma_l[0].clone() * BigFloat::pow2(RANK_BITS - prec.bits() as i64, prec);
    let rank_l = sigma_l.iter().filter(|x| **x > cutoff).count();

    let v_norm = spectral_norm(v)?.to_f64();
    let v_inv_norm = spectral_norm(&diag.v_inv)?.to_f64();
    let bfro = sys.b_fro();
    let s_minus_l_bound = (err_used * v_norm * bfro).powi(2);
    let transfer_bound = v_inv_norm * v_inv_norm * lambda_min_q.to_f64();

    let q_vs_s_relative = ((lambda_min_q.clone() / &sigma_n_s_sq) - BigFloat::one(prec)).abs().to_f64();
    let sml = s_minus_l_sq.to_f64();
    let sn2 = sigma_n_s_sq.to_f64();
    let lw = lambda_min_w.to_f64();
    let up = 1.0 + IDENTITY_SLACK;
    let rank_l_max = k * t;
    let holds = q_vs_s_relative <= Q_VS_S_TOLERANCE
        && sn2 <= sml * up
        && sml <= poly_sq * up
        && poly_sq <= s_minus_l_bound * up
        && rank_l <= rank_l_max
        && rank_l < n
        && lw <= transfer_bound * up;
    let ids = Thm1Identities {
        precision_bits: prec.bits(),
        lambda_min_q: lambda_min_q.to_f64(),
        sigma_n_s_sq: sn2,
        q_vs_s_relative,
        s_minus_l_fro_sq: sml,
        poly_residual_sq: poly_sq,
        s_minus_l_bound,
        rank_l,
        rank_l_max,
        lambda_min_w: lw,
        transfer_bound,
        holds,
    };
    Ok((ids, v_norm * v_inv_norm))
}

fn stable_count_of(sys: &LinearSystem) -> Result<(usize, Vec<f64>), BoundsError> {
    if !sys.a().is_hermitian() {
        return Err(BoundsError::HypothesisViolated("A must be Hermitian".into()));
    }
    let values = eigvals_hermitian(&sys.a().hermitize())?;
    let limit = 1.0 + 64.0 * f64::EPSILON;
    Ok((values.iter().filter(|x| x.abs() <= limit).count(), values))
}

/// Generates the Hermitian system of `spec` and verifies the Hermitian bound at `t`.
pub fn verify_thm2(spec: &SystemSpec, q: f64, t: usize) -> Result<BoundReport, BoundsError> {
    verify_thm2_with(spec, q, t, &GramianOptions::default())
}

/// [`verify_thm2`] with an explicit precision ladder for the Gramian.
pub fn verify_thm2_with(spec: &SystemSpec, q: f64, t: usize, opts: &GramianOptions) -> Result<BoundReport, BoundsError> {
    spec.validate()?;
    if !spec.hermitian {
        return Err(BoundsError::HypothesisViolated("system spec is not Hermitian".into()));
    }
    check_desk(spec.n, THM2_DESK_N)?;
    let m = spec.stable_count.unwrap_or(spec.n);
    thm2(m, spec.k, q, 1.0)?;
    let generated = generate_with_eigenvalues(spec)?;
    let mut report = verify_thm2_system_with(&generated.system, q, t, opts)?;
    report.seed = Some(spec.seed);
    Ok(report)
}

/// `lambda_min(W(t))` against `4 t_quad e^-q ||B||_F^2`, with `m` the number
/// of eigenvalues in `[-1,1]`.
pub fn verify_thm2_system(sys: &LinearSystem, q: f64, t: usize) -> Result<BoundReport, BoundsError> {
    verify_thm2_system_with(sys, q, t, &GramianOptions::default())
}

pub fn verify_thm2_system_with(sys: &LinearSystem, q: f64, t: usize, opts: &GramianOptions) -> Result<BoundReport, BoundsError> {
    check_desk(sys.n(), THM2_DESK_N)?;
    if t > THM2_DESK_T {
        return Err(BoundsError::InvalidArgument(format!("t = {t} exceeds the desk-scale limit {THM2_DESK_T}")));
    }
    let (m, values) = stable_count_of(sys)?;
    let (t_quad, bound) = thm2(m, sys.k(), q, sys.b_fro())?;
    if t as f64 > t_quad {
        return Err(BoundsError::HypothesisViolated(format!("t = {t} exceeds t_quad = {t_quad}")));
    }
    let gram = resolved(gramian_with(sys, t, opts)?)?;
    let stable: Vec<usize> = (0..values.len()).filter(|&i| values[i].abs() <= 1.0 + 64.0 * f64::EPSILON).collect();
    let (block, block_bits) = stable_block_lambda_min(sys, t, &stable)?;
    let lw = gram.lambda_min.to_f64();
    let up = 1.0 + IDENTITY_SLACK;
    let intermediate = Thm2Intermediate {
        stable_count: m,
        lambda_min_stable_block: block,
        stable_block_bits: block_bits,
        holds: lw <= block * up && block <= bound * (1.0 + super::HOLDS_SLACK),
    };
    let digest = InputsDigest {
        b_fro: Some(sys.b_fro()),
        t: Some(t),
        m: Some(m),
        k: Some(sys.k()),
        q: Some(q),
        t_quad: Some(t_quad),
        ..Default::default()
    };
    let mut report = BoundReport::formula(BoundName::Thm2, bound, digest).with_empirical(lw);
    report.precision_bits_used = Some(gram.precision_bits_used);
    report.proof = Some(ProofIdentities::Thm2(intermediate));
    Ok(report)
}

/// `lambda_min` of the stable principal block of `U^* W(t) U`, escalating
/// until it clears the resolution floor.
fn stable_block_lambda_min(sys: &LinearSystem, t: usize, stable: &[usize]) -> Result<(f64, u32), BoundsError> {
    let size = stable.len();
    if size == 0 {
        return Ok((f64::INFINITY, 53));
    }
    let mut last = None;
    for prec in Precision::new(106).expect("valid precision").ladder() {
        let (g, _) = spectral_gramian_at::<BigFloat>(sys, t, prec)?;
        let block = Matrix::from_fn(size, size, prec, |i, j| g[(stable[i], stable[j])].clone());
        let values = eigvals_hermitian(&block)?;
        let (lo, hi) = (values[0].clone(), values[size - 1].clone());
        let floor = resolution_floor(prec, t, size) * &hi;
        if (t + 1) * sys.k() < size {
            return Ok((0.0, prec.bits()));
        }
        if lo > floor {
            return Ok((lo.to_f64(), prec.bits()));
        }
        last = Some(prec.bits());
    }
    Err(BoundsError::Unresolved { bits: last.unwrap_or(Precision::MAX_BITS) })
}

/// One CSV row of a batch run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRow {
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub t: usize,
    #[serde(serialize_with = "sci17")]
    pub lambda_min: f64,
    #[serde(serialize_with = "sci17")]
    pub bound: f64,
    #[serde(serialize_with = "sci17")]
    pub ratio: f64,
    pub holds: bool,
}

fn sci17<S: serde::Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{x:.16e}"))
}

impl TrialRow {
    pub fn from_report(n: usize, report: &BoundReport) -> Option<Self> {
        let d = &report.inputs_digest;
        Some(TrialRow {
            seed: report.seed.unwrap_or(0),
            n,
            k: d.k?,
            t: d.t?,
            lambda_min: report.empirical_value?,
            bound: report.bound_value,
            ratio: report.ratio?,
            holds: report.holds?,
        })
    }
}

/// Rows as CSV with a header line.
pub fn trial_rows_csv(rows: &[TrialRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory CSV write");
    }
    if rows.is_empty() {
        w.write_record(["seed", "n", "k", "t", "lambda_min", "bound", "ratio", "holds"]).expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::CMatrix;

    #[test]
    fn interval_cluster_holds() {
        let spec = SystemSpec::new(12, 1, Region::interval(-0.5, 0.5), 1);
        let r = verify_thm1(&spec, &Region::interval(-0.5, 0.5)).unwrap();
        assert_eq!(r.holds, Some(true), "{r:?}");
        assert!(r.precision_bits_used.unwrap() > 53);
        let Some(ProofIdentities::Thm1(p)) = &r.proof else { panic!() };
        assert!(p.holds, "{p:?}");
        assert!(p.rank_l <= 11);
    }

    #[test]
    fn disk_with_two_inputs_holds() {
        let spec = SystemSpec::new(8, 2, Region::disk(0.0, 0.0, 0.8), 4).with_cond(10.0);
        let r = verify_thm1(&spec, &Region::disk(0.0, 0.0, 0.8)).unwrap();
        assert_eq!(r.holds, Some(true), "{r:?}");
        assert!(r.proof.as_ref().unwrap().holds(), "{r:?}");
        assert!((r.inputs_digest.cond_v.unwrap() - 10.0).abs() < 1e-6);
        let ind = thm1_indicator(&r).unwrap();
        assert!(ind.asymptotic_only);
    }

    #[test]
    fn shift_is_defective() {
        let mut e1 = vec![0.0; 5];
        e1[0] = 1.0;
        let sys = LinearSystem::new(CMatrix::lower_shift(5), CMatrix::from_real(5, 1, &e1).unwrap()).unwrap();
        let err = verify_thm1_system(&sys, &Region::disk(0.0, 0.0, 0.5)).unwrap_err();
        assert_eq!(err.kind(), "Defective");
    }

    #[test]
    fn full_input_rank_needs_no_fit() {
        let spec = SystemSpec::new(3, 3, Region::disk(0.0, 0.0, 0.5), 2);
        let r = verify_thm1(&spec, &Region::disk(0.0, 0.0, 0.5)).unwrap();
        assert_eq!(r.inputs_digest.t, Some(0));
        assert_eq!(r.inputs_digest.err, Some(1.0));
        assert_eq!(r.holds, Some(true));
    }

    #[test]
    fn region_must_contain_eigenvalues() {
        let spec = SystemSpec::new(6, 1, Region::disk(0.0, 0.0, 0.9), 3);
        let err = verify_thm1(&spec, &Region::disk(0.0, 0.0, 0.1)).unwrap_err();
        assert_eq!(err.kind(), "HypothesisViolated");
    }

    #[test]
    fn thm2_all_stable() {
        let spec = SystemSpec::new(24, 1, Region::interval(-1.0, 1.0), 7).hermitian(24);
        // t_quad = 22^2 / q >= 200 for q = 2.
        let r = verify_thm2(&spec, 2.0, 200).unwrap();
        assert_eq!(r.holds, Some(true), "{r:?}");
        assert!(r.proof.as_ref().unwrap().holds());
    }

    #[test]
    fn thm2_half_stable() {
        let spec = SystemSpec::new(30, 1, Region::interval(-1.0, 1.0), 9).hermitian(15);
        let (tq, _) = thm2(15, 1, 2.0, 1.0).unwrap();
        let r = verify_thm2(&spec, 2.0, tq.floor() as usize).unwrap();
        assert_eq!(r.holds, Some(true), "{r:?}");
        assert!(r.proof.as_ref().unwrap().holds(), "{r:?}");
    }

    #[test]
    fn thm2_hypotheses() {
        let spec = SystemSpec::new(6, 2, Region::interval(-1.0, 1.0), 1).hermitian(4);
        assert_eq!(verify_thm2(&spec, 2.0, 1).unwrap_err().kind(), "HypothesisViolated");
        let spec = SystemSpec::new(10, 1, Region::interval(-1.0, 1.0), 1).hermitian(10);
        assert_eq!(verify_thm2(&spec, 2.0, 40).unwrap_err().kind(), "HypothesisViolated");
        let spec = SystemSpec::new(10, 1, Region::disk(0.0, 0.0, 0.5), 1);
        assert_eq!(verify_thm2(&spec, 2.0, 1).unwrap_err().kind(), "HypothesisViolated");
    }

    #[test]
    fn csv_rows() {
        let spec = SystemSpec::new(4, 1, Region::disk(0.0, 0.0, 0.5), 11);
        let r = verify_thm1(&spec, &Region::disk(0.0, 0.0, 0.5)).unwrap();
        let row = TrialRow::from_report(4, &r).unwrap();
        let text = trial_rows_csv(&[row]);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("seed,n,k,t,lambda_min,bound,ratio,holds"));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields[0], "11");
        assert_eq!(fields[7], "true");
        assert_eq!(fields[4].split('e').next().unwrap().len(), 18);
        assert_eq!(trial_rows_csv(&[]).trim(), "seed,n,k,t,lambda_min,bound,ratio,holds");
    }
}
