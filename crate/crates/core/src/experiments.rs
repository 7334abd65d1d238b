//! Random normalized passive systems, the ensemble of radius estimates and
//! the scalar realization sweep.

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{self, c, identity, CMatrix, Hermitian, Tolerances};
use crate::kyp::{self, Classification};
use crate::normalization::NormalizedRealization;
use crate::radius;
use crate::system::{self, StateSpaceModel};

const MAX_RETRIES: u64 = 5;

fn derived_seed(seed: u64, k: u64) -> u64 {
    seed.wrapping_add(k.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn normal_matrix(rng: &mut ChaCha8Rng, r: usize, cl: usize) -> CMatrix {
    CMatrix::from_fn(r, cl, |_, _| c(rng.sample(StandardNormal)))
}

/// `δ ≥ 0` with `λ_min W(I, {A, B, C, D₀ + δI}) ≥ margin`, from the Schur
/// complement of the `(1,1)` block.
fn diagonal_lift(a: &CMatrix, b: &CMatrix, cm: &CMatrix, d0: &CMatrix, margin: f64) -> Result<f64> {
    let (n, m) = (a.nrows(), b.ncols());
    let w11 = identity(n) - a.adjoint() * a - identity(n).scale(margin);
    let w12 = cm.adjoint() - a.adjoint() * b;
    let w22 = d0.adjoint() + d0 - b.adjoint() * b - identity(m).scale(margin);
    let s = w12.adjoint() * kernels::solve(&w11, &w12)? - w22;
    let need = Hermitian::new(kernels::hermitian_part(&s))?.lambda_max()?;
    Ok((0.5 * need).max(0.0))
}

fn sample_passive(n: usize, m: usize, seed: u64, margin: f64, tol: &Tolerances) -> Result<StateSpaceModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = normal_matrix(&mut rng, n + m, n + m);
    let ab = s.rows(0, n).into_owned();
    let ab = ab.scale((1.0 - margin) / kernels::norm2(&ab)?);
    let a = ab.columns(0, n).into_owned();
    let b = ab.columns(n, m).into_owned();
    let cm = s.view((n, 0), (m, n)).into_owned();
    let d0 = s.view((n, n), (m, m)).into_owned();
    let mut delta = diagonal_lift(&a, &b, &cm, &d0, margin)?;
    // rounding can leave λ_min a hair below the target
    for _ in 0..60 {
        let model = StateSpaceModel::new(a.clone(), b.clone(), cm.clone(), &d0 + identity(m).scale(delta))?;
        let w = kyp::build_w(&Hermitian::identity(n), &model)?;
        if w.lambda_min()? >= margin && kyp::classify_certificate(&Hermitian::identity(n), &model, tol)?.classification == Classification::Interior {
            return Ok(model);
        }
        delta = delta * (1.0 + 1e-12) + 1e-14 + margin * 1e-9;
    }
    Err(Error::Numerical("diagonal lift did not reach the margin".into()))
}

/// A random strictly passive model in normalized form (`X = I` interior).
///
/// `[A B; C₀ D₀]` is drawn with standard normal entries, `[A B]` is scaled
/// to 2-norm `1 − margin`, and `D = D₀ + δI` with the smallest `δ` giving
/// `λ_min W(I) ≥ margin`. Non-minimal draws are replaced with derived
/// seeds, at most five times.
pub fn random_passive_system(n: usize, m: usize, seed: u64, margin: f64, tol: &Tolerances) -> Result<NormalizedRealization> {
    if n == 0 || m == 0 {
        return Err(Error::Input(format!("need n, m >= 1, got n = {n}, m = {m}")));
    }
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::Input(format!("margin must lie in (0, 1), got {margin}")));
    }
    let mut model = sample_passive(n, m, seed, margin, tol)?;
    for k in 1..=MAX_RETRIES {
        if system::validate_minimal(&model, tol)?.minimal() {
            break;
        }
        warn!("seed {seed}: draw {k} is not minimal, redrawing");
        model = sample_passive(n, m, derived_seed(seed, k), margin, tol)?;
    }
    Ok(NormalizedRealization {
        model,
        t: identity(n),
        source_x: Hermitian::identity(n),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleRow {
    pub index: usize,
    pub seed: u64,
    pub rho: f64,
    pub lam_w: f64,
    pub lam_wt: f64,
    pub lam_ds: f64,
    pub est: f64,
    pub ratio_w: f64,
    pub ratio_wt: f64,
    pub ratio_ds: f64,
    /// `1/(est·ρ)`
    pub ratio_est: f64,
}

/// `ρ` with `golden_tol` halved until two runs agree to `digits` significant digits.
pub fn radius_to_digits(model: &StateSpaceModel, x: &Hermitian, digits: u32, tol: &Tolerances) -> Result<radius::RadiusReport> {
    let mut t = *tol;
    let mut prev = radius::x_passivity_radius(model, x, &t)?;
    let target = 0.5 * 10f64.powi(-(digits as i32 - 1));
    for _ in 0..40 {
        t.golden_tol *= 0.5;
        let next = radius::x_passivity_radius(model, x, &t)?;
        let agree = (next.rho - prev.rho).abs() <= target * next.rho.abs();
        prev = next;
        if agree {
            break;
        }
    }
    Ok(prev)
}

fn ensemble_row(index: usize, seed: u64, n: usize, m: usize, margin: f64, digits: u32, tol: &Tolerances) -> Result<EnsembleRow> {
    let mt = random_passive_system(n, m, seed, margin, tol)?;
    let model = &mt.model;
    let id = Hermitian::identity(n);
    let rep = radius_to_digits(model, &id, digits, tol)?;
    let rho = rep.rho;
    let lam_w = kyp::build_w(&id, model)?.lambda_min()?;
    let wt = kyp::build_wtilde(&id, model)?;
    let lam_wt = wt.lambda_min()?;
    let lam_ds = kyp::perturbation_frame(n, m).scale(&wt).lambda_min()?;
    Ok(EnsembleRow {
        index,
        seed,
        rho,
        lam_w,
        lam_wt,
        lam_ds,
        est: rep.est,
        ratio_w: lam_w / rho,
        ratio_wt: lam_wt / rho,
        ratio_ds: lam_ds / rho,
        ratio_est: 1.0 / (rep.est * rho),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioStats {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl RatioStats {
    fn of(mut v: Vec<f64>) -> Option<Self> {
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let k = v.len();
        let median = if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) };
        Some(RatioStats {
            min: v[0],
            median,
            max: v[k - 1],
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleSummary {
    pub rows: usize,
    pub skipped: usize,
    pub ratio_w: Option<RatioStats>,
    pub ratio_wt: Option<RatioStats>,
    pub ratio_ds: Option<RatioStats>,
    pub ratio_est: Option<RatioStats>,
    /// Median of `|ρ·est − 1|`.
    pub median_est_defect: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Ensemble {
    pub rows: Vec<EnsembleRow>,
    pub summary: EnsembleSummary,
}

#[derive(Debug, Clone, Copy)]
pub struct EnsembleConfig {
    pub count: usize,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub margin: f64,
    pub rho_digits: u32,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            count: 50,
            n: 5,
            m: 2,
            seed: 1,
            margin: 0.05,
            rho_digits: 4,
        }
    }
}

/// Exact radius against its four cheap estimates over a random ensemble.
pub fn figure1_experiment(cfg: &EnsembleConfig, tol: &Tolerances) -> Result<Ensemble> {
    if cfg.count == 0 {
        return Err(Error::Input("count must be at least 1".into()));
    }
    let mut seeder = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = vec![];
    let mut skipped = 0;
    for index in 0..cfg.count {
        let seed: u64 = seeder.random();
        match ensemble_row(index, seed, cfg.n, cfg.m, cfg.margin, cfg.rho_digits, tol) {
            Ok(row) => rows.push(row),
            Err(e) if e.is_domain() => {
                warn!("sample {index} (seed {seed}) skipped: {e}");
                skipped += 1;
            }
            Err(e) => return Err(e),
        }
    }
    let col = |f: fn(&EnsembleRow) -> f64| RatioStats::of(rows.iter().map(f).collect());
    let mut defects: Vec<f64> = rows.iter().map(|r| (r.rho * r.est - 1.0).abs()).collect();
    defects.sort_by(f64::total_cmp);
    let summary = EnsembleSummary {
        rows: rows.len(),
        skipped,
        ratio_w: col(|r| r.ratio_w),
        ratio_wt: col(|r| r.ratio_wt),
        ratio_ds: col(|r| r.ratio_ds),
        ratio_est: col(|r| r.ratio_est),
        median_est_defect: RatioStats::of(defects).map(|s| s.median),
    };
    Ok(Ensemble { rows, summary })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub t: f64,
    pub b_t: f64,
    pub c_t: f64,
    /// 0 at the ends of the interval, where `X = 1` is a boundary certificate.
    pub rho_t: f64,
    pub lam_w_t: f64,
    pub lam_ds_t: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    /// `(x₋, x₊)`, the admissible range of `t²`.
    pub x_range: (f64, f64),
    /// Row with the smallest `|b_t − c_t|`.
    pub balanced_index: usize,
    pub argmax_index: usize,
}

/// Admissible `(x₋, x₊)` of a real scalar model: roots of
/// `det W(x) = −b²x² + 2βx − c²`, `β = (1−a²)d + abc`.
pub fn scalar_certificate_range(a: f64, b: f64, cc: f64, d: f64) -> Result<(f64, f64)> {
    let beta = (1.0 - a * a) * d + a * b * cc;
    let bc = b * cc;
    if !(a.abs() < 1.0) || bc == 0.0 || !((beta / bc).abs() > 1.0) || beta <= 0.0 {
        return Err(Error::Domain(format!(
            "scalar model is not strictly passive: need |a| < 1 and |beta/(bc)| > 1 with beta = (1-a^2)d + abc = {beta}"
        )));
    }
    let disc = (beta * beta - bc * bc).sqrt();
    Ok(((beta - disc) / (b * b), (beta + disc) / (b * b)))
}

/// `count` points `t` with `t²` uniform over `[x₋, x₊]`, ends included.
pub fn sweep_grid(x_range: (f64, f64), count: usize) -> Vec<f64> {
    let (lo, hi) = (x_range.0.sqrt(), x_range.1.sqrt());
    let k = count.max(2);
    (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect()
}

/// Passivity radius of `ℳ_t = {a, bt, c/t, d}` at `X = 1` along `t`.
pub fn scalar_sweep(a: f64, b: f64, cc: f64, d: f64, t_grid: &[f64], tol: &Tolerances) -> Result<Sweep> {
    let x_range = scalar_certificate_range(a, b, cc, d)?;
    let one = Hermitian::scalar(1.0);
    let mut rows = vec![];
    for &t in t_grid {
        if !(t > 0.0) {
            return Err(Error::Input(format!("sweep points must be positive, got {t}")));
        }
        let t2 = t * t;
        if t2 < x_range.0 * (1.0 - 1e-12) || t2 > x_range.1 * (1.0 + 1e-12) {
            continue;
        }
        let model = StateSpaceModel::scalar(a, b * t, cc / t, d)?;
        let rho_t = match radius::x_passivity_radius(&model, &one, tol) {
            Ok(rep) => rep.rho,
            Err(Error::NotPositiveDefinite { .. }) => 0.0,
            Err(e) => return Err(e),
        };
        let wt = kyp::build_wtilde(&one, &model)?;
        rows.push(SweepRow {
            t,
            b_t: b * t,
            c_t: cc / t,
            rho_t,
            lam_w_t: kyp::build_w(&one, &model)?.lambda_min()?,
            lam_ds_t: kyp::perturbation_frame(1, 1).scale(&wt).lambda_min()?,
        });
    }
    if rows.is_empty() {
        return Err(Error::Domain(format!(
            "no grid point has t^2 in [{}, {}]",
            x_range.0, x_range.1
        )));
    }
    let argmin = |f: &dyn Fn(&SweepRow) -> f64| {
        (0..rows.len()).min_by(|&i, &j| f(&rows[i]).total_cmp(&f(&rows[j]))).expect("nonempty")
    };
    let balanced_index = argmin(&|r| (r.b_t - r.c_t).abs());
    let argmax_index = argmin(&|r| -r.rho_t);
    Ok(Sweep {
        rows,
        x_range,
        balanced_index,
        argmax_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalization::verify_normalized;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn generator_examples() {
        let t = Tolerances::default();
        let mt = random_passive_system(1, 1, 3, 0.05, &t).unwrap();
        let cert = kyp::classify_certificate(&Hermitian::identity(1), &mt.model, &t).unwrap();
        assert_eq!(cert.classification, Classification::Interior);

        let mt = random_passive_system(4, 2, 7, 0.05, &t).unwrap();
        let check = verify_normalized(&mt.model, &t).unwrap();
        assert!(check.normalized && check.lambda_min > 0.0);
        assert!(check.lambda_min >= 0.05 * (1.0 - 1e-12));
        assert!(system::validate_minimal(&mt.model, &t).unwrap().minimal());

        let again = random_passive_system(4, 2, 7, 0.05, &t).unwrap();
        assert_eq!(mt.model.system_matrix(), again.model.system_matrix());
    }

    #[test]
    fn generator_rejects_bad_input() {
        let t = Tolerances::default();
        assert!(random_passive_system(0, 1, 1, 0.1, &t).is_err());
        assert!(random_passive_system(1, 1, 1, 1.0, &t).is_err());
    }

    #[test]
    fn lift_is_tight() {
        // the smallest δ puts λ_min W(I) right at the margin
        let t = Tolerances::default();
        let mt = random_passive_system(3, 2, 11, 0.1, &t).unwrap();
        let lam = kyp::build_w(&Hermitian::identity(3), &mt.model).unwrap().lambda_min().unwrap();
        assert!((0.1..0.1 + 1e-8).contains(&lam), "{lam}");
    }

    #[test]
    fn certificate_range_m0() {
        let (lo, hi) = scalar_certificate_range(0.5, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(lo, 0.5, epsilon = 1e-14);
        assert_relative_eq!(hi, 2.0, epsilon = 1e-14);
        assert!(scalar_certificate_range(0.5, 1.0, 1.0, 2.0 / 3.0 - 1e-6).unwrap_err().is_domain());
    }

    #[test]
    fn sweep_m0() {
        let t = Tolerances::default();
        let grid = sweep_grid((0.5, 2.0), 61);
        assert_relative_eq!(grid[0], 0.5f64.sqrt(), epsilon = 1e-15);
        let s = scalar_sweep(0.5, 1.0, 1.0, 1.0, &grid, &t).unwrap();
        assert_eq!(s.rows.len(), 61);
        assert_eq!(s.rows[0].rho_t, 0.0);
        assert!((s.argmax_index as i64 - s.balanced_index as i64).abs() <= 1);
        let bal = &s.rows[s.balanced_index];
        assert!((bal.lam_ds_t - bal.rho_t).abs() <= 0.02 * bal.rho_t, "{bal:?}");
        for r in &s.rows {
            assert_relative_eq!(r.b_t * r.c_t, 1.0, epsilon = 1e-14);
            assert!(r.lam_ds_t <= r.rho_t + 1e-9);
        }
    }

    #[test]
    fn sweep_depends_on_t_squared_only() {
        // {a, bt, c/t, d} with (b, c) → (b s, c/s) and t → t/s is the same model
        let t = Tolerances::default();
        let s1 = scalar_sweep(0.3, 2.0, 0.5, 1.0, &[0.6, 0.7], &t).unwrap();
        let s2 = scalar_sweep(0.3, 1.0, 1.0, 1.0, &[1.2, 1.4], &t).unwrap();
        for (p, q) in s1.rows.iter().zip(&s2.rows) {
            assert_relative_eq!(p.rho_t, q.rho_t, epsilon = 1e-9);
        }
    }

    #[test]
    fn ensemble_small() {
        let t = Tolerances::default();
        let cfg = EnsembleConfig {
            count: 4,
            n: 3,
            m: 2,
            seed: 2,
            ..Default::default()
        };
        let e = figure1_experiment(&cfg, &t).unwrap();
        assert_eq!(e.rows.len() + e.summary.skipped, 4);
        for r in &e.rows {
            assert!(r.rho > 0.0 && r.ratio_w.is_finite() && r.ratio_est > 0.0);
            assert!(r.lam_ds <= r.rho * (1.0 + 1e-9));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn generated_systems_are_normalized_and_minimal(seed in any::<u64>(), n in 1usize..6, m in 1usize..4) {
            let t = Tolerances::default();
            let mt = random_passive_system(n, m, seed, 0.05, &t).unwrap();
            let check = verify_normalized(&mt.model, &t).unwrap();
            prop_assert!(check.normalized && check.lambda_min >= 0.05 * (1.0 - 1e-12));
            prop_assert!(system::validate_minimal(&mt.model, &t).unwrap().minimal());
        }
    }
}
