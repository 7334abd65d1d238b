//! Distance to passivity of a non-passive model, and the analogous distance
//! to stability of a state matrix.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{self, identity, zeros, CMatrix, Hermitian, Tolerances};
use crate::kyp::{self, Certificate, Classification};
use crate::radius::Perturbation;
use crate::riccati;
use crate::system::{self, StateSpaceModel};
use crate::xi::{self, Direction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Two,
    Frobenius,
}

impl NormKind {
    pub fn of(self, m: &CMatrix) -> Result<f64> {
        match self {
            NormKind::Two => kernels::norm2(m),
            NormKind::Frobenius => Ok(kernels::fro_norm(m)),
        }
    }
}

/// Whether `ℳ_{−ξ}` is passive (stable, `Φ ⪰ 0` up to the circle dead band).
pub fn passive_at(model: &StateSpaceModel, xi: f64, tol: &Tolerances) -> Result<bool> {
    xi::passive(&xi::shift_model(model, xi, Direction::Backward)?, tol)
}

/// `Δ` with `ℳ + Δ = ℳ_{−ξ}`: `(diag(0, ξI) − ξS)/(1+ξ)`.
pub fn shift_perturbation(model: &StateSpaceModel, xi: f64) -> Result<Perturbation> {
    let (n, m) = (model.n(), model.m());
    let mut shift = zeros(n + m, n + m);
    shift.view_mut((n, n), (m, m)).copy_from(&identity(m).scale(xi));
    let delta = (shift - model.system_matrix().scale(xi)).unscale(1.0 + xi);
    Perturbation::from_matrix(&delta, n)
}

#[derive(Debug, Clone)]
pub struct ConstrainedDistance {
    /// Smallest `ξ` (to `tau`, from above) with `ℳ_{−ξ}` passive.
    pub xi_big: f64,
    pub delta: Perturbation,
    pub iterations: usize,
}

const MAX_DOUBLINGS: usize = 64;

/// Doubling search for a passive shift followed by bisection to `tau`.
pub fn constrained_distance(model: &StateSpaceModel, tau: f64, tol: &Tolerances) -> Result<ConstrainedDistance> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::Input(format!("tau must be positive, got {tau}")));
    }
    let (n, m) = (model.n(), model.m());
    if passive_at(model, 0.0, tol)? {
        return Ok(ConstrainedDistance {
            xi_big: 0.0,
            delta: Perturbation::zeros(n, m),
            iterations: 0,
        });
    }
    // ρ(A)/(1+ξ) < 1 is necessary
    let rho = kernels::spectral_radius(model.a())?;
    let mut lo = (rho - 1.0).max(0.0);
    let mut hi = lo + 1.0;
    let mut iterations = 0;
    while !passive_at(model, hi, tol)? {
        lo = hi;
        hi *= 2.0;
        iterations += 1;
        if iterations > MAX_DOUBLINGS {
            return Err(Error::Convergence { lo, hi });
        }
    }
    while hi - lo > tau {
        let mid = 0.5 * (lo + hi);
        if passive_at(model, mid, tol)? {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(ConstrainedDistance {
        xi_big: hi,
        delta: shift_perturbation(model, hi)?,
        iterations,
    })
}

/// A certificate of `ℳ_{−ξ}` at the shift it was taken from.
#[derive(Debug, Clone)]
pub struct PickedCertificate {
    pub xi: f64,
    pub certificate: Certificate,
}

/// Midpoint of the extremal solutions of `ℳ_{−(Ξ+τ)}` when it is interior
/// there, otherwise `X₋` of `ℳ_{−(Ξ+τ)}` classified for `ℳ_{−(Ξ+2τ)}`.
/// Moves further right (`τ·4^k`) when the splitting is too tight.
pub fn pick_certificate(model: &StateSpaceModel, xi_big: f64, tau: f64, tol: &Tolerances) -> Result<PickedCertificate> {
    let mut last = None;
    let mut fallback = None;
    for k in 0..10 {
        let step = tau * 4f64.powi(k);
        let xi_c = if xi_big == 0.0 && k == 0 { 0.0 } else { xi_big + step };
        let source = xi::shift_model(model, xi_c, Direction::Backward)?.model;
        let (lo, hi) = match riccati::extremal_solutions(&source, tol) {
            Ok(p) => p,
            Err(e) => {
                last = Some(e);
                continue;
            }
        };
        let mid = Hermitian::new((lo.x.matrix() + hi.x.matrix()).scale(0.5))?;
        let picked = PickedCertificate {
            xi: xi_c,
            certificate: kyp::classify_certificate(&mid, &source, tol)?,
        };
        match picked.certificate.classification {
            Classification::Interior => return Ok(picked),
            Classification::Boundary if fallback.is_none() => fallback = Some(picked),
            _ => {}
        }
        // with n > m the segment [X₋, X₊] stays on the boundary; X₋ of ℳ_{−ξ_c}
        // is interior for every ℳ_{−ξ} with ξ > ξ_c
        let xi_t = xi_c + step;
        let target = xi::shift_model(model, xi_t, Direction::Backward)?.model;
        let certificate = kyp::classify_certificate(&lo.x, &target, tol)?;
        if certificate.classification == Classification::Interior {
            return Ok(PickedCertificate { xi: xi_t, certificate });
        }
    }
    fallback.ok_or_else(|| last.unwrap_or_else(|| Error::Numerical("no certificate for the shifted model".into())))
}

#[derive(Debug, Clone)]
pub struct Refinement {
    pub delta: Perturbation,
    pub norm: f64,
    /// The norm bracket closed within the sweep budget.
    pub converged: bool,
    pub sweeps: usize,
}

const STALL_WINDOW: usize = 50;
const STALL_DECREASE: f64 = 1e-12;
const BRACKET_RTOL: f64 = 1e-6;
const MAX_BISECTIONS: usize = 80;

struct Feasibility {
    what: Hermitian,
    frame: kyp::PerturbationFrame,
    scale: f64,
    psd_tol: f64,
}

impl Feasibility {
    fn lambda_min(&self, delta: &CMatrix) -> Result<f64> {
        Hermitian::from_parts(self.what.matrix() + self.frame.lift(delta)).lambda_min()
    }

    fn feasible(&self, lam: f64) -> bool {
        lam >= -self.psd_tol * self.scale
    }

    /// Clip the assembled matrix to the PSD cone and read the perturbation back.
    fn project_psd(&self, delta: &CMatrix) -> Result<CMatrix> {
        let h = Hermitian::from_parts(self.what.matrix() + self.frame.lift(delta));
        let e = h.eig()?;
        let clipped: Vec<f64> = e.values.iter().map(|&v| v.max(0.0)).collect();
        let p = &e.vectors * kernels::diag_real(&clipped) * e.vectors.adjoint();
        Ok(self.frame.read_back(&(p - self.what.matrix())))
    }
}

fn project_ball(delta: &CMatrix, sigma: f64, norm: NormKind) -> Result<CMatrix> {
    match norm {
        NormKind::Frobenius => {
            let f = kernels::fro_norm(delta);
            Ok(if f > sigma { delta.scale(sigma / f) } else { delta.clone() })
        }
        NormKind::Two => {
            let s = kernels::svd(delta)?;
            let clipped: Vec<f64> = s.singular_values.iter().map(|&v| v.min(sigma)).collect();
            Ok(&s.u * kernels::diag_real(&clipped) * s.v.adjoint())
        }
    }
}

/// Dykstra iteration between the norm ball and the PSD constraint. Returns
/// the last ball iterate with its `λ_min`, and the sweeps used.
fn dykstra(
    f: &Feasibility,
    start: &CMatrix,
    sigma: f64,
    norm: NormKind,
    max_sweeps: usize,
) -> Result<(CMatrix, f64, usize)> {
    let mut x = start.clone();
    let mut p = zeros(x.nrows(), x.ncols());
    let mut q = p.clone();
    let mut best = f64::NEG_INFINITY;
    let mut best_at = 0;
    let mut last = (project_ball(&x, sigma, norm)?, f64::NEG_INFINITY);
    for sweep in 0..max_sweeps {
        let y = project_ball(&(&x + &p), sigma, norm)?;
        p = &x + &p - &y;
        let lam = f.lambda_min(&y)?;
        if f.feasible(lam) {
            return Ok((y, lam, sweep + 1));
        }
        if lam > best + STALL_DECREASE * f.scale {
            best = lam;
            best_at = sweep;
        } else if sweep - best_at >= STALL_WINDOW {
            return Ok((y, lam, sweep + 1));
        }
        let x_new = f.project_psd(&(&y + &q))?;
        q = &y + &q - &x_new;
        x = x_new;
        last = (y, lam);
    }
    Ok((last.0, last.1, max_sweeps))
}

/// Bisection on the norm level `σ ∈ [0, ‖Δ₀‖]` with Dykstra feasibility
/// tests at fixed `X`. Every accepted iterate is blended with `Δ₀` just enough
/// to make `Ŵ(X, ℳ+Δ) ⪰ −psd_tol·‖Ŵ‖` hold exactly, so the result is always
/// verified and never larger than `Δ₀`.
pub fn refine_distance(
    model: &StateSpaceModel,
    x: &Hermitian,
    delta0: &Perturbation,
    norm: NormKind,
    budget: usize,
    tol: &Tolerances,
) -> Result<Refinement> {
    let (n, m) = (model.n(), model.m());
    let what = kyp::build_what(x, model)?;
    let scale = what.norm2()?.max(1.0);
    let f = Feasibility {
        what,
        frame: kyp::perturbation_frame(n, m),
        scale,
        psd_tol: tol.psd_tol,
    };
    let d0 = delta0.assembled();
    let mu0 = f.lambda_min(&d0)?;
    if !f.feasible(mu0) {
        return Err(Error::Precondition(format!(
            "starting perturbation is infeasible (lambda_min = {mu0:e})"
        )));
    }
    let norm0 = norm.of(&d0)?;
    // a passive model needs no perturbation
    let zero = zeros(n + m, n + m);
    if f.feasible(f.lambda_min(&zero)?) {
        return Ok(Refinement {
            delta: Perturbation::from_matrix(&zero, n)?,
            norm: 0.0,
            converged: true,
            sweeps: 0,
        });
    }
    // `hi` is always the norm of a verified feasible perturbation
    let mut best = d0.clone();
    let (mut lo, mut hi) = (0.0, norm0);
    let mut sweeps = 0;
    let mut steps = 0;
    let mut converged = true;
    while hi - lo > BRACKET_RTOL * norm0 {
        if sweeps >= budget || steps >= MAX_BISECTIONS {
            converged = false;
            break;
        }
        steps += 1;
        let sigma = 0.5 * (lo + hi);
        let start = project_ball(&best, sigma, norm)?;
        let (y, lam, used) = dykstra(&f, &start, sigma, norm, budget - sweeps)?;
        sweeps += used;
        let candidate = if f.feasible(lam) {
            Some(y)
        } else {
            // λ_min is concave along the segment to the feasible start
            blend(&d0, mu0, &y, lam, 0.0)
        };
        let mut improved = false;
        if let Some(c) = candidate {
            let nc = norm.of(&c)?;
            if nc < hi && f.feasible(f.lambda_min(&c)?) {
                best = c;
                hi = nc;
                improved = true;
            }
        }
        if !improved || hi > sigma {
            lo = sigma.min(hi);
        }
    }
    Ok(Refinement {
        delta: Perturbation::from_matrix(&best, n)?,
        norm: hi,
        converged,
        sweeps,
    })
}

/// `(1−t)Δ + tΔ₀` with the smallest `t` that lifts the concave lower bound
/// on `λ_min` to `target`; `None` when `Δ₀` itself has no margin.
fn blend(d0: &CMatrix, mu0: f64, d: &CMatrix, lam: f64, target: f64) -> Option<CMatrix> {
    let target = target.min(mu0);
    if mu0 <= lam {
        return None;
    }
    let t = ((target - lam) / (mu0 - lam)).clamp(0.0, 1.0);
    Some(d.scale(1.0 - t) + d0.scale(t))
}

#[derive(Debug, Clone)]
pub struct DistanceReport {
    pub xi_big: f64,
    pub delta_constrained: Perturbation,
    /// Certificate for `ℳ_{−ξ}`, `ξ = certificate_xi`.
    pub x_cert: Certificate,
    pub certificate_xi: f64,
    pub delta_refined: Option<Perturbation>,
    /// Norms of the returned perturbation (refined when present).
    pub sigma2: f64,
    pub sigma_frob: f64,
    pub refinement_converged: bool,
}

impl DistanceReport {
    pub fn delta(&self) -> &Perturbation {
        self.delta_refined.as_ref().unwrap_or(&self.delta_constrained)
    }
}

/// Constrained shift, certificate, and one fixed-`X` refinement pass.
pub fn distance_to_passivity(
    model: &StateSpaceModel,
    tau: f64,
    norm: NormKind,
    budget: usize,
    tol: &Tolerances,
) -> Result<DistanceReport> {
    let cd = constrained_distance(model, tau, tol)?;
    let picked = pick_certificate(model, cd.xi_big, tau, tol)?;
    let (delta_refined, refinement_converged) = if cd.xi_big == 0.0 {
        (None, true)
    } else {
        // the certificate sits in the set of ℳ_{−ξ'} with ξ' ≥ Ξ, so start there
        let start = shift_perturbation(model, picked.xi)?;
        let r = refine_distance(model, &picked.certificate.x, &start, norm, budget, tol)?;
        let bound = norm.of(&cd.delta.assembled())? + tol.psd_tol;
        let ok = r.converged && r.norm <= bound;
        (Some(r.delta), ok)
    };
    let mut report = DistanceReport {
        xi_big: cd.xi_big,
        delta_constrained: cd.delta,
        x_cert: picked.certificate,
        certificate_xi: picked.xi,
        delta_refined,
        sigma2: 0.0,
        sigma_frob: 0.0,
        refinement_converged,
    };
    report.sigma2 = report.delta().norm2()?;
    report.sigma_frob = report.delta().norm_fro();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityDistance {
    /// Smallest `ξ ≥ 0` (as an infimum) with `A/(1+ξ)` stable.
    pub xi: f64,
    /// Whether `A/(1+ξ)` itself is stable (unit-circle eigenvalues semisimple).
    pub attained: bool,
    /// `‖A⁻¹ Δ_A‖₂` for `Δ_A = A/(1+ξ) − A`, when `A` is invertible.
    pub relative_error: Option<f64>,
}

pub fn distance_to_stability(a: &CMatrix, tol: &Tolerances) -> Result<StabilityDistance> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::dim("A", "square", format!("{}x{}", a.nrows(), a.ncols())));
    }
    let rho = kernels::spectral_radius(a)?;
    let xi = (rho - 1.0).max(0.0);
    let scaled = a.unscale(1.0 + xi);
    let attained = system::unit_circle_semisimple(&scaled, tol)?;
    let delta = &scaled - a;
    let relative_error = match kernels::solve(a, &delta) {
        Ok(r) if kernels::singular_values(a)?.last().copied().unwrap_or(0.0) > tol.rank_tol * rho.max(1.0) => {
            Some(kernels::norm2(&r)?)
        }
        _ => None,
    };
    Ok(StabilityDistance {
        xi,
        attained,
        relative_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::testutil::*;
    use crate::kernels::{fro_norm, from_real};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn m_np() -> StateSpaceModel {
        StateSpaceModel::scalar(0.5, 1.0, 1.0, -0.2).unwrap()
    }

    /// Scalar passivity of `ℳ_{−ξ}` in closed form, bisected.
    fn scalar_backward_oracle(a: f64, b: f64, c: f64, d: f64) -> f64 {
        let passive = |xi: f64| {
            let s = 1.0 / (1.0 + xi);
            let (a, bc, d) = (a * s, b * c * s * s, (d + xi) * s);
            a.abs() < 1.0 && d + bc / (1.0 - a) >= 0.0 && d - bc / (1.0 + a) >= 0.0
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        while !passive(hi) {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if passive(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    #[test]
    fn m_np_constrained_distance() {
        let t = Tolerances::default();
        // (ξ − 0.2)(1.5 + ξ) = 1
        let closed = (-1.3 + (1.69f64 + 5.2).sqrt()) / 2.0;
        assert_relative_eq!(scalar_backward_oracle(0.5, 1.0, 1.0, -0.2), closed, epsilon = 1e-12);
        let tau = 1e-9;
        let cd = constrained_distance(&m_np(), tau, &t).unwrap();
        assert!((cd.xi_big - closed).abs() < 1e-6, "{} vs {closed}", cd.xi_big);
        let tau = 1e-8;
        assert!(passive_at(&m_np(), cd.xi_big + tau, &t).unwrap());
        assert!(!passive_at(&m_np(), cd.xi_big - tau, &t).unwrap());
        let perturbed = m_np().perturbed(&cd.delta.assembled()).unwrap();
        let shifted = xi::shift_model(&m_np(), cd.xi_big, Direction::Backward).unwrap().model;
        assert!(fro_norm(&(perturbed.system_matrix() - shifted.system_matrix())) < 1e-12);
    }

    #[test]
    fn passive_model_needs_no_shift() {
        let t = Tolerances::default();
        let m0 = StateSpaceModel::scalar(0.5, 1.0, 1.0, 1.0).unwrap();
        let cd = constrained_distance(&m0, 1e-8, &t).unwrap();
        assert_eq!(cd.xi_big, 0.0);
        assert_eq!(cd.delta.norm_fro(), 0.0);
        let pc = pick_certificate(&m0, 0.0, 1e-8, &t).unwrap();
        assert_eq!(pc.xi, 0.0);
        assert_relative_eq!(pc.certificate.x.matrix()[(0, 0)].re, 1.25, epsilon = 1e-8);
        assert_eq!(pc.certificate.classification, kyp::Classification::Interior);
        let rep = distance_to_passivity(&m0, 1e-8, NormKind::Two, 1000, &t).unwrap();
        assert_eq!(rep.sigma2, 0.0);
    }

    #[test]
    fn unstable_model_bound() {
        let t = Tolerances::default();
        let model = StateSpaceModel::scalar(1.8, 1.0, 1.0, 50.0).unwrap();
        let cd = constrained_distance(&model, 1e-8, &t).unwrap();
        assert!(cd.xi_big >= 0.8 - 1e-8);
        assert_relative_eq!(cd.xi_big, scalar_backward_oracle(1.8, 1.0, 1.0, 50.0), epsilon = 1e-7);
    }

    #[test]
    fn certificate_for_shifted_model() {
        let t = Tolerances::default();
        let tau = 1e-8;
        let cd = constrained_distance(&m_np(), tau, &t).unwrap();
        let pc = pick_certificate(&m_np(), cd.xi_big, tau, &t).unwrap();
        assert!(pc.xi > cd.xi_big);
        let shifted = xi::shift_model(&m_np(), pc.xi, Direction::Backward).unwrap().model;
        assert!(kyp::build_wtilde(&pc.certificate.x, &shifted).unwrap().lambda_min().unwrap() > 0.0);
        // the certificate lies between the roots of det W for the shifted model
        let s = shifted.system_matrix();
        let (a, b, c, d) = (s[(0, 0)].re, s[(0, 1)].re, s[(1, 0)].re, s[(1, 1)].re);
        let (p2, p1, p0) = riccati::scalar_det_w(a, b, c, d);
        let disc = (p1 * p1 - 4.0 * p2 * p0).sqrt();
        let (r1, r2) = ((-p1 + disc) / (2.0 * p2), (-p1 - disc) / (2.0 * p2));
        let x = pc.certificate.x.matrix()[(0, 0)].re;
        assert!(r1.min(r2) < x && x < r1.max(r2));
    }

    #[test]
    fn refinement_never_increases() {
        let t = Tolerances::default();
        for norm in [NormKind::Two, NormKind::Frobenius] {
            let rep = distance_to_passivity(&m_np(), 1e-8, norm, 20_000, &t).unwrap();
            let refined = rep.delta_refined.clone().unwrap();
            let constrained = norm.of(&rep.delta_constrained.assembled()).unwrap();
            let achieved = norm.of(&refined.assembled()).unwrap();
            assert!(achieved <= constrained + 1e-7, "{achieved} > {constrained}");
            let what = kyp::build_what(&rep.x_cert.x, &m_np().perturbed(&refined.assembled()).unwrap()).unwrap();
            assert!(what.lambda_min().unwrap() >= -t.psd_tol * what.norm2().unwrap().max(1.0));
        }
    }

    #[test]
    fn refinement_of_passive_model_is_zero() {
        let t = Tolerances::default();
        let m0 = StateSpaceModel::scalar(0.5, 1.0, 1.0, 1.0).unwrap();
        let r = refine_distance(&m0, &Hermitian::scalar(1.0), &Perturbation::zeros(1, 1), NormKind::Two, 100, &t).unwrap();
        assert_eq!(r.norm, 0.0);
        assert!(r.converged);
    }

    #[test]
    fn refinement_rejects_infeasible_start() {
        let t = Tolerances::default();
        let err = refine_distance(&m_np(), &Hermitian::scalar(1.0), &Perturbation::zeros(1, 1), NormKind::Two, 100, &t);
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn random_refinement_contracts() {
        let t = Tolerances::default();
        let mut r = rng(4);
        for _ in 0..3 {
            let base = random_interior_model(&mut r, 3, 2);
            // push D down until the model loses passivity
            let d = base.d() - identity(2).scale(1.2);
            let model = StateSpaceModel::new(base.a().clone(), base.b().clone(), base.c().clone(), d).unwrap();
            let rep = distance_to_passivity(&model, 1e-8, NormKind::Two, 5_000, &t).unwrap();
            assert!(rep.xi_big > 0.0);
            assert_eq!(rep.x_cert.classification, Classification::Interior);
            let refined = rep.delta_refined.clone().unwrap();
            assert!(refined.norm2().unwrap() <= rep.delta_constrained.norm2().unwrap() + 1e-7);
            let what = kyp::build_what(&rep.x_cert.x, &model.perturbed(&refined.assembled()).unwrap()).unwrap();
            assert!(what.lambda_min().unwrap() >= -t.psd_tol * what.norm2().unwrap().max(1.0));
        }
    }

    #[test]
    fn stability_examples() {
        let t = Tolerances::default();
        let s = distance_to_stability(&from_real(1, 1, &[0.5]), &t).unwrap();
        assert_eq!((s.xi, s.attained), (0.0, true));
        let s = distance_to_stability(&from_real(1, 1, &[2.0]), &t).unwrap();
        assert_relative_eq!(s.xi, 1.0, epsilon = 1e-14);
        assert!(s.attained);
        assert_relative_eq!(s.relative_error.unwrap(), 0.5, epsilon = 1e-14);
        let s = distance_to_stability(&from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]), &t).unwrap();
        assert_eq!(s.xi, 0.0);
        assert!(!s.attained);
        let s = distance_to_stability(&from_real(2, 2, &[0.0, 3.0, 0.0, 0.0]), &t).unwrap();
        assert_eq!(s.xi, 0.0);
        assert!(s.relative_error.is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn stability_relative_error(seed in any::<u64>(), n in 1usize..5) {
            let t = Tolerances::default();
            let mut r = rng(seed);
            let a = random_matrix(&mut r, n, n).scale(2.0);
            let s = distance_to_stability(&a, &t).unwrap();
            let rho = kernels::spectral_radius(&a).unwrap();
            prop_assert!((s.xi - (rho - 1.0).max(0.0)).abs() < 1e-12);
            if let Some(e) = s.relative_error {
                prop_assert!((e - s.xi / (1.0 + s.xi)).abs() < 1e-9 * (1.0 + e));
            }
        }

        #[test]
        fn passivity_is_monotone_in_the_shift(a in -0.9f64..0.9, b in 0.2f64..1.5, c in 0.2f64..1.5, d in -1.0f64..0.2, f in 1.0f64..3.0) {
            let t = Tolerances::default();
            let model = StateSpaceModel::scalar(a, b, c, d).unwrap();
            let cd = constrained_distance(&model, 1e-7, &t).unwrap();
            let oracle = scalar_backward_oracle(a, b, c, d);
            prop_assert!((cd.xi_big - oracle).abs() < 1e-6);
            prop_assert!(passive_at(&model, cd.xi_big * f + 1e-7, &t).unwrap());
        }
    }
}
