//! The LMI shift `ξ*(X)`, its supremum `Ξ` over certificates, and the shifted
//! models `ℳ_ξ` and `ℳ_{−ξ}`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{self, block, fro_norm, identity, zeros, CMatrix, Hermitian, Tolerances, C64};
use crate::kyp::{self, Certificate, Classification};
use crate::normalization;
use crate::riccati;
use crate::system::{self, StateSpaceModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum XiMethod {
    Bisection,
    EigenvalueBased,
}

#[derive(Debug, Clone, Serialize)]
pub struct XiResult {
    pub xi_lo: f64,
    pub xi_hi: f64,
    pub iterations: usize,
    pub method: XiMethod,
    /// Unit-circle zero frequencies seen at the last non-strict probe.
    pub witness_frequencies: Vec<f64>,
}

impl XiResult {
    pub fn width(&self) -> f64 {
        self.xi_hi - self.xi_lo
    }

    fn zero(method: XiMethod) -> Self {
        XiResult {
            xi_lo: 0.0,
            xi_hi: 0.0,
            iterations: 0,
            method,
            witness_frequencies: vec![],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `ℳ_ξ = {A, B, C, D − ξI} / (1 − ξ)`
    Forward,
    /// `ℳ_{−ξ} = {A, B, C, D + ξI} / (1 + ξ)`
    Backward,
}

#[derive(Debug, Clone)]
pub struct ShiftedModel {
    pub base: StateSpaceModel,
    pub xi: f64,
    pub direction: Direction,
    pub model: StateSpaceModel,
}

impl ShiftedModel {
    /// Relative defect of `(1∓ξ) W̃(X, ℳ_{±ξ}) = W̃(X, ℳ) ∓ ξ diag(X, X, 2I)`.
    pub fn identity_defect(&self, x: &Hermitian) -> Result<f64> {
        let s = match self.direction {
            Direction::Forward => -self.xi,
            Direction::Backward => self.xi,
        };
        let lhs = kyp::build_wtilde(x, &self.model)?.into_inner().scale(1.0 + s);
        let base = kyp::build_wtilde(x, &self.base)?.into_inner();
        let rhs = &base + kyp::shift_weight(x, self.base.m()).scale(s);
        Ok(fro_norm(&(lhs - &rhs)) / fro_norm(&base).max(f64::MIN_POSITIVE))
    }
}

pub fn shift_model(model: &StateSpaceModel, xi: f64, direction: Direction) -> Result<ShiftedModel> {
    if !xi.is_finite() {
        return Err(Error::Input(format!("shift must be finite, got {xi}")));
    }
    let (scale, dshift) = match direction {
        Direction::Forward if xi >= 1.0 => {
            return Err(Error::Domain(format!("forward shift needs xi < 1, got {xi}")));
        }
        Direction::Backward if xi <= -1.0 => {
            return Err(Error::Domain(format!("backward shift needs xi > -1, got {xi}")));
        }
        Direction::Forward => (1.0 - xi, -xi),
        Direction::Backward => (1.0 + xi, xi),
    };
    let inv = 1.0 / scale;
    let d = model.d() + identity(model.m()).scale(dshift);
    let shifted = StateSpaceModel::new(
        model.a().scale(inv),
        model.b().scale(inv),
        model.c().scale(inv),
        d.scale(inv),
    )?;
    Ok(ShiftedModel {
        base: model.clone(),
        xi,
        direction,
        model: shifted,
    })
}

/// `λ_min(D_s W̃(I, ℳ_T) D_s)` for an interior certificate, exactly 0 on the
/// boundary.
pub fn xi_star(model: &StateSpaceModel, cert: &Certificate, tol: &Tolerances) -> Result<f64> {
    match cert.classification {
        Classification::Boundary => Ok(0.0),
        Classification::Outside => Err(Error::Domain(format!(
            "certificate is outside the LMI solution set (lambda_min W = {:e})",
            cert.lambda_min_w
        ))),
        Classification::Interior => {
            let mt = normalization::normalize(model, cert, tol)?;
            let (n, m) = (model.n(), model.m());
            let wt = kyp::build_wtilde(&Hermitian::identity(n), &mt.model)?;
            kyp::perturbation_frame(n, m).scale(&wt).lambda_min()
        }
    }
}

/// Largest `ξ` with `W̃(X, ℳ) − ξ diag(X, X, 2I) ⪰ 0`, by bisection to `tau`.
pub fn xi_star_bisection(model: &StateSpaceModel, x: &Hermitian, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    let wt = kyp::build_wtilde(x, model)?.into_inner();
    let weight = kyp::shift_weight(x, model.m());
    let feasible = |xi: f64| -> Result<bool> { Ok(Hermitian::from_parts(&wt - weight.scale(xi)).lambda_min()? >= 0.0) };
    if !feasible(0.0)? {
        return Ok(0.0);
    }
    // the (1,1) block X − ξX forces ξ ≤ 1
    if feasible(1.0)? {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > tau {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_finite() && tau > 0.0 {
        Ok(())
    } else {
        Err(Error::Input(format!("tau must be positive, got {tau}")))
    }
}

/// Conditions A1/A2 for a shifted model.
#[derive(Debug, Clone, Serialize)]
pub struct UnitCircleTest {
    /// A2 fails: some pencil eigenvalue lies in the unit-circle band.
    pub on_circle: bool,
    /// Arguments of the unit-circle eigenvalues, ascending.
    pub omegas: Vec<f64>,
    /// A1: `ρ(A_ξ) < 1`.
    pub stable: bool,
    pub spectral_radius: f64,
}

pub fn has_unit_circle_zeros(sm: &ShiftedModel, tol: &Tolerances) -> Result<UnitCircleTest> {
    let pencil = riccati::build_pencil(&sm.model, 0.0, tol)?;
    let spec = riccati::pencil_spectrum(&pencil)?;
    let mut omegas: Vec<f64> = spec.on_circle(riccati::circle_band(tol)).iter().map(|z| z.arg()).collect();
    omegas.sort_by(f64::total_cmp);
    let spectral_radius = kernels::spectral_radius(sm.model.a())?;
    Ok(UnitCircleTest {
        on_circle: !omegas.is_empty(),
        omegas,
        stable: spectral_radius < 1.0,
        spectral_radius,
    })
}

/// A1, A2 and `Φ ≻ 0` at one frequency.
pub fn strictly_passive(sm: &ShiftedModel, tol: &Tolerances) -> Result<bool> {
    let t = has_unit_circle_zeros(sm, tol)?;
    if !t.stable || t.on_circle {
        return Ok(false);
    }
    // without unit-circle zeros one sample fixes the sign of Φ; skip
    // frequencies sitting on a pole
    for w in [0.0, PI, 0.5 * PI, -0.5 * PI, 1.0] {
        match system::phi_eval(&sm.model, w, tol) {
            Ok(phi) => return Ok(phi.lambda_min()? > 0.0),
            Err(Error::SingularResolvent { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(false)
}

/// Passivity up to the unit-circle dead band: stable, and `Φ ⪰ 0` between
/// consecutive unit-circle zeros.
pub fn passive(sm: &ShiftedModel, tol: &Tolerances) -> Result<bool> {
    let t = has_unit_circle_zeros(sm, tol)?;
    if !t.stable {
        return Ok(false);
    }
    let probes = if t.omegas.is_empty() { vec![0.0] } else { gap_midpoints(&t.omegas).into_iter().map(|g| g.1).collect() };
    for w in probes {
        let phi = match system::phi_eval(&sm.model, w, tol) {
            Ok(phi) => phi,
            // a pole within rounding of the circle
            Err(Error::SingularResolvent { .. }) => return Ok(false),
            Err(e) => return Err(e),
        };
        let scale = phi.norm2()?.max(1.0);
        if phi.lambda_min()? < -tol.psd_tol * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `(width, midpoint)` of the gaps between sorted frequencies, wrapping
/// around the circle, widest first.
fn gap_midpoints(omegas: &[f64]) -> Vec<(f64, f64)> {
    let k = omegas.len();
    let mut gaps: Vec<(f64, f64)> = (0..k)
        .map(|i| {
            let lo = omegas[i];
            let hi = if i + 1 < k { omegas[i + 1] } else { omegas[0] + 2.0 * PI };
            let mid = 0.5 * (lo + hi);
            (hi - lo, if mid > PI { mid - 2.0 * PI } else { mid })
        })
        .collect();
    gaps.sort_by(|a, b| b.0.total_cmp(&a.0));
    gaps
}

/// `Γ₀(ω)` and the `ξ`-coefficient `K(ω)` with `Γ(ξ, ω) = Γ₀(ω) + ξ K(ω)`.
fn gamma_parts(model: &StateSpaceModel, omega: f64) -> (CMatrix, CMatrix) {
    let (n, m) = (model.n(), model.m());
    let z = C64::from_polar(1.0, omega);
    let i_n = identity(n);
    let (znn, znm, zmn) = (zeros(n, n), zeros(n, m), zeros(m, n));
    let a_z = model.a() - &i_n * z;
    let ch = model.c().adjoint();
    let g0 = block(&[
        &[&znn, &a_z, model.b()],
        &[&a_z.adjoint(), &znn, &ch],
        &[&model.b().adjoint(), model.c(), &model.d_sym()],
    ]);
    let zi = &i_n * z;
    let k = block(&[
        &[&znn, &zi, &znm],
        &[&zi.adjoint(), &znn, &znm],
        &[&zmn, &zmn, &identity(m).scale(-2.0)],
    ]);
    (g0, k)
}

/// `Γ(ξ, ω) = P(e^{iω}) diag(e^{−iω}I, I, I)` for the pencil of `(1−ξ)ℳ_ξ`;
/// singular exactly when `e^{iω}` is a zero of `Φ_ξ`.
pub fn gamma_matrix(model: &StateSpaceModel, xi: f64, omega: f64) -> Hermitian {
    let (g0, k) = gamma_parts(model, omega);
    Hermitian::from_parts(kernels::hermitian_part(&(g0 + k.scale(xi))))
}

/// `γ(ξ, ω) = λ_min Γ(ξ, ω)`.
pub fn gamma_xi_omega(model: &StateSpaceModel, xi: f64, omega: f64) -> Result<f64> {
    gamma_matrix(model, xi, omega).lambda_min()
}

/// Smallest `|λ(Γ)|` relative to `‖Γ‖`.
fn gamma_singularity(model: &StateSpaceModel, xi: f64, omega: f64) -> Result<f64> {
    let e = gamma_matrix(model, xi, omega).eigenvalues()?;
    let scale = e[0].abs().max(e[e.len() - 1].abs()).max(f64::MIN_POSITIVE);
    Ok(e.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min) / scale)
}

const ROOT_IMAG_TOL: f64 = 1e-7;

/// Real roots `ξ ∈ (0, 1)` of `det Γ(ξ, ω) = 0`, ascending.
///
/// After scaling by `D_s` the coefficient `K'` is an involution, so the roots
/// are the eigenvalues of `−K' Γ₀'`.
pub fn xi_roots_at_omega(model: &StateSpaceModel, omega: f64) -> Result<Vec<f64>> {
    let (g0, k) = gamma_parts(model, omega);
    let frame = kyp::perturbation_frame(model.n(), model.m());
    let g0s = &frame.ds * g0 * &frame.ds;
    let ks = &frame.ds * k * &frame.ds;
    let scale = kernels::norm2(&g0s)?.max(1.0);
    let mut roots: Vec<f64> = kernels::eigenvalues(&-(ks * g0s))?
        .into_iter()
        .filter(|z| z.im.abs() <= ROOT_IMAG_TOL * scale)
        .map(|z| z.re)
        .filter(|&x| x > 0.0 && x < 1.0)
        .collect();
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

/// Bisection on strict passivity of `ℳ_ξ` over `[0, 1 − ρ(A)]`.
pub fn xi_sup_bisection(model: &StateSpaceModel, tau: f64, tol: &Tolerances) -> Result<XiResult> {
    check_tau(tau)?;
    let rho = kernels::spectral_radius(model.a())?;
    if rho >= 1.0 || !strictly_passive(&shift_model(model, 0.0, Direction::Forward)?, tol)? {
        return Ok(XiResult::zero(XiMethod::Bisection));
    }
    let (mut lo, mut hi) = (0.0, 1.0 - rho);
    let mut iterations = 0;
    while hi - lo > tau {
        let mid = 0.5 * (lo + hi);
        if strictly_passive(&shift_model(model, mid, Direction::Forward)?, tol)? {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    // at the stability bound the pencil itself can be singular
    let witness_frequencies = shift_model(model, hi, Direction::Forward)
        .and_then(|sm| has_unit_circle_zeros(&sm, tol))
        .map(|t| t.omegas)
        .unwrap_or_default();
    Ok(XiResult {
        xi_lo: lo,
        xi_hi: hi,
        iterations,
        method: XiMethod::Bisection,
        witness_frequencies,
    })
}

pub const MAX_XI_ITERATIONS: usize = 100;

/// Level-set iteration: probe below the current upper bound, and when the
/// probe has unit-circle zeros replace the bound by the smallest root of `Γ`
/// at the midpoint of the widest gap between them.
pub fn xi_sup_eigenvalue(model: &StateSpaceModel, tau: f64, tol: &Tolerances) -> Result<XiResult> {
    check_tau(tau)?;
    let rho = kernels::spectral_radius(model.a())?;
    if rho >= 1.0 || !strictly_passive(&shift_model(model, 0.0, Direction::Forward)?, tol)? {
        return Ok(XiResult::zero(XiMethod::EigenvalueBased));
    }
    let (mut lo, mut up) = (0.0, 1.0 - rho);
    let mut witness = vec![];
    for iteration in 1..=MAX_XI_ITERATIONS {
        let done = |lo: f64, up: f64, witness: Vec<f64>| XiResult {
            xi_lo: lo,
            xi_hi: up,
            iterations: iteration,
            method: XiMethod::EigenvalueBased,
            witness_frequencies: witness,
        };
        let probe = up - tau;
        if probe <= lo {
            return Ok(done(lo, up, witness));
        }
        let sm = shift_model(model, probe, Direction::Forward)?;
        let test = has_unit_circle_zeros(&sm, tol)?;
        let filter = 10.0 * tol.psd_tol;
        let mut accepted = vec![];
        for &w in &test.omegas {
            if gamma_singularity(model, probe, w)? <= filter {
                accepted.push(w);
            }
        }
        if accepted.is_empty() && strictly_passive(&sm, tol)? {
            return Ok(done(probe, up, witness));
        }
        let improved = if accepted.is_empty() { None } else { midpoint_root(model, &accepted, lo, probe)? };
        if !accepted.is_empty() {
            witness = accepted;
        }
        match improved {
            Some(r) => up = r,
            None => {
                // the probe is not strictly passive; fall back to halving
                up = probe;
                let mid = 0.5 * (lo + up);
                if strictly_passive(&shift_model(model, mid, Direction::Forward)?, tol)? {
                    lo = mid;
                } else {
                    up = mid;
                }
            }
        }
    }
    Err(Error::Convergence { lo, hi: up })
}

/// Smallest verified root below `probe` at the first gap midpoint that has one.
fn midpoint_root(model: &StateSpaceModel, omegas: &[f64], lo: f64, probe: f64) -> Result<Option<f64>> {
    for (_, w) in gap_midpoints(omegas) {
        for r in xi_roots_at_omega(model, w)? {
            if r < lo || r >= probe {
                continue;
            }
            if gamma_singularity(model, r, w)? <= ROOT_IMAG_TOL {
                return Ok(Some(r));
            }
        }
    }
    Ok(None)
}

/// Stabilizing solution of `ℳ_{Ξ_lo}` classified for `ℳ`; its `ξ*` is at
/// least `Ξ_lo`. Steps further below `Ξ_lo` when the splitting at `Ξ_lo` is
/// too tight to extract.
pub fn near_optimal_certificate(model: &StateSpaceModel, res: &XiResult, tol: &Tolerances) -> Result<Certificate> {
    let step = res.width().max(1e-12);
    let mut last = None;
    for k in 0..8 {
        let xi = if k == 0 { res.xi_lo } else { (res.xi_lo - step * 4f64.powi(k)).max(0.0) };
        let sm = shift_model(model, xi, Direction::Forward)?;
        match riccati::extremal_solutions(&sm.model, tol) {
            Ok((minus, _)) => return kyp::classify_certificate(&minus.x, model, tol),
            Err(e) => last = Some(e),
        }
        if xi == 0.0 {
            break;
        }
    }
    Err(last.expect("at least one attempt"))
}
