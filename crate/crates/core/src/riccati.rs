//! Extremal solutions of the discrete-time Riccati equation via deflating
//! subspaces of the extended symplectic pencil.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{self, block, fro_norm, identity, zeros, CMatrix, Hermitian, Tolerances, C64};
use crate::kyp;
use crate::system::StateSpaceModel;

/// Generalized eigenvalue of a pencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PencilEig {
    Finite(C64),
    Infinite,
}

impl PencilEig {
    pub fn modulus(&self) -> f64 {
        match self {
            PencilEig::Finite(z) => z.norm(),
            PencilEig::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(&self) -> Option<C64> {
        match self {
            PencilEig::Finite(z) => Some(*z),
            PencilEig::Infinite => None,
        }
    }
}

/// Extended pencil `K v = λ L v` of order `2n+m`,
///
/// ```text
/// K = [[0, A, B], [(ξ−1)I, 0, C^H], [0, C, D^H+D−2ξI]]
/// L = [[0, (1−ξ)I, 0], [−A^H, 0, 0], [−B^H, 0, 0]]
/// ```
///
/// whose finite eigenvalues are the zeros of the Popov function of `ℳ_ξ`. At `ξ = 0` it
/// carries the Riccati deflating subspace `[−X; I; −F]`.
#[derive(Debug, Clone)]
pub struct SymplecticPencil {
    pub n: usize,
    pub m: usize,
    pub k: CMatrix,
    pub l: CMatrix,
    /// Reduced `2n` factors `(K', L')` with `K' w = λ L' w`, present when
    /// `D^H + D − 2ξI` is invertible.
    pub reduced: Option<(CMatrix, CMatrix)>,
    /// `L'⁻¹ K'` when `L'` is invertible.
    pub s: Option<CMatrix>,
}

pub fn build_pencil(model: &StateSpaceModel, xi: f64, tol: &Tolerances) -> Result<SymplecticPencil> {
    let (n, m) = (model.n(), model.m());
    let (a, b, cm) = (model.a(), model.b(), model.c());
    let r = model.d_sym() - identity(m).scale(2.0 * xi);
    let i_n = identity(n);
    let (znn, znm, zmn) = (zeros(n, n), zeros(n, m), zeros(m, n));
    let ch = cm.adjoint();
    let shifted = i_n.scale(xi - 1.0);
    let k = block(&[&[&znn, a, b], &[&shifted, &znn, &ch], &[&zmn, cm, &r]]);
    let ah = -a.adjoint();
    let bh = -b.adjoint();
    let lead = i_n.scale(1.0 - xi);
    let l = block(&[&[&znn, &lead, &znm], &[&ah, &znn, &znm], &[&bh, &zmn, &zeros(m, m)]]);

    let r_sv = kernels::singular_values(&r)?;
    let r_ok = r_sv.last().copied().unwrap_or(0.0) > tol.rank_tol * r_sv[0].max(1.0);
    let (reduced, s) = if r_ok {
        let rinv_c = kernels::solve(&r, cm)?;
        let rinv_bh = kernels::solve(&r, &b.adjoint())?;
        // (1−ξ) scales the identity blocks after eliminating the third row
        let ac = a - b * &rinv_c;
        let kp = block(&[&[&ac, &znn], &[&(&ch * &rinv_c), &i_n.scale(1.0 - xi)]]);
        let lp = block(&[&[&i_n.scale(1.0 - xi), &(b * &rinv_bh)], &[&znn, &ac.adjoint()]]);
        let l_sv = kernels::singular_values(&lp)?;
        let s = if l_sv.last().copied().unwrap_or(0.0) > tol.rank_tol * l_sv[0].max(1.0) {
            Some(kernels::solve(&lp, &kp)?)
        } else {
            None
        };
        (Some((kp, lp)), s)
    } else {
        (None, None)
    };
    Ok(SymplecticPencil { n, m, k, l, reduced, s })
}

/// Shift-and-invert operator `(K − sL)⁻¹ L` for a well-conditioned shift.
fn shift_invert(k: &CMatrix, l: &CMatrix) -> Result<(C64, CMatrix)> {
    let mut best: Option<(f64, C64)> = None;
    for (radius, angle) in [(1.9, 0.7), (1.9, 2.3), (0.45, 1.1), (1.9, 4.1), (3.1, 5.5), (0.45, 3.9), (2.7, 1.7)] {
        let s = C64::from_polar(radius, angle);
        let sv = kernels::singular_values(&(k - l * s))?;
        let rc = sv.last().copied().unwrap_or(0.0) / sv[0].max(f64::MIN_POSITIVE);
        if best.is_none_or(|(b, _)| rc > b) {
            best = Some((rc, s));
        }
        if rc > 1e-3 {
            break;
        }
    }
    let (rc, s) = best.expect("nonempty candidate list");
    if rc < 1e-14 {
        return Err(Error::Pencil("pencil is singular (det(K − sL) ≡ 0)".into()));
    }
    let nmat = kernels::solve(&(k - l * s), l)?;
    Ok((s, nmat))
}

/// Spectrum of the pencil with the `m` structural infinite eigenvalues removed.
#[derive(Debug, Clone)]
pub struct PencilSpectrum {
    pub eigenvalues: Vec<PencilEig>,
    shift: C64,
    nmat: CMatrix,
    tiny: f64,
}

impl PencilSpectrum {
    fn to_lambda(&self, mu: C64) -> PencilEig {
        if mu.norm() <= self.tiny {
            PencilEig::Infinite
        } else {
            PencilEig::Finite(self.shift + mu.inv())
        }
    }

    pub fn on_circle(&self, circle_tol: f64) -> Vec<C64> {
        self.eigenvalues
            .iter()
            .filter_map(|e| e.finite())
            .filter(|z| (z.norm() - 1.0).abs() <= circle_tol)
            .collect()
    }
}

pub fn pencil_spectrum(p: &SymplecticPencil) -> Result<PencilSpectrum> {
    let (shift, nmat) = shift_invert(&p.k, &p.l)?;
    let mu = kernels::eigenvalues(&nmat)?;
    let scale = kernels::norm2(&nmat)?.max(1.0);
    // infinite eigenvalues of index two show up at sqrt(eps)
    let tiny = 16.0 * f64::EPSILON.sqrt() * scale;
    let mut order: Vec<usize> = (0..mu.len()).collect();
    order.sort_by(|&i, &j| mu[i].norm().total_cmp(&mu[j].norm()));
    let structural: Vec<usize> = order[..p.m].to_vec();
    let mut spec = PencilSpectrum {
        eigenvalues: vec![],
        shift,
        nmat,
        tiny,
    };
    spec.eigenvalues = (0..mu.len())
        .filter(|i| !structural.contains(i))
        .map(|i| spec.to_lambda(mu[i]))
        .collect();
    Ok(spec)
}

/// Finite eigenvalues of the pencil (zeros of `Φ`), infinite ones reported separately.
pub fn pencil_eigenvalues(p: &SymplecticPencil) -> Result<Vec<PencilEig>> {
    Ok(pencil_spectrum(p)?.eigenvalues)
}

/// Half-width of the band around the unit circle inside which pencil
/// eigenvalues count as unit-circle zeros. A double zero on the circle
/// splits by about `sqrt(eps)` under rounding, so the band never drops below
/// that resolution.
pub fn circle_band(tol: &Tolerances) -> f64 {
    tol.circle_tol.max(CIRCLE_RESOLUTION)
}

const CIRCLE_RESOLUTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Inside,
    Outside,
}

/// Orthonormal basis of the deflating subspace for the eigenvalues strictly
/// inside (or outside) the unit disc, checked for a clean `n`-dimensional
/// splitting.
fn split_subspace(p: &SymplecticPencil, side: Side, tol: &Tolerances) -> Result<CMatrix> {
    let spec = pencil_spectrum(p)?;
    let band = circle_band(tol);
    let on = spec.on_circle(band).len();
    let inside = spec.eigenvalues.iter().filter(|e| e.modulus() < 1.0 - band).count();
    if on > 0 || inside != p.n {
        return Err(Error::SpectralSplitting {
            on_circle: on,
            inside,
            expected: p.n,
        });
    }
    let (shift, tiny) = (spec.shift, spec.tiny);
    let select = move |mu: C64| {
        mu.norm() > tiny
            && match side {
                Side::Inside => (shift + mu.inv()).norm() < 1.0 - band,
                Side::Outside => (shift + mu.inv()).norm() > 1.0 + band,
            }
    };
    let (q, _, count) = kernels::ordered_schur(&spec.nmat, select)?;
    if count != p.n {
        return Err(Error::SpectralSplitting {
            on_circle: on,
            inside: if side == Side::Inside { count } else { inside },
            expected: p.n,
        });
    }
    Ok(q.columns(0, p.n).into_owned())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Stabilizing,
    Antistabilizing,
}

#[derive(Debug, Clone)]
pub struct RiccatiResult {
    pub x: Hermitian,
    /// `None` when `D^H + D − B^H X B` is singular at the solution.
    pub f: Option<CMatrix>,
    pub a_f: Option<CMatrix>,
    /// `‖Ricc(X)‖_F`, or `σ_min(W(X))` when the middle block is singular.
    pub residual_norm: f64,
    /// `residual_norm` over the summed norms of the equation's terms.
    pub relative_residual: f64,
    pub branch: Branch,
}

fn middle_block(x: &Hermitian, model: &StateSpaceModel, tol: &Tolerances) -> Result<CMatrix> {
    let b = model.b();
    let bxb = b.adjoint() * x.matrix() * b;
    let r = model.d_sym() - &bxb;
    let sv = kernels::singular_values(&r)?;
    let scale = 1.0 + kernels::norm2(&model.d_sym())? + kernels::norm2(&bxb)?;
    let smin = sv.last().copied().unwrap_or(0.0);
    if smin <= tol.rank_tol * scale {
        return Err(Error::SchurDegenerate { sigma_min: smin });
    }
    Ok(r)
}

/// `F = (D^H+D − B^H X B)⁻¹ (C − B^H X A)` and `A_F = A − B F`.
pub fn closed_loop(x: &Hermitian, model: &StateSpaceModel, tol: &Tolerances) -> Result<(CMatrix, CMatrix)> {
    if x.order() != model.n() {
        return Err(Error::dim("X", model.n(), x.order()));
    }
    let r = middle_block(x, model, tol)?;
    let rhs = model.c() - model.b().adjoint() * x.matrix() * model.a();
    let f = kernels::solve(&r, &rhs)?;
    let a_f = model.a() - model.b() * &f;
    Ok((f, a_f))
}

/// `X − A^H X A − (C^H − A^H X B)(D^H+D − B^H X B)⁻¹(C − B^H X A)`
pub fn riccati_residual(x: &Hermitian, model: &StateSpaceModel, tol: &Tolerances) -> Result<Hermitian> {
    Ok(residual_terms(x, model, tol)?.0)
}

/// Residual together with the sum of the Frobenius norms of its three terms.
fn residual_terms(x: &Hermitian, model: &StateSpaceModel, tol: &Tolerances) -> Result<(Hermitian, f64)> {
    if x.order() != model.n() {
        return Err(Error::dim("X", model.n(), x.order()));
    }
    let r = middle_block(x, model, tol)?;
    let (a, b) = (model.a(), model.b());
    let xm = x.matrix();
    let g = model.c() - b.adjoint() * xm * a;
    let corr = g.adjoint() * kernels::solve(&r, &g)?;
    let axa = a.adjoint() * xm * a;
    let scale = fro_norm(xm) + fro_norm(&axa) + fro_norm(&corr);
    Ok((Hermitian::from_parts(xm - axa - corr), scale))
}

/// `(‖Ricc(X)‖_F, term scale)`; falls back to `(σ_min(W(X)), ‖W(X)‖)` when the
/// middle block is singular.
fn residual_norm(x: &Hermitian, model: &StateSpaceModel, tol: &Tolerances) -> Result<(f64, f64)> {
    match residual_terms(x, model, tol) {
        Ok((r, scale)) => Ok((fro_norm(r.matrix()), scale)),
        Err(Error::SchurDegenerate { .. }) => {
            let w = kyp::build_w(x, model)?;
            let sv = kernels::singular_values(w.matrix())?;
            Ok((sv.last().copied().unwrap_or(0.0), sv[0]))
        }
        Err(e) => Err(e),
    }
}

fn finish(x: Hermitian, model: &StateSpaceModel, branch: Branch, tol: &Tolerances) -> Result<RiccatiResult> {
    let (f, a_f) = match closed_loop(&x, model, tol) {
        Ok((f, a_f)) => (Some(f), Some(a_f)),
        Err(Error::SchurDegenerate { .. }) => (None, None),
        Err(e) => return Err(e),
    };
    let (residual_norm, scale) = residual_norm(&x, model, tol)?;
    Ok(RiccatiResult {
        x,
        f,
        a_f,
        residual_norm,
        relative_residual: residual_norm / scale.max(f64::MIN_POSITIVE),
        branch,
    })
}

const MAX_BASIS_COND: f64 = 1e10;

/// Riccati solution from a deflating subspace `[V₁; V₂; V₃]`: `X = −V₁ V₂⁻¹`.
fn subspace_solution(model: &StateSpaceModel, side: Side, tol: &Tolerances) -> Result<Hermitian> {
    let n = model.n();
    let pencil = build_pencil(model, 0.0, tol)?;
    let v = split_subspace(&pencil, side, tol)?;
    let v1 = v.rows(0, n).into_owned();
    let v2 = v.rows(n, n).into_owned();
    let cond = kernels::cond2(&v2)?;
    if !(cond <= MAX_BASIS_COND) {
        return Err(Error::Conditioning { cond });
    }
    // X V₂ = −V₁  ⇔  V₂^H X = −V₁^H
    let x = -kernels::solve(&v2.adjoint(), &v1.adjoint())?.adjoint();
    let asym = fro_norm(&(&x - x.adjoint()));
    if asym > 1e-6 * (1.0 + fro_norm(&x)) * cond.max(1.0).sqrt() {
        return Err(Error::Conditioning { cond });
    }
    let x = Hermitian::new(x)?;
    let lmin = x.lambda_min()?;
    if !(lmin > 0.0) {
        return Err(Error::NotPositiveDefinite { lambda_min: lmin });
    }
    Ok(x)
}

/// The extremal certificates `X₋ ⪯ X ⪯ X₊`.
///
/// `X₋` spans the in-disc deflating subspace. `X₊` is read from the
/// complementary subspace when that has a well-conditioned `V₂`, and
/// otherwise as the inverse of the minimal solution of the dual model
/// `{A^H, C^H, B^H, D^H}`; the candidate with the smaller residual wins.
pub fn extremal_solutions(model: &StateSpaceModel, tol: &Tolerances) -> Result<(RiccatiResult, RiccatiResult)> {
    let x_minus = subspace_solution(model, Side::Inside, tol)?;
    let via_dual = subspace_solution(&model.dual(), Side::Inside, tol)
        .and_then(|y| Hermitian::new(kernels::inverse(y.matrix())?));
    let direct = subspace_solution(model, Side::Outside, tol);
    let x_plus = match (direct, via_dual) {
        (Ok(d), Ok(v)) => {
            if residual_norm(&d, model, tol)?.0 <= residual_norm(&v, model, tol)?.0 {
                d
            } else {
                v
            }
        }
        (Ok(d), Err(_)) => d,
        (Err(_), Ok(v)) => v,
        (Err(_), Err(e)) => return Err(e),
    };
    Ok((
        finish(x_minus, model, Branch::Stabilizing, tol)?,
        finish(x_plus, model, Branch::Antistabilizing, tol)?,
    ))
}

/// Scalar `det W(x)` as a quadratic `p₂x² + p₁x + p₀` for `n = m = 1`.
pub fn scalar_det_w(a: f64, b: f64, cc: f64, d: f64) -> (f64, f64, f64) {
    // (x(1−a²))(2d − b²x) − (c − abx)²
    let p2 = -(1.0 - a * a) * b * b - a * a * b * b;
    let p1 = 2.0 * d * (1.0 - a * a) + 2.0 * a * b * cc;
    let p0 = -cc * cc;
    (p2, p1, p0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::testutil::*;
    use crate::kernels::{c, ONE};
    use approx::assert_relative_eq;

    fn m0() -> StateSpaceModel {
        StateSpaceModel::scalar(0.5, 1.0, 1.0, 1.0).unwrap()
    }

    fn m1() -> StateSpaceModel {
        StateSpaceModel::scalar(0.5, 1.0, 0.5, 1.0).unwrap()
    }

    fn quadratic_roots(p: (f64, f64, f64)) -> (f64, f64) {
        let (a, b, c) = p;
        let disc = (b * b - 4.0 * a * c).sqrt();
        let r1 = (-b + disc) / (2.0 * a);
        let r2 = (-b - disc) / (2.0 * a);
        (r1.min(r2), r1.max(r2))
    }

    #[test]
    fn scalar_det_w_matches_matrix() {
        for &(a, b, cc, d) in &[(0.5, 1.0, 1.0, 1.0), (0.5, 1.0, 0.5, 1.0), (-0.3, 0.7, 1.2, 2.0)] {
            let m = StateSpaceModel::scalar(a, b, cc, d).unwrap();
            let (p2, p1, p0) = scalar_det_w(a, b, cc, d);
            for x in [0.3, 1.0, 2.5] {
                let det = kyp::build_w(&Hermitian::scalar(x), &m).unwrap().matrix().determinant().re;
                assert_relative_eq!(det, p2 * x * x + p1 * x + p0, epsilon = 1e-12);
            }
        }
        assert_eq!(scalar_det_w(0.5, 1.0, 1.0, 1.0), (-1.0, 2.5, -1.0));
    }

    #[test]
    fn extremal_m0() {
        let tol = Tolerances::default();
        let (xm, xp) = extremal_solutions(&m0(), &tol).unwrap();
        let (lo, hi) = quadratic_roots(scalar_det_w(0.5, 1.0, 1.0, 1.0));
        assert_relative_eq!(xm.x.matrix()[(0, 0)].re, lo, epsilon = 1e-10);
        assert_relative_eq!(xp.x.matrix()[(0, 0)].re, hi, epsilon = 1e-10);
        assert_relative_eq!(lo, 0.5, epsilon = 1e-15);
        assert_relative_eq!(hi, 2.0, epsilon = 1e-15);
        // x₊ makes the middle block vanish
        assert!(xp.f.is_none());
        assert!(xm.f.is_some());
    }

    #[test]
    fn extremal_m1() {
        let tol = Tolerances::default();
        let (xm, xp) = extremal_solutions(&m1(), &tol).unwrap();
        let s3 = 3f64.sqrt();
        assert_relative_eq!(xm.x.matrix()[(0, 0)].re, (2.0 - s3) / 2.0, epsilon = 1e-12);
        assert_relative_eq!(xp.x.matrix()[(0, 0)].re, (2.0 + s3) / 2.0, epsilon = 1e-12);
        let prod = xm.x.matrix()[(0, 0)].re * xp.x.matrix()[(0, 0)].re;
        assert_relative_eq!(prod, 0.25, epsilon = 1e-12);
        assert!(xm.residual_norm < 1e-12);
        assert_relative_eq!(xm.a_f.as_ref().unwrap()[(0, 0)].re, 2.0 - s3, epsilon = 1e-12);
        assert_relative_eq!(xm.f.as_ref().unwrap()[(0, 0)].re, 0.232051, epsilon = 1e-6);
        assert_relative_eq!(xp.a_f.as_ref().unwrap()[(0, 0)].re, 2.0 + s3, epsilon = 1e-10);
        assert_eq!(xm.branch, Branch::Stabilizing);
        assert_eq!(xp.branch, Branch::Antistabilizing);
    }

    #[test]
    fn pencil_m1_reciprocal_pair() {
        let tol = Tolerances::default();
        let p = build_pencil(&m1(), 0.0, &tol).unwrap();
        let mut ev: Vec<f64> = pencil_eigenvalues(&p).unwrap().iter().map(|e| e.finite().unwrap().re).collect();
        ev.sort_by(f64::total_cmp);
        let s3 = 3f64.sqrt();
        assert_relative_eq!(ev[0], 2.0 - s3, epsilon = 1e-12);
        assert_relative_eq!(ev[1], 2.0 + s3, epsilon = 1e-10);
        let s = p.s.as_ref().expect("explicit S exists for M1");
        let mut se: Vec<f64> = kernels::eigenvalues(s).unwrap().iter().map(|z| z.re).collect();
        se.sort_by(f64::total_cmp);
        assert_relative_eq!(se[0], ev[0], epsilon = 1e-10);
        assert_relative_eq!(se[1], ev[1], epsilon = 1e-10);
    }

    #[test]
    fn pencil_m0_zero_and_infinity() {
        let tol = Tolerances::default();
        let p = build_pencil(&m0(), 0.0, &tol).unwrap();
        assert!(p.s.is_none());
        let ev = pencil_eigenvalues(&p).unwrap();
        assert_eq!(ev.len(), 2);
        assert!(ev.iter().any(|e| matches!(e, PencilEig::Infinite)));
        assert!(ev.iter().any(|e| e.finite().is_some_and(|z| z.norm() < 1e-12)));
    }

    #[test]
    fn pencil_zero_model_has_no_unit_circle_zeros() {
        let tol = Tolerances::default();
        let p = build_pencil(&StateSpaceModel::zero_model(2, 1).unwrap(), 0.0, &tol).unwrap();
        let spec = pencil_spectrum(&p).unwrap();
        assert!(spec.on_circle(tol.circle_tol).is_empty());
    }

    #[test]
    fn residual_examples() {
        let tol = Tolerances::default();
        let s3 = 3f64.sqrt();
        let r = riccati_residual(&Hermitian::scalar((2.0 - s3) / 2.0), &m1(), &tol).unwrap();
        assert!(r.matrix()[(0, 0)].norm() < 1e-12);
        let r = riccati_residual(&Hermitian::scalar(1.0), &m0(), &tol).unwrap();
        assert_relative_eq!(r.matrix()[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert!(matches!(
            riccati_residual(&Hermitian::scalar(2.0), &m0(), &tol),
            Err(Error::SchurDegenerate { .. })
        ));
    }

    #[test]
    fn closed_loop_zero_model() {
        let tol = Tolerances::default();
        let z = StateSpaceModel::zero_model(1, 1).unwrap();
        let (f, a_f) = closed_loop(&Hermitian::identity(1), &z, &tol).unwrap();
        assert_eq!(f[(0, 0)], c(0.0));
        assert_eq!(a_f[(0, 0)], c(0.0));
    }

    #[test]
    fn unit_circle_zero_is_rejected() {
        // d = 2/3 makes Φ(−1) = 0
        let tol = Tolerances::default();
        let m = StateSpaceModel::scalar(0.5, 1.0, 1.0, 2.0 / 3.0).unwrap();
        assert!(matches!(extremal_solutions(&m, &tol), Err(Error::SpectralSplitting { .. })));
    }

    fn strictly_passive(r: &mut rand_chacha::ChaCha8Rng, n: usize, m: usize) -> StateSpaceModel {
        let a = random_matrix(r, n, n);
        let a = a.scale(0.8 / kernels::norm2(&a).unwrap());
        let b = random_matrix(r, n, m).scale(0.5);
        let cm = random_matrix(r, m, n).scale(0.5);
        let mut d = random_matrix(r, m, m).scale(0.3);
        loop {
            let model = StateSpaceModel::new(a.clone(), b.clone(), cm.clone(), d.clone()).unwrap();
            if kyp::build_w(&Hermitian::identity(n), &model).unwrap().lambda_min().unwrap() > 0.05 {
                return model;
            }
            d += identity(m).scale(0.25);
        }
    }

    #[test]
    fn random_extremal_properties() {
        let tol = Tolerances::default();
        let mut r = rng(21);
        for trial in 0..25 {
            let n = 1 + trial % 5;
            let m = 1 + trial % 3;
            let model = strictly_passive(&mut r, n, m);
            let (xm, xp) = extremal_solutions(&model, &tol).unwrap();
            let diff = Hermitian::new(xp.x.matrix() - xm.x.matrix()).unwrap();
            assert!(diff.lambda_min().unwrap() >= -1e-8, "trial {trial}");
            for sol in [&xm, &xp] {
                assert!(sol.relative_residual <= 1e-8, "trial {trial}: residual {}", sol.relative_residual);
                let cert = kyp::classify_certificate(&sol.x, &model, &Tolerances { psd_tol: 1e-8, ..tol }).unwrap();
                assert_eq!(cert.classification, kyp::Classification::Boundary, "trial {trial}");
            }
            let a_f = xm.a_f.as_ref().unwrap();
            assert!(kernels::spectral_radius(a_f).unwrap() <= 1.0 + tol.circle_tol);
            // closed-loop spectrum = in-disc pencil spectrum
            let p = build_pencil(&model, 0.0, &tol).unwrap();
            let inside: Vec<C64> = pencil_eigenvalues(&p)
                .unwrap()
                .iter()
                .filter_map(|e| e.finite())
                .filter(|z| z.norm() < 1.0)
                .collect();
            let af_eig = kernels::eigenvalues(a_f).unwrap();
            assert_eq!(inside.len(), af_eig.len());
            for z in &af_eig {
                let best = inside.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
                assert!(best < 1e-6, "trial {trial}: {z} not matched");
            }
        }
    }

    #[test]
    fn random_pencil_reciprocal_pairing() {
        let tol = Tolerances::default();
        let mut r = rng(8);
        for trial in 0..15 {
            let model = strictly_passive(&mut r, 1 + trial % 4, 1 + trial % 2);
            let p = build_pencil(&model, 0.0, &tol).unwrap();
            let ev: Vec<C64> = pencil_eigenvalues(&p).unwrap().iter().filter_map(|e| e.finite()).collect();
            for z in ev.iter().filter(|z| z.norm() > 1e-6) {
                let mirror = ONE / z.conj();
                let best = ev.iter().map(|w| (w - mirror).norm() / mirror.norm().max(1.0)).fold(f64::INFINITY, f64::min);
                assert!(best < 1e-6, "trial {trial}: {z} has no partner");
            }
        }
    }
}
