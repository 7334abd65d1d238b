//! The X-passivity radius: the smallest perturbation `Δ_S` of the system
//! matrix that makes `Ŵ(X, ℳ + Δ_S)` singular.

use crate::error::{Error, Result};
use crate::kernels::{self, block, c, identity, CMatrix, CVector, Hermitian, Tolerances};
use crate::kyp::{self, Classification};
use crate::normalization::{self, NormalizedRealization};
use crate::system::StateSpaceModel;

/// `F₁ = R^{−H} E₁`, `F₂ = R^{−H} E₂` for `Ŵ = R^H R`.
#[derive(Debug, Clone)]
pub struct Frames {
    pub f1: CMatrix,
    pub f2: CMatrix,
}

pub fn frames(what: &Hermitian, n: usize, m: usize, tol: &Tolerances) -> Result<Frames> {
    let r = kernels::cholesky(what, tol.psd_tol)?;
    let frame = kyp::perturbation_frame(n, m);
    let rh = r.adjoint();
    // R^H is lower triangular; plain LU on it is exact enough at desk scale
    let f1 = kernels::solve(&rh, &frame.e1)?;
    let f2 = kernels::solve(&rh, &frame.e2)?;
    Ok(Frames { f1, f2 })
}

/// `[γ F₁, F₂/γ]`
fn composite(f: &Frames, gamma: f64) -> CMatrix {
    let a = f.f1.scale(gamma);
    let b = f.f2.scale(1.0 / gamma);
    block(&[&[&a, &b]])
}

/// `λ_max(γ² F₁F₁^H + γ^{−2} F₂F₂^H)`, the largest eigenvalue of `M(γ)`.
pub fn gamma_objective(f1: &CMatrix, f2: &CMatrix, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Input(format!("gamma must be positive and finite, got {gamma}")));
    }
    let g = f1 * f1.adjoint() * c(gamma * gamma) + f2 * f2.adjoint() * c(1.0 / (gamma * gamma));
    Hermitian::from_parts(g).lambda_max()
}

#[derive(Debug, Clone)]
pub struct GammaSearch {
    pub f1: CMatrix,
    pub f2: CMatrix,
    pub alpha: f64,
    pub beta: f64,
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub gamma_star: f64,
    pub gamma_gm: f64,
    pub lambda_max_star: f64,
    pub evaluations: usize,
}

impl GammaSearch {
    pub fn objective(&self, gamma: f64) -> Result<f64> {
        gamma_objective(&self.f1, &self.f2, gamma)
    }
}

/// Minimizer of `λ_max(M(γ))` and an eigenvector `z = [u; v]` of `M(γ*)`
/// with `‖u‖ = ‖v‖ = 1`.
#[derive(Debug, Clone)]
pub struct GammaMinimum {
    pub search: GammaSearch,
    pub u: CVector,
    pub v: CVector,
    /// Dominant eigenvector of `G G^H`, `G = [γ*F₁, F₂/γ*]`; it satisfies
    /// `M(Q) w = λ_max* w` for the dual certificate `Q`.
    pub w: CVector,
    /// `|‖u‖² − ‖v‖²|` of the unnormalized eigenvector, before rescaling.
    pub balance_defect: f64,
}

/// Relative gap under which top eigenvalues of `M(γ*)` are treated as one cluster.
const CLUSTER_RTOL: f64 = 1e-8;

pub fn minimize_gamma(f1: &CMatrix, f2: &CMatrix, tol: &Tolerances) -> Result<GammaMinimum> {
    let alpha = kernels::norm2(f1)?;
    let beta = kernels::norm2(f2)?;
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::DegenerateFrame { alpha, beta });
    }
    let gamma_lo = (beta / (2.0 * alpha)).sqrt();
    let gamma_hi = (2.0 * beta / alpha).sqrt();
    let gamma_gm = (beta / alpha).sqrt();
    let mut failure = None;
    let golden = kernels::golden_section_min(
        |g| match gamma_objective(f1, f2, g) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        gamma_lo,
        gamma_hi,
        tol.golden_tol * gamma_gm,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let frames = Frames { f1: f1.clone(), f2: f2.clone() };
    let gamma_star = golden.x;
    let g = composite(&frames, gamma_star);
    let eig = Hermitian::from_parts(&g * g.adjoint()).eig()?;
    let k = eig.values.len();
    let lambda_max_star = eig.values[k - 1];
    let sigma = lambda_max_star.sqrt();
    let p = f1.ncols();

    // eigenvectors of the top cluster mapped into z-space
    let cluster: Vec<usize> = (0..k)
        .filter(|&j| eig.values[j] >= lambda_max_star * (1.0 - CLUSTER_RTOL))
        .collect();
    let ws: Vec<CVector> = cluster.iter().map(|&j| eig.vectors.column(j).into_owned()).collect();
    let zs: Vec<CVector> = ws.iter().map(|w| g.adjoint() * w / c(sigma)).collect();
    let imbalance = |z: &CVector| z.rows(0, p).norm_squared() - z.rows(p, p).norm_squared();

    let mut coeff = CVector::zeros(zs.len());
    coeff[0] = c(1.0);
    if zs.len() > 1 {
        // H = Z^H diag(I, −I) Z; a unit c with c^H H c = 0 balances u and v
        let q = zs.len();
        let h = CMatrix::from_fn(q, q, |i, j| {
            zs[i].rows(0, p).dotc(&zs[j].rows(0, p)) - zs[i].rows(p, p).dotc(&zs[j].rows(p, p))
        });
        let he = Hermitian::from_parts(h).eig()?;
        let (lo, hi) = (he.values[0], he.values[q - 1]);
        if lo < 0.0 && hi > 0.0 {
            let comb = he.vectors.column(q - 1) * c((-lo).sqrt()) + he.vectors.column(0) * c(hi.sqrt());
            coeff = comb.normalize();
        } else {
            let best = (0..q).min_by(|&i, &j| imbalance(&zs[i]).abs().total_cmp(&imbalance(&zs[j]).abs())).unwrap();
            coeff = CVector::zeros(q);
            coeff[best] = c(1.0);
        }
    }
    let mut z = CVector::zeros(2 * p);
    let mut w = CVector::zeros(ws[0].len());
    for (j, cj) in coeff.iter().enumerate() {
        z += &zs[j] * *cj;
        w += &ws[j] * *cj;
    }
    let balance_defect = imbalance(&z).abs();
    let u_raw = z.rows(0, p).into_owned();
    let v_raw = z.rows(p, p).into_owned();
    let (nu, nv) = (u_raw.norm(), v_raw.norm());
    if !(nu > 0.0 && nv > 0.0) {
        return Err(Error::Numerical("dominant eigenvector has a vanishing block".into()));
    }
    Ok(GammaMinimum {
        search: GammaSearch {
            f1: f1.clone(),
            f2: f2.clone(),
            alpha,
            beta,
            gamma_lo,
            gamma_hi,
            gamma_star,
            gamma_gm,
            lambda_max_star,
            evaluations: golden.evaluations,
        },
        u: u_raw / c(nu),
        v: v_raw / c(nv),
        w: w.normalize(),
        balance_defect,
    })
}

/// Block view of a perturbation of the system matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub delta_a: CMatrix,
    pub delta_b: CMatrix,
    pub delta_c: CMatrix,
    pub delta_d: CMatrix,
}

impl Perturbation {
    pub fn from_matrix(s: &CMatrix, n: usize) -> Result<Self> {
        if s.nrows() != s.ncols() || s.nrows() <= n {
            return Err(Error::dim("perturbation", format!("square, larger than {n}"), format!("{}x{}", s.nrows(), s.ncols())));
        }
        let m = s.nrows() - n;
        Ok(Perturbation {
            delta_a: s.view((0, 0), (n, n)).into_owned(),
            delta_b: s.view((0, n), (n, m)).into_owned(),
            delta_c: s.view((n, 0), (m, n)).into_owned(),
            delta_d: s.view((n, n), (m, m)).into_owned(),
        })
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self::from_matrix(&CMatrix::zeros(n + m, n + m), n).expect("valid shape")
    }

    /// `Δ_S = [[Δ_A, Δ_B], [Δ_C, Δ_D]]`
    pub fn assembled(&self) -> CMatrix {
        block(&[&[&self.delta_a, &self.delta_b], &[&self.delta_c, &self.delta_d]])
    }

    pub fn norm2(&self) -> Result<f64> {
        kernels::norm2(&self.assembled())
    }

    pub fn norm_fro(&self) -> f64 {
        kernels::fro_norm(&self.assembled())
    }
}

#[derive(Debug, Clone)]
pub struct RadiusReport {
    /// `ρ_ℳ(X) = 1/λ_max*`
    pub rho: f64,
    pub delta: Perturbation,
    /// `1/(2αβ)`
    pub lower_bound: f64,
    /// `1/((1 + |v̂^H û|) αβ)`
    pub upper_bound: f64,
    /// `1/(αβ)`
    pub inverse_alpha_beta: f64,
    /// `λ_min(D_s Ŵ D_s)`
    pub scaled_eig_bound: f64,
    /// `‖[γ_gm N₁, N₂/γ_gm]‖₂²` on the realization normalized by `X`;
    /// `1/est` estimates `ρ` and `ρ·est ≥ 1` whenever `X = I`.
    pub est: f64,
    pub search: GammaSearch,
    pub u: CVector,
    pub v: CVector,
    /// Dominant left singular vectors: `F₁ u₁ = α û`, `F₂ v₁ = β v̂`.
    pub u_hat: CVector,
    pub v_hat: CVector,
    pub w: CVector,
}

fn dominant_left(m: &CMatrix) -> Result<CVector> {
    Ok(kernels::svd(m)?.u.column(0).into_owned())
}

/// `ρ_ℳ(X)` with the minimal rank-1 perturbation `Δ_S = −u v^H/λ_max*` and
/// all bounds. `X` must be an interior certificate.
pub fn x_passivity_radius(model: &StateSpaceModel, x: &Hermitian, tol: &Tolerances) -> Result<RadiusReport> {
    let cert = kyp::classify_certificate(x, model, tol)?;
    if cert.classification != Classification::Interior {
        return Err(Error::NotPositiveDefinite {
            lambda_min: cert.lambda_min_w.min(cert.lambda_min_x),
        });
    }
    let (n, m) = (model.n(), model.m());
    let what = kyp::build_what(x, model)?;
    let fr = frames(&what, n, m, tol)?;
    let min = minimize_gamma(&fr.f1, &fr.f2, tol)?;
    let s = &min.search;
    let lam = s.lambda_max_star;
    let delta = Perturbation::from_matrix(&(-(&min.u * min.v.adjoint()) / c(lam)), n)?;
    let u_hat = dominant_left(&fr.f1)?;
    let v_hat = dominant_left(&fr.f2)?;
    let ab = s.alpha * s.beta;
    let overlap = v_hat.dotc(&u_hat).norm();
    let frame = kyp::perturbation_frame(n, m);
    let scaled_eig_bound = frame.scale(&what).lambda_min()?;
    let est = appendix_b_estimate(&normalization::normalize_with(model, x, tol)?, tol)?;
    Ok(RadiusReport {
        rho: 1.0 / lam,
        delta,
        lower_bound: 1.0 / (2.0 * ab),
        upper_bound: 1.0 / ((1.0 + overlap) * ab),
        inverse_alpha_beta: 1.0 / ab,
        scaled_eig_bound,
        est,
        search: min.search.clone(),
        u: min.u,
        v: min.v,
        u_hat,
        v_hat,
        w: min.w,
    })
}

/// `g(γ_gm)` on `Ŵ(I, ℳ_T)` with `γ_gm = √(‖N₂‖/‖N₁‖)`.
pub fn appendix_b_estimate(mt: &NormalizedRealization, tol: &Tolerances) -> Result<f64> {
    let model = &mt.model;
    let what = kyp::build_what(&Hermitian::identity(model.n()), model)?;
    let fr = frames(&what, model.n(), model.m(), tol)?;
    let alpha = kernels::norm2(&fr.f1)?;
    let beta = kernels::norm2(&fr.f2)?;
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::DegenerateFrame { alpha, beta });
    }
    gamma_objective(&fr.f1, &fr.f2, (beta / alpha).sqrt())
}

/// Unitary `Q` with `Q v = u` and `Q^H u = v`: a Householder reflector
/// times a phase, `Q = I` when `u = v`.
pub fn dual_certificate(u: &CVector, v: &CVector) -> Result<CMatrix> {
    if u.len() != v.len() {
        return Err(Error::dim("dual certificate vectors", u.len(), v.len()));
    }
    for (name, x) in [("u", u), ("v", v)] {
        if (x.norm() - 1.0).abs() > 1e-8 {
            return Err(Error::Input(format!("{name} must be a unit vector, has norm {}", x.norm())));
        }
    }
    let k = u.len();
    let inner = v.dotc(u);
    let phase = if inner.norm() > 0.0 { inner.conj() / inner.norm() } else { c(1.0) };
    let u_rot = u * phase;
    let w = v - &u_rot;
    let wn = w.norm_squared();
    let p = if wn <= f64::EPSILON * f64::EPSILON {
        identity(k)
    } else {
        identity(k) - &w * w.adjoint() * c(2.0 / wn)
    };
    Ok(p * phase.conj())
}

/// `M(Q) = F₁ Q F₂^H + F₂ Q^H F₁^H`
pub fn dual_matrix(f1: &CMatrix, f2: &CMatrix, q: &CMatrix) -> CMatrix {
    let t = f1 * q * f2.adjoint();
    &t + t.adjoint()
}

/// `h(Q) = ‖M(Q)‖₂`
pub fn dual_objective(f1: &CMatrix, f2: &CMatrix, q: &CMatrix) -> Result<f64> {
    kernels::norm2(&dual_matrix(f1, f2, q))
}
