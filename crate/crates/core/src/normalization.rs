//! Normalized passive realizations: state transformations that turn a
//! certificate `X = T^H T` into the identity.

use crate::error::{Error, Result};
use crate::kernels::{self, block, c, identity, zeros, CMatrix, Hermitian, Tolerances, C64};
use crate::kyp::{self, Certificate, Classification};
use crate::system::StateSpaceModel;

#[derive(Debug, Clone)]
pub struct NormalizedRealization {
    /// `ℳ_T = {T A T⁻¹, T B, C T⁻¹, D}`
    pub model: StateSpaceModel,
    /// Invertible with `source_x = T^H T`.
    pub t: CMatrix,
    pub source_x: Hermitian,
}

/// Transforms `ℳ` so that the certificate becomes `I`. `T` is the upper
/// Cholesky factor of `X`.
pub fn normalize(model: &StateSpaceModel, cert: &Certificate, tol: &Tolerances) -> Result<NormalizedRealization> {
    if cert.classification == Classification::Outside {
        return Err(Error::Domain(format!(
            "certificate lies outside the LMI solution set (lambda_min W = {:e}, lambda_min X = {:e})",
            cert.lambda_min_w, cert.lambda_min_x
        )));
    }
    normalize_with(model, &cert.x, tol)
}

/// Same as [`normalize`] without the solution-set check.
pub fn normalize_with(model: &StateSpaceModel, x: &Hermitian, tol: &Tolerances) -> Result<NormalizedRealization> {
    if x.order() != model.n() {
        return Err(Error::dim("X", model.n(), x.order()));
    }
    let t = kernels::cholesky(x, tol.psd_tol)?;
    Ok(NormalizedRealization {
        model: model.transform(&t)?,
        t,
        source_x: x.clone(),
    })
}

/// Classifies `X` and normalizes with it.
pub fn normalize_x(model: &StateSpaceModel, x: &Hermitian, tol: &Tolerances) -> Result<NormalizedRealization> {
    normalize(model, &kyp::classify_certificate(x, model, tol)?, tol)
}

/// The result of putting a normalized realization into polar coordinates.
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    /// `A = Σ·(V^H U)`, obtained by the unitary similarity `U`.
    pub realization: NormalizedRealization,
    /// Singular values of `A_T`, descending.
    pub sigma: Vec<f64>,
    /// The unitary factor `V^H U`.
    pub rotation: CMatrix,
}

/// Similarity by the left singular vectors of `A_T = U Σ V^H`, so the new
/// state matrix is `Σ (V^H U)`. Each column of `U` is rotated so that its
/// first nonzero entry is real positive.
pub fn canonical_form(mt: &NormalizedRealization, tol: &Tolerances) -> Result<CanonicalForm> {
    let check = verify_normalized(&mt.model, tol)?;
    if !check.normalized {
        return Err(Error::Domain(format!(
            "realization is not normalized (lambda_min = {:e})",
            check.lambda_min
        )));
    }
    let model = &mt.model;
    let n = model.n();
    let s = kernels::svd(model.a())?;
    let mut u = s.u.clone();
    let mut v = s.v.clone();
    let cut = tol.rank_tol * (1.0 + s.singular_values[0]);
    for j in 0..n {
        let lead = (0..n).map(|i| u[(i, j)]).find(|z| z.norm() > cut).unwrap_or(c(1.0));
        let phase = lead.conj() / lead.norm();
        for i in 0..n {
            u[(i, j)] *= phase;
            v[(i, j)] *= phase;
        }
    }
    let uh = u.adjoint();
    let rotated = StateSpaceModel::new(&uh * model.a() * &u, &uh * model.b(), model.c() * &u, model.d().clone())?;
    Ok(CanonicalForm {
        realization: NormalizedRealization {
            model: rotated,
            t: &uh * &mt.t,
            source_x: mt.source_x.clone(),
        },
        sigma: s.singular_values,
        rotation: v.adjoint() * u,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationCheck {
    pub normalized: bool,
    /// `λ_min` of `[[I, C^H], [C, D^H+D]] − [A B]^H [A B] = W(I, ℳ)`.
    pub lambda_min: f64,
    pub contractive: bool,
    pub norm_a: f64,
}

pub fn verify_normalized(model: &StateSpaceModel, tol: &Tolerances) -> Result<NormalizationCheck> {
    let w = kyp::build_w(&Hermitian::identity(model.n()), model)?;
    let e = w.eigenvalues()?;
    let lambda_min = e[0];
    let scale = e[0].abs().max(e[e.len() - 1].abs()).max(1.0);
    let norm_a = kernels::norm2(model.a())?;
    Ok(NormalizationCheck {
        normalized: lambda_min >= -tol.psd_tol * scale,
        lambda_min,
        contractive: norm_a <= 1.0 + tol.psd_tol,
        norm_a,
    })
}

/// `diag(T, T^{−H}, I) · D_s Ŵ(X, ℳ) D_s · diag(T^H, T⁻¹, I)`, whose trace is
/// minimized exactly when `T X⁻¹ T^H = I`.
pub fn transformed_scaled_what(model: &StateSpaceModel, x: &Hermitian, t: &CMatrix) -> Result<Hermitian> {
    let (n, m) = (model.n(), model.m());
    let what = kyp::build_what(x, model)?;
    let frame = kyp::perturbation_frame(n, m);
    let scaled = frame.scale(&what);
    let t_inv_h = kernels::inverse(t)?.adjoint();
    let znn = zeros(n, n);
    let left = block(&[
        &[t, &znn, &zeros(n, m)],
        &[&znn, &t_inv_h, &zeros(n, m)],
        &[&zeros(m, n), &zeros(m, n), &identity(m)],
    ]);
    Ok(scaled.congruence(&left.adjoint()))
}

pub fn trace(h: &Hermitian) -> f64 {
    h.matrix().diagonal().iter().map(|z: &C64| z.re).sum()
}
