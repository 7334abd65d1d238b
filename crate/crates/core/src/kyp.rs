//! The KYP family `W(X)`, `Ŵ(X)`, `W̃(X)`, the perturbation frame and
//! certificate classification.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{self, block, c, identity, zeros, CMatrix, Hermitian, Tolerances};
use crate::system::StateSpaceModel;

fn check_x(x: &Hermitian, model: &StateSpaceModel) -> Result<()> {
    let n = model.n();
    if x.order() != n {
        return Err(Error::dim("X", format!("{n}x{n}"), format!("{0}x{0}", x.order())));
    }
    Ok(())
}

/// `[[X − A^H X A, C^H − A^H X B], [C − B^H X A, D^H + D − B^H X B]]`
pub fn build_w(x: &Hermitian, model: &StateSpaceModel) -> Result<Hermitian> {
    check_x(x, model)?;
    let (a, b, cm) = (model.a(), model.b(), model.c());
    let xm = x.matrix();
    let ah_x = a.adjoint() * xm;
    let bh_x = b.adjoint() * xm;
    let w11 = xm - &ah_x * a;
    let w12 = cm.adjoint() - &ah_x * b;
    let w21 = cm - &bh_x * a;
    let w22 = model.d_sym() - &bh_x * b;
    Ok(Hermitian::from_parts(block(&[&[&w11, &w12], &[&w21, &w22]])))
}

fn positive_definite(x: &Hermitian, tol: f64) -> Result<()> {
    let e = x.eigenvalues()?;
    let scale = e[0].abs().max(e[e.len() - 1].abs());
    if e[0] > tol * scale {
        Ok(())
    } else {
        Err(Error::NotPositiveDefinite { lambda_min: e[0] })
    }
}

/// `[[X⁻¹, A, B], [A^H, X, C^H], [B^H, C, D^H + D]]`; `X` must be positive definite.
pub fn build_what(x: &Hermitian, model: &StateSpaceModel) -> Result<Hermitian> {
    check_x(x, model)?;
    positive_definite(x, Tolerances::default().psd_tol)?;
    let xinv = kernels::inverse(x.matrix())?;
    let (a, b, cm) = (model.a(), model.b(), model.c());
    let (ah, bh, ch) = (a.adjoint(), b.adjoint(), cm.adjoint());
    let dd = model.d_sym();
    Ok(Hermitian::from_parts(block(&[
        &[&xinv, a, b],
        &[&ah, x.matrix(), &ch],
        &[&bh, cm, &dd],
    ])))
}

/// `[[X, XA, XB], [A^H X, X, C^H], [B^H X, C, D^H + D]]`
pub fn build_wtilde(x: &Hermitian, model: &StateSpaceModel) -> Result<Hermitian> {
    check_x(x, model)?;
    let xm = x.matrix();
    let (a, b, cm) = (model.a(), model.b(), model.c());
    let xa = xm * a;
    let xb = xm * b;
    let (xah, xbh, ch) = (xa.adjoint(), xb.adjoint(), cm.adjoint());
    let dd = model.d_sym();
    Ok(Hermitian::from_parts(block(&[
        &[xm, &xa, &xb],
        &[&xah, xm, &ch],
        &[&xbh, cm, &dd],
    ])))
}

/// Block selectors and scaling for perturbations of the system matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationFrame {
    pub n: usize,
    pub m: usize,
    /// `[[I_n, 0], [0, 0], [0, I_m]]`
    pub e1: CMatrix,
    /// `[[0, 0], [I_n, 0], [0, I_m]]`
    pub e2: CMatrix,
    /// `diag(I_n, I_n, I_m/√2)`
    pub ds: CMatrix,
}

pub fn perturbation_frame(n: usize, m: usize) -> PerturbationFrame {
    let mut e1 = zeros(2 * n + m, n + m);
    let mut e2 = zeros(2 * n + m, n + m);
    for i in 0..n {
        e1[(i, i)] = c(1.0);
        e2[(n + i, i)] = c(1.0);
    }
    for j in 0..m {
        e1[(2 * n + j, n + j)] = c(1.0);
        e2[(2 * n + j, n + j)] = c(1.0);
    }
    let mut d = vec![1.0; 2 * n + m];
    for v in d.iter_mut().skip(2 * n) {
        *v = std::f64::consts::FRAC_1_SQRT_2;
    }
    PerturbationFrame {
        n,
        m,
        e1,
        e2,
        ds: kernels::diag_real(&d),
    }
}

impl PerturbationFrame {
    /// `E₁ Δ E₂^H + E₂ Δ^H E₁^H`, the change of `Ŵ` under `ℳ ↦ ℳ + Δ`.
    pub fn lift(&self, delta: &CMatrix) -> CMatrix {
        let t = &self.e1 * delta * self.e2.adjoint();
        &t + t.adjoint()
    }

    /// Inverse of [`lift`](Self::lift) on its range, applied to the
    /// Hermitian part of `H`: reads `Δ_A, Δ_B, Δ_C` from the off-diagonal
    /// blocks and `Δ_D` as the Hermitian half of the `(3,3)` block.
    pub fn read_back(&self, h: &CMatrix) -> CMatrix {
        let (n, m) = (self.n, self.m);
        let h = kernels::hermitian_part(h);
        let da = h.view((0, n), (n, n)).into_owned();
        let db = h.view((0, 2 * n), (n, m)).into_owned();
        let dc = h.view((2 * n, n), (m, n)).into_owned();
        let dd = h.view((2 * n, 2 * n), (m, m)).scale(0.5);
        block(&[&[&da, &db], &[&dc, &dd]])
    }

    /// `D_s M D_s`
    pub fn scale(&self, h: &Hermitian) -> Hermitian {
        h.congruence(&self.ds)
    }
}

/// The three KYP matrices of one certificate together with the frame.
#[derive(Debug, Clone)]
pub struct KypMatrices {
    pub w: Hermitian,
    pub what: Option<Hermitian>,
    pub wtilde: Hermitian,
    pub frame: PerturbationFrame,
}

impl KypMatrices {
    /// `Ŵ` is omitted when `X` is not positive definite.
    pub fn build(x: &Hermitian, model: &StateSpaceModel) -> Result<Self> {
        Ok(KypMatrices {
            w: build_w(x, model)?,
            what: build_what(x, model).ok(),
            wtilde: build_wtilde(x, model)?,
            frame: perturbation_frame(model.n(), model.m()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Interior,
    Boundary,
    Outside,
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub x: Hermitian,
    pub classification: Classification,
    pub lambda_min_w: f64,
    pub lambda_min_x: f64,
}

/// Places `X` relative to the LMI solution sets `{W(X) ⪰ 0, X ≻ 0}`.
pub fn classify_certificate(x: &Hermitian, model: &StateSpaceModel, tol: &Tolerances) -> Result<Certificate> {
    let w = build_w(x, model)?;
    let ew = w.eigenvalues()?;
    let ex = x.eigenvalues()?;
    let w_norm = ew[0].abs().max(ew[ew.len() - 1].abs());
    let x_norm = ex[0].abs().max(ex[ex.len() - 1].abs());
    let (lambda_min_w, lambda_min_x) = (ew[0], ex[0]);
    let band = tol.psd_tol * w_norm;
    let x_pd = lambda_min_x > tol.psd_tol * x_norm;
    let classification = if !x_pd || lambda_min_w < -band {
        Classification::Outside
    } else if lambda_min_w > band {
        Classification::Interior
    } else {
        Classification::Boundary
    };
    Ok(Certificate {
        x: x.clone(),
        classification,
        lambda_min_w,
        lambda_min_x,
    })
}

/// `diag(X, X, 2I)`, the `ξ`-coefficient of `W̃` under the shift `ℳ ↦ ℳ_ξ`.
pub fn shift_weight(x: &Hermitian, m: usize) -> CMatrix {
    let n = x.order();
    let two = identity(m).scale(2.0);
    let zn = zeros(n, n);
    block(&[
        &[x.matrix(), &zn, &zeros(n, m)],
        &[&zn, x.matrix(), &zeros(n, m)],
        &[&zeros(m, n), &zeros(m, n), &two],
    ])
}
