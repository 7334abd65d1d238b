//! Discrete-time state-space models `x_{k+1} = A x_k + B u_k`, `y_k = C x_k + D u_k`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernels::{
    self, block, c, ensure_finite, identity, CMatrix, CVector, Hermitian, Tolerances, C64,
};

/// The model `{A, B, C, D}` with `n` states and `m` inputs and outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    a: CMatrix,
    b: CMatrix,
    c: CMatrix,
    d: CMatrix,
}

impl StateSpaceModel {
    pub fn new(a: CMatrix, b: CMatrix, c: CMatrix, d: CMatrix) -> Result<Self> {
        let n = a.nrows();
        let m = d.nrows();
        if n == 0 || m == 0 {
            return Err(Error::Input("model needs n >= 1 and m >= 1".into()));
        }
        let check = |what: &str, mat: &CMatrix, r: usize, cl: usize| -> Result<()> {
            if mat.shape() != (r, cl) {
                return Err(Error::dim(
                    what,
                    format!("{r}x{cl}"),
                    format!("{}x{}", mat.nrows(), mat.ncols()),
                ));
            }
            ensure_finite(what, mat)
        };
        check("A", &a, n, n)?;
        check("B", &b, n, m)?;
        check("C", &c, m, n)?;
        check("D", &d, m, m)?;
        Ok(StateSpaceModel { a, b, c, d })
    }

    /// Single-state, single-port model with real coefficients.
    pub fn scalar(a: f64, b: f64, c_: f64, d: f64) -> Result<Self> {
        let one = |x: f64| CMatrix::from_element(1, 1, c(x));
        Self::new(one(a), one(b), one(c_), one(d))
    }

    /// `{0, 0, 0, I_m}` with `n` states.
    pub fn zero_model(n: usize, m: usize) -> Result<Self> {
        Self::new(
            CMatrix::zeros(n, n),
            CMatrix::zeros(n, m),
            CMatrix::zeros(m, n),
            identity(m),
        )
    }

    /// Splits an `(n+m)×(n+m)` system matrix `[[A, B], [C, D]]`.
    pub fn from_system_matrix(s: &CMatrix, n: usize) -> Result<Self> {
        if s.nrows() != s.ncols() || s.nrows() <= n {
            return Err(Error::dim(
                "system matrix",
                format!("square with more than {n} rows"),
                format!("{}x{}", s.nrows(), s.ncols()),
            ));
        }
        let m = s.nrows() - n;
        Self::new(
            s.view((0, 0), (n, n)).into_owned(),
            s.view((0, n), (n, m)).into_owned(),
            s.view((n, 0), (m, n)).into_owned(),
            s.view((n, n), (m, m)).into_owned(),
        )
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.d.nrows()
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn b(&self) -> &CMatrix {
        &self.b
    }

    pub fn c(&self) -> &CMatrix {
        &self.c
    }

    pub fn d(&self) -> &CMatrix {
        &self.d
    }

    /// `[[A, B], [C, D]]`
    pub fn system_matrix(&self) -> CMatrix {
        block(&[&[&self.a, &self.b], &[&self.c, &self.d]])
    }

    /// `D^H + D`
    pub fn d_sym(&self) -> CMatrix {
        self.d.adjoint() + &self.d
    }

    /// `{A^H, C^H, B^H, D^H}`, whose transfer function is `𝒯(z̄)^H`.
    pub fn dual(&self) -> StateSpaceModel {
        StateSpaceModel {
            a: self.a.adjoint(),
            b: self.c.adjoint(),
            c: self.b.adjoint(),
            d: self.d.adjoint(),
        }
    }

    /// `ℳ + Δ` for an `(n+m)`-square perturbation of the system matrix.
    pub fn perturbed(&self, delta: &CMatrix) -> Result<StateSpaceModel> {
        let s = self.system_matrix();
        if delta.shape() != s.shape() {
            return Err(Error::dim(
                "perturbation",
                format!("{}x{}", s.nrows(), s.ncols()),
                format!("{}x{}", delta.nrows(), delta.ncols()),
            ));
        }
        Self::from_system_matrix(&(s + delta), self.n())
    }

    /// State transformation `{T A T⁻¹, T B, C T⁻¹, D}`.
    pub fn transform(&self, t: &CMatrix) -> Result<StateSpaceModel> {
        let n = self.n();
        if t.shape() != (n, n) {
            return Err(Error::dim("T", format!("{n}x{n}"), format!("{}x{}", t.nrows(), t.ncols())));
        }
        let tinv = kernels::inverse(t)?;
        Self::new(t * &self.a * &tinv, t * &self.b, &self.c * &tinv, self.d.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimalityReport {
    pub controllable: bool,
    pub observable: bool,
    pub ctrl_rank: usize,
    pub obs_rank: usize,
    pub stable: bool,
    pub asymptotically_stable: bool,
    pub spectral_radius: f64,
}

impl MinimalityReport {
    pub fn minimal(&self) -> bool {
        self.controllable && self.observable
    }
}

/// `[B, AB, …, A^{n−1}B]`
fn krylov(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let m = b.ncols();
    let mut k = CMatrix::zeros(n, n * m);
    let mut blk = b.clone();
    for j in 0..n {
        k.view_mut((0, j * m), (n, m)).copy_from(&blk);
        if j + 1 < n {
            blk = a * blk;
        }
    }
    k
}

pub fn controllability_rank(a: &CMatrix, b: &CMatrix, rank_tol: f64) -> Result<usize> {
    kernels::rank(&krylov(a, b), rank_tol)
}

/// Whether every eigenvalue of `A` with modulus `>= 1 - circle_tol` has equal
/// algebraic and geometric multiplicity.
pub fn unit_circle_semisimple(a: &CMatrix, tol: &Tolerances) -> Result<bool> {
    let n = a.nrows();
    let eig = kernels::eigenvalues(a)?;
    // defective eigenvalues split by about sqrt(eps), so cluster a little wider
    let cluster = tol.circle_tol.max(4.0 * f64::EPSILON.sqrt());
    for &lam in eig.iter().filter(|z| z.norm() >= 1.0 - tol.circle_tol) {
        let cluster_size = eig.iter().filter(|z| (**z - lam).norm() <= cluster).count();
        let shifted = a - identity(n) * lam;
        let geometric = n - kernels::rank(&shifted, tol.rank_tol)?;
        if geometric < cluster_size {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Controllability, observability and stability of the model.
pub fn validate_minimal(model: &StateSpaceModel, tol: &Tolerances) -> Result<MinimalityReport> {
    let n = model.n();
    let ctrl_rank = controllability_rank(model.a(), model.b(), tol.rank_tol)?;
    let obs_rank = controllability_rank(&model.a().adjoint(), &model.c().adjoint(), tol.rank_tol)?;
    let spectral_radius = kernels::spectral_radius(model.a())?;
    let asymptotically_stable = spectral_radius < 1.0 - tol.circle_tol;
    let stable = asymptotically_stable
        || (spectral_radius <= 1.0 + tol.circle_tol && unit_circle_semisimple(model.a(), tol)?);
    Ok(MinimalityReport {
        controllable: ctrl_rank == n,
        observable: obs_rank == n,
        ctrl_rank,
        obs_rank,
        stable,
        asymptotically_stable,
        spectral_radius,
    })
}

/// `(zI − A)⁻¹ B` with a singularity guard.
pub fn resolvent_times_b(model: &StateSpaceModel, z: C64, tol: &Tolerances) -> Result<CMatrix> {
    let n = model.n();
    let zi_a = identity(n) * z - model.a();
    let s = kernels::singular_values(&zi_a)?;
    let smin = *s.last().expect("n >= 1");
    let scale = 1.0 + kernels::norm2(model.a())?;
    if smin <= tol.circle_tol * scale {
        return Err(Error::SingularResolvent { z });
    }
    kernels::solve(&zi_a, model.b()).map_err(|_| Error::SingularResolvent { z })
}

/// `𝒯(z) = C (zI − A)⁻¹ B + D`
pub fn transfer_eval(model: &StateSpaceModel, z: C64, tol: &Tolerances) -> Result<CMatrix> {
    Ok(model.c() * resolvent_times_b(model, z, tol)? + model.d())
}

/// `Φ(e^{iω}) = 𝒯(e^{iω})^H + 𝒯(e^{iω})`
pub fn phi_eval(model: &StateSpaceModel, omega: f64, tol: &Tolerances) -> Result<Hermitian> {
    let t = transfer_eval(model, C64::from_polar(1.0, omega), tol)?;
    Ok(Hermitian::from_parts(t.adjoint() + t))
}

/// `count` uniformly spaced frequencies covering `[−π, π)`.
pub fn omega_grid(count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| -PI + 2.0 * PI * k as f64 / count as f64)
        .collect()
}

pub const DEFAULT_GRID: usize = 720;

/// Per-step energy balance along a trajectory started at `x₀ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipationTrace {
    /// `x_k^H X x_k − x_{k+1}^H X x_{k+1} + y_k^H u_k + u_k^H y_k`
    pub slack: Vec<f64>,
    /// `z_k^H W(X) z_k` with `z_k = [x_k; u_k]`
    pub quadratic: Vec<f64>,
}

pub fn simulate_dissipation(
    model: &StateSpaceModel,
    x: &Hermitian,
    inputs: &[CVector],
) -> Result<DissipationTrace> {
    let n = model.n();
    let m = model.m();
    if x.order() != n {
        return Err(Error::dim("X", format!("{n}x{n}"), format!("{0}x{0}", x.order())));
    }
    let w = crate::kyp::build_w(x, model)?;
    let xm = x.matrix();
    let mut state = CVector::zeros(n);
    let mut slack = Vec::with_capacity(inputs.len());
    let mut quadratic = Vec::with_capacity(inputs.len());
    for (k, u) in inputs.iter().enumerate() {
        if u.len() != m {
            return Err(Error::dim(&format!("input u[{k}]"), m, u.len()));
        }
        if !u.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Input(format!("input u[{k}] has non-finite entries")));
        }
        let y = model.c() * &state + model.d() * u;
        let next = model.a() * &state + model.b() * u;
        let energy = |v: &CVector| v.dotc(&(xm * v)).re;
        let supply = 2.0 * y.dotc(u).re;
        slack.push(energy(&state) - energy(&next) + supply);
        let mut z = CVector::zeros(n + m);
        z.rows_mut(0, n).copy_from(&state);
        z.rows_mut(n, m).copy_from(u);
        quadratic.push(z.dotc(&(w.matrix() * &z)).re);
        state = next;
    }
    Ok(DissipationTrace { slack, quadratic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::testutil::*;
    use crate::kernels::{fro_norm, from_real, ONE};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn m0() -> StateSpaceModel {
        StateSpaceModel::scalar(0.5, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn minimality_scalar() {
        let r = validate_minimal(&m0(), &Tolerances::default()).unwrap();
        assert!(r.controllable && r.observable && r.asymptotically_stable && r.stable);
        assert_relative_eq!(r.spectral_radius, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn minimality_zero_model() {
        let z = StateSpaceModel::new(
            CMatrix::zeros(1, 1),
            CMatrix::zeros(1, 1),
            CMatrix::zeros(1, 1),
            identity(1),
        )
        .unwrap();
        let r = validate_minimal(&z, &Tolerances::default()).unwrap();
        assert!(!r.controllable && !r.observable);
        assert_eq!((r.ctrl_rank, r.obs_rank), (0, 0));
    }

    #[test]
    fn minimality_repeated_eigenvalue() {
        let m = StateSpaceModel::new(
            from_real(2, 2, &[0.5, 0.0, 0.0, 0.5]),
            from_real(2, 1, &[1.0, 0.0]),
            from_real(1, 2, &[1.0, 0.0]),
            identity(1),
        )
        .unwrap();
        let r = validate_minimal(&m, &Tolerances::default()).unwrap();
        assert!(!r.controllable);
        assert_eq!(r.ctrl_rank, 1);
    }

    #[test]
    fn stability_flags() {
        let tol = Tolerances::default();
        let rot = StateSpaceModel::new(
            from_real(2, 2, &[0.0, -1.0, 1.0, 0.0]),
            from_real(2, 1, &[1.0, 0.0]),
            from_real(1, 2, &[1.0, 0.0]),
            identity(1),
        )
        .unwrap();
        let r = validate_minimal(&rot, &tol).unwrap();
        assert!(r.stable && !r.asymptotically_stable);
        let jordan = StateSpaceModel::new(
            from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]),
            from_real(2, 1, &[0.0, 1.0]),
            from_real(1, 2, &[1.0, 0.0]),
            identity(1),
        )
        .unwrap();
        let r = validate_minimal(&jordan, &tol).unwrap();
        assert!(!r.stable && !r.asymptotically_stable);
    }

    #[test]
    fn rejects_bad_shapes() {
        let e = StateSpaceModel::new(identity(2), CMatrix::zeros(3, 1), CMatrix::zeros(1, 2), identity(1))
            .unwrap_err();
        assert!(matches!(e, Error::Dimension { ref what, .. } if what == "B"));
    }

    #[test]
    fn transfer_examples() {
        let tol = Tolerances::default();
        let t = transfer_eval(&m0(), ONE, &tol).unwrap();
        assert_relative_eq!(t[(0, 0)].re, 3.0, epsilon = 1e-14);
        let t = transfer_eval(&m0(), c(-1.0), &tol).unwrap();
        assert_relative_eq!(t[(0, 0)].re, 1.0 - 1.0 / 1.5, epsilon = 1e-14);
        let t = transfer_eval(&m0(), c(1e12), &tol).unwrap();
        assert!((t[(0, 0)] - ONE).norm() < 1e-11);
    }

    #[test]
    fn transfer_singular_resolvent() {
        let e = transfer_eval(&m0(), c(0.5), &Tolerances::default()).unwrap_err();
        assert!(matches!(e, Error::SingularResolvent { .. }));
    }

    #[test]
    fn phi_examples() {
        let tol = Tolerances::default();
        assert_relative_eq!(phi_eval(&m0(), 0.0, &tol).unwrap().matrix()[(0, 0)].re, 6.0, epsilon = 1e-13);
        assert_relative_eq!(phi_eval(&m0(), PI, &tol).unwrap().matrix()[(0, 0)].re, 2.0 / 3.0, epsilon = 1e-13);
        let np = StateSpaceModel::scalar(0.5, 1.0, 1.0, -0.2).unwrap();
        let phi = phi_eval(&np, PI, &tol).unwrap().matrix()[(0, 0)].re;
        assert_relative_eq!(phi, -0.4 - 2.0 / 1.5, epsilon = 1e-13);
        assert!(phi < 0.0);
    }

    #[test]
    fn dissipation_examples() {
        let x = Hermitian::identity(1);
        let zero_inputs = vec![CVector::zeros(1); 5];
        let tr = simulate_dissipation(&m0(), &x, &zero_inputs).unwrap();
        assert!(tr.slack.iter().all(|&s| s == 0.0));
        let tr = simulate_dissipation(&m0(), &x, &[CVector::from_element(1, ONE)]).unwrap();
        assert_relative_eq!(tr.slack[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(tr.quadratic[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn dissipation_rejects_wrong_input_size() {
        let x = Hermitian::identity(1);
        assert!(simulate_dissipation(&m0(), &x, &[CVector::zeros(2)]).is_err());
    }

    #[test]
    fn grid_is_uniform() {
        let g = omega_grid(8);
        assert_eq!(g.len(), 8);
        assert_relative_eq!(g[0], -PI);
        assert_relative_eq!(g[4], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn dual_and_transform_preserve_transfer() {
        let tol = Tolerances::default();
        let mut r = rng(2);
        let a = random_matrix(&mut r, 3, 3).scale(0.3);
        let m = StateSpaceModel::new(a, random_matrix(&mut r, 3, 2), random_matrix(&mut r, 2, 3), random_matrix(&mut r, 2, 2))
            .unwrap();
        let t = random_matrix(&mut r, 3, 3) + identity(3).scale(2.0);
        let mt = m.transform(&t).unwrap();
        let d = m.dual();
        for w in omega_grid(16) {
            let z = C64::from_polar(1.0, w);
            let t0 = transfer_eval(&m, z, &tol).unwrap();
            assert!(fro_norm(&(transfer_eval(&mt, z, &tol).unwrap() - &t0)) < 1e-10);
            let td = transfer_eval(&d, z.conj(), &tol).unwrap();
            assert!(fro_norm(&(td.adjoint() - &t0)) < 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn dissipation_slack_identity(seed in any::<u64>(), n in 1usize..5, m in 1usize..4, steps in 1usize..12) {
            let mut r = rng(seed);
            let model = StateSpaceModel::new(
                random_matrix(&mut r, n, n).scale(0.4),
                random_matrix(&mut r, n, m),
                random_matrix(&mut r, m, n),
                random_matrix(&mut r, m, m),
            ).unwrap();
            let x = random_hermitian(&mut r, n);
            let inputs: Vec<CVector> = (0..steps).map(|_| random_matrix(&mut r, m, 1).column(0).into_owned()).collect();
            let tr = simulate_dissipation(&model, &x, &inputs).unwrap();
            for (s, q) in tr.slack.iter().zip(&tr.quadratic) {
                prop_assert!((s - q).abs() <= 1e-10 * (1.0 + s.abs().max(q.abs())));
            }
        }

        #[test]
        fn phi_factorization_is_independent_of_x(seed in any::<u64>(), n in 1usize..5, m in 1usize..3, omega in -PI..PI) {
            let tol = Tolerances::default();
            let mut r = rng(seed);
            let model = StateSpaceModel::new(
                random_matrix(&mut r, n, n).scale(0.3),
                random_matrix(&mut r, n, m),
                random_matrix(&mut r, m, n),
                random_matrix(&mut r, m, m),
            ).unwrap();
            let x = random_hermitian(&mut r, n);
            let z = C64::from_polar(1.0, omega);
            let rb = resolvent_times_b(&model, z, &tol).unwrap();
            let left = block(&[&[&rb], &[&identity(m)]]);
            let w = crate::kyp::build_w(&x, &model).unwrap();
            let via_w = left.adjoint() * w.matrix() * &left;
            let phi = phi_eval(&model, omega, &tol).unwrap();
            prop_assert!(fro_norm(&(via_w - phi.matrix())) <= 1e-8 * (1.0 + fro_norm(phi.matrix())));
        }
    }
}
