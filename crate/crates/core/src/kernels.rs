//! Dense complex linear algebra used by every other module.
//!
//! Everything here works on `DMatrix<Complex<f64>>`. The decompositions are
//! delegated to nalgebra; this module pins down ordering, phase and tolerance
//! conventions so callers never have to think about them.

use nalgebra::{Cholesky, DMatrix, DVector, Schur, SymmetricEigen, LU, SVD};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Numerical tolerances shared by all operations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative singular-value cutoff for rank decisions.
    pub rank_tol: f64,
    /// Relative dead band for semidefiniteness decisions.
    pub psd_tol: f64,
    /// Orthogonality / reconstruction tolerance of the decompositions.
    pub eig_tol: f64,
    /// Absolute dead band around the unit circle.
    pub circle_tol: f64,
    /// Bracket width at which golden-section search stops.
    pub golden_tol: f64,
    /// Bracket width at which the robustness-margin searches stop.
    pub bisect_tau: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_tol: 1e-10,
            psd_tol: 1e-10,
            eig_tol: 1e-12,
            circle_tol: 1e-8,
            golden_tol: 1e-10,
            bisect_tau: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("rank_tol", self.rank_tol),
            ("psd_tol", self.psd_tol),
            ("eig_tol", self.eig_tol),
            ("circle_tol", self.circle_tol),
            ("golden_tol", self.golden_tol),
            ("bisect_tau", self.bisect_tau),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Input(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub(crate) fn ensure_finite(what: &str, m: &CMatrix) -> Result<()> {
    if is_finite(m) {
        Ok(())
    } else {
        Err(Error::Input(format!("{what} has non-finite entries")))
    }
}

/// Real matrix to complex, row-major input.
pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    assert_eq!(data.len(), rows * cols, "from_real: wrong data length");
    CMatrix::from_fn(rows, cols, |i, j| c(data[i * cols + j]))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMatrix {
    CMatrix::zeros(r, c)
}

pub fn diag_real(d: &[f64]) -> CMatrix {
    let n = d.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { c(d[i]) } else { ZERO })
}

/// Assembles a block matrix. Every block row must share its row count and
/// every block column its column count.
pub fn block(rows: &[&[&CMatrix]]) -> CMatrix {
    let heights: Vec<usize> = rows.iter().map(|r| r[0].nrows()).collect();
    let widths: Vec<usize> = rows[0].iter().map(|b| b.ncols()).collect();
    let total_r: usize = heights.iter().sum();
    let total_c: usize = widths.iter().sum();
    let mut out = CMatrix::zeros(total_r, total_c);
    let mut r0 = 0;
    for (bi, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), widths.len(), "block: ragged block row");
        let mut c0 = 0;
        for (bj, b) in row.iter().enumerate() {
            assert_eq!(b.nrows(), heights[bi], "block: row height mismatch");
            assert_eq!(b.ncols(), widths[bj], "block: column width mismatch");
            out.view_mut((r0, c0), (b.nrows(), b.ncols())).copy_from(*b);
            c0 += widths[bj];
        }
        r0 += heights[bi];
    }
    out
}

/// `(M + M^H)/2`
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn fro_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian matrix, stored exactly Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    /// Symmetrizes `m`. Rejects non-square or non-finite input.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::dim(
                "Hermitian matrix",
                "square",
                format!("{}x{}", m.nrows(), m.ncols()),
            ));
        }
        ensure_finite("Hermitian matrix", &m)?;
        Ok(Hermitian(hermitian_part(&m)))
    }

    /// Wraps a matrix that the caller built Hermitian by construction.
    /// Still symmetrizes to remove rounding asymmetry.
    pub(crate) fn from_parts(m: CMatrix) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        Hermitian(hermitian_part(&m))
    }

    pub fn identity(n: usize) -> Self {
        Hermitian(identity(n))
    }

    pub fn from_real_diag(d: &[f64]) -> Self {
        Hermitian(diag_real(d))
    }

    pub fn scalar(x: f64) -> Self {
        Hermitian(CMatrix::from_element(1, 1, c(x)))
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn eig(&self) -> Result<HermitianEig> {
        hermitian_eig(self)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eig(self)?.values)
    }

    pub fn lambda_min(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    pub fn lambda_max(&self) -> Result<f64> {
        Ok(*self.eigenvalues()?.last().expect("nonempty"))
    }

    /// Spectral norm, `max |λ|`.
    pub fn norm2(&self) -> Result<f64> {
        let v = self.eigenvalues()?;
        Ok(v[0].abs().max(v[v.len() - 1].abs()))
    }

    /// Counts of (negative, zero, positive) eigenvalues with a dead band of
    /// `tol·‖H‖₂` around zero.
    pub fn inertia(&self, tol: f64) -> Result<(usize, usize, usize)> {
        let v = self.eigenvalues()?;
        let scale = v[0].abs().max(v[v.len() - 1].abs()).max(f64::MIN_POSITIVE);
        let band = tol * scale;
        let neg = v.iter().filter(|&&x| x < -band).count();
        let pos = v.iter().filter(|&&x| x > band).count();
        Ok((neg, v.len() - neg - pos, pos))
    }

    /// Congruence `S^H H S`.
    pub fn congruence(&self, s: &CMatrix) -> Hermitian {
        Hermitian::from_parts(s.adjoint() * &self.0 * s)
    }
}

#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `j` belongs to `values[j]`.
    pub vectors: CMatrix,
}

/// Full eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eig(h: &Hermitian) -> Result<HermitianEig> {
    let m = h.matrix();
    let n = m.nrows();
    if n == 0 {
        return Ok(HermitianEig {
            values: vec![],
            vectors: zeros(0, 0),
        });
    }
    ensure_finite("Hermitian matrix", m)?;
    let se = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let values = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, k| se.eigenvectors[(r, idx[k])]);
    Ok(HermitianEig { values, vectors })
}

#[derive(Debug, Clone)]
pub struct Svd {
    /// `rows × k`, `k = min(rows, cols)`.
    pub u: CMatrix,
    /// Descending, nonnegative.
    pub singular_values: Vec<f64>,
    /// `cols × k`, so that `M = U diag(σ) V^H`.
    pub v: CMatrix,
}

/// Thin SVD with singular values sorted descending.
pub fn svd(m: &CMatrix) -> Result<Svd> {
    ensure_finite("matrix", m)?;
    let (r, cl) = m.shape();
    let k = r.min(cl);
    if k == 0 {
        return Ok(Svd {
            u: zeros(r, 0),
            singular_values: vec![],
            v: zeros(cl, 0),
        });
    }
    let s = SVD::try_new_unordered(m.clone(), true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let u0 = s.u.expect("u requested");
    let vt0 = s.v_t.expect("v requested");
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&i, &j| s.singular_values[j].total_cmp(&s.singular_values[i]));
    let singular_values = idx.iter().map(|&i| s.singular_values[i]).collect();
    let u = CMatrix::from_fn(r, k, |i, j| u0[(i, idx[j])]);
    let v = CMatrix::from_fn(cl, k, |i, j| vt0[(idx[j], i)].conj());
    Ok(Svd {
        u,
        singular_values,
        v,
    })
}

pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Ok(vec![]);
    }
    ensure_finite("matrix", m)?;
    let mut s: Vec<f64> = m
        .clone()
        .try_svd(false, false, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Spectral norm.
pub fn norm2(m: &CMatrix) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Numerical rank with singular values below `rank_tol·σ_max` discarded.
pub fn rank(m: &CMatrix, rank_tol: f64) -> Result<usize> {
    let s = singular_values(m)?;
    let Some(&top) = s.first() else { return Ok(0) };
    if top == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&x| x > rank_tol * top).count())
}

/// 2-norm condition number; infinite for singular matrices.
pub fn cond2(m: &CMatrix) -> Result<f64> {
    let s = singular_values(m)?;
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => Ok(hi / lo),
        (Some(_), Some(_)) => Ok(f64::INFINITY),
        _ => Ok(1.0),
    }
}

/// Upper-triangular `T` with positive diagonal and `H = T^H T`.
pub fn cholesky(h: &Hermitian, psd_tol: f64) -> Result<CMatrix> {
    let eig = h.eigenvalues()?;
    let lmin = eig[0];
    let scale = eig[0].abs().max(eig[eig.len() - 1].abs());
    if !(lmin > psd_tol * scale) {
        return Err(Error::NotPositiveDefinite { lambda_min: lmin });
    }
    let ch = Cholesky::new(h.matrix().clone()).ok_or(Error::NotPositiveDefinite { lambda_min: lmin })?;
    Ok(ch.l().adjoint())
}

/// Solves `A X = B` by LU with partial pivoting.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    LU::new(a.clone())
        .solve(b)
        .ok_or_else(|| Error::Numerical("singular linear system".into()))
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    solve(a, &identity(a.nrows()))
}

/// Eigenvalues of a general square matrix (complex Schur form).
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<C64>> {
    if a.nrows() == 0 {
        return Ok(vec![]);
    }
    ensure_finite("matrix", a)?;
    let (_, t) = schur(a)?;
    Ok((0..a.nrows()).map(|i| t[(i, i)]).collect())
}

pub fn spectral_radius(a: &CMatrix) -> Result<f64> {
    Ok(eigenvalues(a)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Complex Schur form `A = Q T Q^H` with `T` upper triangular.
pub fn schur(a: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let s = Schur::try_new(a.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let (q, mut t) = s.unpack();
    for j in 0..t.ncols() {
        for i in (j + 1)..t.nrows() {
            t[(i, j)] = ZERO;
        }
    }
    Ok((q, t))
}

/// Swaps the adjacent diagonal entries `k`, `k+1` of the triangular factor
/// with a single unitary rotation, updating `Q` so that `Q T Q^H` is unchanged.
fn swap_schur(q: &mut CMatrix, t: &mut CMatrix, k: usize) {
    let n = t.nrows();
    let t11 = t[(k, k)];
    let t22 = t[(k + 1, k + 1)];
    let p = t[(k, k + 1)];
    let d = t22 - t11;
    let r = (p.norm_sqr() + d.norm_sqr()).sqrt();
    if r == 0.0 {
        return;
    }
    // first column spans the eigenvector of the 2x2 block for t22
    let z = [[p / r, -d.conj() / r], [d / r, p.conj() / r]];
    for j in k..n {
        let a = t[(k, j)];
        let b = t[(k + 1, j)];
        t[(k, j)] = z[0][0].conj() * a + z[1][0].conj() * b;
        t[(k + 1, j)] = z[0][1].conj() * a + z[1][1].conj() * b;
    }
    for i in 0..=(k + 1) {
        let a = t[(i, k)];
        let b = t[(i, k + 1)];
        t[(i, k)] = a * z[0][0] + b * z[1][0];
        t[(i, k + 1)] = a * z[0][1] + b * z[1][1];
    }
    for i in 0..n {
        let a = q[(i, k)];
        let b = q[(i, k + 1)];
        q[(i, k)] = a * z[0][0] + b * z[1][0];
        q[(i, k + 1)] = a * z[0][1] + b * z[1][1];
    }
    t[(k + 1, k)] = ZERO;
    t[(k, k)] = t22;
    t[(k + 1, k + 1)] = t11;
}

/// Schur form reordered so that eigenvalues accepted by `select` lead the
/// diagonal. Returns `(Q, T, count)`; the first `count` columns of `Q` span
/// the invariant subspace of the selected eigenvalues.
pub fn ordered_schur(a: &CMatrix, select: impl Fn(C64) -> bool) -> Result<(CMatrix, CMatrix, usize)> {
    let (mut q, mut t) = schur(a)?;
    let n = t.nrows();
    let mut count = 0;
    for j in 0..n {
        if select(t[(j, j)]) {
            let mut k = j;
            while k > count {
                swap_schur(&mut q, &mut t, k - 1);
                k -= 1;
            }
            count += 1;
        }
    }
    Ok((q, t, count))
}

/// Orthonormal basis of the column space (thin QR via SVD of full rank input).
pub fn orthonormal_columns(m: &CMatrix) -> Result<CMatrix> {
    Ok(svd(m)?.u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenMin {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
    /// Final bracket `[lo, hi]` around `x`.
    pub bracket: (f64, f64),
}

/// Golden-section search for the minimizer of a unimodal `f` on `[a, b]`.
pub fn golden_section_min(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<GoldenMin> {
    if !(tol > 0.0) {
        return Err(Error::Input(format!("golden-section tolerance must be positive, got {tol}")));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Input(format!("golden-section needs a < b, got [{a}, {b}]")));
    }
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evaluations = 2;
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            if !(x1 > lo && x1 < x2) {
                break;
            }
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            if !(x2 < hi && x2 > x1) {
                break;
            }
            f2 = f(x2);
        }
        evaluations += 1;
    }
    let (x, fx) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    Ok(GoldenMin {
        x,
        fx,
        evaluations,
        bracket: (lo, hi),
    })
}
