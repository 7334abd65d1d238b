use thiserror::Error;

use crate::kernels::C64;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: String,
        expected: String,
        got: String,
    },

    #[error("matrix is not positive definite (lambda_min = {lambda_min:e})")]
    NotPositiveDefinite { lambda_min: f64 },

    #[error("resolvent (zI - A) is numerically singular at z = {z}")]
    SingularResolvent { z: C64 },

    #[error("D^H + D - B^H X B is singular (sigma_min = {sigma_min:e})")]
    SchurDegenerate { sigma_min: f64 },

    #[error(
        "no stable/antistable splitting: {on_circle} pencil eigenvalues on the unit circle, \
         {inside} inside (need {expected})"
    )]
    SpectralSplitting {
        on_circle: usize,
        inside: usize,
        expected: usize,
    },

    #[error("ill-conditioned invariant subspace basis (condition number {cond:e})")]
    Conditioning { cond: f64 },

    #[error("degenerate perturbation frame (alpha = {alpha:e}, beta = {beta:e}); radius is infinite")]
    DegenerateFrame { alpha: f64, beta: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("iteration limit reached; last bracket [{lo:e}, {hi:e}]")]
    Convergence { lo: f64, hi: f64 },

    #[error("pencil error: {0}")]
    Pencil(String),

    #[error("model is not minimal (controllability rank {ctrl_rank}, observability rank {obs_rank}, n = {n})")]
    NotMinimal {
        ctrl_rank: usize,
        obs_rank: usize,
        n: usize,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dim(what: &str, expected: impl ToString, got: impl ToString) -> Self {
        Error::Dimension {
            what: what.to_string(),
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    /// Errors caused by the input lying outside an operation's domain, as
    /// opposed to internal numerical breakdowns.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::Input(_)
                | Error::Dimension { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::SingularResolvent { .. }
                | Error::SchurDegenerate { .. }
                | Error::SpectralSplitting { .. }
                | Error::DegenerateFrame { .. }
                | Error::Domain(_)
                | Error::NotMinimal { .. }
                | Error::Precondition(_)
                | Error::Parse { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
