use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("angle {0} deg is outside [-90, 90]")]
    AngleOutOfRange(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("solver did not converge after {iterations} iterations (relative residual {residual_norm:e})")]
    NotConverged {
        iterations: usize,
        residual_norm: f64,
    },

    #[error(
        "system is singular or too ill-conditioned to solve (relative residual {residual_norm:e})"
    )]
    Singular { residual_norm: f64 },

    #[error("non-positive curvature {curvature:e} along search direction")]
    Indefinite { curvature: f64 },

    #[error("maximum entropy spectrum is degenerate: a^H v vanishes")]
    DegenerateSpectrum,

    #[error("u1^T R^-1 u1 is not real-positive ({re:e} + {im:e}j)")]
    NonRealPivot { re: f64, im: f64 },

    #[error("nominal steering vector is orthogonal to the sampled signal sector")]
    OrthogonalSteering,

    #[error("matrix is not positive definite (pivot {index})")]
    NotPositiveDefinite { index: usize },
}
