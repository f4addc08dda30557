//! Crate-wide error type.
//!
//! Every rejection carries the measured quantity that triggered it, so a
//! failed certification or a degenerate pivot can be reported verbatim in
//! suite output.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not pseudo-orthogonal: residual {residual:.3e} exceeds tol {tol:.3e}")]
    NotOrthogonal { residual: f64, tol: f64 },

    #[error("matrix lies outside the identity component: {condition}")]
    WrongComponent { condition: &'static str },

    #[error("Gram–Schmidt pivot {index} degenerate: signed norm^2 {norm2:.3e}")]
    NearDegenerate { index: usize, norm2: f64 },

    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    #[error("point is outside the domain or too close to its boundary: margin {margin:.3e}")]
    NearBoundary { margin: f64 },

    #[error("Möbius denominator ill-conditioned: cond {cond:.3e}")]
    IllConditioned { cond: f64 },

    #[error("point violates the Lie ball inequalities: {detail}")]
    OutsideLieBall { detail: String },

    #[error("basis vectors are linearly dependent: Gram det {det:.3e}")]
    DegenerateBasis { det: f64 },

    #[error("plane is not negative definite: leading minors ({m1:.3e}, {m2:.3e})")]
    NotNegative { m1: f64, m2: f64 },

    #[error("factor has off-diagonal block leakage: {norm:.3e}")]
    BlockLeakage { norm: f64 },

    #[error("matrix is not a planar rotation: distance {residual:.3e}")]
    NotRotation { residual: f64 },

    #[error("angle unwrapping exhausted its {evals} evaluation budget")]
    SubdivisionExhausted { evals: usize },

    #[error("path start disagrees with the supplied base angle: residual {residual:.3e}")]
    StartMismatch { residual: f64 },

    #[error("cover element violates the angle constraint: residual {residual:.3e}")]
    ConstraintViolated { residual: f64 },

    #[error("deck parity mismatch: {context}")]
    ParityMismatch { context: String },

    #[error("quotient kinds disagree: element is {element}, point is {point}")]
    KindMismatch { element: String, point: String },

    #[error("vector norm {norm:.3e} too small to renormalize")]
    DegenerateNorm { norm: f64 },

    #[error("vector is not tangent at the base point: defect {defect:.3e}")]
    NotTangent { defect: f64 },

    #[error("vector is not unit length: norm {norm}")]
    NotUnit { norm: f64 },

    #[error("finite-difference step {h:.3e} outside [{min:.1e}, {max:.1e}]")]
    StepOutOfRange { h: f64, min: f64, max: f64 },

    #[error("value {value:.6e} is not within {tol:.1e} of a multiple of {unit:.6e}")]
    NotIntegral { value: f64, unit: f64, tol: f64 },

    #[error("invalid configuration: {message}")]
    InvalidConfig { message: String },

    #[error("serialization: {message}")]
    Serialization { message: String },
}

impl Error {
    pub fn dim(context: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            message: message.into(),
        }
    }
}
