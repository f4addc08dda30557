//! Central tolerance registry.
//!
//! Every hard-coded threshold in the crate lives here under a name, so the
//! suites can report which gate a failure tripped and the CLI can override
//! individual check tolerances without touching defaults used by
//! constructors.

use std::f64::consts::FRAC_PI_2;

/// Default certification tolerance for `X^T G X = G` (max-abs norm).
pub const CERTIFY: f64 = 1e-9;

/// Residual expected from a fresh signature re-orthonormalization.
pub const REORTH_RESIDUAL: f64 = 1e-12;

/// Smallest acceptable magnitude of a Gram–Schmidt pivot norm^2.
pub const PIVOT_MIN: f64 = 1e-9;

/// Default membership margin for the bounded domain.
pub const DOMAIN_MIN_MARGIN: f64 = 1e-8;

/// Below this margin a point is rejected outright.
pub const DOMAIN_REFUSE_MARGIN: f64 = 1e-12;

/// Below this margin results are flagged as near-boundary.
pub const DOMAIN_WARN_MARGIN: f64 = 1e-6;

/// Margin required of a base point before building its section frame.
pub const SECTION_MARGIN: f64 = 1e-8;

/// Condition-number ceiling for the Möbius denominator `b beta + a`.
pub const MOEBIUS_COND_MAX: f64 = 1e12;

/// Off-diagonal leakage allowed in the stabilizer factor `P(beta)^{-1} X`.
pub const BLOCK_LEAK: f64 = 1e-9;

/// How far a 2x2 matrix may sit from SO(2) and still define an angle.
pub const SO2_NEAR: f64 = 1e-6;

/// Endpoint residual required of every completed angle lift.
pub const LIFT_RESIDUAL: f64 = 1e-9;

/// Per-segment angular increment ceiling during unwrapping.
pub const LIFT_MAX_STEP: f64 = FRAC_PI_2;

/// Initial uniform subdivision of a lift path.
pub const LIFT_INITIAL_STEPS: usize = 16;

/// Hard cap on path evaluations before declaring the path pathological.
pub const LIFT_MAX_EVALS: usize = 1 << 20;

/// Angle-constraint residual allowed when constructing a cover element.
pub const COVER_CONSTRAINT: f64 = 1e-8;

/// Angle-constraint residual allowed on a star-product output.
pub const STAR_CONSTRAINT: f64 = 1e-7;

/// Winding numbers are recovered by rounding; the remainder must be below this.
pub const WINDING_ROUND: f64 = 1e-4;

/// Unit-norm defect allowed when constructing points on the sphere factors.
pub const UNIT_NORM: f64 = 1e-6;

/// Norm floor below which renormalization is refused.
pub const NORM_FLOOR: f64 = 1e-12;

/// Tangency defect allowed by the metric evaluator.
pub const TANGENT: f64 = 1e-10;

/// Relative defect of the null constraint allowed on compact-model vectors.
pub const NULL_RESIDUAL: f64 = 1e-8;

/// Default, minimum and maximum central-difference step for conformal checks.
pub const FD_STEP_DEFAULT: f64 = 1e-5;
pub const FD_STEP_MIN: f64 = 1e-7;
pub const FD_STEP_MAX: f64 = 1e-3;

/// Default sampler boost scale used by the suites.
pub const SAMPLER_SCALE: f64 = 0.4;
