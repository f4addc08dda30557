//! Numerical realization of the canonical covering group of the restricted
//! conformal group of the Einstein static universe R x S^n.
//!
//! The crate is organized around one chain of constructions:
//!
//! * [`group`] — the pseudo-orthogonal group O(2, n+1) (time- and
//!   space-orientation preserving component), its Lie algebra, and the
//!   Möbius-coordinate parabolic subgroup;
//! * [`domain`] — the bounded domain of (n+1) x 2 matrices with
//!   `I - b^T b > 0`, the Lie ball model, and the negative-plane
//!   Grassmannian model;
//! * [`section`] — the Gram–Schmidt section `P(beta)` of the fibration of
//!   the group over the domain, with its closed-form first blocks, and the
//!   factorization `X = P(beta) S(psi, Psi)`;
//! * [`lift`] — continuous SO(2) angle unwrapping along paths, the eta
//!   invariant, the product-decomposition angle Theta, and the group
//!   2-cocycle zeta built from them;
//! * [`cover`] — elements `(X, tau)` of the covering group with the
//!   cocycle-twisted star product, the center, and the integral compact
//!   quotients;
//! * [`einstein`] — the conformal Lorentz geometry of R x S^n: the lifted
//!   action of the cover, deck transformations, null rays, and a
//!   finite-difference conformality check;
//! * [`verify`] — seeded, reproducible property suites over all of the
//!   above, exposed through the `covergroup` binary.
//!
//! All numerics are dense `f64`; matrices are `nalgebra` heap-allocated with
//! dimensions tied to the sphere dimension `n >= 2` (ambient size `n + 3`).

pub mod cover;
pub mod domain;
pub mod einstein;
pub mod error;
pub mod group;
pub mod lift;
pub mod linalg;
pub mod section;
pub mod tol;
pub mod verify;

pub use cover::{CoverElement, CoverRecord, QuotientElement, QuotientFamily, QuotientKind};
pub use domain::{DomainPoint, LieBallPoint, NegativePlane};
pub use einstein::{CompactPoint, ConformalReport, EinsteinPoint, NullLine};
pub use error::{Error, Result};
pub use group::{GroupElement, LieAlgebraElement, ParabolicElement, Signature};
pub use lift::{LiftReport, Rotation2};
pub use section::{Decomposition, SectionFrame};
pub use verify::{
    run_suite, run_suite_sequential, AllReport, CheckFailure, CheckSummary, LiftAudit, Suite,
    SuiteConfig, SuiteReport,
};
