//! The universal covering group.
//!
//! Elements are pairs `(X, tau)` of a certified group element and a real
//! angle with `psi(X) = rho(tau)`, where `psi` is the SO(2) stabilizer
//! factor of the section decomposition and `rho` the angle-to-rotation map.
//! The product
//!
//! ```text
//! (X, tau) * (X', tau') = (X X', tau + tau' + zeta(X, X'))
//! ```
//!
//! uses the lifted cocycle `zeta` to pick the continuous branch of the
//! combined angle, which is what makes the pair group simply connected
//! rather than a plain product. The center is the deck transformation
//! group of the covering, and quotients by its subgroups enumerate the
//! groups covered in between.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::domain::DomainPoint;
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::lift::{self, Rotation2};
use crate::linalg::{self, inf_norm};
use crate::section;
use crate::tol;

/// A point of the covering group: a certified element together with a real
/// angle whose rotation is the element's SO(2) stabilizer factor.
#[derive(Debug, Clone)]
pub struct CoverElement {
    x: GroupElement,
    tau: f64,
    constraint: f64,
}

impl CoverElement {
    /// Pair `x` with the angle `tau`, verifying `psi(x) = rho(tau)`.
    pub fn new(x: GroupElement, tau: f64) -> Result<Self> {
        Self::assemble(x, tau, tol::COVER_CONSTRAINT)
    }

    fn assemble(x: GroupElement, tau: f64, tolerance: f64) -> Result<Self> {
        let psi = section::decompose(&x)?.psi;
        let constraint = psi.distance_to(&Rotation2::from_angle(tau).matrix2());
        if constraint > tolerance {
            return Err(Error::ConstraintViolated {
                residual: constraint,
            });
        }
        Ok(CoverElement { x, tau, constraint })
    }

    pub fn identity(n: usize) -> Self {
        CoverElement {
            x: GroupElement::identity(n),
            tau: 0.0,
            constraint: 0.0,
        }
    }

    /// The canonical lift with the principal angle in `(-pi, pi]`.
    pub fn lift(x: &GroupElement) -> Result<Self> {
        Self::lift_with_winding(x, 0)
    }

    /// The lift whose angle is the principal one shifted by `k` full turns.
    pub fn lift_with_winding(x: &GroupElement, k: i64) -> Result<Self> {
        let psi = section::decompose(x)?.psi;
        Ok(CoverElement {
            x: x.clone(),
            tau: psi.angle() + TAU * k as f64,
            constraint: 0.0,
        })
    }

    /// A random element: a random certified element lifted with a random
    /// winding in `-2..=2`.
    pub fn random_with_rng<R: rand::Rng>(n: usize, rng: &mut R, scale: f64) -> Result<Self> {
        let x = GroupElement::random_with_rng(n, rng, scale)?;
        let k = rng.gen_range(-2i64..=2);
        Self::lift_with_winding(&x, k)
    }

    /// The covering projection.
    pub fn element(&self) -> &GroupElement {
        &self.x
    }

    pub fn angle(&self) -> f64 {
        self.tau
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }

    /// Measured defect of `psi(X) = rho(tau)` at construction.
    pub fn constraint(&self) -> f64 {
        self.constraint
    }

    /// The group law: multiply the projections and transport the angles
    /// along the lifted cocycle.
    pub fn star(&self, other: &Self) -> Result<Self> {
        let x = self.x.compose(&other.x)?;
        let z = lift::zeta(&self.x, &other.x)?;
        Self::assemble(x, self.tau + other.tau + z, tol::STAR_CONSTRAINT)
    }

    pub fn star_inverse(&self) -> Result<Self> {
        let x_inv = self.x.inverse();
        let z = lift::zeta(&self.x, &x_inv)?;
        Self::assemble(x_inv, -self.tau - z, tol::STAR_CONSTRAINT)
    }

    /// Multiply by the `k`-th central element. This is exact bookkeeping:
    /// no lift is evaluated.
    pub fn times_center(&self, k: i64) -> Self {
        let n = self.n();
        if n % 2 == 0 {
            CoverElement {
                x: self.x.clone(),
                tau: self.tau + TAU * k as f64,
                constraint: self.constraint,
            }
        } else {
            let x = if k.rem_euclid(2) == 0 {
                self.x.clone()
            } else {
                self.x.negated()
            };
            CoverElement {
                x,
                tau: self.tau + PI * k as f64,
                constraint: self.constraint,
            }
        }
    }

    /// Whether this is one of the deck transformations: `(I, 2 pi k)` for
    /// even `n`, `((-1)^k I, pi k)` for odd `n`.
    pub fn is_central(&self) -> bool {
        let size = self.x.size();
        let id = DMatrix::<f64>::identity(size, size);
        if self.n() % 2 == 0 {
            if linalg::winding_integer(self.tau, TAU).is_err() {
                return false;
            }
            inf_norm(&(self.x.matrix() - id)) < tol::COVER_CONSTRAINT
        } else {
            let k = match linalg::winding_integer(self.tau, PI) {
                Ok(k) => k,
                Err(_) => return false,
            };
            let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            inf_norm(&(self.x.matrix() - id * sign)) < tol::COVER_CONSTRAINT
        }
    }

    pub fn to_record(&self) -> CoverRecord {
        CoverRecord {
            n: self.n(),
            tau: self.tau,
            matrix: self.x.matrix().transpose().as_slice().to_vec(),
        }
    }

    pub fn from_record(record: &CoverRecord) -> Result<Self> {
        let size = record.n + 3;
        if record.matrix.len() != size * size {
            return Err(Error::dim(format!(
                "record for n = {} needs {} entries, got {}",
                record.n,
                size * size,
                record.matrix.len()
            )));
        }
        let m = DMatrix::from_row_slice(size, size, &record.matrix);
        let x = GroupElement::certify_default(m)?;
        CoverElement::new(x, record.tau)
    }
}

/// Flat serialization of a cover element: row-major matrix entries plus the
/// angle. Reading back re-certifies the matrix and the angle constraint.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CoverRecord {
    pub n: usize,
    pub tau: f64,
    pub matrix: Vec<f64>,
}

/// The `k`-th element of the center. For even `n` the center is the free
/// group on `(I, 2 pi)`; for odd `n` the matrix `-I` lies in the group and
/// the center is generated by `(-I, pi)`.
pub fn center(n: usize, k: i64) -> CoverElement {
    CoverElement::identity(n).times_center(k)
}

/// Build the element with chart coordinates `(beta, angle, rot)`: the
/// section frame at `beta` times the stabilizer `S(rho(angle), rot)`. The
/// stabilizer angle of such a product is `rho(angle)` on the nose, so the
/// pair `(X, angle)` satisfies the cover constraint with no lift.
pub fn parametrize(beta: &DomainPoint, angle: f64, rot: &DMatrix<f64>) -> Result<CoverElement> {
    let frame = section::section(beta)?;
    let s = section::stabilizer(&Rotation2::from_angle(angle), rot)?;
    let x = GroupElement::certify_default(frame.element().matrix() * s.matrix())?;
    CoverElement::new(x, angle)
}

/// Chart coordinates of a cover element: the base point, the angle with its
/// winding restored from `tau`, and the SO(n+1) stabilizer block.
pub fn unparametrize(e: &CoverElement) -> Result<(DomainPoint, f64, DMatrix<f64>)> {
    let d = section::decompose(e.element())?;
    let k = linalg::winding_integer(e.angle() - d.psi.angle(), TAU)?;
    Ok((d.beta, d.psi.angle() + TAU * k as f64, d.big_psi))
}

/// The two families of discrete central subgroups one can quotient by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuotientKind {
    /// Generated by `(I, 2 pi h)`: the angle is periodic, the matrix is
    /// untouched. Defined for every `n` and `h >= 1`.
    Periodic,
    /// Generated by `(-I, (2h + 1) pi)`: shifting the angle by the period
    /// also flips the matrix sign. Defined only for odd `n`, `h >= 0`.
    AntiPeriodic,
}

/// A central subgroup: a kind together with its index parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientFamily {
    pub kind: QuotientKind,
    pub h: u32,
}

impl QuotientFamily {
    pub fn periodic(h: u32) -> Result<Self> {
        if h == 0 {
            return Err(Error::config("periodic quotient needs h >= 1"));
        }
        Ok(QuotientFamily {
            kind: QuotientKind::Periodic,
            h,
        })
    }

    pub fn anti_periodic(h: u32) -> Self {
        QuotientFamily {
            kind: QuotientKind::AntiPeriodic,
            h,
        }
    }

    /// Angle period of the subgroup generator.
    pub fn period(&self) -> f64 {
        match self.kind {
            QuotientKind::Periodic => TAU * self.h as f64,
            QuotientKind::AntiPeriodic => PI * (2 * self.h + 1) as f64,
        }
    }

    /// How many center steps one period is worth.
    fn center_steps(&self) -> i64 {
        match self.kind {
            QuotientKind::Periodic => 2 * self.h as i64,
            QuotientKind::AntiPeriodic => 2 * self.h as i64 + 1,
        }
    }
}

/// A coset of a central subgroup, stored through its canonical
/// representative with angle in `[0, period)`.
#[derive(Debug, Clone)]
pub struct QuotientElement {
    family: QuotientFamily,
    rep: CoverElement,
}

impl QuotientElement {
    /// Reduce a cover element to its canonical coset representative.
    pub fn reduce(family: QuotientFamily, e: &CoverElement) -> Result<Self> {
        if family.kind == QuotientKind::AntiPeriodic && e.n() % 2 == 0 {
            return Err(Error::ParityMismatch {
                context: "anti-periodic quotients need -I in the group, so odd n".into(),
            });
        }
        let period = family.period();
        let mut j = (e.angle() / period).floor() as i64;
        // An angle within round-off of the upper edge belongs to the next
        // window; without the nudge equal cosets could reduce to
        // representatives a full period apart.
        if e.angle() - j as f64 * period > period - 1e-12 {
            j += 1;
        }
        // For odd n the even-n branch of times_center is never taken, so
        // stepping by the subgroup generator is j * center_steps.
        let rep = if e.n() % 2 == 0 {
            CoverElement {
                x: e.x.clone(),
                tau: e.angle() - j as f64 * period,
                constraint: e.constraint(),
            }
        } else {
            e.times_center(-j * family.center_steps())
        };
        Ok(QuotientElement { family, rep })
    }

    pub fn family(&self) -> QuotientFamily {
        self.family
    }

    pub fn representative(&self) -> &CoverElement {
        &self.rep
    }

    pub fn star(&self, other: &Self) -> Result<Self> {
        if self.family != other.family {
            return Err(Error::config(
                "cannot multiply cosets of different central subgroups",
            ));
        }
        Self::reduce(self.family, &self.rep.star(&other.rep)?)
    }

    pub fn star_inverse(&self) -> Result<Self> {
        Self::reduce(self.family, &self.rep.star_inverse()?)
    }

    /// Distance between cosets: the closest the deck orbit of `other` comes
    /// to this representative, combining matrix and angle mismatch.
    pub fn orbit_distance(&self, other: &Self) -> f64 {
        let steps = self.family.center_steps();
        let mut best = f64::INFINITY;
        for j in -2..=2i64 {
            let shifted = other.rep.times_center(j * steps);
            let dm = inf_norm(&(self.rep.element().matrix() - shifted.element().matrix()));
            let da = (self.rep.angle() - shifted.angle()).abs();
            best = best.min(dm.max(da));
        }
        best
    }
}
