//! Continuous angle lifts.
//!
//! Everything in the covering construction reduces to unwrapping a
//! continuous path of planar rotations to a real-valued angle: the eta
//! invariant compares section frames across the isotropy twist, the product
//! angle Theta tracks the SO(2) part of a product of section frames along
//! the straight-line contraction to the origin, and the group 2-cocycle
//! zeta is a sum of the two. The unwrapper is adaptive: any step whose
//! relative rotation reaches a quarter turn is bisected, so a completed
//! lift certifies its own branch choices.

use nalgebra::{DMatrix, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::domain::DomainPoint;
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::section::{self, Decomposition};
use crate::tol;

/// A planar rotation stored as its matrix entries `(cos, sin)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation2 {
    c: f64,
    s: f64,
}

impl Rotation2 {
    pub fn identity() -> Self {
        Rotation2 { c: 1.0, s: 0.0 }
    }

    pub fn from_angle(t: f64) -> Self {
        Rotation2 { c: t.cos(), s: t.sin() }
    }

    /// Accepts a 2x2 matrix within [`tol::SO2_NEAR`] of a rotation and
    /// projects it onto the nearest one. The half-turn boundary resolves to
    /// `+pi`.
    pub fn from_matrix(m: &Matrix2<f64>) -> Result<Self> {
        let y = 0.5 * (m[(1, 0)] - m[(0, 1)]);
        let x = 0.5 * (m[(0, 0)] + m[(1, 1)]);
        let angle = y.atan2(x);
        let rot = Rotation2::from_angle(angle);
        let residual = rot.distance_to(m);
        if residual > tol::SO2_NEAR {
            return Err(Error::NotRotation { residual });
        }
        Ok(rot)
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != 2 || m.ncols() != 2 {
            return Err(Error::dim(format!("expected 2x2, got {}x{}", m.nrows(), m.ncols())));
        }
        Rotation2::from_matrix(&Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]))
    }

    /// A unit vector regarded as the first column of a rotation.
    pub fn from_unit(col: &Vector2<f64>) -> Result<Self> {
        let norm = col.norm();
        if (norm - 1.0).abs() > tol::SO2_NEAR {
            return Err(Error::NotUnit { norm });
        }
        Ok(Rotation2 {
            c: col[0] / norm,
            s: col[1] / norm,
        })
    }

    /// Principal angle in `(-pi, pi]`.
    pub fn angle(&self) -> f64 {
        self.s.atan2(self.c)
    }

    pub fn cos(&self) -> f64 {
        self.c
    }

    pub fn sin(&self) -> f64 {
        self.s
    }

    pub fn matrix2(&self) -> Matrix2<f64> {
        Matrix2::new(self.c, -self.s, self.s, self.c)
    }

    pub fn dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[self.c, -self.s, self.s, self.c])
    }

    /// First column `(cos, sin)`.
    pub fn first_column(&self) -> Vector2<f64> {
        Vector2::new(self.c, self.s)
    }

    pub fn compose(&self, other: &Rotation2) -> Rotation2 {
        Rotation2 {
            c: self.c * other.c - self.s * other.s,
            s: self.s * other.c + self.c * other.s,
        }
    }

    pub fn inverse(&self) -> Rotation2 {
        Rotation2 { c: self.c, s: -self.s }
    }

    pub fn distance_to(&self, m: &Matrix2<f64>) -> f64 {
        (self.matrix2() - m).amax()
    }
}

/// Angle of a 2x2 matrix near SO(2), with the projection residual.
pub fn so2_angle(m: &Matrix2<f64>) -> Result<(f64, f64)> {
    let rot = Rotation2::from_matrix(m)?;
    Ok((rot.angle(), rot.distance_to(m)))
}

/// Tuning knobs for the unwrapper; the defaults implement the documented
/// initial grid and evaluation budget.
#[derive(Debug, Clone, Copy)]
pub struct LiftOptions {
    pub initial_steps: usize,
    pub max_evals: usize,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions {
            initial_steps: tol::LIFT_INITIAL_STEPS,
            max_evals: tol::LIFT_MAX_EVALS,
        }
    }
}

/// Outcome of a completed lift: the unwrapped endpoint `value`, the number
/// of accepted segments, the largest per-segment rotation, and the distance
/// between the endpoint rotation and `rho(value)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LiftReport {
    pub value: f64,
    pub steps: usize,
    pub max_step: f64,
    pub residual: f64,
}

/// Unwrap `path` over `t in [0, 1]` starting from the angle `start`, which
/// must match `path(0)` up to [`tol::SO2_NEAR`]. Segments are accepted only
/// below a quarter-turn of relative rotation; offenders are bisected until
/// the evaluation budget runs out.
pub fn unwrap_along<F>(path: F, start: f64) -> Result<LiftReport>
where
    F: FnMut(f64) -> Result<Rotation2>,
{
    unwrap_along_with(path, start, &LiftOptions::default())
}

pub fn unwrap_along_with<F>(mut path: F, start: f64, opts: &LiftOptions) -> Result<LiftReport>
where
    F: FnMut(f64) -> Result<Rotation2>,
{
    let k = opts.initial_steps.max(1);
    let mut evals = 0usize;
    let mut eval = |t: f64, evals: &mut usize| -> Result<Rotation2> {
        if *evals >= opts.max_evals {
            return Err(Error::SubdivisionExhausted { evals: *evals });
        }
        *evals += 1;
        path(t)
    };

    let first = eval(0.0, &mut evals)?;
    let start_rot = Rotation2::from_angle(start);
    let start_resid = start_rot.distance_to(&first.matrix2());
    if start_resid > tol::SO2_NEAR {
        return Err(Error::StartMismatch { residual: start_resid });
    }

    // Work stack of segments, popped left to right.
    let mut nodes = Vec::with_capacity(k + 1);
    nodes.push((0.0, first));
    for i in 1..=k {
        let t = i as f64 / k as f64;
        nodes.push((t, eval(t, &mut evals)?));
    }
    let mut stack: Vec<((f64, Rotation2), (f64, Rotation2))> = Vec::with_capacity(2 * k);
    for pair in nodes.windows(2).rev() {
        stack.push((pair[0], pair[1]));
    }

    let mut value = start;
    let mut steps = 0usize;
    let mut max_step = 0.0f64;
    let mut end_rot = first;
    while let Some(((ta, ra), (tb, rb))) = stack.pop() {
        let delta = rb.compose(&ra.inverse()).angle();
        if delta.abs() >= tol::LIFT_MAX_STEP {
            let tm = 0.5 * (ta + tb);
            let rm = eval(tm, &mut evals)?;
            stack.push(((tm, rm), (tb, rb)));
            stack.push(((ta, ra), (tm, rm)));
            continue;
        }
        // A small measured step can still hide a full turn. The half-step
        // sum agrees with the whole step modulo 2 pi exactly, so a hidden
        // turn surfaces as a 2 pi mismatch at the midpoint probe; quiet
        // segments are accepted in both halves at once.
        let tm = 0.5 * (ta + tb);
        let rm = eval(tm, &mut evals)?;
        let d1 = rm.compose(&ra.inverse()).angle();
        let d2 = rb.compose(&rm.inverse()).angle();
        let consistent = d1.abs() < tol::LIFT_MAX_STEP
            && d2.abs() < tol::LIFT_MAX_STEP
            && (d1 + d2 - delta).abs() < 1.0;
        if consistent {
            value += d1 + d2;
            steps += 2;
            max_step = max_step.max(d1.abs()).max(d2.abs());
            end_rot = rb;
        } else {
            stack.push(((tm, rm), (tb, rb)));
            stack.push(((ta, ra), (tm, rm)));
        }
    }

    let residual = Rotation2::from_angle(value).distance_to(&end_rot.matrix2());
    Ok(LiftReport {
        value,
        steps,
        max_step,
        residual,
    })
}

/// The eta invariant: the angle at `t = 1` of the lift of
/// `t -> a(t beta r^{-1})^{-1} r a(t beta) r^{-1}` from `eta = 0`, where
/// `a` is the first block of the section frame. It measures how the section
/// interacts with the right isotropy twist by `r`; it vanishes at the
/// origin and for `r = I`.
pub fn eta(beta: &DomainPoint, r: &Rotation2) -> Result<LiftReport> {
    eta_with(beta, r, &LiftOptions::default())
}

pub fn eta_with(beta: &DomainPoint, r: &Rotation2, opts: &LiftOptions) -> Result<LiftReport> {
    let twisted = DomainPoint::new(beta.beta() * r.inverse().dmatrix())
        .expect("isotropy twist preserves the domain margin");
    let path = |t: f64| -> Result<Rotation2> {
        let at = section::section(&beta.scaled(t))?.a_hat();
        let at_twist = section::section(&twisted.scaled(t))?.a_hat();
        let inv = at_twist
            .try_inverse()
            .ok_or_else(|| Error::dim("section block a is singular"))?;
        let m = inv * r.dmatrix() * at * r.inverse().dmatrix();
        Rotation2::from_dmatrix(&m)
    };
    unwrap_along_with(path, 0.0, opts)
}

/// The data carried by a product of two section frames:
/// `P(beta) P(beta') = P(m) S(rho(Theta), R)`.
#[derive(Debug, Clone)]
pub struct ProductDecomposition {
    /// Base point `m(beta, beta')` of the product.
    pub product_point: DomainPoint,
    /// Continuous lift of the SO(2) stabilizer angle along the straight-line
    /// contraction `t -> (t beta, t beta')`, from `Theta(0, 0) = 0`.
    pub theta: LiftReport,
    /// The SO(n+1) stabilizer block at `t = 1`.
    pub rotation: DMatrix<f64>,
}

/// Lift the product angle `Theta(beta, beta')`. Every path node evaluates
/// the full section frames and their product's factorization; nothing is
/// interpolated.
pub fn product_decompose(beta: &DomainPoint, beta2: &DomainPoint) -> Result<ProductDecomposition> {
    product_decompose_with(beta, beta2, &LiftOptions::default())
}

pub fn product_decompose_with(
    beta: &DomainPoint,
    beta2: &DomainPoint,
    opts: &LiftOptions,
) -> Result<ProductDecomposition> {
    if beta.n() != beta2.n() {
        return Err(Error::dim(format!(
            "product of points for n = {} and n = {}",
            beta.n(),
            beta2.n()
        )));
    }
    let factor_at = |t: f64| -> Result<Decomposition> {
        let p1 = section::section(&beta.scaled(t))?;
        let p2 = section::section(&beta2.scaled(t))?;
        let prod = GroupElement::certify_default(p1.element().matrix() * p2.element().matrix())?;
        section::decompose(&prod)
    };
    let path = |t: f64| -> Result<Rotation2> { Ok(factor_at(t)?.psi) };
    let theta = unwrap_along_with(path, 0.0, opts)?;
    let end = factor_at(1.0)?;
    Ok(ProductDecomposition {
        product_point: end.beta,
        theta,
        rotation: end.big_psi,
    })
}

/// The group 2-cocycle
/// `zeta(X, X') = Theta(pi(X), Psi(X) pi(X') psi(X)^{-1}) + eta(pi(X'), psi(X))`
/// where `pi` is the Möbius base point and `(psi, Psi)` the stabilizer
/// angles of the factorization. It is exactly the angle defect in
/// `psi(X X') = psi(X) psi(X') rho(zeta(X, X'))`.
pub fn zeta(x: &GroupElement, x2: &GroupElement) -> Result<f64> {
    Ok(zeta_reported(x, x2)?.0)
}

/// Like [`zeta`], returning the two lift reports (Theta first, eta second).
pub fn zeta_reported(x: &GroupElement, x2: &GroupElement) -> Result<(f64, LiftReport, LiftReport)> {
    zeta_reported_with(x, x2, &LiftOptions::default())
}

pub fn zeta_reported_with(
    x: &GroupElement,
    x2: &GroupElement,
    opts: &LiftOptions,
) -> Result<(f64, LiftReport, LiftReport)> {
    if x.n() != x2.n() {
        return Err(Error::dim(format!(
            "cocycle of elements for n = {} and n = {}",
            x.n(),
            x2.n()
        )));
    }
    let d1 = section::decompose(x)?;
    let d2 = section::decompose(x2)?;
    let twisted = DomainPoint::new(&d1.big_psi * d2.beta.beta() * d1.psi.inverse().dmatrix())
        .expect("stabilizer rotations preserve the domain margin");
    let prod = product_decompose_with(&d1.beta, &twisted, opts)?;
    let eta_report = eta_with(&d2.beta, &d1.psi, opts)?;
    Ok((
        prod.theta.value + eta_report.value,
        prod.theta,
        eta_report,
    ))
}
