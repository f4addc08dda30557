//! The lifted action on the Einstein cylinder.
//!
//! Points of the cylinder are pairs `(tau, y)` with `tau` real and `y` a
//! unit vector. The compact model identifies `(tau, y)` with the null
//! vector `(cos tau, sin tau, y)`, on which the group acts linearly up to
//! rescaling; `tau` there only matters modulo a full turn. The covering
//! group acts on the cylinder itself: the angle of the image is unwrapped
//! along the contraction of the acting element to the identity, so that
//! deck transformations act by exact angle shifts.

use nalgebra::{DMatrix, DVector, Vector2};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::cover::{CoverElement, QuotientElement, QuotientFamily, QuotientKind};
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::lift::{self, LiftOptions, LiftReport, Rotation2};
use crate::linalg::{self, inf_norm};
use crate::section;
use crate::tol;

/// A point `(tau, y)` of the cylinder: a real time angle and a unit vector.
#[derive(Debug, Clone)]
pub struct EinsteinPoint {
    tau: f64,
    y: DVector<f64>,
}

impl EinsteinPoint {
    pub fn new(tau: f64, y: DVector<f64>) -> Result<Self> {
        if y.len() < 3 {
            return Err(Error::dim(format!(
                "sphere vectors have n + 1 >= 3 entries, got {}",
                y.len()
            )));
        }
        let norm = y.norm();
        if (norm - 1.0).abs() > tol::UNIT_NORM {
            return Err(Error::NotUnit { norm });
        }
        Ok(EinsteinPoint { tau, y: y / norm })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.y.len() - 1
    }

    pub fn random_with_rng<R: rand::Rng>(n: usize, rng: &mut R, tau_span: f64) -> Self {
        let y = DVector::from_fn(n + 1, |_, _| {
            rng.sample::<f64, _>(rand_distr::StandardNormal)
        });
        let y = &y / y.norm();
        EinsteinPoint {
            tau: rng.gen_range(-tau_span..tau_span),
            y,
        }
    }

    pub fn compact(&self) -> CompactPoint {
        let mut x = DVector::<f64>::zeros(self.y.len() + 2);
        x[0] = self.tau.cos();
        x[1] = self.tau.sin();
        for i in 0..self.y.len() {
            x[2 + i] = self.y[i];
        }
        CompactPoint { x }
    }

    /// Combined mismatch `max(|d tau|, |d y|)` against another point.
    pub fn distance_to(&self, other: &EinsteinPoint) -> f64 {
        let dy = linalg::inf_norm_vec(&(&self.y - &other.y));
        (self.tau - other.tau).abs().max(dy)
    }

    pub fn to_record(&self) -> PointRecord {
        PointRecord {
            tau: self.tau,
            y: self.y.as_slice().to_vec(),
        }
    }

    pub fn from_record(record: &PointRecord) -> Result<Self> {
        EinsteinPoint::new(record.tau, DVector::from_vec(record.y.clone()))
    }
}

/// Flat serialization of a cylinder point.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PointRecord {
    pub tau: f64,
    pub y: Vec<f64>,
}

/// A null vector of the ambient space scaled so its leading pair is a unit
/// vector; the ray it spans is a point of the compact model.
#[derive(Debug, Clone)]
pub struct CompactPoint {
    x: DVector<f64>,
}

impl CompactPoint {
    pub fn new(x: DVector<f64>) -> Result<Self> {
        if x.len() < 5 {
            return Err(Error::dim(format!(
                "compact vectors have n + 3 >= 5 entries, got {}",
                x.len()
            )));
        }
        let top2 = x[0] * x[0] + x[1] * x[1];
        if top2.sqrt() < tol::NORM_FLOOR {
            return Err(Error::DegenerateNorm { norm: top2.sqrt() });
        }
        let scaled = &x / top2.sqrt();
        let bottom2 = scaled.rows(2, x.len() - 2).norm_squared();
        if (bottom2 - 1.0).abs() > tol::NULL_RESIDUAL {
            return Err(Error::ConstraintViolated {
                residual: (bottom2 - 1.0).abs(),
            });
        }
        Ok(CompactPoint { x: scaled })
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn n(&self) -> usize {
        self.x.len() - 3
    }

    /// Principal cylinder coordinates, with `tau` in `(-pi, pi]`.
    pub fn to_einstein(&self) -> Result<EinsteinPoint> {
        let tau = self.x[1].atan2(self.x[0]);
        EinsteinPoint::new(tau, self.x.rows(2, self.x.len() - 2).into_owned())
    }

    /// The linear action followed by the canonical rescaling.
    pub fn act(&self, x: &GroupElement) -> Result<CompactPoint> {
        if x.n() != self.n() {
            return Err(Error::dim(format!(
                "element for n = {} acting on a compact point for n = {}",
                x.n(),
                self.n()
            )));
        }
        CompactPoint::new(x.matrix() * &self.x)
    }
}

/// The compact-model action in cylinder coordinates; the image time angle
/// is the principal one.
pub fn act_compact(x: &GroupElement, p: &EinsteinPoint) -> Result<EinsteinPoint> {
    p.compact().act(x)?.to_einstein()
}

/// The covering-group action on the cylinder.
pub fn act_cover(e: &CoverElement, p: &EinsteinPoint) -> Result<EinsteinPoint> {
    Ok(act_cover_reported(e, p)?.0)
}

pub fn act_cover_reported(e: &CoverElement, p: &EinsteinPoint) -> Result<(EinsteinPoint, LiftReport)> {
    act_cover_with(e, p, &LiftOptions::default())
}

/// The lifted action: the image sphere vector comes straight from the
/// matrix blocks, while the image time angle is unwrapped along
/// `t -> top of P(t beta) S(rho(t tau_X)) . (rho_1(tau), Psi y)`,
/// the contraction of the acting element through its chart coordinates,
/// starting from `tau` at `t = 0`.
pub fn act_cover_with(
    e: &CoverElement,
    p: &EinsteinPoint,
    opts: &LiftOptions,
) -> Result<(EinsteinPoint, LiftReport)> {
    if e.n() != p.n() {
        return Err(Error::dim(format!(
            "cover element for n = {} acting on a point for n = {}",
            e.n(),
            p.n()
        )));
    }
    let x = e.element();
    let d = section::decompose(x)?;
    // The stored angle must be the measured stabilizer angle up to whole
    // turns; this also catches corrupted pairs early.
    linalg::winding_integer(e.angle() - d.psi.angle(), TAU)?;
    let theta = e.angle();
    let w = &d.big_psi * p.y();

    let bottom = x.block_c() * DVector::from_vec(vec![p.tau().cos(), p.tau().sin()])
        + x.block_d() * p.y();
    let norm = bottom.norm();
    if norm < tol::NORM_FLOOR {
        return Err(Error::DegenerateNorm { norm });
    }
    let y_image = &bottom / norm;

    let beta = d.beta;
    let tau_in = p.tau();
    let path = |t: f64| -> Result<Rotation2> {
        let frame = section::section(&beta.scaled(t))?;
        let s = t * theta + tau_in;
        let arg = DVector::from_vec(vec![s.cos(), s.sin()]);
        let top = frame.a_hat() * arg + frame.b_hat() * &w;
        let tn = top.norm();
        if tn < tol::NORM_FLOOR {
            return Err(Error::DegenerateNorm { norm: tn });
        }
        Rotation2::from_unit(&Vector2::new(top[0] / tn, top[1] / tn))
    };
    // The path drifts by about theta overall, so the initial grid must
    // resolve that budget or a fast stretch could alias away a whole turn.
    let budget = (theta.abs() / std::f64::consts::FRAC_PI_4).ceil() as usize;
    let effective = LiftOptions {
        initial_steps: opts.initial_steps.max(opts.initial_steps / 2 + budget),
        max_evals: opts.max_evals,
    };
    let report = lift::unwrap_along_with(path, tau_in, &effective)?;
    Ok((EinsteinPoint::new(report.value, y_image)?, report))
}

/// The `k`-th deck transformation in cylinder coordinates: a shift by `k`
/// full turns for even `n`, by `k` half turns with a matching sign flip of
/// the sphere vector for odd `n`. Exact bookkeeping, no lift.
pub fn deck_point(k: i64, p: &EinsteinPoint) -> EinsteinPoint {
    if p.n() % 2 == 0 {
        EinsteinPoint {
            tau: p.tau + TAU * k as f64,
            y: p.y.clone(),
        }
    } else {
        let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        EinsteinPoint {
            tau: p.tau + std::f64::consts::PI * k as f64,
            y: &p.y * sign,
        }
    }
}

/// Canonical representative of a cylinder point modulo the deck subgroup:
/// the angle is folded into `[0, period)` and, for anti-periodic families,
/// the sphere vector picks up the sign of the fold.
pub fn reduce_point(family: QuotientFamily, p: &EinsteinPoint) -> Result<EinsteinPoint> {
    if family.kind == QuotientKind::AntiPeriodic && p.n() % 2 == 0 {
        return Err(Error::ParityMismatch {
            context: "anti-periodic identifications need -I in the group, so odd n".into(),
        });
    }
    let period = family.period();
    let mut j = (p.tau / period).floor() as i64;
    if p.tau - j as f64 * period > period - 1e-12 {
        j += 1;
    }
    let y = match family.kind {
        QuotientKind::Periodic => p.y.clone(),
        QuotientKind::AntiPeriodic => {
            let sign = if j.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            &p.y * sign
        }
    };
    Ok(EinsteinPoint {
        tau: p.tau - j as f64 * period,
        y,
    })
}

/// The quotient-group action on the quotient cylinder: act through the
/// canonical representative, then reduce again.
pub fn act_quotient(q: &QuotientElement, p: &EinsteinPoint) -> Result<EinsteinPoint> {
    let moved = act_cover(q.representative(), p)?;
    reduce_point(q.family(), &moved)
}

/// Orthonormal tangent frame of the sphere at `y`, oriented so that
/// `det(y | t_1 | ... | t_n) = +1`. Built from the Householder reflection
/// exchanging `y` with a signed axis vector, which keeps the construction
/// well conditioned for every `y`.
pub fn tangent_frame(y: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
    let k = y.len();
    if k < 3 {
        return Err(Error::dim(format!(
            "sphere vectors have n + 1 >= 3 entries, got {k}"
        )));
    }
    let norm = y.norm();
    if (norm - 1.0).abs() > tol::UNIT_NORM {
        return Err(Error::NotUnit { norm });
    }
    let y = y / norm;
    let s = if y[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut v = y.clone();
    v[0] += s;
    let vn2 = v.norm_squared();
    let mut frame = Vec::with_capacity(k - 1);
    for i in 1..k {
        let mut t = DVector::<f64>::zeros(k);
        t[i] = 1.0;
        let coef = 2.0 * v[i] / vn2;
        t -= &v * coef;
        if i == 1 && s < 0.0 {
            t = -t;
        }
        frame.push(t);
    }
    Ok(frame)
}

/// The cylinder metric `-a_0 b_0 + <a_s, b_s>` on tangent vectors
/// `(a_0, a_s)`, `(b_0, b_s)` at `p`; the sphere parts must be tangent.
pub fn metric_eval(
    p: &EinsteinPoint,
    a: (f64, &DVector<f64>),
    b: (f64, &DVector<f64>),
) -> Result<f64> {
    for (_, vs) in [&a, &b] {
        if vs.len() != p.y.len() {
            return Err(Error::dim(format!(
                "tangent vector of length {} at a point with {} sphere entries",
                vs.len(),
                p.y.len()
            )));
        }
        let defect = vs.dot(&p.y).abs();
        if defect > tol::TANGENT * vs.norm().max(1.0) {
            return Err(Error::NotTangent { defect });
        }
    }
    Ok(-a.0 * b.0 + a.1.dot(b.1))
}

/// Report of a finite-difference conformality measurement.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConformalReport {
    /// The measured conformal factor (squared stretch).
    pub factor: f64,
    /// Relative deviation of the pulled-back metric from `factor` times
    /// the cylinder metric.
    pub residual: f64,
    pub step: f64,
    /// Determinant of the differential in oriented frames; positive when
    /// the map preserves orientation.
    pub orientation: f64,
    /// Coefficient of the image time direction along the source time
    /// direction; positive when the future is preserved.
    pub time_component: f64,
}

/// Measure how far the compact action of `x` at `p` is from conformal for
/// the cylinder metric: pull the ambient quadratic form back through
/// central differences of the canonical compact representative and compare
/// with a multiple of `diag(-1, I_n)` in an orthonormal frame.
pub fn conformal_check(x: &GroupElement, p: &EinsteinPoint, step: f64) -> Result<ConformalReport> {
    if !(tol::FD_STEP_MIN..=tol::FD_STEP_MAX).contains(&step) {
        return Err(Error::StepOutOfRange {
            h: step,
            min: tol::FD_STEP_MIN,
            max: tol::FD_STEP_MAX,
        });
    }
    if x.n() != p.n() {
        return Err(Error::dim(format!(
            "element for n = {} checked at a point for n = {}",
            x.n(),
            p.n()
        )));
    }
    let n = p.n();
    let frame = tangent_frame(p.y())?;
    let image = |q: &EinsteinPoint| -> Result<DVector<f64>> {
        Ok(q.compact().act(x)?.vector().clone())
    };

    let mut jac = DMatrix::<f64>::zeros(n + 3, n + 1);
    for dir in 0..n + 1 {
        let at = |s: f64| -> Result<DVector<f64>> {
            let q = if dir == 0 {
                EinsteinPoint {
                    tau: p.tau + s,
                    y: p.y.clone(),
                }
            } else {
                EinsteinPoint {
                    tau: p.tau,
                    y: &p.y * s.cos() + &frame[dir - 1] * s.sin(),
                }
            };
            image(&q)
        };
        let col = (at(step)? - at(-step)?) / (2.0 * step);
        jac.set_column(dir, &col);
    }

    let g = linalg::gram(2, n + 3);
    let m = jac.transpose() * g * &jac;
    let factor = -m[(0, 0)];
    if factor < tol::NORM_FLOOR {
        return Err(Error::DegenerateNorm { norm: factor });
    }
    let mut eta = DMatrix::<f64>::identity(n + 1, n + 1);
    eta[(0, 0)] = -1.0;
    let residual = inf_norm(&(&m - eta * factor)) / factor;

    // Coordinates of the differential in oriented frames at both ends: the
    // time row is the angular velocity of the leading pair, the sphere rows
    // are projections onto the image tangent frame.
    let x_img = image(p)?;
    let y_img = x_img.rows(2, n + 1).into_owned();
    let y_img = &y_img / y_img.norm();
    let frame_img = tangent_frame(&y_img)?;
    let mut c = DMatrix::<f64>::zeros(n + 1, n + 1);
    for dir in 0..n + 1 {
        let col = jac.column(dir);
        c[(0, dir)] = x_img[0] * col[1] - x_img[1] * col[0];
        for (i, t) in frame_img.iter().enumerate() {
            let mut acc = 0.0;
            for r in 0..n + 1 {
                acc += t[r] * col[2 + r];
            }
            c[(1 + i, dir)] = acc;
        }
    }
    Ok(ConformalReport {
        factor,
        residual,
        step,
        orientation: c.determinant(),
        time_component: c[(0, 0)],
    })
}

/// A null line of the cylinder: the curve `t -> (t + shift, great circle)`
/// realized as a totally null 2-plane of the ambient space, stored through
/// the canonical basis whose leading pairs are the two axis vectors.
#[derive(Debug, Clone)]
pub struct NullLine {
    a: DVector<f64>,
    b: DVector<f64>,
}

impl NullLine {
    /// The line through `(tau0, y0)` with initial sphere velocity `y1`;
    /// the two sphere vectors must be unit and orthogonal.
    pub fn new(tau0: f64, y0: &DVector<f64>, y1: &DVector<f64>) -> Result<Self> {
        if y0.len() != y1.len() || y0.len() < 3 {
            return Err(Error::dim(format!(
                "null line data needs two sphere vectors of equal length >= 3, got {} and {}",
                y0.len(),
                y1.len()
            )));
        }
        for v in [y0, y1] {
            let norm = v.norm();
            if (norm - 1.0).abs() > tol::UNIT_NORM {
                return Err(Error::NotUnit { norm });
            }
        }
        let w0 = y0 / y0.norm();
        let mut w1 = y1 - &w0 * w0.dot(y1);
        let defect = (y1 - &w1).norm();
        if defect > tol::UNIT_NORM {
            return Err(Error::NotTangent { defect });
        }
        w1 /= w1.norm();

        // Canonical basis: rotate so the leading pairs become the axes.
        let (c, s) = (tau0.cos(), tau0.sin());
        let k = w0.len();
        let mut a = DVector::<f64>::zeros(k + 2);
        let mut b = DVector::<f64>::zeros(k + 2);
        a[0] = 1.0;
        b[1] = 1.0;
        for i in 0..k {
            a[2 + i] = c * w0[i] - s * w1[i];
            b[2 + i] = s * w0[i] + c * w1[i];
        }
        Ok(NullLine { a, b })
    }

    pub fn random_with_rng<R: rand::Rng>(n: usize, rng: &mut R) -> Self {
        let y0 = EinsteinPoint::random_with_rng(n, rng, 1.0).y;
        let raw = DVector::from_fn(n + 1, |_, _| {
            rng.sample::<f64, _>(rand_distr::StandardNormal)
        });
        let mut y1 = &raw - &y0 * y0.dot(&raw);
        y1 /= y1.norm();
        let tau0 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        NullLine::new(tau0, &y0, &y1).expect("orthonormalized data always builds")
    }

    pub fn basis(&self) -> (&DVector<f64>, &DVector<f64>) {
        (&self.a, &self.b)
    }

    pub fn n(&self) -> usize {
        self.a.len() - 3
    }

    /// The point reached after parameter `t`; in the canonical basis the
    /// time angle equals `t`.
    pub fn point_at(&self, t: f64) -> EinsteinPoint {
        let x = &self.a * t.cos() + &self.b * t.sin();
        let y = x.rows(2, x.len() - 2).into_owned();
        EinsteinPoint {
            tau: t,
            y: &y / y.norm(),
        }
    }

    /// The image line: act on the spanning plane and re-canonicalize.
    pub fn transform(&self, x: &GroupElement) -> Result<NullLine> {
        if x.n() != self.n() {
            return Err(Error::dim(format!(
                "element for n = {} moving a null line for n = {}",
                x.n(),
                self.n()
            )));
        }
        let ia = x.matrix() * &self.a;
        let ib = x.matrix() * &self.b;
        // The leading-pair map of a totally null plane is invertible, so
        // the plane has a unique basis with axis leading pairs.
        let t = nalgebra::Matrix2::new(ia[0], ib[0], ia[1], ib[1]);
        let t_inv = t.try_inverse().ok_or(Error::IllConditioned {
            cond: f64::INFINITY,
        })?;
        let ca = &ia * t_inv[(0, 0)] + &ib * t_inv[(1, 0)];
        let cb = &ia * t_inv[(0, 1)] + &ib * t_inv[(1, 1)];
        let k = ca.len() - 2;
        let w0 = ca.rows(2, k).into_owned();
        let w1 = cb.rows(2, k).into_owned();
        NullLine::new(0.0, &w0, &w1)
    }

    /// Distance of a compact point from the spanning plane.
    pub fn distance_from(&self, p: &CompactPoint) -> f64 {
        let v = p.vector();
        // Euclidean least squares against the basis.
        let gram = nalgebra::Matrix2::new(
            self.a.dot(&self.a),
            self.a.dot(&self.b),
            self.b.dot(&self.a),
            self.b.dot(&self.b),
        );
        let rhs = Vector2::new(self.a.dot(v), self.b.dot(v));
        let sol = gram
            .try_inverse()
            .map(|gi| gi * rhs)
            .unwrap_or_else(|| Vector2::new(0.0, 0.0));
        linalg::inf_norm_vec(&(v - &self.a * sol[0] - &self.b * sol[1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{self, CoverElement};
    use crate::domain::DomainPoint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_point(n: usize, rng: &mut ChaCha8Rng) -> EinsteinPoint {
        EinsteinPoint::random_with_rng(n, rng, 2.0 * TAU)
    }

    #[test]
    fn compact_roundtrip_is_the_principal_branch() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..10 {
            let p = EinsteinPoint::random_with_rng(2, &mut rng, PI - 0.1);
            let back = p.compact().to_einstein().unwrap();
            assert!(p.distance_to(&back) < 1e-12);
        }
        let wound = EinsteinPoint::random_with_rng(2, &mut rng, 0.5);
        let shifted = deck_point(3, &wound);
        let back = shifted.compact().to_einstein().unwrap();
        assert!((back.tau() - wound.tau()).abs() < 1e-12);
    }

    #[test]
    fn compact_vectors_verify_the_null_constraint() {
        let p = EinsteinPoint::new(0.4, DVector::from_vec(vec![1.0, 0.0, 0.0])).unwrap();
        let c = p.compact();
        let v = c.vector();
        let q = -v[0] * v[0] - v[1] * v[1] + v.rows(2, 3).norm_squared();
        assert!(q.abs() < 1e-15);
        let bad = DVector::from_vec(vec![1.0, 0.0, 1.0, 0.1, 0.0]);
        assert!(CompactPoint::new(bad).is_err());
    }

    #[test]
    fn identity_acts_trivially_on_the_cylinder() {
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        let p = random_point(2, &mut rng);
        let e = CoverElement::identity(2);
        let moved = act_cover(&e, &p).unwrap();
        assert!(p.distance_to(&moved) < 1e-12);
    }

    #[test]
    fn compact_action_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        for n in [2usize, 3] {
            for _ in 0..8 {
                let x = GroupElement::random_with_rng(n, &mut rng, 0.4).unwrap();
                let y = GroupElement::random_with_rng(n, &mut rng, 0.4).unwrap();
                let p = random_point(n, &mut rng).compact();
                let joint = p.act(&x.compose(&y).unwrap()).unwrap();
                let staged = p.act(&y).unwrap().act(&x).unwrap();
                assert!(
                    linalg::inf_norm_vec(&(joint.vector() - staged.vector())) < 1e-9,
                    "composite action mismatch"
                );
            }
        }
    }

    #[test]
    fn cover_action_projects_to_the_compact_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(74);
        for n in [2usize, 3] {
            for _ in 0..6 {
                let e = CoverElement::random_with_rng(n, &mut rng, 0.4).unwrap();
                let p = random_point(n, &mut rng);
                let lifted = act_cover(&e, &p).unwrap();
                let compact = act_compact(e.element(), &p).unwrap();
                let angle_gap = (lifted.tau() - compact.tau()).rem_euclid(TAU);
                let angle_gap = angle_gap.min(TAU - angle_gap);
                assert!(angle_gap < 1e-9, "angle gap {angle_gap:.3e}");
                let dy = linalg::inf_norm_vec(&(lifted.y() - compact.y()));
                assert!(dy < 1e-9, "sphere part mismatch {dy:.3e}");
            }
        }
    }

    #[test]
    fn cover_action_composes_with_the_star_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(75);
        for n in [2usize, 3] {
            for _ in 0..4 {
                let a = CoverElement::random_with_rng(n, &mut rng, 0.35).unwrap();
                let b = CoverElement::random_with_rng(n, &mut rng, 0.35).unwrap();
                let p = random_point(n, &mut rng);
                let joint = act_cover(&a.star(&b).unwrap(), &p).unwrap();
                let staged = act_cover(&a, &act_cover(&b, &p).unwrap()).unwrap();
                assert!(
                    (joint.tau() - staged.tau()).abs() < 1e-7,
                    "n = {n}: lifted angles {} vs {}",
                    joint.tau(),
                    staged.tau()
                );
                let dy = linalg::inf_norm_vec(&(joint.y() - staged.y()));
                assert!(dy < 1e-9);
            }
        }
    }

    #[test]
    fn deck_transformations_shift_the_angle_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(76);
        for n in [2usize, 3] {
            let p = random_point(n, &mut rng);
            for k in [-2i64, -1, 1, 2] {
                let by_action = act_cover(&cover::center(n, k), &p).unwrap();
                let by_bookkeeping = deck_point(k, &p);
                assert!(
                    by_action.distance_to(&by_bookkeeping) < 1e-9,
                    "n = {n}, k = {k}: {:.3e}",
                    by_action.distance_to(&by_bookkeeping)
                );
            }
        }
    }

    #[test]
    fn central_circle_translates_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let p = random_point(2, &mut rng);
        for s in [0.3, 2.0, -4.5, TAU + 0.1] {
            let e = cover::parametrize(
                &DomainPoint::origin(2),
                s,
                &DMatrix::<f64>::identity(3, 3),
            )
            .unwrap();
            let moved = act_cover(&e, &p).unwrap();
            assert!((moved.tau() - (p.tau() + s)).abs() < 1e-10);
            assert!(linalg::inf_norm_vec(&(moved.y() - p.y())) < 1e-12);
        }
    }

    #[test]
    fn angle_lift_is_path_independent() {
        // One-leg contraction versus contracting the base point first and
        // rotating second; homotopic paths must unwrap to the same angle.
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        for _ in 0..5 {
            let e = CoverElement::random_with_rng(2, &mut rng, 0.4).unwrap();
            let p = random_point(2, &mut rng);
            let d = section::decompose(e.element()).unwrap();
            let w = &d.big_psi * p.y();
            let theta = e.angle();
            let beta = d.beta.clone();
            let one_leg = act_cover(&e, &p).unwrap();

            let top_angle = |bt: &DomainPoint, s: f64| -> Result<Rotation2> {
                let frame = section::section(bt)?;
                let arg = DVector::from_vec(vec![s.cos(), s.sin()]);
                let top = frame.a_hat() * arg + frame.b_hat() * &w;
                let tn = top.norm();
                Rotation2::from_unit(&Vector2::new(top[0] / tn, top[1] / tn))
            };
            let first = lift::unwrap_along(
                |t: f64| top_angle(&beta.scaled(t), p.tau()),
                p.tau(),
            )
            .unwrap();
            let second = lift::unwrap_along(
                |t: f64| top_angle(&beta, t * theta + p.tau()),
                first.value,
            )
            .unwrap();
            assert!(
                (second.value - one_leg.tau()).abs() < 1e-9,
                "two-leg {} vs one-leg {}",
                second.value,
                one_leg.tau()
            );
        }
    }

    #[test]
    fn quotient_action_is_orbit_well_defined() {
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        let families = [
            (2usize, QuotientFamily::periodic(1).unwrap()),
            (3, QuotientFamily::periodic(2).unwrap()),
            (3, QuotientFamily::anti_periodic(0)),
        ];
        for (n, family) in families {
            for _ in 0..4 {
                let e = CoverElement::random_with_rng(n, &mut rng, 0.4).unwrap();
                let p = random_point(n, &mut rng);
                let q = QuotientElement::reduce(family, &e).unwrap();
                let a = act_quotient(&q, &reduce_point(family, &p).unwrap()).unwrap();
                // Acting through a deck-shifted representative and on a
                // deck-shifted point must land in the same reduced class.
                let steps = match family.kind {
                    QuotientKind::Periodic => 2 * family.h as i64,
                    QuotientKind::AntiPeriodic => 2 * family.h as i64 + 1,
                };
                let e2 = e.times_center(steps);
                let q2 = QuotientElement::reduce(family, &e2).unwrap();
                let p2 = deck_point(steps, &p);
                let b = act_quotient(&q2, &reduce_point(family, &p2).unwrap()).unwrap();
                assert!(
                    a.distance_to(&b) < 1e-9,
                    "{:?} h = {}: reduced images differ by {:.3e}",
                    family.kind,
                    family.h,
                    a.distance_to(&b)
                );
                assert!((0.0..family.period()).contains(&a.tau()));
            }
        }
    }

    #[test]
    fn tangent_frames_are_oriented_and_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(80);
        let mut samples: Vec<DVector<f64>> = (0..6)
            .map(|_| EinsteinPoint::random_with_rng(3, &mut rng, 1.0).y)
            .collect();
        let mut axis = DVector::<f64>::zeros(4);
        axis[0] = 1.0;
        samples.push(axis.clone());
        samples.push(-axis);
        for y in samples {
            let frame = tangent_frame(&y).unwrap();
            assert_eq!(frame.len(), 3);
            let mut full = DMatrix::<f64>::zeros(4, 4);
            full.set_column(0, &y);
            for (i, t) in frame.iter().enumerate() {
                assert!(t.dot(&y).abs() < 1e-12);
                full.set_column(i + 1, t);
                for (j, u) in frame.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((t.dot(u) - expect).abs() < 1e-12);
                }
            }
            assert!((full.determinant() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn metric_rejects_non_tangent_directions() {
        let p = EinsteinPoint::new(0.0, DVector::from_vec(vec![1.0, 0.0, 0.0])).unwrap();
        let tangent = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        let slanted = DVector::from_vec(vec![0.5, 1.0, 0.0]);
        assert!(metric_eval(&p, (1.0, &tangent), (1.0, &tangent)).is_ok());
        assert!(matches!(
            metric_eval(&p, (1.0, &slanted), (0.0, &tangent)),
            Err(Error::NotTangent { .. })
        ));
        let g = metric_eval(&p, (1.0, &tangent), (1.0, &tangent)).unwrap();
        assert!(g.abs() < 1e-15, "null velocity has zero length, got {g}");
    }

    #[test]
    fn null_lines_stay_null_lines() {
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        for n in [2usize, 3] {
            for _ in 0..5 {
                let line = NullLine::random_with_rng(n, &mut rng);
                let x = GroupElement::random_with_rng(n, &mut rng, 0.4).unwrap();
                let image = line.transform(&x).unwrap();
                for t in [-1.2, -0.3, 0.0, 0.7, 2.5] {
                    let moved = line.point_at(t).compact().act(&x).unwrap();
                    let dist = image.distance_from(&moved);
                    assert!(dist < 1e-9, "n = {n}, t = {t}: off the image plane by {dist:.3e}");
                }
            }
        }
    }

    #[test]
    fn null_line_points_ride_a_null_curve() {
        let mut rng = ChaCha8Rng::seed_from_u64(82);
        let line = NullLine::random_with_rng(2, &mut rng);
        let h = 1e-6;
        for t in [-0.4, 0.9] {
            let plus = line.point_at(t + h);
            let minus = line.point_at(t - h);
            let dtau = (plus.tau() - minus.tau()) / (2.0 * h);
            let dy = (plus.y() - minus.y()) / (2.0 * h);
            let p = line.point_at(t);
            let speed = metric_eval(&p, (dtau, &dy), (dtau, &dy)).unwrap();
            assert!(speed.abs() < 1e-8, "null speed defect {speed:.3e}");
        }
    }

    #[test]
    fn conformal_residual_is_small_and_isometries_have_unit_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        for n in [2usize, 3] {
            for _ in 0..3 {
                let x = GroupElement::random_with_rng(n, &mut rng, 0.4).unwrap();
                let p = random_point(n, &mut rng);
                let report = conformal_check(&x, &p, tol::FD_STEP_DEFAULT).unwrap();
                assert!(report.factor > 0.0);
                assert!(
                    report.residual < 1e-6,
                    "n = {n}: conformal residual {:.3e}",
                    report.residual
                );
                assert!(report.orientation > 0.0, "orientation flipped");
                assert!(report.time_component > 0.0, "future not preserved");
            }
        }
        let p = random_point(2, &mut rng);
        let iso = cover::parametrize(
            &DomainPoint::origin(2),
            0.9,
            &linalg::random_special_orthogonal(3, &mut rng, 1.0),
        )
        .unwrap();
        let report = conformal_check(iso.element(), &p, tol::FD_STEP_DEFAULT).unwrap();
        assert!((report.factor - 1.0).abs() < 1e-8);
        assert!(matches!(
            conformal_check(iso.element(), &p, 1.0),
            Err(Error::StepOutOfRange { .. })
        ));
    }
}
