//! The bounded domain of the Möbius action and its two companion models.
//!
//! A point is an `(n+1) x 2` real matrix `beta = (u v)` with
//! `I_2 - beta^T beta` positive definite; equivalently `|u| < 1`, `|v| < 1`
//! and `mu(u, v) = |u|^2 + |v|^2 + (u.v)^2 - |u|^2 |v|^2 < 1`. The domain is
//! star-shaped around `beta = 0`, which is what makes the straight-line
//! angle lifts in [`crate::lift`] well defined.
//!
//! The same domain appears as the Lie ball
//! `2 z^* z < 1 + |z^T z|^2 < 2` in complex coordinates (here kept as real
//! pairs) and as the Grassmannian of negative-definite 2-planes in the
//! ambient scalar product; both identifications are implemented below.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::linalg;
use crate::tol;

/// `mu(u, v) = |u|^2 + |v|^2 + (u.v)^2 - |u|^2 |v|^2`; the domain condition
/// on a column pair with both norms below one is `mu < 1`.
pub fn mu(u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::dim(format!(
            "mu needs equal-length columns, got {} and {}",
            u.len(),
            v.len()
        )));
    }
    let a = u.norm_squared();
    let b = v.norm_squared();
    let c = u.dot(v);
    Ok(a + b + c * c - a * b)
}

/// Smallest eigenvalue of `I_2 - beta^T beta`, by the closed 2x2 formula.
pub fn margin_of(beta: &DMatrix<f64>) -> f64 {
    let s = DMatrix::<f64>::identity(2, 2) - beta.transpose() * beta;
    let (lo, _hi) = linalg::symmetric_2x2_eigenvalues(s[(0, 0)], 0.5 * (s[(0, 1)] + s[(1, 0)]), s[(1, 1)]);
    lo
}

/// Membership test at an explicit margin threshold; returns the margin too.
pub fn contains(beta: &DMatrix<f64>, min_margin: f64) -> (bool, f64) {
    let margin = margin_of(beta);
    (margin >= min_margin, margin)
}

/// A certified interior point of the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainPoint {
    beta: DMatrix<f64>,
    margin: f64,
}

impl DomainPoint {
    /// Accepts `beta` if its margin clears the refusal floor
    /// [`tol::DOMAIN_REFUSE_MARGIN`]. Points between the floor and the warn
    /// level are accepted but flagged by [`DomainPoint::near_boundary`].
    pub fn new(beta: DMatrix<f64>) -> Result<Self> {
        if beta.ncols() != 2 || beta.nrows() < 3 {
            return Err(Error::dim(format!(
                "domain points are (n+1) x 2 with n >= 2, got {}x{}",
                beta.nrows(),
                beta.ncols()
            )));
        }
        let margin = margin_of(&beta);
        if margin < tol::DOMAIN_REFUSE_MARGIN {
            return Err(Error::NearBoundary { margin });
        }
        Ok(DomainPoint { beta, margin })
    }

    pub fn from_columns(u: &DVector<f64>, v: &DVector<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::dim("column lengths differ".to_string()));
        }
        let mut beta = DMatrix::<f64>::zeros(u.len(), 2);
        beta.set_column(0, u);
        beta.set_column(1, v);
        DomainPoint::new(beta)
    }

    /// The base point `beta = 0`.
    pub fn origin(n: usize) -> Self {
        DomainPoint {
            beta: DMatrix::zeros(n + 1, 2),
            margin: 1.0,
        }
    }

    /// Sphere dimension `n`; the matrix is `(n+1) x 2`.
    pub fn n(&self) -> usize {
        self.beta.nrows() - 1
    }

    pub fn beta(&self) -> &DMatrix<f64> {
        &self.beta
    }

    pub fn u(&self) -> DVector<f64> {
        self.beta.column(0).into_owned()
    }

    pub fn v(&self) -> DVector<f64> {
        self.beta.column(1).into_owned()
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn near_boundary(&self) -> bool {
        self.margin < tol::DOMAIN_WARN_MARGIN
    }

    /// Contraction `t * beta` toward the origin. The domain is star-shaped,
    /// so for `t in [0, 1]` the margin can only grow; this cannot fail.
    pub fn scaled(&self, t: f64) -> DomainPoint {
        debug_assert!((0.0..=1.0).contains(&t));
        let beta = &self.beta * t;
        let margin = margin_of(&beta);
        DomainPoint { beta, margin }
    }

    /// Deterministic sampler used by the verification suites: a uniform
    /// entry draw rescaled to a random spectral radius below `radius`,
    /// rejecting the occasional near-boundary result.
    pub fn random_with_rng<R: rand::Rng>(n: usize, rng: &mut R, radius: f64) -> Self {
        loop {
            let beta = DMatrix::<f64>::from_fn(n + 1, 2, |_, _| rng.gen_range(-1.0..1.0));
            let sv = beta.clone().svd(false, false).singular_values;
            let smax = sv.max();
            let target: f64 = rng.gen_range(0.05..radius);
            let beta = beta * (target / smax);
            if let Ok(p) = DomainPoint::new(beta) {
                if !p.near_boundary() {
                    return p;
                }
            }
        }
    }
}

/// Möbius action `beta -> (d beta + c)(b beta + a)^{-1}` of a certified
/// group element on a domain point.
pub fn moebius_action(x: &GroupElement, p: &DomainPoint) -> Result<DomainPoint> {
    if x.n() != p.n() {
        return Err(Error::dim(format!(
            "action of an n = {} element on an n = {} point",
            x.n(),
            p.n()
        )));
    }
    let a2 = x.block_a();
    let a = DMatrix::from_fn(2, 2, |i, j| a2[(i, j)]);
    let denom = x.block_b() * p.beta() + a;
    let cond = linalg::condition_number(&denom);
    if cond > tol::MOEBIUS_COND_MAX {
        return Err(Error::IllConditioned { cond });
    }
    let denom_inv = denom
        .try_inverse()
        .ok_or(Error::IllConditioned { cond: f64::INFINITY })?;
    let num = x.block_d() * p.beta() + x.block_c();
    DomainPoint::new(num * denom_inv)
}

/// A point of the Lie ball, stored as the real pair `z = x + i y` with the
/// strict inequalities `2 z^* z < 1 + |z^T z|^2 < 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieBallPoint {
    x: DVector<f64>,
    y: DVector<f64>,
}

impl LieBallPoint {
    pub fn new(x: DVector<f64>, y: DVector<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 3 {
            return Err(Error::dim(format!(
                "Lie ball points are complex (n+1)-vectors with n >= 2, got lengths {} and {}",
                x.len(),
                y.len()
            )));
        }
        let p = LieBallPoint { x, y };
        let (znorm2, (wr, wi)) = p.quadratics();
        let wabs2 = wr * wr + wi * wi;
        let inner_gap = 1.0 + wabs2 - 2.0 * znorm2;
        let outer_gap = 2.0 - (1.0 + wabs2);
        if inner_gap < tol::DOMAIN_REFUSE_MARGIN || outer_gap < tol::DOMAIN_REFUSE_MARGIN {
            return Err(Error::OutsideLieBall {
                detail: format!("gaps ({inner_gap:.3e}, {outer_gap:.3e})"),
            });
        }
        Ok(p)
    }

    pub fn real(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn imag(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.len() - 1
    }

    /// `(z^* z, z^T z)`: the Hermitian square (real) and the holomorphic
    /// square (complex, returned as a real pair).
    pub fn quadratics(&self) -> (f64, (f64, f64)) {
        let znorm2 = self.x.norm_squared() + self.y.norm_squared();
        let wr = self.x.norm_squared() - self.y.norm_squared();
        let wi = 2.0 * self.x.dot(&self.y);
        (znorm2, (wr, wi))
    }
}

/// The Lie ball realization of the domain. Writing `w = z^T z`, the two
/// columns of the image are
///
/// ```text
/// u = 2 Re((conj(w) - 1) z) / (|w|^2 - 1)
/// v = 2 Im((conj(w) + 1) z) / (|w|^2 - 1)
/// ```
///
/// which is the standard rational matrix map with the 2x2 complex inverse
/// carried out symbolically (so everything stays in real arithmetic).
pub fn hua_map(z: &LieBallPoint) -> Result<DomainPoint> {
    let (_, (wr, wi)) = z.quadratics();
    let denom = wr * wr + wi * wi - 1.0;
    if denom.abs() < tol::DOMAIN_REFUSE_MARGIN {
        return Err(Error::OutsideLieBall {
            detail: format!("rational denominator {denom:.3e}"),
        });
    }
    // Re((conj(w) - 1) z) with w = wr + i wi, z = x + i y.
    let u = (z.real() * (wr - 1.0) + z.imag() * wi) * (2.0 / denom);
    let v = (z.imag() * (wr + 1.0) - z.real() * wi) * (2.0 / denom);
    DomainPoint::from_columns(&u, &v)
}

/// Inverse of [`hua_map`]. The scalar `w = z^T z` solves a quadratic whose
/// Lie-ball root is
///
/// ```text
/// w = ((a - b) - 2 i c) / ((2 - a - b) + 2 sqrt(1 - mu))
/// ```
///
/// with `a = |u|^2`, `b = |v|^2`, `c = u.v`; the denominator is positive on
/// the whole domain, and `z = ((w + 1) u + i (w - 1) v) / 2`.
pub fn hua_inverse(p: &DomainPoint) -> Result<LieBallPoint> {
    let u = p.u();
    let v = p.v();
    let a = u.norm_squared();
    let b = v.norm_squared();
    let c = u.dot(&v);
    let m = mu(&u, &v)?;
    let root = (1.0 - m).max(0.0).sqrt();
    let denom = (2.0 - a - b) + 2.0 * root;
    let wr = (a - b) / denom;
    let wi = -2.0 * c / denom;
    let x = (&u * (wr + 1.0) - &v * wi) * 0.5;
    let y = (&u * wi + &v * (wr - 1.0)) * 0.5;
    LieBallPoint::new(x, y)
}

/// A negative-definite 2-plane in the ambient space, spanned by two stored
/// basis vectors (not necessarily orthogonal).
#[derive(Debug, Clone, PartialEq)]
pub struct NegativePlane {
    b1: DVector<f64>,
    b2: DVector<f64>,
}

impl NegativePlane {
    pub fn new(b1: DVector<f64>, b2: DVector<f64>) -> Result<Self> {
        if b1.len() != b2.len() || b1.len() < 5 {
            return Err(Error::dim(format!(
                "plane basis vectors live in dimension n + 3 >= 5, got {} and {}",
                b1.len(),
                b2.len()
            )));
        }
        // Linear independence first, so a collapsed basis is reported as
        // such rather than as a signature failure.
        let e11 = b1.norm_squared();
        let e22 = b2.norm_squared();
        let e12 = b1.dot(&b2);
        let det = e11 * e22 - e12 * e12;
        if det <= 1e-12 * e11 * e22 {
            return Err(Error::DegenerateBasis { det });
        }
        let g11 = linalg::g_dot(&b1, &b1, 2);
        let g12 = linalg::g_dot(&b1, &b2, 2);
        let g22 = linalg::g_dot(&b2, &b2, 2);
        let minor2 = g11 * g22 - g12 * g12;
        if !(g11 < 0.0 && minor2 > 0.0) {
            return Err(Error::NotNegative { m1: g11, m2: minor2 });
        }
        Ok(NegativePlane { b1, b2 })
    }

    pub fn basis(&self) -> (&DVector<f64>, &DVector<f64>) {
        (&self.b1, &self.b2)
    }

    pub fn n(&self) -> usize {
        self.b1.len() - 3
    }

    /// Euclidean orthogonal projector onto the span, for plane comparisons.
    pub fn projector(&self) -> DMatrix<f64> {
        let dim = self.b1.len();
        let mut m = DMatrix::<f64>::zeros(dim, 2);
        m.set_column(0, &self.b1);
        m.set_column(1, &self.b2);
        let qr = m.qr();
        let q = qr.q();
        &q * q.transpose()
    }
}

/// The graph embedding of a domain point: the plane spanned by
/// `(1, 0, u)` and `(0, 1, v)`.
pub fn grassmann_embed(p: &DomainPoint) -> NegativePlane {
    let rows = p.n() + 3;
    let mut b1 = DVector::<f64>::zeros(rows);
    let mut b2 = DVector::<f64>::zeros(rows);
    b1[0] = 1.0;
    b2[1] = 1.0;
    for i in 0..p.n() + 1 {
        b1[2 + i] = p.beta()[(i, 0)];
        b2[2 + i] = p.beta()[(i, 1)];
    }
    NegativePlane::new(b1, b2).expect("graph planes of domain points are negative definite")
}

/// Recover the domain point whose graph plane is `plane`: orthogonalize the
/// basis in the ambient product, split each vector into its 2 + (n+1) parts,
/// and solve `beta = (y1 y2)(x1 x2)^{-1}`.
pub fn grassmann_recover(plane: &NegativePlane) -> Result<DomainPoint> {
    let (b1, b2) = plane.basis();
    let g11 = linalg::g_dot(b1, b1, 2);
    let g12 = linalg::g_dot(b1, b2, 2);
    let v1 = b1.clone();
    let mut v2 = b2 - &v1 * (g12 / g11);
    // Normalize both to signed norm -1; this only rescales the solve below
    // but keeps it well conditioned.
    let v1 = &v1 / (-g11).sqrt();
    let n22 = linalg::g_dot(&v2, &v2, 2);
    if n22 >= 0.0 {
        return Err(Error::NotNegative { m1: g11, m2: n22 });
    }
    v2 /= (-n22).sqrt();

    let mut xpart = DMatrix::<f64>::zeros(2, 2);
    let mut ypart = DMatrix::<f64>::zeros(b1.len() - 2, 2);
    for (col, v) in [(0usize, &v1), (1usize, &v2)] {
        xpart[(0, col)] = v[0];
        xpart[(1, col)] = v[1];
        for i in 0..b1.len() - 2 {
            ypart[(i, col)] = v[2 + i];
        }
    }
    let det = xpart.determinant();
    let x_inv = xpart.try_inverse().ok_or(Error::DegenerateBasis { det })?;
    DomainPoint::new(ypart * x_inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::inf_norm;
    use crate::group::GroupElement;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(n: usize, k: usize) -> DVector<f64> {
        DVector::from_fn(n, |i, _| if i == k { 1.0 } else { 0.0 })
    }

    fn random_domain_point<R: Rng>(n: usize, rng: &mut R, radius: f64) -> DomainPoint {
        DomainPoint::random_with_rng(n, rng, radius)
    }

    #[test]
    fn mu_matches_the_frozen_value() {
        let u = unit(3, 0) * 0.5;
        let v = unit(3, 1) * 0.5;
        assert!((mu(&u, &v).unwrap() - 0.4375).abs() < 1e-15);
    }

    #[test]
    fn margin_agrees_with_an_eigen_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let beta = DMatrix::<f64>::from_fn(4, 2, |_, _| rng.gen_range(-0.9..0.9));
            let closed = margin_of(&beta);
            let s = DMatrix::<f64>::identity(2, 2) - beta.transpose() * &beta;
            let eig = s.symmetric_eigen().eigenvalues;
            let oracle = eig.min();
            assert!((closed - oracle).abs() < 1e-12, "{closed} vs {oracle}");
        }
    }

    #[test]
    fn membership_is_equivalent_to_mu_below_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let mut seen_outside = 0;
        for _ in 0..500 {
            let u = DVector::<f64>::from_fn(4, |_, _| rng.gen_range(-0.6..0.6));
            let v = DVector::<f64>::from_fn(4, |_, _| rng.gen_range(-0.6..0.6));
            if u.norm() >= 1.0 || v.norm() >= 1.0 {
                continue;
            }
            let mut beta = DMatrix::<f64>::zeros(4, 2);
            beta.set_column(0, &u);
            beta.set_column(1, &v);
            let (inside, margin) = contains(&beta, 0.0);
            let m = mu(&u, &v).unwrap();
            assert_eq!(inside, m < 1.0, "margin {margin}, mu {m}");
            if !inside {
                seen_outside += 1;
            }
        }
        assert!(seen_outside > 0, "sample never left the domain");
    }

    #[test]
    fn origin_and_near_boundary_flags() {
        let origin = DomainPoint::origin(2);
        assert_eq!(origin.margin(), 1.0);
        assert!(!origin.near_boundary());

        let close = DomainPoint::new(DMatrix::from_fn(3, 2, |i, j| {
            if i == 0 && j == 0 {
                (1.0f64 - 1e-7).sqrt()
            } else {
                0.0
            }
        }))
        .unwrap();
        assert!(close.near_boundary());

        let too_close = DMatrix::from_fn(3, 2, |i, j| if i == 0 && j == 0 { 1.0 - 1e-14 } else { 0.0 });
        assert!(matches!(DomainPoint::new(too_close), Err(Error::NearBoundary { .. })));
    }

    #[test]
    fn moebius_action_is_a_left_action_preserving_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for trial in 0..50 {
            let x = GroupElement::random_with_rng(2, &mut rng, 0.4).unwrap();
            let y = GroupElement::random_with_rng(2, &mut rng, 0.4).unwrap();
            let p = random_domain_point(2, &mut rng, 0.8);
            let xy = GroupElement::certify_default(x.matrix() * y.matrix()).unwrap();
            let lhs = moebius_action(&xy, &p).unwrap();
            let rhs = moebius_action(&x, &moebius_action(&y, &p).unwrap()).unwrap();
            let diff = inf_norm(&(lhs.beta() - rhs.beta()));
            assert!(diff < 1e-9, "trial {trial}: action law residual {diff:.3e}");
            assert!(lhs.margin() > 0.0);
        }
    }

    #[test]
    fn identity_and_isotropy_rotations_act_as_expected() {
        let p = DomainPoint::from_columns(
            &(unit(3, 0) * 0.5),
            &(unit(3, 1) * 0.3),
        )
        .unwrap();
        let id = GroupElement::identity(2);
        let moved = moebius_action(&id, &p).unwrap();
        assert!(inf_norm(&(moved.beta() - p.beta())) < 1e-15);

        // Block rotation S(rho(t), I): beta -> beta rho(t)^{-1}.
        let t = 0.73f64;
        let mut s = DMatrix::<f64>::identity(5, 5);
        s[(0, 0)] = t.cos();
        s[(0, 1)] = -t.sin();
        s[(1, 0)] = t.sin();
        s[(1, 1)] = t.cos();
        let s = GroupElement::certify_default(s).unwrap();
        let rotated = moebius_action(&s, &p).unwrap();
        let mut rho_inv = DMatrix::<f64>::zeros(2, 2);
        rho_inv[(0, 0)] = t.cos();
        rho_inv[(0, 1)] = t.sin();
        rho_inv[(1, 0)] = -t.sin();
        rho_inv[(1, 1)] = t.cos();
        let expect = p.beta() * rho_inv;
        assert!(inf_norm(&(rotated.beta() - expect)) < 1e-14);
    }

    #[test]
    fn hua_real_slice_matches_the_hand_formula() {
        // For real z the map collapses to u = 2 z / (1 + |z|^2), v = 0.
        let z = LieBallPoint::new(unit(3, 0) * 0.5, DVector::zeros(3)).unwrap();
        let p = hua_map(&z).unwrap();
        assert!((p.u()[0] - 0.8).abs() < 1e-15);
        assert!(p.u().norm() - 0.8 < 1e-15);
        assert!(p.v().norm() < 1e-15);
    }

    #[test]
    fn hua_roundtrips_both_ways() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..200 {
            let p = random_domain_point(3, &mut rng, 0.85);
            let z = hua_inverse(&p).unwrap();
            let back = hua_map(&z).unwrap();
            let resid = inf_norm(&(back.beta() - p.beta()));
            assert!(resid < 1e-10, "domain roundtrip residual {resid:.3e}");
        }
        for _ in 0..200 {
            // Rejection-sample the ball directly for the other direction.
            let x = DVector::<f64>::from_fn(4, |_, _| rng.gen_range(-0.3..0.3));
            let y = DVector::<f64>::from_fn(4, |_, _| rng.gen_range(-0.3..0.3));
            let Ok(z) = LieBallPoint::new(x, y) else { continue };
            let p = hua_map(&z).unwrap();
            let back = hua_inverse(&p).unwrap();
            let rx = inf_norm_vec_diff(back.real(), z.real());
            let ry = inf_norm_vec_diff(back.imag(), z.imag());
            assert!(rx < 1e-10 && ry < 1e-10, "ball roundtrip residuals {rx:.3e}, {ry:.3e}");
        }
    }

    fn inf_norm_vec_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        (a - b).amax()
    }

    #[test]
    fn grassmann_embed_recover_is_the_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..100 {
            let p = random_domain_point(2, &mut rng, 0.9);
            let plane = grassmann_embed(&p);
            let q = grassmann_recover(&plane).unwrap();
            assert!(inf_norm(&(q.beta() - p.beta())) < 1e-12);
        }
    }

    #[test]
    fn grassmann_recover_is_basis_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let p = random_domain_point(2, &mut rng, 0.8);
        let plane = grassmann_embed(&p);
        let (b1, b2) = plane.basis();
        // Re-span by a well-conditioned random mix.
        let m11: f64 = rng.gen_range(0.5..1.5);
        let m22: f64 = rng.gen_range(0.5..1.5);
        let m12: f64 = rng.gen_range(-0.4..0.4);
        let c1 = b1 * m11 + b2 * m12;
        let c2 = b1 * m12 + b2 * m22;
        let mixed = NegativePlane::new(c1, c2).unwrap();
        let q = grassmann_recover(&mixed).unwrap();
        assert!(inf_norm(&(q.beta() - p.beta())) < 1e-11);
        assert!(inf_norm(&(mixed.projector() - plane.projector())) < 1e-11);
    }

    #[test]
    fn translated_planes_recover_the_moebius_image() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        for _ in 0..50 {
            let x = GroupElement::random_with_rng(2, &mut rng, 0.4).unwrap();
            let p = random_domain_point(2, &mut rng, 0.8);
            let plane = grassmann_embed(&p);
            let (b1, b2) = plane.basis();
            let translated = NegativePlane::new(x.matrix() * b1, x.matrix() * b2).unwrap();
            let q = grassmann_recover(&translated).unwrap();
            let expect = moebius_action(&x, &p).unwrap();
            let resid = inf_norm(&(q.beta() - expect.beta()));
            assert!(resid < 1e-9, "translated-plane residual {resid:.3e}");
        }
    }

    #[test]
    fn grassmann_rejects_degenerate_and_spacelike_bases() {
        let b = DVector::from_vec(vec![1.0, 0.0, 0.1, 0.0, 0.0]);
        let almost = &b * (1.0 + 1e-15);
        assert!(matches!(
            NegativePlane::new(b.clone(), almost),
            Err(Error::DegenerateBasis { .. })
        ));
        let e2 = unit(5, 2);
        let e3 = unit(5, 3);
        assert!(matches!(NegativePlane::new(e2, e3), Err(Error::NotNegative { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn star_shaped_contraction_never_shrinks_the_margin(
            seed in 0u64..1000,
            t in 0.0f64..1.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_domain_point(2, &mut rng, 0.95);
            let q = p.scaled(t);
            prop_assert!(q.margin() >= p.margin() - 1e-15);
        }

        #[test]
        fn hua_inverse_lands_inside_the_ball(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_domain_point(3, &mut rng, 0.9);
            let z = hua_inverse(&p).unwrap();
            let (znorm2, (wr, wi)) = z.quadratics();
            let wabs2 = wr * wr + wi * wi;
            prop_assert!(2.0 * znorm2 < 1.0 + wabs2);
            prop_assert!(1.0 + wabs2 < 2.0);
        }
    }
}
