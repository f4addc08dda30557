//! The Gram–Schmidt section of the group over its bounded domain.
//!
//! For a domain point `beta` the columns `(1, 0, u)`, `(0, 1, v)`,
//! `(u_j, v_j, e_j)` assemble into the block matrix
//!
//! ```text
//! B(beta) = [ I_2     beta^T ]
//!           [ beta    I_n+1  ]
//! ```
//!
//! whose signature Gram–Schmidt orthonormalization is the unique group
//! element of the form `P(beta) = B(beta) T(beta)` with `T` upper triangular
//! and positive on the diagonal. `P` is a smooth section of the base-point
//! fibration `X -> c(X) a(X)^{-1}`: every group element factors uniquely as
//! `X = P(beta) S(psi, Psi)` with `S` block diagonal in SO(2) x SO(n+1).
//! The first column blocks of `P` also have closed forms, kept here as an
//! independent cross-check of the orthonormalization.

use nalgebra::DMatrix;

use crate::domain::DomainPoint;
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::lift::Rotation2;
use crate::linalg::{self, inf_norm};
use crate::tol;

/// The section frame at a domain point: the group element `P`, the
/// triangular change of basis `T`, and the point itself.
#[derive(Debug, Clone)]
pub struct SectionFrame {
    beta: DomainPoint,
    p: GroupElement,
    t: DMatrix<f64>,
}

impl SectionFrame {
    pub fn beta(&self) -> &DomainPoint {
        &self.beta
    }

    pub fn element(&self) -> &GroupElement {
        &self.p
    }

    /// Upper-triangular positive-diagonal factor with `P = B(beta) T`.
    pub fn triangular(&self) -> &DMatrix<f64> {
        &self.t
    }

    pub fn a_hat(&self) -> DMatrix<f64> {
        let a = self.p.block_a();
        DMatrix::from_fn(2, 2, |i, j| a[(i, j)])
    }

    pub fn b_hat(&self) -> DMatrix<f64> {
        self.p.block_b()
    }

    pub fn c_hat(&self) -> DMatrix<f64> {
        self.p.block_c()
    }

    pub fn d_hat(&self) -> DMatrix<f64> {
        self.p.block_d()
    }
}

/// Build the section frame at `beta`. Points with margin below
/// [`tol::SECTION_MARGIN`] are refused: the Gram–Schmidt pivots degenerate
/// together with the margin.
pub fn section(beta: &DomainPoint) -> Result<SectionFrame> {
    if beta.margin() < tol::SECTION_MARGIN {
        return Err(Error::NearBoundary {
            margin: beta.margin(),
        });
    }
    let n = beta.n();
    let size = n + 3;
    let mut b = DMatrix::<f64>::identity(size, size);
    for i in 0..n + 1 {
        for j in 0..2 {
            b[(2 + i, j)] = beta.beta()[(i, j)];
            b[(j, 2 + i)] = beta.beta()[(i, j)];
        }
    }
    let qr = linalg::signature_gram_schmidt(&b, 2)?;
    let t = qr
        .r
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NearDegenerate {
            index: 0,
            norm2: qr.r[(0, 0)],
        })?;
    let p = GroupElement::certify_default(qr.q)?;
    Ok(SectionFrame {
        beta: beta.clone(),
        p,
        t,
    })
}

/// Closed form of the first 2x2 block of `P(beta)`:
///
/// ```text
/// a(beta) = 1/sqrt(1 - |u|^2) * [ 1   (u.v)/sqrt(1 - mu) ]
///                               [ 0   (1 - |u|^2)/sqrt(1 - mu) ]
/// ```
pub fn a_hat_closed(beta: &DomainPoint) -> DMatrix<f64> {
    let u = beta.u();
    let v = beta.v();
    let a = u.norm_squared();
    let c = u.dot(&v);
    let m = crate::domain::mu(&u, &v).expect("columns of one point have equal length");
    let ra = (1.0 - a).sqrt();
    let rm = (1.0 - m).sqrt();
    DMatrix::from_row_slice(2, 2, &[1.0 / ra, c / (ra * rm), 0.0, ra / rm])
}

/// Closed form of the lower-left `(n+1) x 2` block of `P(beta)`: columns
/// `u / sqrt(1 - |u|^2)` and `((1 - |u|^2) v + (u.v) u) / (sqrt(1 - |u|^2) sqrt(1 - mu))`.
pub fn c_hat_closed(beta: &DomainPoint) -> DMatrix<f64> {
    let u = beta.u();
    let v = beta.v();
    let a = u.norm_squared();
    let c = u.dot(&v);
    let m = crate::domain::mu(&u, &v).expect("columns of one point have equal length");
    let ra = (1.0 - a).sqrt();
    let rm = (1.0 - m).sqrt();
    let col1 = &u / ra;
    let col2 = (&v * (1.0 - a) + &u * c) / (ra * rm);
    let mut out = DMatrix::<f64>::zeros(beta.n() + 1, 2);
    out.set_column(0, &col1);
    out.set_column(1, &col2);
    out
}

/// Möbius base point `c(X) a(X)^{-1}` of a certified element.
pub fn base_point(x: &GroupElement) -> Result<DomainPoint> {
    let a = x.block_a();
    let a_inv = a.try_inverse().ok_or_else(|| Error::IllConditioned {
        cond: f64::INFINITY,
    })?;
    let a_inv = DMatrix::from_fn(2, 2, |i, j| a_inv[(i, j)]);
    DomainPoint::new(x.block_c() * a_inv)
}

/// Block-diagonal stabilizer `S(r, R)` of the origin.
pub fn stabilizer(rot: &Rotation2, big: &DMatrix<f64>) -> Result<GroupElement> {
    let k = big.nrows();
    if big.ncols() != k || k < 3 {
        return Err(Error::dim(format!(
            "stabilizer rotation block must be square of size n + 1 >= 3, got {}x{}",
            big.nrows(),
            big.ncols()
        )));
    }
    let mut s = DMatrix::<f64>::zeros(k + 2, k + 2);
    let r = rot.matrix2();
    for i in 0..2 {
        for j in 0..2 {
            s[(i, j)] = r[(i, j)];
        }
    }
    for i in 0..k {
        for j in 0..k {
            s[(2 + i, 2 + j)] = big[(i, j)];
        }
    }
    GroupElement::certify_default(s)
}

/// The unique factorization `X = P(beta) S(psi, Psi)` of a certified
/// element over its base point, with the measured numerical slack.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub beta: DomainPoint,
    pub frame: SectionFrame,
    pub psi: Rotation2,
    pub big_psi: DMatrix<f64>,
    /// Largest off-diagonal-block entry of `P(beta)^{-1} X`.
    pub off_diagonal: f64,
    /// Distance of the diagonal blocks from their rotation projections.
    pub polar_distance: f64,
    /// `max |X - P(beta) S(psi, Psi)|`.
    pub reassembly: f64,
}

/// Factor `X` through the section over its base point.
pub fn decompose(x: &GroupElement) -> Result<Decomposition> {
    let beta = base_point(x)?;
    let frame = section(&beta)?;
    let s = frame.element().inverse().matrix() * x.matrix();
    let n1 = x.n() + 1;

    let mut off = 0.0f64;
    for i in 0..2 {
        for j in 0..n1 {
            off = off.max(s[(i, 2 + j)].abs()).max(s[(2 + j, i)].abs());
        }
    }
    if off > tol::BLOCK_LEAK {
        return Err(Error::BlockLeakage { norm: off });
    }

    let psi_block = s.view((0, 0), (2, 2)).into_owned();
    let psi = Rotation2::from_dmatrix(&psi_block)?;
    let lower = s.view((2, 2), (n1, n1)).into_owned();
    let big_psi = linalg::polar_rotation(&lower)?;
    let polar_distance = inf_norm(&(&lower - &big_psi))
        .max(inf_norm(&(psi_block - psi.dmatrix())));

    let stab = stabilizer(&psi, &big_psi)?;
    let reassembly = inf_norm(&(x.matrix() - frame.element().matrix() * stab.matrix()));
    Ok(Decomposition {
        beta,
        frame,
        psi,
        big_psi,
        off_diagonal: off,
        polar_distance,
        reassembly,
    })
}
