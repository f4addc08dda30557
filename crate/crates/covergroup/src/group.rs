//! The pseudo-orthogonal group of signature (2, n+1) and friends.
//!
//! Points of the ambient space carry the scalar product
//! `<x, y> = -x0 y0 + (-1)^(p-1) x1 y1 + sum_{j>=2} xj yj` with `p in {1, 2}`.
//! For `p = 2` this is the conformal signature (2, n+1) used everywhere in
//! this crate; `p = 1` appears through the parabolic subgroup, whose rotation
//! block lives one signature down.
//!
//! A [`GroupElement`] is a certified member of the component preserving both
//! time and space orientation: `X^T G X = G` together with positive
//! determinants of the leading 2x2 and trailing (n+1)x(n+1) diagonal blocks.

use nalgebra::{DMatrix, DVector, Matrix2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, inf_norm};
use crate::tol;

/// Scalar-product signature `(p, q)` with `p in {1, 2}` negative directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    p: usize,
    q: usize,
}

impl Signature {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if !(p == 1 || p == 2) {
            return Err(Error::config(format!("signature needs p in {{1, 2}}, got {p}")));
        }
        if q <= p {
            return Err(Error::config(format!("signature needs q > p, got ({p}, {q})")));
        }
        Ok(Signature { p, q })
    }

    /// The conformal signature (2, n+1) for sphere dimension `n`.
    pub fn conformal(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::config(format!("sphere dimension must be >= 2, got {n}")));
        }
        Signature::new(2, n + 1)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Ambient dimension `m = p + q`.
    pub fn m(&self) -> usize {
        self.p + self.q
    }

    /// Sign carried by the second coordinate: `(-1)^(p-1)`.
    pub fn second_sign(&self) -> f64 {
        if self.p == 1 {
            1.0
        } else {
            -1.0
        }
    }

    /// Gram matrix of the scalar product in canonical coordinates.
    pub fn gram(&self) -> DMatrix<f64> {
        linalg::gram(self.p, self.m())
    }

    /// Gram matrix of the same product in Möbius coordinates: the pairing
    /// `-u0 v_last - u_last v0 + (-1)^(p-1) u1 v1 + sum_{2<=j<=m-2} uj vj`.
    pub fn moebius_gram(&self) -> DMatrix<f64> {
        let m = self.m();
        let mut g = DMatrix::<f64>::zeros(m, m);
        g[(0, m - 1)] = -1.0;
        g[(m - 1, 0)] = -1.0;
        g[(1, 1)] = self.second_sign();
        for j in 2..m - 1 {
            g[(j, j)] = 1.0;
        }
        g
    }

    /// Change of basis `D` from canonical to Möbius coordinates. Its first
    /// and last rows mix the two cone directions; the middle block is the
    /// identity.
    pub fn d_matrix(&self) -> DMatrix<f64> {
        let m = self.m();
        let eps = self.second_sign();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut d = DMatrix::<f64>::zeros(m, m);
        d[(0, 0)] = s;
        d[(0, m - 1)] = eps * s;
        d[(m - 1, 0)] = s;
        d[(m - 1, m - 1)] = -eps * s;
        for j in 1..m - 1 {
            d[(j, j)] = 1.0;
        }
        d
    }
}

/// Scalar product of two vectors in canonical coordinates for `sig`.
pub fn inner_product(x: &DVector<f64>, y: &DVector<f64>, sig: Signature) -> Result<f64> {
    let m = sig.m();
    if x.len() != m || y.len() != m {
        return Err(Error::dim(format!(
            "inner product for signature ({}, {}) needs length {m}, got {} and {}",
            sig.p(),
            sig.q(),
            x.len(),
            y.len()
        )));
    }
    let mut acc = -x[0] * y[0] + sig.second_sign() * x[1] * y[1];
    for j in 2..m {
        acc += x[j] * y[j];
    }
    Ok(acc)
}

/// Certification guts shared by every signature: orthogonality residual plus
/// positivity of the two diagonal block determinants. `neg` is the number of
/// timelike directions; block sizes are `neg` and `m - neg`.
pub(crate) fn certify_signature(m: &DMatrix<f64>, neg: usize, tol: f64) -> Result<f64> {
    let size = m.ncols();
    if m.nrows() != size || size <= neg {
        return Err(Error::dim(format!(
            "certification needs a square matrix larger than its {neg} timelike rows, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let g = linalg::gram(neg, size);
    let residual = inf_norm(&(m.transpose() * &g * m - &g));
    if residual > tol {
        return Err(Error::NotOrthogonal { residual, tol });
    }
    let det_a = if neg == 0 {
        1.0
    } else {
        m.view((0, 0), (neg, neg)).into_owned().determinant()
    };
    if det_a <= 0.0 {
        return Err(Error::WrongComponent {
            condition: "leading (timelike) block has non-positive determinant",
        });
    }
    let det_d = m
        .view((neg, neg), (size - neg, size - neg))
        .into_owned()
        .determinant();
    if det_d <= 0.0 {
        return Err(Error::WrongComponent {
            condition: "trailing (spacelike) block has non-positive determinant",
        });
    }
    Ok(residual)
}

/// A certified element of the orientation-preserving component of O(2, n+1).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    n: usize,
    matrix: DMatrix<f64>,
    residual: f64,
}

impl GroupElement {
    /// Certify `matrix` as a group element for the conformal signature. The
    /// sphere dimension is read off the matrix size `n + 3`.
    pub fn certify(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        let size = matrix.ncols();
        if matrix.nrows() != size || size < 5 {
            return Err(Error::dim(format!(
                "group elements are square of size n + 3 >= 5, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let residual = certify_signature(&matrix, 2, tol)?;
        Ok(GroupElement {
            n: size - 3,
            matrix,
            residual,
        })
    }

    /// Certify at the default tolerance.
    pub fn certify_default(matrix: DMatrix<f64>) -> Result<Self> {
        GroupElement::certify(matrix, tol::CERTIFY)
    }

    pub fn identity(n: usize) -> Self {
        GroupElement {
            n,
            matrix: DMatrix::identity(n + 3, n + 3),
            residual: 0.0,
        }
    }

    /// Sphere dimension `n`; the matrix is `(n + 3) x (n + 3)`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.n + 3
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Orthogonality residual measured at certification time.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Leading 2x2 block.
    pub fn block_a(&self) -> Matrix2<f64> {
        self.matrix.fixed_view::<2, 2>(0, 0).into_owned()
    }

    /// Upper-right 2 x (n+1) block.
    pub fn block_b(&self) -> DMatrix<f64> {
        self.matrix.view((0, 2), (2, self.n + 1)).into_owned()
    }

    /// Lower-left (n+1) x 2 block.
    pub fn block_c(&self) -> DMatrix<f64> {
        self.matrix.view((2, 0), (self.n + 1, 2)).into_owned()
    }

    /// Trailing (n+1) x (n+1) block.
    pub fn block_d(&self) -> DMatrix<f64> {
        self.matrix.view((2, 2), (self.n + 1, self.n + 1)).into_owned()
    }

    /// Group inverse `G X^T G`, exact up to round-off for certified input.
    pub fn inverse(&self) -> Self {
        let size = self.size();
        let x = &self.matrix;
        let sign = |i: usize| if i < 2 { -1.0 } else { 1.0 };
        let inv = DMatrix::from_fn(size, size, |i, j| sign(i) * sign(j) * x[(j, i)]);
        // 'X X^{-1} - I' equals '(X G X^T - G) G', which the certification
        // residual controls up to a conjugation by X; the entrywise-norm
        // constant of that conversion is loose, so the tripwire carries an
        // explicit safety factor. A construction bug still overshoots it by
        // orders of magnitude.
        let norm = inf_norm(x);
        let slack =
            (self.residual + 1e-14) * (1.0 + norm) * (1.0 + norm) * (size * size) as f64 * 100.0;
        debug_assert!(
            inf_norm(&(x * &inv - DMatrix::<f64>::identity(size, size))) < slack,
            "inverse failed its identity check: defect {:.3e}, slack {:.3e}, norm {:.3e}, residual {:.3e}",
            inf_norm(&(x * &inv - DMatrix::<f64>::identity(size, size))),
            slack,
            inf_norm(x),
            self.residual
        );
        let g = linalg::gram(2, size);
        let residual = inf_norm(&(inv.transpose() * &g * &inv - &g));
        GroupElement {
            n: self.n,
            matrix: inv,
            residual,
        }
    }

    /// Sign flip `X -> -X`. Stays in the identity component only when the
    /// trailing block has even size, so only for odd `n`.
    pub(crate) fn negated(&self) -> Self {
        debug_assert!(self.n % 2 == 1, "-X leaves the component for even n");
        GroupElement {
            n: self.n,
            matrix: -self.matrix.clone(),
            residual: self.residual,
        }
    }

    /// Product re-orthonormalized back onto the group.
    pub fn compose(&self, other: &GroupElement) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::dim(format!(
                "cannot compose elements for n = {} and n = {}",
                self.n, other.n
            )));
        }
        GroupElement::reorthonormalize(&(&self.matrix * &other.matrix))
    }

    /// Signature Gram–Schmidt projection of a near-group matrix back onto
    /// the group, then certification.
    pub fn reorthonormalize(m: &DMatrix<f64>) -> Result<Self> {
        let qr = linalg::signature_gram_schmidt(m, 2)?;
        GroupElement::certify(qr.q, tol::CERTIFY)
    }

    /// Deterministic random element: the product of three exponentials of
    /// Gaussian Lie-algebra draws at the given scale, re-orthonormalized.
    /// `scale = 0` returns the identity.
    pub fn random(n: usize, seed: u64, scale: f64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GroupElement::random_with_rng(n, &mut rng, scale)
    }

    pub fn random_with_rng<R: rand::Rng>(n: usize, rng: &mut R, scale: f64) -> Result<Self> {
        let size = n + 3;
        let mut m = DMatrix::<f64>::identity(size, size);
        for _ in 0..3 {
            let a = LieAlgebraElement::random_with_rng(n, rng, scale);
            m = m * a.exp();
        }
        GroupElement::reorthonormalize(&m)
    }
}

/// An element of the Lie algebra: `A^T G + G A = 0` for the conformal Gram
/// matrix, realized as `A = G K` with `K` antisymmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraElement {
    n: usize,
    matrix: DMatrix<f64>,
}

impl LieAlgebraElement {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let size = matrix.ncols();
        if matrix.nrows() != size || size < 5 {
            return Err(Error::dim(format!(
                "Lie algebra elements are square of size n + 3 >= 5, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let g = linalg::gram(2, size);
        let defect = inf_norm(&(matrix.transpose() * &g + &g * &matrix));
        if defect > 1e-12 {
            return Err(Error::NotOrthogonal {
                residual: defect,
                tol: 1e-12,
            });
        }
        Ok(LieAlgebraElement {
            n: size - 3,
            matrix,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Gaussian draw: `A = G K` with `K` strictly antisymmetric and entries
    /// i.i.d. normal with standard deviation `scale`.
    pub fn random_with_rng<R: rand::Rng>(n: usize, rng: &mut R, scale: f64) -> Self {
        let size = n + 3;
        let mut k = DMatrix::<f64>::zeros(size, size);
        for i in 0..size {
            for j in (i + 1)..size {
                let x: f64 = StandardNormal.sample(rng);
                k[(i, j)] = scale * x;
                k[(j, i)] = -scale * x;
            }
        }
        let g = linalg::gram(2, size);
        LieAlgebraElement {
            n,
            matrix: g * k,
        }
    }

    /// Matrix exponential (scaling-and-squaring Padé).
    pub fn exp(&self) -> DMatrix<f64> {
        self.matrix.exp()
    }
}

/// Conjugation into Möbius coordinates: `D X D^{-1}`. The input must certify
/// for `sig`; the output lies in the Möbius-coordinate copy of the group.
pub fn moebius_conjugate(x: &DMatrix<f64>, sig: Signature, tol: f64) -> Result<DMatrix<f64>> {
    certify_signature(x, sig.p(), tol)?;
    let d = sig.d_matrix();
    let d_inv = d
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::dim("Möbius change of basis is singular"))?;
    Ok(&d * x * &d_inv)
}

/// Inverse conjugation, back to canonical coordinates.
pub fn moebius_conjugate_inv(m: &DMatrix<f64>, sig: Signature) -> Result<DMatrix<f64>> {
    if m.nrows() != sig.m() || m.ncols() != sig.m() {
        return Err(Error::dim(format!(
            "expected a {0}x{0} matrix in Möbius coordinates",
            sig.m()
        )));
    }
    let d = sig.d_matrix();
    let d_inv = d
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::dim("Möbius change of basis is singular"))?;
    Ok(&d_inv * m * &d)
}

/// A member of the parabolic subgroup fixing the ray through the first
/// Möbius basis vector, stored in Möbius coordinates:
///
/// ```text
/// [ r    *y B    <y, y>' / (2 r) ]
/// [ 0     B       y / r          ]
/// [ 0     0       1 / r          ]
/// ```
///
/// with `*y` the row vector of `y` twisted by the signature one step down,
/// `<., .>'` that signature's scalar product, and `B` in the corresponding
/// orientation-preserving group (plain SO for `p = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct ParabolicElement {
    sig: Signature,
    r: f64,
    b: DMatrix<f64>,
    y: DVector<f64>,
    matrix: DMatrix<f64>,
}

impl ParabolicElement {
    pub fn assemble(sig: Signature, r: f64, b: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if r <= 0.0 {
            return Err(Error::config(format!("parabolic scale must be positive, got {r}")));
        }
        let inner = sig.m() - 2;
        if b.nrows() != inner || b.ncols() != inner || y.len() != inner {
            return Err(Error::dim(format!(
                "parabolic data for signature ({}, {}) needs a {inner}x{inner} block and a length-{inner} vector",
                sig.p(),
                sig.q()
            )));
        }
        // The rotation block lives one signature down: (p-1, q-1).
        certify_signature(&b, sig.p() - 1, tol::CERTIFY)?;

        let neg_inner = sig.p() - 1;
        let star_y = DVector::from_fn(inner, |i, _| if i < neg_inner { -y[i] } else { y[i] });
        let yy = star_y.dot(&y);

        let m = sig.m();
        let mut x = DMatrix::<f64>::zeros(m, m);
        x[(0, 0)] = r;
        let top = star_y.transpose() * &b;
        for j in 0..inner {
            x[(0, 1 + j)] = top[(0, j)];
        }
        x[(0, m - 1)] = yy / (2.0 * r);
        for i in 0..inner {
            for j in 0..inner {
                x[(1 + i, 1 + j)] = b[(i, j)];
            }
            x[(1 + i, m - 1)] = y[i] / r;
        }
        x[(m - 1, m - 1)] = 1.0 / r;
        Ok(ParabolicElement {
            sig,
            r,
            b,
            y,
            matrix: x,
        })
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn rotation_block(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn translation(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Does `m` belong to the parabolic subgroup: first basis vector scaled by a
/// positive factor, and membership in the Möbius-coordinate group?
pub fn parabolic_test(m: &DMatrix<f64>, sig: Signature, tol: f64) -> bool {
    let size = sig.m();
    if m.nrows() != size || m.ncols() != size {
        return false;
    }
    if m[(0, 0)] <= 0.0 {
        return false;
    }
    for i in 1..size {
        if m[(i, 0)].abs() > tol {
            return false;
        }
    }
    match moebius_conjugate_inv(m, sig) {
        Ok(canonical) => certify_signature(&canonical, sig.p(), tol).is_ok(),
        Err(_) => false,
    }
}
