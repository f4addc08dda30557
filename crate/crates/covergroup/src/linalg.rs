//! Small dense-matrix helpers shared across modules: the indefinite Gram
//! matrix, signature-aware Gram–Schmidt, polar projection onto rotations,
//! and a few scalar utilities.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tol;

/// Max-abs (Chebyshev) norm of a matrix; all residuals in this crate use it.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

pub fn inf_norm_vec(v: &DVector<f64>) -> f64 {
    v.amax()
}

/// Diagonal Gram matrix with `neg` leading `-1` entries followed by `+1`.
pub fn gram(neg: usize, size: usize) -> DMatrix<f64> {
    DMatrix::from_fn(size, size, |i, j| {
        if i != j {
            0.0
        } else if i < neg {
            -1.0
        } else {
            1.0
        }
    })
}

/// Indefinite dot product with `neg` leading minus signs.
pub fn g_dot(x: &DVector<f64>, y: &DVector<f64>, neg: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..x.len() {
        let term = x[i] * y[i];
        acc += if i < neg { -term } else { term };
    }
    acc
}

/// Outcome of a signature Gram–Schmidt pass: `input = q * r` with `q`
/// G-orthonormal (column Gram equal to `gram(neg, n)`) and `r` upper
/// triangular with positive diagonal.
#[derive(Debug, Clone)]
pub struct SignatureQr {
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
}

/// Modified Gram–Schmidt with respect to the indefinite product, run twice
/// for numerical sharpness. The first `neg` columns must come out timelike
/// (signed norm^2 negative), the rest spacelike; a pivot of the wrong sign
/// or of magnitude below [`tol::PIVOT_MIN`] aborts.
pub fn signature_gram_schmidt(m: &DMatrix<f64>, neg: usize) -> Result<SignatureQr> {
    let n = m.ncols();
    if m.nrows() != n {
        return Err(Error::dim(format!(
            "signature Gram–Schmidt needs a square input, got {}x{}",
            m.nrows(),
            n
        )));
    }
    let mut q = m.clone();
    let mut r = DMatrix::<f64>::zeros(n, n);
    let mut signs = vec![1.0f64; n];

    for j in 0..n {
        let mut v: DVector<f64> = q.column(j).into_owned();
        // Two orthogonalization passes against the already-finished columns.
        for _pass in 0..2 {
            for i in 0..j {
                let qi = q.column(i).into_owned();
                let coef = signs[i] * g_dot(&v, &qi, neg);
                v -= &qi * coef;
                r[(i, j)] += coef;
            }
        }
        let norm2 = g_dot(&v, &v, neg);
        let want_timelike = j < neg;
        let ok_sign = if want_timelike { norm2 < 0.0 } else { norm2 > 0.0 };
        if !ok_sign || norm2.abs() < tol::PIVOT_MIN {
            return Err(Error::NearDegenerate { index: j, norm2 });
        }
        let scale = norm2.abs().sqrt();
        v /= scale;
        signs[j] = if want_timelike { -1.0 } else { 1.0 };
        r[(j, j)] = scale;
        q.set_column(j, &v);
    }
    Ok(SignatureQr { q, r })
}

/// Nearest rotation to `m` in the polar sense (orthogonal factor of the
/// polar decomposition via SVD). Rejects inputs whose orthogonal factor has
/// negative determinant: those are not small perturbations of a rotation.
pub fn polar_rotation(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().ok_or_else(|| Error::dim("SVD did not produce U"))?;
    let vt = svd.v_t.as_ref().ok_or_else(|| Error::dim("SVD did not produce V^T"))?;
    let rot = u * vt;
    let det = rot.determinant();
    if det <= 0.0 {
        return Err(Error::NotRotation {
            residual: (det - 1.0).abs(),
        });
    }
    Ok(rot)
}

/// Random rotation: the exponential of a Gaussian antisymmetric matrix,
/// snapped back onto the rotation group through its polar part.
pub fn random_special_orthogonal<R: rand::Rng + ?Sized>(
    size: usize,
    rng: &mut R,
    scale: f64,
) -> DMatrix<f64> {
    let mut k = DMatrix::<f64>::zeros(size, size);
    for i in 0..size {
        for j in (i + 1)..size {
            let g: f64 = rng.sample(rand_distr::StandardNormal);
            k[(i, j)] = scale * g;
            k[(j, i)] = -scale * g;
        }
    }
    let e = k.exp();
    polar_rotation(&e).expect("exponential of an antisymmetric matrix rotates")
}

/// Random element of the pseudo-orthogonal identity component for the
/// Gram matrix with `neg` leading minus signs: the exponential of
/// `gram * K` with `K` Gaussian antisymmetric. No polar snap is applied,
/// since the Euclidean polar factor leaves the group when `neg > 0`.
pub fn random_pseudo_orthogonal<R: rand::Rng + ?Sized>(
    neg: usize,
    size: usize,
    rng: &mut R,
    scale: f64,
) -> DMatrix<f64> {
    let mut k = DMatrix::<f64>::zeros(size, size);
    for i in 0..size {
        for j in (i + 1)..size {
            let g: f64 = rng.sample(rand_distr::StandardNormal);
            k[(i, j)] = scale * g;
            k[(j, i)] = -scale * g;
        }
    }
    (gram(neg, size) * k).exp()
}

/// Spectral condition number through singular values.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if smin <= 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// Eigenvalues of a symmetric 2x2 matrix `[[a, b], [b, c]]` by the quadratic
/// formula, returned as (min, max).
pub fn symmetric_2x2_eigenvalues(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mid = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    (mid - rad, mid + rad)
}

/// `value` as an integer multiple of `unit`, if the remainder is below
/// [`tol::WINDING_ROUND`].
pub fn winding_integer(value: f64, unit: f64) -> Result<i64> {
    let k = (value / unit).round();
    if (value - k * unit).abs() > tol::WINDING_ROUND {
        return Err(Error::NotIntegral {
            value,
            unit,
            tol: tol::WINDING_ROUND,
        });
    }
    Ok(k as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_has_expected_signature() {
        let g = gram(2, 5);
        assert_eq!(g[(0, 0)], -1.0);
        assert_eq!(g[(1, 1)], -1.0);
        assert_eq!(g[(2, 2)], 1.0);
        assert_eq!(g[(4, 4)], 1.0);
        assert_eq!(g[(0, 1)], 0.0);
    }

    #[test]
    fn gram_schmidt_reproduces_group_element_exactly() {
        // The identity is already G-orthonormal; Gram–Schmidt must fix it.
        let id = DMatrix::<f64>::identity(5, 5);
        let qr = signature_gram_schmidt(&id, 2).unwrap();
        assert!(inf_norm(&(&qr.q - &id)) < 1e-15);
        assert!(inf_norm(&(&qr.r - &id)) < 1e-15);
    }

    #[test]
    fn gram_schmidt_produces_orthonormal_columns() {
        let n = 6;
        let mut m = DMatrix::<f64>::identity(n, n);
        // A mild shear keeps the column flags (timelike, timelike, space...).
        m[(0, 1)] = 0.3;
        m[(2, 0)] = 0.2;
        m[(3, 4)] = -0.1;
        let qr = signature_gram_schmidt(&m, 2).unwrap();
        let g = gram(2, n);
        let resid = inf_norm(&(qr.q.transpose() * &g * &qr.q - &g));
        assert!(resid < 1e-14, "column Gram residual {resid:.3e}");
        let recon = inf_norm(&(&qr.q * &qr.r - &m));
        assert!(recon < 1e-14, "QR reconstruction residual {recon:.3e}");
        for j in 0..n {
            assert!(qr.r[(j, j)] > 0.0);
            for i in (j + 1)..n {
                assert_eq!(qr.r[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn gram_schmidt_rejects_wrong_signature() {
        // Swapping a timelike column into the spacelike block flips a pivot sign.
        let mut m = DMatrix::<f64>::identity(5, 5);
        m.swap_columns(1, 2);
        let err = signature_gram_schmidt(&m, 2).unwrap_err();
        assert!(matches!(err, Error::NearDegenerate { .. }));
    }

    #[test]
    fn polar_projects_to_nearest_rotation() {
        let mut m = DMatrix::<f64>::identity(3, 3);
        m[(0, 1)] = 1e-3;
        let r = polar_rotation(&m).unwrap();
        let resid = inf_norm(&(r.transpose() * &r - DMatrix::identity(3, 3)));
        assert!(resid < 1e-14);
        assert!((r.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_eigenvalues_match_trace_and_det() {
        let (lo, hi) = symmetric_2x2_eigenvalues(2.0, 0.5, 1.0);
        assert!((lo + hi - 3.0).abs() < 1e-14);
        assert!((lo * hi - (2.0 - 0.25)).abs() < 1e-14);
        assert!(lo <= hi);
    }

    #[test]
    fn winding_integer_rounds_and_rejects() {
        assert_eq!(winding_integer(4.0 * std::f64::consts::PI + 1e-6, 2.0 * std::f64::consts::PI).unwrap(), 2);
        assert!(winding_integer(1.0, 2.0 * std::f64::consts::PI).is_err());
    }
}
