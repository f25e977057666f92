//! Dense complex linear algebra for the exponential propagator and the
//! fidelity metrics: matrix exponential via Pade-13 scaling and squaring,
//! and the square root of a Hermitian positive-semidefinite matrix.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;

/// Maximum absolute column sum.
pub fn one_norm(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

// Pade-13 coefficients (Higham 2005).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// exp(A) for a general complex square matrix.
///
/// Scaling and squaring with the order-13 Pade approximant; handles the
/// non-Hermitian decay terms and arbitrarily large spectral radii at the
/// cost of extra squarings.
pub fn expm(a: &CMatrix) -> CMatrix {
    assert_eq!(a.nrows(), a.ncols(), "expm requires a square matrix");
    let n = a.nrows();
    let norm = one_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as u32
    } else {
        0
    };
    let a = a.map(|v| v / C64::new(2f64.powi(s as i32), 0.0));

    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let id = CMatrix::identity(n, n);

    let b = |k: usize| C64::new(PADE13[k], 0.0);
    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &id * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &id * b(0);

    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut r = lhs
        .lu()
        .solve(&rhs)
        .expect("Pade denominator is singular; expm failed");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Square root of a Hermitian PSD matrix via eigendecomposition.
///
/// Eigenvalues in `[-neg_tol, 0)` are clamped to zero; anything below
/// `-neg_tol` is reported as a non-PSD error.
pub fn sqrtm_psd(m: &CMatrix, neg_tol: f64) -> Result<CMatrix> {
    let eig = m.clone().symmetric_eigen();
    let mut vals = eig.eigenvalues.clone();
    for v in vals.iter_mut() {
        if *v < -neg_tol {
            return Err(Error::NotPositiveSemidefinite(*v));
        }
        *v = v.max(0.0).sqrt();
    }
    let q = &eig.eigenvectors;
    let sqrt_diag = CMatrix::from_diagonal(&vals.map(|v| C64::new(v, 0.0)));
    Ok(q * sqrt_diag * q.adjoint())
}

/// Trace of the square root of a Hermitian PSD matrix (sum of the square
/// roots of its eigenvalues), clamping small negative eigenvalues.
pub fn trace_sqrt_psd(m: &CMatrix, neg_tol: f64) -> Result<f64> {
    let eig = m.clone().symmetric_eigen();
    let mut sum = 0.0;
    for &v in eig.eigenvalues.iter() {
        if v < -neg_tol {
            return Err(Error::NotPositiveSemidefinite(v));
        }
        sum += v.max(0.0).sqrt();
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn expm_zero_is_identity() {
        let z = CMatrix::zeros(3, 3);
        let e = expm(&z);
        assert_eq!(e, CMatrix::identity(3, 3));
    }

    #[test]
    fn expm_diagonal() {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(0.3, -1.4),
            c(-2.0, 0.7),
        ]));
        let e = expm(&d);
        assert_relative_eq!((e[(0, 0)] - c(0.3, -1.4).exp()).norm(), 0.0, epsilon = 1e-12);
        assert_relative_eq!((e[(1, 1)] - c(-2.0, 0.7).exp()).norm(), 0.0, epsilon = 1e-12);
        assert!(e[(0, 1)].norm() < 1e-15 && e[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn expm_pauli_x_rotation() {
        // exp(-i theta sx) = cos(theta) I - i sin(theta) sx, incl. theta >> 1
        // to exercise the squaring phase.
        for &theta in &[0.3, 2.0, 150.7] {
            let m = CMatrix::from_row_slice(2, 2, &[
                C64::ZERO,
                c(0.0, -theta),
                c(0.0, -theta),
                C64::ZERO,
            ]);
            let e = expm(&m);
            assert_relative_eq!(e[(0, 0)].re, theta.cos(), epsilon = 1e-10);
            assert_relative_eq!(e[(0, 1)].im, -theta.sin(), epsilon = 1e-10);
        }
    }

    #[test]
    fn expm_norm_decay() {
        // exp(-i H t) with H = -i g/2 |1><1| damps the |1> amplitude by
        // exp(-g t / 2).
        let g = 2.5;
        let t = 1.7;
        let h = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::ZERO,
            c(0.0, -g / 2.0),
        ]));
        let u = expm(&(h * c(0.0, -t)));
        assert_relative_eq!(u[(1, 1)].re, (-g * t / 2.0).exp(), epsilon = 1e-12);
    }

    #[test]
    fn sqrtm_of_projector() {
        let mut p = CMatrix::zeros(2, 2);
        p[(0, 0)] = C64::ONE;
        let s = sqrtm_psd(&p, 1e-10).unwrap();
        assert_relative_eq!((s.clone() * s - p).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn sqrtm_rejects_negative() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0, 0.0),
            c(-0.5, 0.0),
        ]));
        assert!(matches!(
            sqrtm_psd(&m, 1e-10),
            Err(Error::NotPositiveSemidefinite(_))
        ));
    }
}
