//! Dense complex linear algebra for the two ensembles: Householder QR,
//! Hermitian eigenvalues by tridiagonal QL and unitary eigenphases by
//! shifted Hessenberg QR.

mod hermitian;
mod matrix;
mod qr;
mod unitary;

pub use hermitian::hermitian_eigenvalues;
pub use matrix::{ComplexMatrix, Structure};
pub use qr::{determinant, householder_qr, QrDecomposition};
pub use unitary::unitary_eigenphases;

use num_complex::Complex64;

use crate::math;

/// Householder vector `v` and scale `beta = 2 / |v|^2` such that
/// `(I - beta v v^H) x = alpha e_1`. Returns `None` when `x[1..]` is already zero.
pub(crate) fn householder_vector(
    x: &[Complex64],
) -> Option<(alloc::vec::Vec<Complex64>, f64, Complex64)> {
    let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
    if tail == 0.0 {
        return None;
    }
    let x0 = x[0];
    let norm = math::sqrt(x0.norm_sqr() + tail);
    let a0 = math::abs(x0);
    let phase = if a0 == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        x0 / a0
    };
    let alpha = -phase * norm;
    let mut v = x.to_vec();
    v[0] -= alpha;
    let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    Some((v, 2.0 / vnorm2, alpha))
}
