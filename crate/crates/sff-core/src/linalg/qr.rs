use alloc::vec::Vec;

use num_complex::Complex64;

use super::{householder_vector, ComplexMatrix};
use crate::error::{Error, Result};

/// `A = Q R` with `Q` unitary and `R` upper triangular.
#[derive(Debug, Clone)]
pub struct QrDecomposition {
    pub q: ComplexMatrix,
    pub r: ComplexMatrix,
    /// Number of Householder reflections applied; each has determinant -1.
    pub reflections: usize,
}

/// Householder QR. Columns whose sub-diagonal part is already zero are left
/// untouched, so triangular input comes back with `Q = I`.
pub fn householder_qr(a: &ComplexMatrix) -> Result<QrDecomposition> {
    if !a.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let n = a.dim();
    let mut r = a.clone().with_structure(super::Structure::General);
    let mut reflectors: Vec<(usize, Vec<Complex64>, f64)> = Vec::new();
    {
        let rd = r.data_mut();
        for k in 0..n.saturating_sub(1) {
            let Some((v, beta, alpha)) = householder_vector(&rd[k + k * n..(k + 1) * n]) else {
                continue;
            };
            for j in k + 1..n {
                let col = &mut rd[k + j * n..(j + 1) * n];
                let s: Complex64 = v
                    .iter()
                    .zip(col.iter())
                    .map(|(vi, x)| vi.conj() * x)
                    .sum::<Complex64>()
                    * beta;
                for (x, vi) in col.iter_mut().zip(&v) {
                    *x -= vi * s;
                }
            }
            rd[k + k * n] = alpha;
            for x in &mut rd[k + 1 + k * n..(k + 1) * n] {
                *x = Complex64::new(0.0, 0.0);
            }
            reflectors.push((k, v, beta));
        }
    }
    let mut q = ComplexMatrix::identity(n);
    {
        let qd = q.data_mut();
        for (k, v, beta) in reflectors.iter().rev() {
            for j in *k..n {
                let col = &mut qd[k + j * n..(j + 1) * n];
                let s: Complex64 = v
                    .iter()
                    .zip(col.iter())
                    .map(|(vi, x)| vi.conj() * x)
                    .sum::<Complex64>()
                    * *beta;
                for (x, vi) in col.iter_mut().zip(v) {
                    *x -= vi * s;
                }
            }
        }
    }
    Ok(QrDecomposition {
        q,
        r,
        reflections: reflectors.len(),
    })
}

/// Determinant from the QR factors and the reflection count.
pub fn determinant(a: &ComplexMatrix) -> Result<Complex64> {
    let qr = householder_qr(a)?;
    let mut det: Complex64 = (0..a.dim()).map(|i| qr.r[(i, i)]).product();
    if qr.reflections % 2 == 1 {
        det = -det;
    }
    Ok(det)
}
