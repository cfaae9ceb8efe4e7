use alloc::vec::Vec;

use num_complex::Complex64;

use super::{householder_vector, ComplexMatrix, Structure};
use crate::error::{Error, Result};
use crate::math;

const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// The matrix is reduced to a real symmetric tridiagonal form by complex
/// Householder reflections and then diagonalised by implicit QL sweeps.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    if !h.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    if h.structure() != Structure::Hermitian
        && h.hermitian_defect() > HERMITIAN_TOL * h.max_abs().max(1.0)
    {
        return Err(Error::InvalidInput("matrix is not Hermitian".into()));
    }
    let n = h.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (mut d, mut e) = tridiagonalize(h);
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Returns the diagonal and the moduli of the sub-diagonal; the phases of the
/// sub-diagonal are removed by a diagonal unitary similarity.
fn tridiagonalize(h: &ComplexMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = h.dim();
    let mut a = h.data().to_vec();
    for k in 0..n.saturating_sub(2) {
        let Some((v, beta, alpha)) = householder_vector(&a[k + 1 + k * n..(k + 1) * n]) else {
            continue;
        };
        let off = k + 1;
        let m = n - off;
        // p = beta * A_sub * v
        let mut p = alloc::vec![Complex64::new(0.0, 0.0); m];
        for (jj, vj) in v.iter().enumerate() {
            let col = &a[off + (off + jj) * n..(off + jj + 1) * n];
            for (pi, aij) in p.iter_mut().zip(col) {
                *pi += aij * vj;
            }
        }
        for pi in &mut p {
            *pi *= beta;
        }
        let vp: Complex64 = v.iter().zip(&p).map(|(vi, pi)| vi.conj() * pi).sum();
        let kk = 0.5 * beta * vp.re;
        let w: Vec<Complex64> = p.iter().zip(&v).map(|(pi, vi)| pi - vi * kk).collect();
        // A_sub -= v w^H + w v^H
        for jj in 0..m {
            let wj = w[jj].conj();
            let vj = v[jj].conj();
            let col = &mut a[off + (off + jj) * n..(off + jj + 1) * n];
            for ii in 0..m {
                col[ii] -= v[ii] * wj + w[ii] * vj;
            }
        }
        // the reflected column k becomes (alpha, 0, ..., 0)
        a[off + k * n] = alpha;
        a[k + off * n] = alpha.conj();
        for i in off + 1..n {
            a[i + k * n] = Complex64::new(0.0, 0.0);
            a[k + i * n] = Complex64::new(0.0, 0.0);
        }
    }
    let d = (0..n).map(|i| a[i + i * n].re).collect();
    let e = (0..n)
        .map(|i| {
            if i + 1 < n {
                math::abs(a[i + 1 + i * n])
            } else {
                0.0
            }
        })
        .collect();
    (d, e)
}

/// Implicit QL with Wilkinson-type shifts on a real symmetric tridiagonal
/// matrix. `e[i]` couples rows `i` and `i + 1`; on return `d` holds the
/// eigenvalues (unsorted).
pub(crate) fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    let cap = 50 * n.max(1);
    let mut sweeps = 0;
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > cap {
                return Err(Error::Convergence {
                    routine: "tridiagonal QL",
                    iterations: sweeps - 1,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = math::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r } else { -r });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = math::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
