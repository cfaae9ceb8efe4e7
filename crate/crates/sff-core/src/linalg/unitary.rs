use alloc::vec::Vec;

use num_complex::Complex64;

use super::{householder_vector, ComplexMatrix, Structure};
use crate::error::{Error, Result};
use crate::math;

const UNITARY_TOL: f64 = 1e-10;

/// Eigenphases of a unitary matrix, in `(-pi, pi]` and ascending order.
///
/// Householder reduction to Hessenberg form followed by single-shift complex
/// QR with Wilkinson shifts and deflation.
pub fn unitary_eigenphases(u: &ComplexMatrix) -> Result<Vec<f64>> {
    if !u.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    if u.structure() != Structure::Unitary && u.unitarity_defect() > UNITARY_TOL {
        return Err(Error::InvalidInput("matrix is not unitary".into()));
    }
    let n = u.dim();
    let mut h = u.data().to_vec();
    hessenberg(&mut h, n);
    let eig = hessenberg_eigenvalues(&mut h, n)?;
    let mut phases: Vec<f64> = eig
        .iter()
        .map(|z| {
            let p = math::atan2(z.im, z.re);
            if p <= -core::f64::consts::PI {
                core::f64::consts::PI
            } else {
                p
            }
        })
        .collect();
    phases.sort_by(f64::total_cmp);
    Ok(phases)
}

fn hessenberg(a: &mut [Complex64], n: usize) {
    for k in 0..n.saturating_sub(2) {
        let off = k + 1;
        let Some((v, beta, alpha)) = householder_vector(&a[off + k * n..(k + 1) * n]) else {
            continue;
        };
        // rows off.. of columns k+1.. : A <- H A
        for j in off..n {
            let col = &mut a[off + j * n..(j + 1) * n];
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
        a[off + k * n] = alpha;
        for x in &mut a[off + 1 + k * n..(k + 1) * n] {
            *x = Complex64::new(0.0, 0.0);
        }
        // all rows, columns off.. : A <- A H
        let mut w = alloc::vec![Complex64::new(0.0, 0.0); n];
        for (jj, vj) in v.iter().enumerate() {
            let col = &a[(off + jj) * n..(off + jj + 1) * n];
            for (wi, x) in w.iter_mut().zip(col) {
                *wi += x * vj;
            }
        }
        for (jj, vj) in v.iter().enumerate() {
            let f = vj.conj() * beta;
            let col = &mut a[(off + jj) * n..(off + jj + 1) * n];
            for (x, wi) in col.iter_mut().zip(&w) {
                *x -= wi * f;
            }
        }
    }
}

/// Givens pair `(c, s)` with `[[c, s], [-conj(s), c]] (x, y)^T = (r, 0)^T`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = math::abs(x);
    let ay = math::abs(y);
    if ay == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = math::hypot(ax, ay);
    (ax / r, (x / ax) * y.conj() / r)
}

fn hessenberg_eigenvalues(h: &mut [Complex64], n: usize) -> Result<Vec<Complex64>> {
    let idx = |i: usize, j: usize| i + j * n;
    let mut eig = alloc::vec![Complex64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(eig);
    }
    let cap = 50 * n.max(1);
    let mut total = 0;
    let mut since_deflation = 0;
    let mut hi = n - 1;
    let mut rot: Vec<(f64, Complex64)> = Vec::with_capacity(n);
    loop {
        if hi == 0 {
            eig[0] = h[idx(0, 0)];
            break;
        }
        let mut lo = hi;
        while lo > 0 {
            let sub = math::abs(h[idx(lo, lo - 1)]);
            let scale = math::abs(h[idx(lo - 1, lo - 1)]) + math::abs(h[idx(lo, lo)]);
            if sub <= f64::EPSILON * scale {
                h[idx(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[idx(hi, hi)];
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        total += 1;
        since_deflation += 1;
        if total > cap {
            return Err(Error::Convergence {
                routine: "unitary Hessenberg QR",
                iterations: total - 1,
            });
        }
        let mu = if since_deflation % 10 == 0 {
            h[idx(hi, hi)] + math::abs(h[idx(hi, hi - 1)]) * 0.75
        } else {
            wilkinson_shift(
                h[idx(hi - 1, hi - 1)],
                h[idx(hi - 1, hi)],
                h[idx(hi, hi - 1)],
                h[idx(hi, hi)],
            )
        };
        for i in lo..=hi {
            h[idx(i, i)] -= mu;
        }
        rot.clear();
        for k in lo..hi {
            let (c, s) = givens(h[idx(k, k)], h[idx(k + 1, k)]);
            for j in k..=hi {
                let a = h[idx(k, j)];
                let b = h[idx(k + 1, j)];
                h[idx(k, j)] = a * c + s * b;
                h[idx(k + 1, j)] = -s.conj() * a + b * c;
            }
            h[idx(k + 1, k)] = Complex64::new(0.0, 0.0);
            rot.push((c, s));
        }
        for (off, &(c, s)) in rot.iter().enumerate() {
            let k = lo + off;
            for i in lo..=(k + 1).min(hi) {
                let a = h[idx(i, k)];
                let b = h[idx(i, k + 1)];
                h[idx(i, k)] = a * c + b * s.conj();
                h[idx(i, k + 1)] = -a * s + b * c;
            }
        }
        for i in lo..=hi {
            h[idx(i, i)] += mu;
        }
    }
    Ok(eig)
}

/// Eigenvalue of the trailing 2x2 block closer to its bottom-right entry.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = math::csqrt(half * half + b * c);
    let mean = (a + d) * 0.5;
    let m1 = mean + disc;
    let m2 = mean - disc;
    if (m1 - d).norm_sqr() <= (m2 - d).norm_sqr() {
        m1
    } else {
        m2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::householder_qr;
    use crate::rng::RngStream;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn haar(dim: usize, seed: u64) -> ComplexMatrix {
        let mut rng = RngStream::new(seed, 2);
        let g = ComplexMatrix::from_fn(dim, |_, _| rng.complex_gaussian(1.0).unwrap());
        householder_qr(&g).unwrap().q
    }

    #[test]
    fn identity_has_zero_phases() {
        assert_eq!(
            unitary_eigenphases(&ComplexMatrix::identity(5)).unwrap(),
            alloc::vec![0.0; 5]
        );
    }

    #[test]
    fn diagonal_phases_sorted() {
        let th = [2.5, -1.0, 0.3, -3.0];
        let u = ComplexMatrix::from_fn(4, |i, j| {
            if i == j {
                math::cis(th[i])
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let got = unitary_eigenphases(&u).unwrap();
        let want = [-3.0, -1.0, 0.3, 2.5];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-15);
        }
    }

    #[test]
    fn minus_one_maps_to_pi() {
        let u = ComplexMatrix::from_fn(1, |_, _| Complex64::new(-1.0, -0.0));
        assert_eq!(unitary_eigenphases(&u).unwrap(), alloc::vec![PI]);
    }

    #[test]
    fn permutation_matrix_roots_of_unity() {
        // cyclic shift of size 5 has eigenvalues exp(2 pi i k / 5)
        let u = ComplexMatrix::from_fn(5, |i, j| {
            if (j + 1) % 5 == i {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let got = unitary_eigenphases(&u).unwrap();
        let want = [
            -4.0 * PI / 5.0,
            -2.0 * PI / 5.0,
            0.0,
            2.0 * PI / 5.0,
            4.0 * PI / 5.0,
        ];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{got:?}");
        }
    }

    #[test]
    fn rejects_non_unitary() {
        let mut u = ComplexMatrix::identity(3);
        u.set(0, 0, Complex64::new(2.0, 0.0));
        assert!(matches!(
            unitary_eigenphases(&u),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn similarity_invariance() {
        let u = haar(12, 5);
        let v = haar(12, 6);
        let w = v.matmul(&u).unwrap().matmul(&v.adjoint()).unwrap();
        let a = unitary_eigenphases(&u).unwrap();
        let b = unitary_eigenphases(&w).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn trace_matches_sum_of_eigenvalues(dim in 1usize..30, seed in any::<u64>()) {
            let u = haar(dim, seed);
            let ph = unitary_eigenphases(&u).unwrap();
            prop_assert_eq!(ph.len(), dim);
            prop_assert!(ph.iter().all(|p| *p > -PI && *p <= PI));
            prop_assert!(ph.windows(2).all(|w| w[0] <= w[1]));
            let sum: Complex64 = ph.iter().map(|p| math::cis(*p)).sum();
            prop_assert!((sum - u.trace()).norm() < 1e-11 * dim as f64);
            let sum3: Complex64 = ph.iter().map(|p| math::cis(3.0 * p)).sum();
            let u3 = u.matmul(&u).unwrap().matmul(&u).unwrap();
            prop_assert!((sum3 - u3.trace()).norm() < 1e-10 * dim as f64);
        }
    }
}
