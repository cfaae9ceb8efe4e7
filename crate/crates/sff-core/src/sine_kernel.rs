//! Sine-kernel correlation functions and the box-convolution rule for
//! Fourier integrals of kernel cycles.
//!
//! A cycle `K(l1, l2) K(l2, l3) ... K(lm, l1) exp(i sum w_j l_j)` with
//! frequencies `w_j` integrates to `D` times the overlap of unit boxes
//! shifted by the partial sums of the box weights `k_j = 2 w_j`, divided by
//! `2D`. The overlap only survives on the shell `sum w_j = 0`. For the CUE at
//! integer frequencies this is the exact finite-D count `max(0, D - span)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::analytics;
use crate::ensembles::EnsembleKind;
use crate::error::{invalid, Error, Result};
use crate::math;

/// Largest correlation order handled by [`r_n_det`].
pub const MAX_ORDER: usize = 6;

/// Sine kernel with mean level density `rho_bar`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    rho_bar: f64,
    dim: usize,
}

impl KernelSpec {
    pub fn new(rho_bar: f64, dim: usize) -> Result<Self> {
        if !rho_bar.is_finite() || rho_bar <= 0.0 {
            return Err(invalid("mean level density must be positive"));
        }
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        Ok(Self { rho_bar, dim })
    }

    /// `rho_bar = D / 2 pi`, the CUE density on the unit circle.
    pub fn cue(dim: usize) -> Result<Self> {
        Self::new(dim as f64 / (2.0 * PI), dim)
    }

    pub fn rho_bar(&self) -> f64 {
        self.rho_bar
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// `rho sin(pi rho x) / (pi rho x)`, and `rho` at `x = 0`.
pub fn kernel_value(spec: &KernelSpec, x: f64) -> f64 {
    let arg = PI * spec.rho_bar * x;
    if arg == 0.0 {
        spec.rho_bar
    } else {
        spec.rho_bar * math::sin(arg) / arg
    }
}

/// n-point correlation function `det[K(x_i - x_j)]` for `1 <= n <= 6`.
pub fn r_n_det(spec: &KernelSpec, points: &[f64]) -> Result<f64> {
    let n = points.len();
    if n == 0 {
        return Err(invalid("need at least one point"));
    }
    if n > MAX_ORDER {
        return Err(Error::UnsupportedOrder {
            requested: n,
            max: MAX_ORDER,
        });
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(invalid("points must be finite"));
    }
    let mut a = [[0.0f64; MAX_ORDER]; MAX_ORDER];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = kernel_value(spec, points[i] - points[j]);
        }
    }
    Ok(determinant(&mut a, n))
}

/// Gaussian elimination with partial pivoting on the leading `n x n` block.
fn determinant(a: &mut [[f64; MAX_ORDER]; MAX_ORDER], n: usize) -> f64 {
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&x, &y| a[x][k].abs().total_cmp(&a[y][k].abs()))
            .unwrap_or(k);
        if a[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        let (top, rest) = a.split_at_mut(k + 1);
        let pivot = &top[k];
        for row in rest.iter_mut() {
            let f = row[k] / pivot[k];
            for (x, y) in row[k..n].iter_mut().zip(&pivot[k..n]) {
                *x -= f * y;
            }
        }
    }
    det
}

/// Box weights `k_1..k_m` of one kernel cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxProduct {
    weights: Vec<f64>,
    dim: usize,
}

impl BoxProduct {
    pub fn new(weights: Vec<f64>, dim: usize) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInput(
                "box product needs at least one weight".into(),
            ));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(invalid("box weights must be finite"));
        }
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        Ok(Self { weights, dim })
    }

    /// Box weights for a cycle whose eigenvalue frequencies are `freqs`.
    pub fn from_frequencies(freqs: &[f64], dim: usize) -> Result<Self> {
        Self::new(freqs.iter().map(|w| 2.0 * w).collect(), dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Result of [`box_convolution`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxOverlap {
    /// Length of the common part of the shifted unit boxes (zero off shell).
    pub overlap: f64,
    /// Whether the weights sum to zero, i.e. the delta prefactor is active.
    pub on_shell: bool,
}

/// Overlap of `{|k| < 1/2}` with `{|k + S_i / 2D| < 1/2}`, `S_i` the partial
/// sums of the weights, in closed form.
pub fn box_convolution(bp: &BoxProduct) -> BoxOverlap {
    let total: f64 = bp.weights.iter().sum();
    let scale: f64 = bp.weights.iter().map(|w| w.abs()).sum::<f64>().max(1.0);
    if total.abs() > 1e-12 * scale {
        return BoxOverlap {
            overlap: 0.0,
            on_shell: false,
        };
    }
    BoxOverlap {
        overlap: box_overlap(&bp.weights, bp.dim),
        on_shell: true,
    }
}

fn box_overlap(weights: &[f64], dim: usize) -> f64 {
    let two_d = 2.0 * dim as f64;
    let mut s = 0.0;
    let (mut lo, mut hi) = (-0.5f64, 0.5f64);
    for w in &weights[..weights.len() - 1] {
        s += w / two_d;
        lo = lo.max(-0.5 - s);
        hi = hi.min(0.5 - s);
    }
    (hi - lo).max(0.0)
}

/// `D` times the box overlap of a cycle with eigenvalue frequencies `freqs`.
pub fn cycle_integral(freqs: &[f64], dim: usize) -> Result<f64> {
    let bp = BoxProduct::from_frequencies(freqs, dim)?;
    Ok(dim as f64 * box_convolution(&bp).overlap)
}

/// The 3-type cycle `2 Re int KKK exp(i(2 l1 - l2 - l3) t)`: returns the box
/// evaluation and the closed form `2 D (1 - z(2t))`.
pub fn three_type_identity(t: f64, dim: usize) -> Result<(f64, f64)> {
    check(t, dim)?;
    let lhs = 2.0 * cycle_integral(&[2.0 * t, -t, -t], dim)?;
    let rhs = 2.0 * dim as f64 * (1.0 - analytics::z_cue(2.0 * t / dim as f64)?);
    Ok((lhs, rhs))
}

/// The three distinct 4-cycles of `exp(i(l1 + l2 - l3 - l4) t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourTypeValues {
    /// Box evaluations for the cycles (1 3 2 4), (1 2 3 4), (1 2 4 3).
    pub boxes: [f64; 3],
    /// `D (1 - z(t))`, `D (1 - z(2t))`, `D (1 - z(2t))`.
    pub closed: [f64; 3],
}

pub fn four_type_identities(t: f64, dim: usize) -> Result<FourTypeValues> {
    check(t, dim)?;
    let d = dim as f64;
    let w = [t, t, -t, -t];
    let cycle = |order: [usize; 4]| cycle_integral(&order.map(|i| w[i]), dim);
    let z1 = analytics::z_cue(t / d)?;
    let z2 = analytics::z_cue(2.0 * t / d)?;
    Ok(FourTypeValues {
        boxes: [
            cycle([0, 2, 1, 3])?,
            cycle([0, 1, 2, 3])?,
            cycle([0, 1, 3, 2])?,
        ],
        closed: [d * (1.0 - z1), d * (1.0 - z2), d * (1.0 - z2)],
    })
}

fn check(t: f64, dim: usize) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(invalid("time must be finite and non-negative"));
    }
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    Ok(())
}

/// Finite-D CUE kernel `sin(D x / 2) / (2 pi sin(x / 2))`.
pub fn cue_kernel(dim: usize, x: f64) -> f64 {
    let d = dim as f64;
    let s = math::sin(0.5 * x);
    if s.abs() < 1e-14 {
        // x is a multiple of 2 pi; the sign follows (-1)^{(D-1) x / 2 pi}
        let k = math::round(x / (2.0 * PI)) as i64;
        let sign = if (k * (dim as i64 - 1)).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        };
        return sign * d / (2.0 * PI);
    }
    math::sin(0.5 * d * x) / (2.0 * PI * s)
}

/// Trapezoid quadrature of `int K12 K23 K31 cos(w1 l1 + w2 l2 + w3 l3)` over
/// `[-pi, pi]^3` with the finite-D CUE kernel and `nodes` points per axis;
/// exact for integer frequencies once `nodes` exceeds the trigonometric degree.
pub fn three_cycle_quadrature(dim: usize, freqs: [f64; 3], nodes: usize) -> Result<f64> {
    if dim == 0 || nodes == 0 {
        return Err(invalid("dimension and node count must be positive"));
    }
    let h = 2.0 * PI / nodes as f64;
    let grid: Vec<f64> = (0..nodes).map(|i| -PI + i as f64 * h).collect();
    let mut re = 0.0;
    for &a in &grid {
        for &b in &grid {
            let kab = cue_kernel(dim, a - b);
            for &c in &grid {
                let v = kab * cue_kernel(dim, b - c) * cue_kernel(dim, c - a);
                re += v * math::cos(freqs[0] * a + freqs[1] * b + freqs[2] * c);
            }
        }
    }
    Ok(re * h * h * h)
}

/// `int R_m(l) exp(i t sum c_j l_j)` by expanding the kernel determinant over
/// permutations. A cycle of length >= 2 contributes through the box rule when
/// its integer coefficients cancel identically and is dropped otherwise (the
/// finite-size remainder of the delta prefactor is neglected); a fixed point
/// contributes the density transform `<u_{c t}>`, or nothing when
/// `include_ubar` is false.
fn correlation_integral(coeffs: &[i32], t: f64, dim: usize, include_ubar: bool) -> Result<f64> {
    let m = coeffs.len();
    let mut perm: Vec<usize> = (0..m).collect();
    let mut total = 0.0;
    loop {
        let mut seen = [false; MAX_ORDER];
        let mut term = 1.0;
        let mut cycles = 0;
        for start in 0..m {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut members = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                members.push(i);
                i = perm[i];
            }
            let value = if members.len() == 1 {
                if include_ubar {
                    let c = coeffs[start];
                    let u = analytics::ubar(EnsembleKind::Cue, (c as f64 * t).abs(), dim)?;
                    if c < 0 {
                        u.conj().re
                    } else {
                        u.re
                    }
                } else {
                    0.0
                }
            } else if members.iter().map(|&j| coeffs[j]).sum::<i32>() == 0 {
                let freqs: Vec<f64> = members.iter().map(|&j| coeffs[j] as f64 * t).collect();
                cycle_integral(&freqs, dim)?
            } else {
                0.0
            };
            term *= value;
            if term == 0.0 {
                break;
            }
        }
        if term != 0.0 {
            let sign = if (m - cycles).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            total += sign * term;
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(total)
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// CUE second moment of the form factor from the decomposition of the
/// four-fold eigenvalue sum into R4, R3 and R2 integrals plus the fully
/// coincident terms `2 D^2 - D`.
pub fn assemble_sff2(t: f64, dim: usize, include_ubar: bool) -> Result<f64> {
    check(t, dim)?;
    let d = dim as f64;
    let r4 = correlation_integral(&[1, 1, -1, -1], t, dim, include_ubar)?;
    let r3 = correlation_integral(&[2, -1, -1], t, dim, include_ubar)?;
    let r2_double = correlation_integral(&[2, -2], t, dim, include_ubar)?;
    let r2 = correlation_integral(&[1, -1], t, dim, include_ubar)?;
    Ok(r4 + 2.0 * r3 + r2_double + 4.0 * (d - 1.0) * r2 + 2.0 * d * d - d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::sff2_exact;
    use proptest::prelude::*;

    #[test]
    fn kernel_values() {
        let s = KernelSpec::new(1.0, 10).unwrap();
        assert_eq!(kernel_value(&s, 0.0), 1.0);
        assert!(kernel_value(&s, 1.0).abs() < 1e-15);
        assert!((kernel_value(&s, 0.5) - 2.0 / PI).abs() < 1e-15);
        assert!(KernelSpec::new(0.0, 10).is_err());
    }

    #[test]
    fn small_determinants() {
        let s = KernelSpec::new(1.0, 10).unwrap();
        assert_eq!(r_n_det(&s, &[0.3]).unwrap(), 1.0);
        assert!(r_n_det(&s, &[0.3, 0.3]).unwrap().abs() < 1e-15);
        let r2 = r_n_det(&s, &[0.0, 0.5]).unwrap();
        assert!((r2 - (1.0 - (2.0 / PI).powi(2))).abs() < 1e-15);
        assert!(matches!(
            r_n_det(&s, &[0.0; 7]),
            Err(Error::UnsupportedOrder {
                requested: 7,
                max: 6
            })
        ));
    }

    #[test]
    fn box_basics() {
        let one = box_convolution(&BoxProduct::new(alloc::vec![0.0], 5).unwrap());
        assert_eq!(
            one,
            BoxOverlap {
                overlap: 1.0,
                on_shell: true
            }
        );
        let flat = box_convolution(&BoxProduct::new(alloc::vec![0.0; 4], 5).unwrap());
        assert_eq!(flat.overlap, 1.0);
        let off = box_convolution(&BoxProduct::new(alloc::vec![1.0, 1.0], 5).unwrap());
        assert_eq!(
            off,
            BoxOverlap {
                overlap: 0.0,
                on_shell: false
            }
        );
        assert!(BoxProduct::new(alloc::vec![], 5).is_err());
    }

    #[test]
    fn quadrature_pins_the_scaling() {
        // D = 8, t = 2: the 3-type cycle with frequencies (2t, -t, -t)
        let (d, t) = (8, 2.0);
        let numeric = three_cycle_quadrature(d, [2.0 * t, -t, -t], 48).unwrap();
        let boxed = cycle_integral(&[2.0 * t, -t, -t], d).unwrap();
        assert!(
            (boxed - numeric).abs() <= 0.02 * numeric.abs(),
            "{boxed} vs {numeric}"
        );
        // the naive reading (weights equal to the frequencies) misses it
        let naive = d as f64
            * box_convolution(&BoxProduct::new(alloc::vec![2.0 * t, -t, -t], d).unwrap()).overlap;
        assert!((naive - numeric).abs() > 0.2 * numeric.abs());
    }

    #[test]
    fn quadrature_matches_boxes_for_several_shifts() {
        for (d, w) in [
            (6, [1.0, 2.0, -3.0]),
            (7, [3.0, -1.0, -2.0]),
            (5, [4.0, -2.0, -2.0]),
        ] {
            let numeric = three_cycle_quadrature(d, w, 48).unwrap();
            let boxed = cycle_integral(&w, d).unwrap();
            assert!(
                (boxed - numeric).abs() < 1e-9,
                "D={d} {w:?}: {boxed} vs {numeric}"
            );
        }
    }

    #[test]
    fn three_type_examples() {
        let (l, r) = three_type_identity(0.0, 8).unwrap();
        assert_eq!((l, r), (16.0, 16.0));
        let (l, r) = three_type_identity(4.0, 8).unwrap();
        assert_eq!((l, r), (0.0, 0.0));
        let (l, r) = three_type_identity(2.0, 8).unwrap();
        assert!((l - r).abs() < 1e-10);
    }

    #[test]
    fn four_type_examples() {
        let v = four_type_identities(0.0, 8).unwrap();
        assert_eq!(v.boxes, [8.0; 3]);
        let v = four_type_identities(3.0, 8).unwrap();
        for (b, c) in v.boxes.iter().zip(v.closed) {
            assert!((b - c).abs() < 1e-10);
        }
        let v = four_type_identities(9.0, 8).unwrap();
        assert_eq!(v.boxes[0], 0.0);
    }

    #[test]
    fn assembly_examples() {
        assert!((assemble_sff2(5.0, 20, true).unwrap() - 50.0).abs() < 1e-12);
        assert!((assemble_sff2(7.5, 10, true).unwrap() - 107.5).abs() < 1e-12);
        assert!((assemble_sff2(31.0, 10, true).unwrap() - 190.0).abs() < 1e-12);
    }

    #[test]
    fn assembly_equals_summed_closed_form() {
        for d in [2usize, 5, 10] {
            for t in 0..=3 * d {
                for include_ubar in [true, false] {
                    let a = assemble_sff2(t as f64, d, include_ubar).unwrap();
                    let e = sff2_exact(EnsembleKind::Cue, t as f64, d, include_ubar).unwrap();
                    assert!(
                        (a - e).abs() <= 1e-12 * e.abs().max(1.0),
                        "D={d} t={t}: {a} vs {e}"
                    );
                }
            }
        }
    }

    #[test]
    fn permutation_count() {
        let mut p = [0, 1, 2, 3];
        let mut n = 1;
        while next_permutation(&mut p) {
            n += 1;
        }
        assert_eq!(n, 24);
    }

    proptest! {
        #[test]
        fn determinant_is_symmetric_and_non_negative(
            pts in proptest::collection::vec(-3.0f64..3.0, 1..=6),
            rho in 0.2f64..3.0,
            rot in 0usize..6,
        ) {
            let s = KernelSpec::new(rho, 10).unwrap();
            let a = r_n_det(&s, &pts).unwrap();
            let mut shuffled = pts.clone();
            let k = rot % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
            let b = r_n_det(&s, &shuffled).unwrap();
            let scale = rho.powi(pts.len() as i32);
            prop_assert!((a - b).abs() <= 1e-10 * scale);
            prop_assert!(a >= -1e-12 * scale);
        }

        #[test]
        fn box_overlap_is_one_minus_span(ws in proptest::collection::vec(-5i32..5, 1..6), dim in 1usize..20) {
            let mut ws: Vec<f64> = ws.into_iter().map(f64::from).collect();
            let s: f64 = ws.iter().sum();
            ws.push(-s);
            let b = box_convolution(&BoxProduct::new(ws.clone(), dim).unwrap());
            let mut acc = 0.0;
            let (mut mn, mut mx) = (0.0f64, 0.0f64);
            for w in &ws[..ws.len() - 1] {
                acc += w / (2.0 * dim as f64);
                mn = mn.min(acc);
                mx = mx.max(acc);
            }
            prop_assert!(b.on_shell);
            prop_assert!((b.overlap - (1.0 - (mx - mn)).max(0.0)).abs() < 1e-14);
        }
    }
}
