//! Saddle-point form of the CUE generating function for the second moment
//! of the form factor, its four-fold source derivatives and the resulting
//! time-domain law.
//!
//! The six saddles are the permutations of the four phase indices that keep
//! the signature of the standard saddle. Each contributes a rational function
//! of the phases times an exponential; the fourth mixed derivative with
//! respect to the sources `alpha` at zero gives its share of `SFF^2`.

use core::fmt;

use num_complex::Complex64;

use crate::dd::{Cdd, Dd};
use crate::error::{invalid, Error, Result};
use crate::math;

/// Absolute distance below which two phases count as coincident.
pub const POLE_GUARD: f64 = 1e-6;

/// One of the six saddle points, given by the image of each index (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SaddleConfig {
    name: &'static str,
    perm: [usize; 4],
}

impl SaddleConfig {
    pub const IDENTITY: Self = Self {
        name: "I",
        perm: [0, 1, 2, 3],
    };
    pub const T13: Self = Self {
        name: "T13",
        perm: [2, 1, 0, 3],
    };
    pub const T14: Self = Self {
        name: "T14",
        perm: [3, 1, 2, 0],
    };
    pub const T23: Self = Self {
        name: "T23",
        perm: [0, 2, 1, 3],
    };
    pub const T24: Self = Self {
        name: "T24",
        perm: [0, 3, 2, 1],
    };
    pub const T14_T23: Self = Self {
        name: "T14T23",
        perm: [3, 2, 1, 0],
    };

    pub const ALL: [Self; 6] = [
        Self::IDENTITY,
        Self::T13,
        Self::T14,
        Self::T23,
        Self::T24,
        Self::T14_T23,
    ];

    pub fn name(&self) -> &'static str {
        self.name
    }

    /// Images of `1..=4`, in the 1-based convention of the saddle table.
    pub fn images(&self) -> [usize; 4] {
        self.perm.map(|p| p + 1)
    }

    /// Number of indices moved between the retarded pair `{1, 2}` and the
    /// advanced pair `{3, 4}`, halved: 0, 1 or 2.
    pub fn transpositions(&self) -> usize {
        self.perm[..2].iter().filter(|&&p| p >= 2).count()
    }
}

impl fmt::Display for SaddleConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}

/// Phases, sources and regulators at which a saddle is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub phi: [f64; 4],
    pub alpha: [f64; 4],
    pub dim: usize,
    deltas: [f64; 4],
}

impl PhasePoint {
    /// Sources at zero and default regulators `(1, 2, 1, 2) * 1e-3`.
    pub fn new(phi: [f64; 4], dim: usize) -> Result<Self> {
        if phi.iter().any(|p| !p.is_finite()) {
            return Err(invalid("phases must be finite"));
        }
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        Ok(Self {
            phi,
            alpha: [0.0; 4],
            dim,
            deltas: [1e-3, 2e-3, 1e-3, 2e-3],
        })
    }

    pub fn with_alpha(mut self, alpha: [f64; 4]) -> Result<Self> {
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(invalid("sources must be finite"));
        }
        self.alpha = alpha;
        Ok(self)
    }

    /// Imaginary shifts of the phases; they must satisfy `0 < d1 < d2` and `0 < d3 < d4`.
    pub fn with_regulators(mut self, deltas: [f64; 4]) -> Result<Self> {
        if !(0.0 < deltas[0] && deltas[0] < deltas[1] && 0.0 < deltas[2] && deltas[2] < deltas[3]) {
            return Err(invalid(
                "regulators must satisfy 0 < d1 < d2 and 0 < d3 < d4",
            ));
        }
        self.deltas = deltas;
        Ok(self)
    }

    pub fn regulators(&self) -> [f64; 4] {
        self.deltas
    }
}

fn singular(what: &str) -> Error {
    Error::Singularity(alloc::format!("{what} closer than {POLE_GUARD}"))
}

/// Contribution of one saddle to the generating function.
pub fn z_saddle(cfg: &SaddleConfig, p: &PhasePoint) -> Result<Complex64> {
    let phi = &p.phi;
    let a = &p.alpha;
    let s = &cfg.perm;
    let mut ratio = 1.0;
    for i in 0..2 {
        for k in 2..4 {
            let den_a = phi[i] - phi[k];
            let den_b = phi[s[i]] - phi[s[k]] + a[s[i]] - a[s[k]];
            if den_a.abs() < POLE_GUARD || den_b.abs() < POLE_GUARD {
                return Err(singular("phases"));
            }
            let num = (phi[i] - phi[s[k]] - a[s[k]]) * (phi[k] - phi[s[i]] - a[s[i]]);
            ratio *= num / (den_a * den_b);
        }
    }
    let shift = |i: usize| phi[i] - phi[s[i]] - a[s[i]];
    let exponent = 0.5 * p.dim as f64 * (shift(0) + shift(1) - shift(2) - shift(3));
    Ok(math::cis(exponent) * ratio)
}

/// Sum over all six saddles.
pub fn z_total(p: &PhasePoint) -> Result<Complex64> {
    SaddleConfig::ALL.iter().map(|c| z_saddle(c, p)).sum()
}

fn check_separated(phi: &[f64; 4]) -> Result<()> {
    if phi.iter().any(|p| !p.is_finite()) {
        return Err(invalid("phases must be finite"));
    }
    for i in 0..4 {
        for j in i + 1..4 {
            if (phi[i] - phi[j]).abs() < POLE_GUARD {
                return Err(singular("phases"));
            }
        }
    }
    Ok(())
}

/// Closed form of the fourth source derivative of one saddle.
///
/// The identity, one single transposition and the double transposition are
/// written out; the other single transpositions follow by relabelling the
/// phases inside each pair.
pub fn f_closed(cfg: &SaddleConfig, phi: [f64; 4], dim: usize) -> Result<Complex64> {
    check_separated(&phi)?;
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    let d = dim as f64;
    let [p1, p2, p3, p4] = phi;
    Ok(match cfg.name {
        "I" => Complex64::new(f_identity(phi, d), 0.0),
        "T13" => f_single(phi, d),
        "T14" => f_single([p1, p2, p4, p3], d),
        "T23" => f_single([p2, p1, p3, p4], d),
        "T24" => f_single([p2, p1, p4, p3], d),
        _ => f_double(phi, d),
    })
}

fn f_identity(phi: [f64; 4], d: f64) -> f64 {
    let del = |i: usize, j: usize| phi[i] - phi[j];
    let h2 = 0.25 * d * d;
    let inv2 = |x: f64| 1.0 / (x * x);
    h2 * h2 - h2 * (inv2(del(0, 2)) + inv2(del(1, 2)) + inv2(del(0, 3)) + inv2(del(1, 3)))
        + inv2(del(1, 2)) * inv2(del(0, 3))
        + inv2(del(0, 2)) * inv2(del(1, 3))
}

fn f_single(phi: [f64; 4], d: f64) -> Complex64 {
    let del = |i: usize, j: usize| phi[i] - phi[j];
    let (d12, d13, d14, d23, d24, d34) = (
        del(0, 1),
        del(0, 2),
        del(0, 3),
        del(1, 2),
        del(1, 3),
        del(2, 3),
    );
    let real =
        d * d / (4.0 * d13 * d13) - 1.0 / (d13 * d13 * d24 * d24) - 1.0 / (d12 * d23 * d34 * -d14);
    let imag = d / (2.0 * d13 * d13) * (1.0 / d12 + 1.0 / d23 - 1.0 / d34 + 1.0 / d14);
    Complex64::new(real, imag) * math::cis(d * d13)
}

fn f_double(phi: [f64; 4], d: f64) -> Complex64 {
    let del = |i: usize, j: usize| phi[i] - phi[j];
    let (d12, d13, d14, d23, d24, d34) = (
        del(0, 1),
        del(0, 2),
        del(0, 3),
        del(1, 2),
        del(1, 3),
        del(2, 3),
    );
    let num = d12 * d12 * d34 * d34;
    let den = d13 * d13 * d23 * d23 * d24 * d24 * d14 * d14;
    math::cis(d * (d13 + d24)) * (num / den)
}

/// Mixed fourth derivative `d^4 f / da1 da2 da3 da4` at zero from the
/// 16-point tensor central difference with step `h`.
pub fn mixed_fourth_derivative<F>(f: F, h: f64) -> Result<Complex64>
where
    F: Fn([f64; 4]) -> Result<Complex64>,
{
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::StepSize("step must be positive".into()));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for mask in 0..16u32 {
        let mut a = [0.0; 4];
        let mut sign = 1.0;
        for (j, aj) in a.iter_mut().enumerate() {
            if mask >> j & 1 == 1 {
                *aj = -h;
                sign = -sign;
            } else {
                *aj = h;
            }
        }
        acc += f(a)? * sign;
    }
    let w = 2.0 * h;
    Ok(acc / (w * w * w * w))
}

/// Fourth source derivative of one saddle by finite differences: steps `h`
/// and `h/2` combined by one Richardson step, with
/// `h = 1e-3 min(min |phi_i - phi_j|, 2 / D)`. A third step `2h` checks that
/// the differences shrink like `h^2`. The stencil is summed in double-double
/// precision, so the step can be small enough for the truncation error to
/// stay below the cancellation between the terms of the closed forms.
pub fn f_numeric(cfg: &SaddleConfig, phi: [f64; 4], dim: usize) -> Result<Complex64> {
    check_separated(&phi)?;
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    let mut gap = 2.0 / dim as f64;
    for i in 0..4 {
        for j in i + 1..4 {
            gap = gap.min((phi[i] - phi[j]).abs());
        }
    }
    f_numeric_with_step(cfg, phi, dim, 1e-3 * gap)
}

pub fn f_numeric_with_step(
    cfg: &SaddleConfig,
    phi: [f64; 4],
    dim: usize,
    h: f64,
) -> Result<Complex64> {
    check_separated(&phi)?;
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    let f2 = stencil(cfg, phi, dim, 2.0 * h)?;
    let f1 = stencil(cfg, phi, dim, h)?;
    let f0 = stencil(cfg, phi, dim, 0.5 * h)?;
    let coarse = math::abs(f2 - f1);
    let fine = math::abs(f1 - f0);
    let scale = math::abs(f0).max(1.0);
    if fine > 1e-9 * scale {
        let ratio = coarse / fine;
        if !(2.0..=8.0).contains(&ratio) {
            return Err(Error::StepSize(alloc::format!(
                "difference ratio {ratio:.3} is not consistent with second-order convergence"
            )));
        }
    }
    let (s, c) = libm::sincos(0.5 * dim as f64 * phase_offset(cfg, &phi));
    Ok((f0 * 4.0 - f1) / 3.0 * Complex64::new(c, s))
}

/// Phase of the saddle exponential at zero sources.
fn phase_offset(cfg: &SaddleConfig, phi: &[f64; 4]) -> f64 {
    let s = &cfg.perm;
    let shift = |i: usize| phi[i] - phi[s[i]];
    shift(0) + shift(1) - shift(2) - shift(3)
}

/// The 16-point central difference of [`z_saddle`] without its constant
/// phase, summed in double-double precision.
fn stencil(cfg: &SaddleConfig, phi: [f64; 4], dim: usize, h: f64) -> Result<Complex64> {
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::StepSize("step must be positive".into()));
    }
    let s = &cfg.perm;
    let half_d = Dd::new(0.5 * dim as f64);
    if 0.5 * dim as f64 * 4.0 * h > 1.0 {
        return Err(Error::StepSize(
            "step too large for the source exponential".into(),
        ));
    }
    let mut acc = Cdd::ZERO;
    for mask in 0..16u32 {
        let a: [Dd; 4] = core::array::from_fn(|j| Dd::new(if mask >> j & 1 == 1 { -h } else { h }));
        let p = phi.map(Dd::new);
        let mut ratio = Dd::ONE;
        for i in 0..2 {
            for k in 2..4 {
                let den_b = p[s[i]] - p[s[k]] + a[s[i]] - a[s[k]];
                if den_b.abs() < POLE_GUARD {
                    return Err(singular("shifted phases"));
                }
                let num = (p[i] - p[s[k]] - a[s[k]]) * (p[k] - p[s[i]] - a[s[i]]);
                ratio = ratio * num / ((p[i] - p[k]) * den_b);
            }
        }
        let x = -(half_d * (a[s[0]] + a[s[1]] - a[s[2]] - a[s[3]]));
        let term = Cdd::cis_small(x).scale(ratio);
        acc = if mask.count_ones() % 2 == 1 {
            acc - term
        } else {
            acc + term
        };
    }
    let w = 2.0 * h;
    let w4 = w * w * w * w;
    Ok(Complex64::new(acc.re.to_f64() / w4, acc.im.to_f64() / w4))
}

/// Disconnected and connected parts of the CUE second moment in the time domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeDomainSff2 {
    /// `2 D^2 min(tau, 1)^2`.
    pub disconnected: f64,
    /// `D (z(2t) - 2 z(t))`: `0`, `-D (2 tau - 1)` or `-D`.
    pub connected: f64,
}

impl TimeDomainSff2 {
    pub fn total(&self) -> f64 {
        self.disconnected + self.connected
    }
}

/// Fourier-transformed saddle sum, with contributions carrying a delta
/// function in time dropped.
pub fn sff2_timedomain(tau: f64, dim: usize) -> Result<TimeDomainSff2> {
    if !tau.is_finite() || tau < 0.0 {
        return Err(invalid("tau must be finite and non-negative"));
    }
    let d = dim as f64;
    let disconnected = 2.0 * d * d * if tau < 1.0 { tau * tau } else { 1.0 };
    let connected = -d
        * if tau < 0.5 {
            0.0
        } else if tau < 1.0 {
            2.0 * tau - 1.0
        } else {
            1.0
        };
    Ok(TimeDomainSff2 {
        disconnected,
        connected,
    })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const PHI: [f64; 4] = [0.4, 0.1, -0.2, -0.5];
    const GENERIC: [f64; 4] = [0.37, 0.05, -0.11, -0.62];

    fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
        (a - b).norm() <= rel * b.norm().max(1.0)
    }

    #[test]
    fn table_images() {
        let images: alloc::vec::Vec<[usize; 4]> =
            SaddleConfig::ALL.iter().map(|c| c.images()).collect();
        assert_eq!(
            images,
            [
                [1, 2, 3, 4],
                [3, 2, 1, 4],
                [4, 2, 3, 1],
                [1, 3, 2, 4],
                [1, 4, 3, 2],
                [4, 3, 2, 1]
            ]
        );
        let t: alloc::vec::Vec<usize> = SaddleConfig::ALL
            .iter()
            .map(|c| c.transpositions())
            .collect();
        assert_eq!(t, [0, 1, 1, 1, 1, 2]);
    }

    #[test]
    fn sources_off_leaves_only_the_standard_saddle() {
        let p = PhasePoint::new(PHI, 10).unwrap();
        assert_eq!(
            z_saddle(&SaddleConfig::IDENTITY, &p).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        for c in &SaddleConfig::ALL[1..] {
            assert_eq!(z_saddle(c, &p).unwrap().norm(), 0.0, "{c}");
        }
        assert_eq!(z_total(&p).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn coincident_phases_are_singular() {
        let p = PhasePoint::new([0.3, 0.1, 0.3, -0.2], 10).unwrap();
        assert!(matches!(
            z_saddle(&SaddleConfig::IDENTITY, &p),
            Err(Error::Singularity(_))
        ));
        assert!(matches!(
            f_closed(&SaddleConfig::T13, [0.1, 0.1, 0.2, 0.3], 4),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn regulator_ordering() {
        let p = PhasePoint::new(PHI, 10).unwrap();
        assert!(p.with_regulators([1e-3, 1e-3, 1e-3, 2e-3]).is_err());
        assert!(p.with_regulators([1e-3, 2e-3, 3e-3, 4e-3]).is_ok());
    }

    #[test]
    fn closed_forms_match_symbolic_derivatives() {
        // fourth derivatives at GENERIC, D = 10, from 40-digit numerical differentiation
        let want = [
            ("I", Complex64::new(-491.74441321311701, 0.0)),
            (
                "T13",
                Complex64::new(194.15119358839808, -120.99769218599109),
            ),
            (
                "T14",
                Complex64::new(49.917330453787993, -24.009053327474528),
            ),
            (
                "T23",
                Complex64::new(267.98421230831312, 925.87365449944254),
            ),
            ("T24", Complex64::new(49.96558917313167, 96.378194525364334)),
            (
                "T14T23",
                Complex64::new(4.960425661222012, -8.9852527910166946),
            ),
        ];
        for (c, (name, w)) in SaddleConfig::ALL.iter().zip(want) {
            assert_eq!(c.name(), name);
            let got = f_closed(c, GENERIC, 10).unwrap();
            assert!(close(got, w, 1e-12), "{name}: {got} vs {w}");
        }
    }

    #[test]
    fn numeric_derivative_matches_closed_form() {
        for c in &SaddleConfig::ALL {
            for (dim, phi) in [(4, PHI), (10, PHI), (4, GENERIC), (10, GENERIC)] {
                let num = f_numeric(c, phi, dim).unwrap();
                let exact = f_closed(c, phi, dim).unwrap();
                assert!(close(num, exact, 1e-6), "{c} D={dim}: {num} vs {exact}");
            }
        }
    }

    #[test]
    fn step_halving_is_stable() {
        let c = SaddleConfig::T14_T23;
        let h = 1e-2 * 0.3;
        let a = f_numeric_with_step(&c, PHI, 10, h).unwrap();
        let b = f_numeric_with_step(&c, PHI, 10, 0.5 * h).unwrap();
        assert!((a - b).norm() < 1e-7 * a.norm());
    }

    #[test]
    fn bad_step_is_reported() {
        assert!(matches!(
            f_numeric_with_step(&SaddleConfig::IDENTITY, PHI, 10, 0.2),
            Err(Error::StepSize(_))
        ));
    }

    #[test]
    fn derivative_is_linear() {
        let p = PhasePoint::new(PHI, 4).unwrap();
        let h = 3e-3;
        let f = |c: SaddleConfig| move |a: [f64; 4]| z_saddle(&c, &p.with_alpha(a)?);
        let sum = mixed_fourth_derivative(
            |a| Ok(f(SaddleConfig::T13)(a)? + f(SaddleConfig::T23)(a)?),
            h,
        )
        .unwrap();
        let parts = mixed_fourth_derivative(f(SaddleConfig::T13), h).unwrap()
            + mixed_fourth_derivative(f(SaddleConfig::T23), h).unwrap();
        assert!((sum - parts).norm() < 1e-10 * parts.norm().max(1.0));
    }

    #[test]
    fn time_domain_branches() {
        let d = 10;
        let at = |tau: f64| sff2_timedomain(tau, d).unwrap();
        assert_eq!(at(0.25).connected, 0.0);
        assert_eq!(at(0.25).disconnected, 12.5);
        assert!((at(0.75).connected + 5.0).abs() < 1e-12);
        assert_eq!(at(1.5).total(), 190.0);
        assert_eq!(at(0.0).total(), 0.0);
        assert!(sff2_timedomain(-0.1, d).is_err());
    }

    proptest! {
        #[test]
        fn double_transposition_depends_on_image_set_only(
            p in proptest::array::uniform4(-1.0f64..1.0),
            a in proptest::array::uniform4(-0.01f64..0.01),
        ) {
            let mut sorted = p;
            sorted.sort_by(f64::total_cmp);
            prop_assume!(sorted.windows(2).all(|w| w[1] - w[0] > 0.05));
            let pt = PhasePoint::new(p, 6).unwrap().with_alpha(a).unwrap();
            // T13 T24 maps {1,2} onto {3,4} like T14 T23
            let t13_t24 = SaddleConfig { name: "T13T24", perm: [2, 3, 0, 1] };
            let x = z_saddle(&t13_t24, &pt).unwrap();
            let y = z_saddle(&SaddleConfig::T14_T23, &pt).unwrap();
            prop_assert!((x - y).norm() <= 1e-9 * y.norm().max(1.0));
        }
    }
}
