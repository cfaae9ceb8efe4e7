//! Closed-form predictions: mean form factor, Gaussian moments, the second
//! moment with its connected correction, sampling envelopes and the
//! self-consistent Born approximation for the GUE resolvent.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::ensembles::EnsembleKind;
use crate::error::{invalid, Error, Result};
use crate::estimator::TimeGrid;
use crate::math;
use crate::special::bessel_j1;

/// Largest moment order accepted by [`gaussian_moment`].
pub const MAX_MOMENT_ORDER: usize = 20;

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(invalid("time must be finite and non-negative"));
    }
    Ok(())
}

/// Normalised mean connected form factor of the CUE, `min(tau, 1)`.
pub fn z_cue(tau: f64) -> Result<f64> {
    check_time(tau)?;
    Ok(tau.min(1.0))
}

/// Normalised mean connected form factor of the GUE in the semicircle
/// approximation. With `x = t / (2D)` (equivalently `pi tau / 4` for
/// `t_H = pi D / 2`) it reads `(2/pi)(x sqrt(1 - x^2) + asin x)` for `x < 1`
/// and `1` beyond.
pub fn z_gue(t: f64, dim: usize) -> Result<f64> {
    check_time(t)?;
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    let x = t / (2.0 * dim as f64);
    if x >= 1.0 {
        return Ok(1.0);
    }
    Ok(2.0 / PI * (x * math::sqrt(1.0 - x * x) + math::asin(x)))
}

/// `z(t)` for either ensemble at physical time `t`.
pub fn z(kind: EnsembleKind, t: f64, dim: usize) -> Result<f64> {
    match kind {
        EnsembleKind::Cue => {
            if dim == 0 {
                return Err(invalid("dimension must be at least 1"));
            }
            z_cue(t / dim as f64)
        }
        EnsembleKind::Gue => z_gue(t, dim),
    }
}

/// Fourier transform of the mean level density, `<u_t>`.
///
/// CUE: `D` at `t = 0` and zero at every other time. GUE: `D J_1(2t) / t`.
pub fn ubar(kind: EnsembleKind, t: f64, dim: usize) -> Result<Complex64> {
    check_time(t)?;
    let d = dim as f64;
    let v = match kind {
        EnsembleKind::Cue => {
            if t == 0.0 {
                d
            } else {
                0.0
            }
        }
        EnsembleKind::Gue => {
            if t == 0.0 {
                d
            } else {
                d * bessel_j1(2.0 * t)? / t
            }
        }
    };
    Ok(Complex64::new(v, 0.0))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `n! (D z)^n`, the n-th moment of an exponentially distributed form factor.
pub fn gaussian_moment(n: usize, dim: usize, z: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("moment order starts at 1"));
    }
    if n > MAX_MOMENT_ORDER {
        return Err(Error::Overflow(alloc::format!(
            "moment order {n} exceeds {MAX_MOMENT_ORDER}"
        )));
    }
    if !z.is_finite() || z < 0.0 {
        return Err(invalid("z must be finite and non-negative"));
    }
    let v = factorial(n) * libm::pow(dim as f64 * z, n as f64);
    if !v.is_finite() {
        return Err(Error::Overflow("moment does not fit in f64".into()));
    }
    Ok(v)
}

/// Leading non-Gaussian correction `z(2t) - 2 z(t)` to the second moment,
/// which enters multiplied by `D`.
pub fn conn2(kind: EnsembleKind, t: f64, dim: usize) -> Result<f64> {
    Ok(z(kind, 2.0 * t, dim)? - 2.0 * z(kind, t, dim)?)
}

/// `E[SFF(t)^2]` including the connected correction and, optionally, every
/// term containing the mean density transform `<u>`.
pub fn sff2_exact(kind: EnsembleKind, t: f64, dim: usize, include_ubar: bool) -> Result<f64> {
    let d = dim as f64;
    let z1 = z(kind, t, dim)?;
    let z2 = z(kind, 2.0 * t, dim)?;
    let mut total = 2.0 * d * d * z1 * z1 + d * (z2 - 2.0 * z1);
    if include_ubar {
        let u1 = ubar(kind, t, dim)?;
        let u2 = ubar(kind, 2.0 * t, dim)?;
        let a1 = u1.norm_sqr();
        let a2 = u2.norm_sqr();
        let cross = (u2 * u1.conj() * u1.conj()).re;
        total += a1 * a1 + (a2 - 4.0 * a1) + 2.0 * (cross + 2.0 * a1 * d * z1);
    }
    Ok(total)
}

/// Typical Monte-Carlo fluctuation of the n-th moment estimate,
/// `D^n z^n sqrt((2n)! - (n!)^2) / sqrt(N)`.
pub fn sampling_envelope(n: usize, dim: usize, z: f64, n_sim: u64) -> Result<f64> {
    if n == 0 || 2 * n > 2 * MAX_MOMENT_ORDER {
        return Err(invalid(
            "moment order must be between 1 and the supported maximum",
        ));
    }
    if n_sim == 0 {
        return Err(invalid("sample count must be positive"));
    }
    let dz = libm::pow(dim as f64 * z, n as f64);
    let spread = math::sqrt(factorial(2 * n) - factorial(n) * factorial(n));
    Ok(dz * spread / math::sqrt(n_sim as f64))
}

/// Typical size of the estimated `(1/D)|E[SFF^2] - 2 E[SFF]^2|` when the
/// true value vanishes: `D z^2 / sqrt(N)`.
pub fn conn2_envelope(dim: usize, z: f64, n_sim: u64) -> Result<f64> {
    if n_sim == 0 {
        return Err(invalid("sample count must be positive"));
    }
    Ok(dim as f64 * z * z / math::sqrt(n_sim as f64))
}

/// Solution of the self-consistent Born equation `G = 1 / (lambda - G)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScbaSolution {
    pub green: Complex64,
    pub iterations: usize,
    /// Mean level density `(D / pi) (-Im G)`.
    pub density: f64,
}

const SCBA_MAX_ITER: usize = 1_000_000;
const SCBA_DAMPING: f64 = 0.5;

/// Closed-form SCBA resolvent `lambda / 2 - i sqrt(1 - lambda^2 / 4)`.
pub fn scba_closed_form(lambda: f64) -> Result<Complex64> {
    if !lambda.is_finite() || lambda.abs() > 2.0 {
        return Err(Error::OutsideSupport(alloc::format!(
            "lambda = {lambda} outside [-2, 2]"
        )));
    }
    Ok(Complex64::new(
        0.5 * lambda,
        -math::sqrt(1.0 - 0.25 * lambda * lambda),
    ))
}

/// Damped fixed-point iteration for the SCBA resolvent, started at `-i`.
///
/// The iteration contracts at rate `|lambda| / 2`; it stops once successive
/// iterates agree to `1e-12` and the geometric tail bound is below `1e-13`.
/// At the band edges `|lambda| = 2` the fixed point is a double root, so the
/// exact value `lambda / 2` is returned directly.
pub fn scba_solve(lambda: f64, dim: usize) -> Result<ScbaSolution> {
    if !lambda.is_finite() || lambda.abs() > 2.0 {
        return Err(Error::OutsideSupport(alloc::format!(
            "lambda = {lambda} outside [-2, 2]"
        )));
    }
    let d = dim as f64;
    if lambda.abs() == 2.0 {
        return Ok(ScbaSolution {
            green: Complex64::new(0.5 * lambda, 0.0),
            iterations: 0,
            density: 0.0,
        });
    }
    let mut g = Complex64::new(0.0, -1.0);
    let mut prev_step = f64::INFINITY;
    for k in 1..=SCBA_MAX_ITER {
        let next =
            g * (1.0 - SCBA_DAMPING) + (Complex64::new(lambda, 0.0) - g).inv() * SCBA_DAMPING;
        let step = math::abs(next - g);
        g = next;
        let rate = if prev_step.is_finite() && prev_step > 0.0 {
            step / prev_step
        } else {
            1.0
        };
        prev_step = step;
        let tail = if rate < 1.0 {
            step * rate / (1.0 - rate)
        } else {
            f64::INFINITY
        };
        if step < 1e-12 && tail < 1e-13 || step == 0.0 {
            return Ok(ScbaSolution {
                green: g,
                iterations: k,
                density: d / PI * (-g.im),
            });
        }
    }
    Err(Error::Convergence {
        routine: "SCBA fixed point",
        iterations: SCBA_MAX_ITER,
    })
}

/// Leading perturbative two-point cluster function `-1 / (2 pi^2 (l1 - l2)^2)`.
pub fn perturbative_rho_c(l1: f64, l2: f64) -> Result<f64> {
    let diff = l1 - l2;
    if diff == 0.0 {
        return Err(Error::Singularity("coincident levels".into()));
    }
    Ok(-1.0 / (2.0 * PI * PI * diff * diff))
}

/// Prediction at one grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionPoint {
    pub t: f64,
    pub tau: f64,
    pub z: f64,
    /// `z(2t) - 2 z(t)`.
    pub conn2: f64,
    /// `n! (D z)^n` for `n = 1..=n_max`.
    pub moments: Vec<f64>,
    /// Sampling envelopes of the moment estimates for `n = 1..=n_max`.
    pub envelopes: Vec<f64>,
    /// Envelope of the `(1/D)|E[SFF^2] - 2 E[SFF]^2|` estimate.
    pub conn2_envelope: f64,
    pub ubar: Option<Complex64>,
    pub sff2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionCurve {
    pub kind: EnsembleKind,
    pub dim: usize,
    pub n_sim: u64,
    pub points: Vec<PredictionPoint>,
}

impl PredictionCurve {
    pub fn new(
        grid: &TimeGrid,
        dim: usize,
        n_max: usize,
        n_sim: u64,
        include_ubar: bool,
    ) -> Result<Self> {
        let kind = grid.kind();
        let taus = grid.taus();
        let points = grid
            .times()
            .iter()
            .zip(taus)
            .map(|(&t, tau)| {
                let zt = z(kind, t, dim)?;
                Ok(PredictionPoint {
                    t,
                    tau,
                    z: zt,
                    conn2: conn2(kind, t, dim)?,
                    moments: (1..=n_max)
                        .map(|n| gaussian_moment(n, dim, zt))
                        .collect::<Result<_>>()?,
                    envelopes: (1..=n_max)
                        .map(|n| sampling_envelope(n, dim, zt, n_sim))
                        .collect::<Result<_>>()?,
                    conn2_envelope: conn2_envelope(dim, zt, n_sim)?,
                    ubar: if include_ubar {
                        Some(ubar(kind, t, dim)?)
                    } else {
                        None
                    },
                    sff2: sff2_exact(kind, t, dim, include_ubar)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            kind,
            dim,
            n_sim,
            points,
        })
    }
}
