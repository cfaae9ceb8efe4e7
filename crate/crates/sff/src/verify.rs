//! Deterministic verification suites. No Monte Carlo: every check compares
//! two independent evaluations of the same quantity.

use std::fmt;
use std::str::FromStr;

use rand_core::RngCore;
use sff_core::analytics::{scba_closed_form, scba_solve, sff2_exact};
use sff_core::ensembles::EnsembleKind;
use sff_core::rng::RngStream;
use sff_core::saddle::{f_closed, f_numeric, sff2_timedomain, SaddleConfig};
use sff_core::sine_kernel::{
    assemble_sff2, cycle_integral, four_type_identities, three_cycle_quadrature,
    three_type_identity,
};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Saddles,
    Kernel,
    Scba,
    Identities,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::Saddles,
        Suite::Kernel,
        Suite::Scba,
        Suite::Identities,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Saddles => "saddles",
            Suite::Kernel => "kernel",
            Suite::Scba => "scba",
            Suite::Identities => "identities",
        }
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                format!("unknown suite '{s}' (expected saddles, kernel, scba or identities)")
            })
    }
}

/// Worst error of one group of comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub points: usize,
    pub error: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.error <= self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<40} points {:>4}  error {:.3e}  tolerance {:.1e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.points,
            self.error,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }
}

/// Running maximum of an error measure; NaN counts as a failure.
struct Worst {
    name: String,
    points: usize,
    error: f64,
    tolerance: f64,
}

impl Worst {
    fn new(name: impl Into<String>, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            points: 0,
            error: 0.0,
            tolerance,
        }
    }

    fn add(&mut self, err: f64) {
        self.points += 1;
        self.error = if err.is_nan() {
            f64::INFINITY
        } else {
            self.error.max(err)
        };
    }

    fn done(self) -> Check {
        Check {
            name: self.name,
            points: self.points,
            error: self.error,
            tolerance: self.tolerance,
        }
    }
}

pub fn run(suite: Suite) -> Result<Report> {
    let checks = match suite {
        Suite::Saddles => saddles()?,
        Suite::Kernel => kernel()?,
        Suite::Scba => scba()?,
        Suite::Identities => identities()?,
    };
    Ok(Report { suite, checks })
}

fn uniform(rng: &mut RngStream) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Phases in [-0.5, 0.5] with every pairwise separation at least 0.05.
fn random_phases(rng: &mut RngStream) -> [f64; 4] {
    loop {
        let phi = [0; 4].map(|_| uniform(rng) - 0.5);
        if (0..4).all(|i| (i + 1..4).all(|j| (phi[i] - phi[j]).abs() >= 0.05)) {
            return phi;
        }
    }
}

fn saddles() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for cfg in &SaddleConfig::ALL {
        for dim in [4usize, 10] {
            let mut rng = RngStream::new(0x5add1e, dim as u64);
            let mut w = Worst::new(
                format!("saddle {} D={dim} numeric vs closed", cfg.name()),
                1e-5,
            );
            for _ in 0..20 {
                let phi = random_phases(&mut rng);
                let exact = f_closed(cfg, phi, dim)?;
                let num = f_numeric(cfg, phi, dim)?;
                w.add((num - exact).norm() / exact.norm());
            }
            checks.push(w.done());
        }
    }
    Ok(checks)
}

fn kernel() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for dim in [2usize, 5, 8, 13] {
        let mut three = Worst::new(format!("3-type boxes D={dim}"), 1e-10);
        let mut four = Worst::new(format!("4-type boxes D={dim}"), 1e-10);
        for t in 0..=2 * dim {
            let (lhs, rhs) = three_type_identity(t as f64, dim)?;
            three.add((lhs - rhs).abs());
            let v = four_type_identities(t as f64, dim)?;
            for k in 0..3 {
                four.add((v.boxes[k] - v.closed[k]).abs());
            }
        }
        checks.push(three.done());
        checks.push(four.done());
    }
    let dim = 8;
    let mut quad = Worst::new(format!("box scaling vs quadrature D={dim}"), 0.02);
    for t in 1..dim / 2 {
        let t = t as f64;
        let freqs = [2.0 * t, -t, -t];
        let numeric = three_cycle_quadrature(dim, freqs, 48)?;
        let boxed = cycle_integral(&freqs, dim)?;
        quad.add((boxed - numeric).abs() / numeric.abs());
    }
    checks.push(quad.done());
    Ok(checks)
}

fn scba() -> Result<Vec<Check>> {
    let dim = 50;
    let mut green = Worst::new("fixed point vs closed form", 1e-10);
    let mut density = Worst::new(format!("density vs semicircle D={dim}"), 1e-9);
    for k in 0..100 {
        let lambda = -2.0 + (k as f64 + 0.5) * 0.04;
        let s = scba_solve(lambda, dim)?;
        green.add((s.green - scba_closed_form(lambda)?).norm());
        let rho = dim as f64 / (2.0 * std::f64::consts::PI) * (4.0 - lambda * lambda).sqrt();
        density.add((s.density - rho).abs() / rho);
    }
    Ok(vec![green.done(), density.done()])
}

fn identities() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for dim in [2usize, 3, 4, 5, 10] {
        let d = dim as f64;
        let mut kernel = Worst::new(format!("sine kernel vs exact D={dim}"), 1e-12);
        let mut time = Worst::new(format!("time domain vs exact D={dim}"), 1e-12);
        let mut full = Worst::new(format!("with mean trace, t>=1, D={dim}"), 1e-12);
        for t in 0..=3 * dim {
            let t = t as f64;
            let exact = sff2_exact(EnsembleKind::Cue, t, dim, false)?;
            let scale = exact.abs().max(1.0);
            kernel.add((assemble_sff2(t, dim, false)? - exact).abs() / scale);
            time.add((sff2_timedomain(t / d, dim)?.total() - exact).abs() / scale);
            if t >= 1.0 {
                let reference = sff2_exact(EnsembleKind::Cue, t, dim, true)?;
                let td = sff2_timedomain(t / d, dim)?.total();
                let kr = assemble_sff2(t, dim, true)?;
                let scale = reference.abs().max(1.0);
                full.add(((reference - td).abs().max((kr - td).abs())) / scale);
            }
        }
        checks.extend([kernel.done(), time.done(), full.done()]);
    }
    Ok(checks)
}
