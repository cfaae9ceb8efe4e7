//! Run configuration: a TOML file with one table per concern, plus command
//! line overrides applied on top.

use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sff_core::ensembles::{EnsembleKind, EnsembleSpec, HeisenbergTime, ThConvention};
use sff_core::estimator::{MomentAccumulator, Subtraction, TimeGrid};

use crate::error::{HarnessError, Result};

/// Largest supported moment order.
pub const MAX_N_MAX: usize = 4;

/// GUE Heisenberg-time convention as written in config files and flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ThFlag {
    /// `t_H = pi D / 2`.
    #[default]
    #[serde(rename = "default")]
    Default,
    /// `t_H = 2 D`.
    #[serde(rename = "2d")]
    TwoD,
}

impl From<ThFlag> for ThConvention {
    fn from(f: ThFlag) -> Self {
        match f {
            ThFlag::Default => ThConvention::HalfPiD,
            ThFlag::TwoD => ThConvention::TwoD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSection {
    pub kind: EnsembleKind,
    pub dim: usize,
    pub seed: u64,
    pub th_convention: ThFlag,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            kind: EnsembleKind::Cue,
            dim: 10,
            seed: 1,
            th_convention: ThFlag::Default,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub tau_max: f64,
    pub n_times: usize,
    /// Explicit times; replaces `tau_max` and `n_times` when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            tau_max: 3.0,
            n_times: 30,
            times: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub n_sim: u64,
    pub n_max: usize,
    pub batches: usize,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
    pub subtract: Subtraction,
    /// Half-open range of batch indices to run; all batches when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_range: Option<[usize; 2]>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            n_sim: 10_000,
            n_max: 4,
            batches: 50,
            threads: 0,
            subtract: Subtraction::Empirical,
            batch_range: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictSection {
    /// Keep the terms of the exact second-moment law that involve the mean trace.
    pub include_ubar: bool,
}

impl Default for PredictSection {
    fn default() -> Self {
        Self { include_ubar: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub plot: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("sff-out"),
            plot: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub ensemble: EnsembleSection,
    pub grid: GridSection,
    pub run: RunSection,
    pub predict: PredictSection,
    pub output: OutputSection,
}

/// Values given on the command line; `None` keeps the file or default value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub kind: Option<EnsembleKind>,
    pub dim: Option<usize>,
    pub seed: Option<u64>,
    pub th_convention: Option<ThFlag>,
    pub tau_max: Option<f64>,
    pub n_times: Option<usize>,
    pub times: Option<Vec<f64>>,
    pub n_sim: Option<u64>,
    pub n_max: Option<usize>,
    pub batches: Option<usize>,
    pub threads: Option<usize>,
    pub subtract: Option<Subtraction>,
    pub batch_range: Option<[usize; 2]>,
    pub include_ubar: Option<bool>,
    pub out: Option<PathBuf>,
    pub plot: Option<bool>,
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Config(m) => config_err(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_else(|e| unreachable!("config always serialises: {e}"))
    }

    /// Flags win over the file.
    pub fn apply(&mut self, o: Overrides) {
        let Overrides {
            kind,
            dim,
            seed,
            th_convention,
            tau_max,
            n_times,
            times,
            n_sim,
            n_max,
            batches,
            threads,
            subtract,
            batch_range,
            include_ubar,
            out,
            plot,
        } = o;
        macro_rules! set {
            ($field:expr, $value:expr) => {
                if let Some(v) = $value {
                    $field = v;
                }
            };
        }
        set!(self.ensemble.kind, kind);
        set!(self.ensemble.dim, dim);
        set!(self.ensemble.seed, seed);
        set!(self.ensemble.th_convention, th_convention);
        if tau_max.is_some() || n_times.is_some() {
            self.grid.times = None;
        }
        set!(self.grid.tau_max, tau_max);
        set!(self.grid.n_times, n_times);
        if times.is_some() {
            self.grid.times = times;
        }
        set!(self.run.n_sim, n_sim);
        set!(self.run.n_max, n_max);
        set!(self.run.batches, batches);
        set!(self.run.threads, threads);
        set!(self.run.subtract, subtract);
        if batch_range.is_some() {
            self.run.batch_range = batch_range;
        }
        set!(self.predict.include_ubar, include_ubar);
        set!(self.output.dir, out);
        set!(self.output.plot, plot);
    }

    /// Checks every field and names the first offending one.
    pub fn validate(&self) -> Result<()> {
        let e = &self.ensemble;
        let r = &self.run;
        let g = &self.grid;
        if e.dim == 0 {
            return Err(config_err("ensemble.dim must be at least 1"));
        }
        if !(1..=MAX_N_MAX).contains(&r.n_max) {
            return Err(config_err(format!(
                "run.n_max must be in 1..={MAX_N_MAX}, got {}",
                r.n_max
            )));
        }
        if r.batches < 2 {
            return Err(config_err(format!(
                "run.batches must be at least 2, got {}",
                r.batches
            )));
        }
        if r.n_sim < r.batches as u64 {
            return Err(config_err(format!(
                "run.n_sim ({}) must be at least run.batches ({})",
                r.n_sim, r.batches
            )));
        }
        if let Some([a, b]) = r.batch_range {
            if a >= b || b > r.batches {
                return Err(config_err(format!(
                    "run.batch_range [{a}, {b}) must be a non-empty part of [0, {})",
                    r.batches
                )));
            }
        }
        match &g.times {
            Some(times) => {
                if times.is_empty() {
                    return Err(config_err("grid.times must not be empty"));
                }
                if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
                    return Err(config_err("grid.times must be finite and non-negative"));
                }
                if times.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(config_err("grid.times must be strictly increasing"));
                }
                if e.kind == EnsembleKind::Cue && times.iter().any(|t| t.fract() != 0.0) {
                    return Err(config_err("grid.times must be integers for the CUE"));
                }
            }
            None => {
                if !g.tau_max.is_finite() || g.tau_max <= 0.0 {
                    return Err(config_err(format!(
                        "grid.tau_max must be positive, got {}",
                        g.tau_max
                    )));
                }
                if g.n_times == 0 {
                    return Err(config_err("grid.n_times must be at least 1"));
                }
            }
        }
        Ok(())
    }

    pub fn heisenberg(&self) -> HeisenbergTime {
        HeisenbergTime::for_kind(
            self.ensemble.kind,
            self.ensemble.dim,
            self.ensemble.th_convention.into(),
        )
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        let kind = self.ensemble.kind;
        let grid = match &self.grid.times {
            Some(times) => TimeGrid::new(kind, self.heisenberg(), times.clone()),
            None => TimeGrid::from_tau_range(
                kind,
                self.heisenberg(),
                self.grid.tau_max,
                self.grid.n_times,
            ),
        };
        grid.map_err(|e| config_err(format!("time grid: {e}")))
    }

    pub fn ensemble_spec(&self) -> Result<EnsembleSpec> {
        Ok(EnsembleSpec::new(
            self.ensemble.kind,
            self.ensemble.dim,
            self.ensemble.seed,
        )?)
    }

    pub fn accumulator(&self) -> Result<MomentAccumulator> {
        Ok(MomentAccumulator::new(
            self.time_grid()?,
            self.ensemble.dim,
            self.run.n_max,
            self.run.n_sim,
            self.run.batches,
        )?)
    }

    /// Batch indices this run is responsible for.
    pub fn batch_indices(&self) -> Range<usize> {
        match self.run.batch_range {
            Some([a, b]) => a..b,
            None => 0..self.run.batches,
        }
    }
}

pub fn parse_kind(s: &str) -> std::result::Result<EnsembleKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "cue" => Ok(EnsembleKind::Cue),
        "gue" => Ok(EnsembleKind::Gue),
        _ => Err(format!("unknown ensemble '{s}' (expected cue or gue)")),
    }
}

pub fn parse_subtraction(s: &str) -> std::result::Result<Subtraction, String> {
    match s.to_ascii_lowercase().as_str() {
        "empirical" => Ok(Subtraction::Empirical),
        "analytic" => Ok(Subtraction::Analytic),
        _ => Err(format!(
            "unknown subtraction '{s}' (expected empirical or analytic)"
        )),
    }
}

pub fn parse_th(s: &str) -> std::result::Result<ThFlag, String> {
    match s.to_ascii_lowercase().as_str() {
        "default" => Ok(ThFlag::Default),
        "2d" => Ok(ThFlag::TwoD),
        _ => Err(format!(
            "unknown Heisenberg-time convention '{s}' (expected default or 2d)"
        )),
    }
}

/// `A:B`, a half-open range of batch indices.
pub fn parse_batch_range(s: &str) -> std::result::Result<[usize; 2], String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected A:B, got '{s}'"))?;
    let a = a
        .trim()
        .parse()
        .map_err(|_| format!("bad batch index '{a}'"))?;
    let b = b
        .trim()
        .parse()
        .map_err(|_| format!("bad batch index '{b}'"))?;
    Ok([a, b])
}

/// Comma-separated list of times.
pub fn parse_times(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad time '{x}'"))
        })
        .collect()
}
