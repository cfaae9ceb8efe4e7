//! Figure reproductions: each runs its experiments, writes one results CSV
//! per run and a single SVG with empirical points and dashed predictions.

use std::fs;
use std::path::{Path, PathBuf};

use sff_core::analytics::PredictionCurve;
use sff_core::ensembles::{EnsembleKind, EnsembleSpec};
use sff_core::estimator::{trace_powers, MomentTable, Subtraction};

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::runner::simulate;
use crate::svg::{self, Panel, Series};
use crate::table::{self, ResultRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// Sample counts that finish in minutes on a workstation.
    Desk,
    /// Sample counts quoted with the published figures.
    Published,
}

impl std::str::FromStr for Scale {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "desk" => Ok(Scale::Desk),
            "published" | "paper" => Ok(Scale::Published),
            _ => Err(format!("unknown scale '{s}' (expected desk or published)")),
        }
    }
}

pub const FIGURE_IDS: [u32; 5] = [1, 2, 3, 4, 8];

#[derive(Debug, Clone)]
pub struct FigureOptions {
    pub scale: Scale,
    /// Upper bound on every run's sample count.
    pub nsim_cap: Option<u64>,
    pub seed: u64,
    pub threads: usize,
    pub out: PathBuf,
}

/// One simulated curve with its predictions.
#[derive(Debug, Clone)]
pub struct FigureRun {
    pub label: String,
    pub config: RunConfig,
    pub table: MomentTable,
    pub rows: Vec<ResultRow>,
    pub csv: PathBuf,
}

#[derive(Debug, Clone)]
pub struct FigureOutput {
    pub id: u32,
    pub runs: Vec<FigureRun>,
    pub svg: PathBuf,
    /// Sample counts used against those of the published figure.
    pub notes: Vec<String>,
}

struct Plan {
    kind: EnsembleKind,
    dim: usize,
    tau_max: f64,
    n_times: usize,
    n_sim: u64,
    published_n_sim: u64,
    n_max: usize,
}

fn batches_for(n_sim: u64) -> usize {
    n_sim.clamp(2, 50) as usize
}

impl FigureOptions {
    fn execute(
        &self,
        id: u32,
        tag: usize,
        plan: &Plan,
        notes: &mut Vec<String>,
    ) -> Result<FigureRun> {
        let n_sim = match self.scale {
            Scale::Desk => plan.n_sim,
            Scale::Published => plan.published_n_sim,
        };
        let n_sim = self.nsim_cap.map_or(n_sim, |c| n_sim.min(c));
        let mut cfg = RunConfig::default();
        cfg.ensemble.kind = plan.kind;
        cfg.ensemble.dim = plan.dim;
        cfg.ensemble.seed = self.seed.wrapping_add(tag as u64);
        cfg.grid.tau_max = plan.tau_max;
        cfg.grid.n_times = plan.n_times;
        cfg.run.n_sim = n_sim;
        cfg.run.n_max = plan.n_max;
        cfg.run.batches = batches_for(n_sim);
        cfg.run.threads = self.threads;
        cfg.run.subtract = Subtraction::Empirical;
        cfg.predict.include_ubar = true;
        let label = format!("{} D={} N={}", plan.kind, plan.dim, n_sim);
        notes.push(format!(
            "{label}: published N_sim = {}, run N_sim = {n_sim}",
            plan.published_n_sim
        ));
        let acc = simulate(&cfg)?;
        let table = acc.finalize(cfg.run.subtract)?;
        let pred = PredictionCurve::new(
            acc.grid(),
            plan.dim,
            plan.n_max,
            n_sim,
            cfg.predict.include_ubar,
        )?;
        let rows = table::join(&table, &pred)?;
        let csv = self.out.join(format!(
            "fig{id}_run{tag}_{}_d{}_n{}.csv",
            plan.kind, plan.dim, n_sim
        ));
        table::write_csv(&csv, &rows)?;
        Ok(FigureRun {
            label,
            config: cfg,
            table,
            rows,
            csv,
        })
    }
}

fn col(rows: &[ResultRow], f: impl Fn(&ResultRow) -> f64) -> Vec<f64> {
    rows.iter().map(f).collect()
}

fn taus(rows: &[ResultRow]) -> Vec<f64> {
    col(rows, |r| r.tau)
}

pub fn reproduce(id: u32, opts: &FigureOptions) -> Result<FigureOutput> {
    if !FIGURE_IDS.contains(&id) {
        return Err(HarnessError::Config(format!(
            "unknown figure id {id} (expected one of 1, 2, 3, 4, 8)"
        )));
    }
    fs::create_dir_all(&opts.out).map_err(|e| HarnessError::io(&opts.out, e))?;
    let mut notes = Vec::new();
    let (runs, title, panels, columns) = match id {
        1 => figure1(opts, &mut notes)?,
        2 => figure2(opts, &mut notes)?,
        3 => figure3(opts, &mut notes)?,
        4 => figure4(opts, &mut notes)?,
        8 => figure8(opts, &mut notes)?,
        _ => unreachable!("figure id validated above"),
    };
    let svg_path = opts.out.join(format!("fig{id}.svg"));
    write_svg(&svg_path, &svg::render(&title, &panels, columns))?;
    Ok(FigureOutput {
        id,
        runs,
        svg: svg_path,
        notes,
    })
}

pub fn write_svg(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

type Figure = (Vec<FigureRun>, String, Vec<Panel>, usize);

fn cue_plan(dim: usize, tau_max: f64, n_sim: u64, published_n_sim: u64, n_max: usize) -> Plan {
    Plan {
        kind: EnsembleKind::Cue,
        dim,
        tau_max,
        n_times: (tau_max * dim as f64).round() as usize,
        n_sim,
        published_n_sim,
        n_max,
    }
}

fn gue_plan(dim: usize, tau_max: f64, n_sim: u64, published_n_sim: u64, n_max: usize) -> Plan {
    Plan {
        kind: EnsembleKind::Gue,
        dim,
        tau_max,
        n_times: 40,
        n_sim,
        published_n_sim,
        n_max,
    }
}

/// Mean, fluctuation scale and non-Gaussian deviation of the CUE at D = 20,
/// with one single realization.
fn figure1(opts: &FigureOptions, notes: &mut Vec<String>) -> Result<Figure> {
    let plan = cue_plan(20, 3.0, 200_000, 20_000_000, 2);
    let run = opts.execute(1, 0, &plan, notes)?;
    let r = &run.rows;
    let x = taus(r);
    let spec = EnsembleSpec::new(EnsembleKind::Cue, plan.dim, run.config.ensemble.seed)?;
    let grid = run.config.time_grid()?;
    let single: Vec<f64> = trace_powers(&spec.sample_spectrum(0)?, &grid)
        .iter()
        .map(|u| u.norm_sqr())
        .collect();
    let single_csv = opts.out.join("fig1_single_realization.csv");
    let single_rows: Vec<Vec<f64>> = x.iter().zip(&single).map(|(&t, &s)| vec![t, s]).collect();
    table::write_columns(&single_csv, &["tau", "sff"], &single_rows)?;
    let d = plan.dim as f64;
    let main = Panel::new("CUE D=20", "tau", "SFF")
        .log(true, true)
        .with(Series::points(
            "single realization",
            x.clone(),
            single,
            vec![],
        ))
        .with(Series::points(
            "mean SFF",
            x.clone(),
            col(r, |r| r.mean_sff[0]),
            col(r, |r| r.se_sff[0]),
        ))
        .with(Series::points(
            "std SFF",
            x.clone(),
            col(r, |r| r.variance.unwrap_or(f64::NAN).max(0.0).sqrt()),
            vec![],
        ))
        .with(Series::dashed("D z", x.clone(), col(r, |r| d * r.pred_z)));
    let inset = Panel::new("(1/D)|E[SFF^2] - 2 E[SFF]^2|", "tau", "deviation")
        .with(Series::points(
            "empirical",
            x.clone(),
            col(r, |r| {
                (r.mean_sff[1] - 2.0 * r.mean_sff[0] * r.mean_sff[0]).abs() / d
            }),
            col(r, |r| r.se_conn2_empirical.unwrap_or(0.0)),
        ))
        .with(Series::dashed(
            "|z(2t) - 2 z(t)|",
            x,
            col(r, |r| r.pred_conn2.abs()),
        ));
    Ok((
        vec![run],
        "Spectral form factor statistics".into(),
        vec![main, inset],
        2,
    ))
}

/// Second moment and its subleading correction for D = 5, 10, 100.
fn figure2(opts: &FigureOptions, notes: &mut Vec<String>) -> Result<Figure> {
    let sizes = [
        (5usize, 50_000u64, 50_000u64),
        (10, 500_000, 500_000),
        (100, 20_000, 2_000_000),
    ];
    let mut runs = Vec::new();
    let mut panels = Vec::new();
    let mut tag = 0;
    for kind in [EnsembleKind::Cue, EnsembleKind::Gue] {
        let mut lead = Panel::new(format!("{kind}: E[SFF^2]/D^2"), "tau", "E[SFF^2]/D^2");
        let mut sub = Panel::new(
            format!("{kind}: 2 E[SFF_c]^2/D - E[SFF^2]/D"),
            "tau",
            "2z(t) - z(2t)",
        );
        for &(dim, desk, published) in &sizes {
            let plan = match kind {
                EnsembleKind::Cue => cue_plan(dim, 2.0, desk, published, 2),
                EnsembleKind::Gue => gue_plan(dim, 2.0, desk, published, 2),
            };
            let plan = if kind == EnsembleKind::Cue && dim == 100 {
                Plan {
                    n_times: 40,
                    ..plan
                }
            } else {
                plan
            };
            let run = opts.execute(2, tag, &plan, notes)?;
            tag += 1;
            let r = &run.rows;
            let d2 = (dim * dim) as f64;
            lead = lead.with(Series::points(
                format!("D={dim}"),
                taus(r),
                col(r, |r| r.mean_sff[1] / d2),
                col(r, |r| r.se_sff[1] / d2),
            ));
            sub = sub.with(Series::points(
                format!("D={dim}"),
                taus(r),
                col(r, |r| -r.conn2_empirical.unwrap_or(f64::NAN)),
                col(r, |r| r.se_conn2_empirical.unwrap_or(0.0)),
            ));
            if dim == 100 {
                lead = lead.with(Series::dashed(
                    "2 z^2",
                    taus(r),
                    col(r, |r| 2.0 * r.pred_z * r.pred_z),
                ));
                sub = sub.with(Series::dashed(
                    "2z(t) - z(2t)",
                    taus(r),
                    col(r, |r| -r.pred_conn2),
                ));
            }
            runs.push(run);
        }
        panels.push(lead);
        panels.push(sub);
    }
    // order panels as (a) CUE lead, (b) GUE lead, (c) CUE sub, (d) GUE sub
    panels.swap(1, 2);
    Ok((runs, "Second moment of the SFF".into(), panels, 2))
}

/// Moments n = 1..4 at D = 10 against the Gaussian law.
fn figure3(opts: &FigureOptions, notes: &mut Vec<String>) -> Result<Figure> {
    let mut runs = Vec::new();
    let mut panels = Vec::new();
    for (tag, kind) in [EnsembleKind::Cue, EnsembleKind::Gue]
        .into_iter()
        .enumerate()
    {
        let plan = match kind {
            EnsembleKind::Cue => cue_plan(10, 2.0, 500_000, 500_000, 4),
            EnsembleKind::Gue => gue_plan(10, 2.0, 500_000, 500_000, 4),
        };
        let run = opts.execute(3, tag, &plan, notes)?;
        let r = &run.rows;
        let mut p = Panel::new(format!("{kind} D=10"), "tau", "E[SFF^n]").log(true, true);
        for n in 0..4 {
            p = p.with(Series::points(
                format!("n={}", n + 1),
                taus(r),
                col(r, |r| r.mean_sff[n]),
                col(r, |r| r.se_sff[n]),
            ));
        }
        for n in 0..4 {
            p = p.with(Series::dashed(
                format!("n! (Dz)^{}", n + 1),
                taus(r),
                col(r, |r| r.pred_moment[n]),
            ));
        }
        panels.push(p);
        runs.push(run);
    }
    Ok((runs, "Higher moments of the SFF".into(), panels, 2))
}

/// `(1/D)|E[SFF^2] - 2 E[SFF]^2|` at D = 100 for growing sample counts.
fn figure4(opts: &FigureOptions, notes: &mut Vec<String>) -> Result<Figure> {
    let counts = [(20u64, 20u64), (20_000, 20_000), (200_000, 2_000_000)];
    let mut runs = Vec::new();
    let mut panels = Vec::new();
    let mut tag = 0;
    for kind in [EnsembleKind::Cue, EnsembleKind::Gue] {
        let mut p = Panel::new(
            format!("{kind} D=100"),
            "tau",
            "(1/D)|E[SFF^2] - 2 E[SFF]^2|",
        )
        .log(false, true);
        let mut last = None;
        for &(desk, published) in &counts {
            let plan = match kind {
                EnsembleKind::Cue => Plan {
                    n_times: 40,
                    ..cue_plan(100, 2.0, desk, published, 2)
                },
                EnsembleKind::Gue => gue_plan(100, 2.0, desk, published, 2),
            };
            let run = opts.execute(4, tag, &plan, notes)?;
            tag += 1;
            let r = &run.rows;
            p = p.with(Series::points(
                format!("N={}", run.config.run.n_sim),
                taus(r),
                col(r, |r| {
                    (r.mean_sff[1] - 2.0 * r.mean_sff[0] * r.mean_sff[0]).abs() / 100.0
                }),
                vec![],
            ));
            p = p.with(Series::solid(
                format!("D z^2/sqrt({})", run.config.run.n_sim),
                taus(r),
                col(r, |r| r.conn2_envelope),
            ));
            last = Some(run.rows.clone());
            runs.push(run);
        }
        if let Some(r) = last {
            p = p.with(Series::dashed(
                "|z(2t) - 2 z(t)|",
                taus(&r),
                col(&r, |r| r.pred_conn2.abs()),
            ));
        }
        panels.push(p);
    }
    Ok((
        runs,
        "Oscillations of the subleading correction".into(),
        panels,
        2,
    ))
}

/// Mean, standard deviation and `D |E[SFF^2] - 2 E[SFF]^2|` for D = 2, 3, 4
/// at every integer time up to 3D.
fn figure8(opts: &FigureOptions, notes: &mut Vec<String>) -> Result<Figure> {
    let mut runs = Vec::new();
    let mut panels = Vec::new();
    for (tag, dim) in [2usize, 3, 4].into_iter().enumerate() {
        let run = opts.execute(8, tag, &cue_plan(dim, 3.0, 200_000, 200_000, 2), notes)?;
        let r = &run.rows;
        let d = dim as f64;
        let x = col(r, |r| r.t);
        let p = Panel::new(format!("CUE D={dim}"), "t", "SFF statistics")
            .with(Series::points(
                "mean",
                x.clone(),
                col(r, |r| r.mean_sff[0]),
                col(r, |r| r.se_sff[0]),
            ))
            .with(Series::points(
                "std",
                x.clone(),
                col(r, |r| r.variance.unwrap_or(f64::NAN).max(0.0).sqrt()),
                vec![],
            ))
            .with(Series::points(
                "D |E[SFF^2] - 2 E[SFF]^2|",
                x.clone(),
                col(r, |r| {
                    d * (r.mean_sff[1] - 2.0 * r.mean_sff[0] * r.mean_sff[0]).abs()
                }),
                vec![],
            ))
            .with(Series::dashed("D z", x.clone(), col(r, |r| d * r.pred_z)))
            .with(Series::dashed(
                "std (exact)",
                x.clone(),
                col(r, |r| {
                    (r.pred_sff2 - (d * r.pred_z).powi(2)).max(0.0).sqrt()
                }),
            ))
            .with(Series::dashed(
                "D^2 |Conn2|",
                x,
                col(r, |r| d * d * r.pred_conn2.abs()),
            ));
        panels.push(p);
        runs.push(run);
    }
    Ok((runs, "Very small D".into(), panels, 3))
}
