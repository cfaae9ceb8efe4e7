//! The work behind each subcommand, separated from argument parsing.

use std::fs;
use std::path::{Path, PathBuf};

use sff_core::analytics::PredictionCurve;
use sff_core::estimator::{MomentAccumulator, MomentTable};

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::runner;
use crate::snapshot::Snapshot;
use crate::svg::{self, Panel, Series};
use crate::table::{self, ResultRow};

pub const RESULTS_FILE: &str = "results.csv";
pub const SNAPSHOT_FILE: &str = "snapshot.json";
pub const CONFIG_FILE: &str = "config.toml";
pub const PLOT_FILE: &str = "results.svg";
pub const PREDICTIONS_FILE: &str = "predictions.csv";

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub snapshot: Snapshot,
    /// Absent when fewer than two batches hold samples.
    pub table: Option<MomentTable>,
    pub rows: Vec<ResultRow>,
    pub files: Vec<PathBuf>,
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

/// Runs the configured simulation and writes results, snapshot and config
/// into the output directory.
pub fn simulate(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let acc = runner::simulate(cfg)?;
    write_outputs(cfg, acc)
}

/// Merges snapshots of one run; the merged state is written like a fresh run.
pub fn merge(paths: &[PathBuf], out: Option<PathBuf>) -> Result<RunOutput> {
    let (first, rest) = paths
        .split_first()
        .ok_or_else(|| HarnessError::Config("merge needs at least one snapshot".into()))?;
    let mut merged = Snapshot::load(first)?;
    for p in rest {
        merged.merge(&Snapshot::load(p)?)?;
    }
    let mut cfg = merged.config.clone();
    if let Some(out) = out {
        cfg.output.dir = out;
    }
    write_outputs(&cfg, merged.accumulator)
}

fn write_outputs(cfg: &RunConfig, acc: MomentAccumulator) -> Result<RunOutput> {
    let dir = &cfg.output.dir;
    create_dir(dir)?;
    let mut files = Vec::new();

    let config_path = dir.join(CONFIG_FILE);
    fs::write(&config_path, cfg.to_toml()).map_err(|e| HarnessError::io(&config_path, e))?;
    files.push(config_path);

    let snapshot = Snapshot::new(cfg.clone(), acc);
    let snap_path = dir.join(SNAPSHOT_FILE);
    snapshot.save(&snap_path)?;
    files.push(snap_path);

    let acc = &snapshot.accumulator;
    let filled = snapshot.filled_batches().len();
    let (table, rows) = if filled >= 2 {
        let table = acc.finalize(cfg.run.subtract)?;
        let pred = PredictionCurve::new(
            acc.grid(),
            acc.dim(),
            acc.n_max(),
            table.samples,
            cfg.predict.include_ubar,
        )?;
        let rows = table::join(&table, &pred)?;
        let csv_path = dir.join(RESULTS_FILE);
        table::write_csv(&csv_path, &rows)?;
        files.push(csv_path);
        if cfg.output.plot {
            let svg_path = dir.join(PLOT_FILE);
            let title = format!(
                "{} D={} N={}",
                cfg.ensemble.kind, cfg.ensemble.dim, table.samples
            );
            crate::figures::write_svg(
                &svg_path,
                &svg::render(&title, &result_panels(cfg, &rows), 2),
            )?;
            files.push(svg_path);
        }
        (Some(table), rows)
    } else {
        (None, Vec::new())
    };
    Ok(RunOutput {
        snapshot,
        table,
        rows,
        files,
    })
}

fn result_panels(cfg: &RunConfig, rows: &[ResultRow]) -> Vec<Panel> {
    let d = cfg.ensemble.dim as f64;
    let x: Vec<f64> = rows.iter().map(|r| r.tau).collect();
    let mut panels = vec![Panel::new("mean SFF / D", "tau", "SFF/D")
        .with(Series::points(
            "empirical",
            x.clone(),
            rows.iter().map(|r| r.mean_sff[0] / d).collect(),
            rows.iter().map(|r| r.se_sff[0] / d).collect(),
        ))
        .with(Series::dashed(
            "z",
            x.clone(),
            rows.iter().map(|r| r.pred_z).collect(),
        ))];
    if rows.first().is_some_and(|r| r.conn2_empirical.is_some()) {
        panels.push(
            Panel::new("Conn2", "tau", "(E[SFF^2] - 2 E[SFF_c]^2)/D")
                .with(Series::points(
                    "empirical",
                    x.clone(),
                    rows.iter()
                        .map(|r| r.conn2_empirical.unwrap_or(f64::NAN))
                        .collect(),
                    rows.iter()
                        .map(|r| r.se_conn2_empirical.unwrap_or(0.0))
                        .collect(),
                ))
                .with(Series::dashed(
                    "z(2t) - 2 z(t)",
                    x,
                    rows.iter().map(|r| r.pred_conn2).collect(),
                )),
        );
    }
    panels
}

/// Writes the analytic curves for the configured grid without sampling.
pub fn predict(cfg: &RunConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let grid = cfg.time_grid()?;
    let pred = PredictionCurve::new(
        &grid,
        cfg.ensemble.dim,
        cfg.run.n_max,
        cfg.run.n_sim,
        cfg.predict.include_ubar,
    )?;
    let n = cfg.run.n_max;
    let mut names: Vec<String> = ["t", "tau", "z", "conn2", "sff2", "ubar_re", "ubar_im"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    names.extend((1..=n).map(|k| format!("moment{k}")));
    names.extend((1..=n).map(|k| format!("envelope{k}")));
    names.push("conn2_envelope".into());
    let rows: Vec<Vec<f64>> = pred
        .points
        .iter()
        .map(|p| {
            let (ur, ui) = p.ubar.map_or((f64::NAN, f64::NAN), |u| (u.re, u.im));
            let mut v = vec![p.t, p.tau, p.z, p.conn2, p.sff2, ur, ui];
            v.extend(&p.moments);
            v.extend(&p.envelopes);
            v.push(p.conn2_envelope);
            v
        })
        .collect();
    create_dir(&cfg.output.dir)?;
    let path = cfg.output.dir.join(PREDICTIONS_FILE);
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    table::write_columns(&path, &names, &rows)?;
    Ok(path)
}
