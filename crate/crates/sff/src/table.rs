//! Result rows: estimates joined with predictions, written as versioned CSV.

use std::io::Write;
use std::path::Path;

use sff_core::analytics::PredictionCurve;
use sff_core::estimator::MomentTable;

use crate::error::{HarnessError, Result};

/// First line of every results file.
pub const SCHEMA_LINE: &str = "# sff results v1";

/// One grid time: estimates and the matching predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub t: f64,
    pub tau: f64,
    pub mean_sff: Vec<f64>,
    pub se_sff: Vec<f64>,
    pub mean_u_re: f64,
    pub mean_u_im: f64,
    pub sff_connected: f64,
    pub se_sff_connected: f64,
    pub conn2_empirical: Option<f64>,
    pub se_conn2_empirical: Option<f64>,
    pub variance: Option<f64>,
    pub se_variance: Option<f64>,
    pub pred_z: f64,
    pub pred_conn2: f64,
    pub pred_sff2: f64,
    pub pred_moment: Vec<f64>,
    pub envelope: Vec<f64>,
    pub conn2_envelope: f64,
}

pub fn join(table: &MomentTable, pred: &PredictionCurve) -> Result<Vec<ResultRow>> {
    if table.rows.len() != pred.points.len() {
        return Err(HarnessError::Core(sff_core::Error::Mismatch(
            "estimates and predictions cover different grids".into(),
        )));
    }
    Ok(table
        .rows
        .iter()
        .zip(&pred.points)
        .map(|(r, p)| ResultRow {
            t: r.t,
            tau: r.tau,
            mean_sff: r.moments.clone(),
            se_sff: r.se_moments.clone(),
            mean_u_re: r.mean_u.re,
            mean_u_im: r.mean_u.im,
            sff_connected: r.sff_connected,
            se_sff_connected: r.se_sff_connected,
            conn2_empirical: r.conn2,
            se_conn2_empirical: r.se_conn2,
            variance: r.variance,
            se_variance: r.se_variance,
            pred_z: p.z,
            pred_conn2: p.conn2,
            pred_sff2: p.sff2,
            pred_moment: p.moments.clone(),
            envelope: p.envelopes.clone(),
            conn2_envelope: p.conn2_envelope,
        })
        .collect())
}

pub fn header(n_max: usize) -> Vec<String> {
    let mut h: Vec<String> = vec!["t".into(), "tau".into()];
    h.extend((1..=n_max).map(|k| format!("mean_sff{k}")));
    h.extend((1..=n_max).map(|k| format!("se_sff{k}")));
    for name in [
        "mean_u_re",
        "mean_u_im",
        "sff_connected",
        "se_sff_connected",
        "conn2_empirical",
        "se_conn2_empirical",
        "variance",
        "se_variance",
        "pred_z",
        "pred_conn2",
        "pred_sff2",
    ] {
        h.push(name.into());
    }
    h.extend((1..=n_max).map(|k| format!("pred_moment{k}")));
    h.extend((1..=n_max).map(|k| format!("envelope{k}")));
    h.push("conn2_envelope".into());
    h
}

/// 17 significant digits, enough to round-trip every `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

impl ResultRow {
    fn record(&self) -> Vec<String> {
        let mut v = vec![fmt_float(self.t), fmt_float(self.tau)];
        v.extend(self.mean_sff.iter().copied().map(fmt_float));
        v.extend(self.se_sff.iter().copied().map(fmt_float));
        v.extend([
            fmt_float(self.mean_u_re),
            fmt_float(self.mean_u_im),
            fmt_float(self.sff_connected),
            fmt_float(self.se_sff_connected),
            fmt_opt(self.conn2_empirical),
            fmt_opt(self.se_conn2_empirical),
            fmt_opt(self.variance),
            fmt_opt(self.se_variance),
            fmt_float(self.pred_z),
            fmt_float(self.pred_conn2),
            fmt_float(self.pred_sff2),
        ]);
        v.extend(self.pred_moment.iter().copied().map(fmt_float));
        v.extend(self.envelope.iter().copied().map(fmt_float));
        v.push(fmt_float(self.conn2_envelope));
        v
    }
}

pub fn write_rows<W: Write>(out: W, rows: &[ResultRow]) -> std::io::Result<()> {
    let n_max = rows.first().map_or(0, |r| r.mean_sff.len());
    let mut out = out;
    writeln!(out, "{SCHEMA_LINE}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(n_max))?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_rows(std::io::BufWriter::new(file), rows).map_err(|e| HarnessError::io(path, e))
}

/// Generic CSV writer used for figure data: a header and float columns.
pub fn write_columns(path: &Path, names: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(e) => HarnessError::io(path, e),
        other => HarnessError::Format {
            path: path.into(),
            message: format!("{other:?}"),
        },
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(names).map_err(io)?;
    for r in rows {
        w.write_record(r.iter().map(|x| {
            if x.is_nan() {
                String::new()
            } else {
                fmt_float(*x)
            }
        }))
        .map_err(io)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}
