//! Static SVG plots: panels of empirical points with error bars and dashed
//! prediction curves, fixed styling.

use std::fmt::Write as _;

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 62.0;
const MARGIN_R: f64 = 14.0;
const MARGIN_T: f64 = 28.0;
const MARGIN_B: f64 = 44.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Style {
    /// Markers with symmetric error bars (`err` may be empty).
    Points {
        err: Vec<f64>,
    },
    Dashed,
    Solid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub style: Style,
}

impl Series {
    pub fn points(label: impl Into<String>, x: Vec<f64>, y: Vec<f64>, err: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            x,
            y,
            style: Style::Points { err },
        }
    }

    pub fn dashed(label: impl Into<String>, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            x,
            y,
            style: Style::Dashed,
        }
    }

    pub fn solid(label: impl Into<String>, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            x,
            y,
            style: Style::Solid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

impl Panel {
    pub fn new(
        title: impl Into<String>,
        x_label: impl Into<String>,
        y_label: impl Into<String>,
    ) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            ..Self::default()
        }
    }

    pub fn log(mut self, x: bool, y: bool) -> Self {
        self.log_x = x;
        self.log_y = y;
        self
    }

    pub fn with(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Axis mapping with optional log scale; non-positive values are dropped on
/// log axes.
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.04 * (hi - lo);
        Self {
            lo: lo - pad,
            hi: hi + pad,
            log,
        }
    }

    fn frac(&self, v: f64) -> Option<f64> {
        if !v.is_finite() || (self.log && v <= 0.0) {
            return None;
        }
        let v = if self.log { v.log10() } else { v };
        Some((v - self.lo) / (self.hi - self.lo))
    }

    /// Tick positions in data units.
    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i32, self.hi.floor() as i32);
            let step = ((b - a) / 6 + 1).max(1);
            return (a..=b)
                .step_by(step as usize)
                .map(|e| 10f64.powi(e))
                .collect();
        }
        let span = self.hi - self.lo;
        let raw = span / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let first = (self.lo / step).ceil() as i64;
        let last = (self.hi / step).floor() as i64;
        (first..=last).map(|k| k as f64 * step).collect()
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        return format!("{v:.0e}");
    }
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn render_panel(out: &mut String, p: &Panel, ox: f64, oy: f64) {
    let w = PANEL_W - MARGIN_L - MARGIN_R;
    let h = PANEL_H - MARGIN_T - MARGIN_B;
    let (x0, y0) = (ox + MARGIN_L, oy + MARGIN_T);
    let xa = Axis::fit(p.series.iter().flat_map(|s| s.x.iter().copied()), p.log_x);
    let ya = Axis::fit(
        p.series.iter().flat_map(|s| {
            let err: &[f64] = match &s.style {
                Style::Points { err } => err,
                _ => &[],
            };
            s.y.iter()
                .enumerate()
                .flat_map(move |(i, &y)| {
                    let e = err.get(i).copied().unwrap_or(0.0);
                    [y - e, y + e]
                })
                .collect::<Vec<_>>()
        }),
        p.log_y,
    );
    let px = |v: f64| xa.frac(v).map(|f| x0 + f * w);
    let py = |v: f64| ya.frac(v).map(|f| y0 + (1.0 - f) * h);

    let _ = writeln!(
        out,
        r##"<rect x="{x0:.1}" y="{y0:.1}" width="{w:.1}" height="{h:.1}" fill="none" stroke="#333"/>"##
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="13">{}</text>"#,
        x0 + w / 2.0,
        oy + 18.0,
        escape(&p.title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{}</text>"#,
        x0 + w / 2.0,
        oy + PANEL_H - 6.0,
        escape(&p.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12" transform="rotate(-90 {:.1} {:.1})">{}</text>"#,
        ox + 14.0,
        y0 + h / 2.0,
        ox + 14.0,
        y0 + h / 2.0,
        escape(&p.y_label)
    );
    for t in xa.ticks() {
        if let Some(x) = px(t) {
            let _ = writeln!(
                out,
                r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#333"/><text x="{x:.1}" y="{:.1}" text-anchor="middle" font-size="10">{}</text>"##,
                y0 + h,
                y0 + h + 4.0,
                y0 + h + 15.0,
                tick_label(t)
            );
        }
    }
    for t in ya.ticks() {
        if let Some(y) = py(t) {
            let _ = writeln!(
                out,
                r##"<line x1="{:.1}" y1="{y:.1}" x2="{x0:.1}" y2="{y:.1}" stroke="#333"/><text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{}</text>"##,
                x0 - 4.0,
                x0 - 6.0,
                y + 3.5,
                tick_label(t)
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<clipPath id="c{ox:.0}_{oy:.0}"><rect x="{x0:.1}" y="{y0:.1}" width="{w:.1}" height="{h:.1}"/></clipPath><g clip-path="url(#c{ox:.0}_{oy:.0})">"#
    );
    for (k, s) in p.series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        match &s.style {
            Style::Points { err } => {
                for (i, (&x, &y)) in s.x.iter().zip(&s.y).enumerate() {
                    let (Some(cx), Some(cy)) = (px(x), py(y)) else {
                        continue;
                    };
                    if let Some(&e) = err.get(i) {
                        if let (Some(a), Some(b)) = (py(y - e), py(y + e)) {
                            let _ = writeln!(
                                out,
                                r#"<line x1="{cx:.1}" y1="{a:.1}" x2="{cx:.1}" y2="{b:.1}" stroke="{color}" stroke-width="1"/>"#
                            );
                        }
                    }
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{cx:.1}" cy="{cy:.1}" r="2.5" fill="{color}"/>"#
                    );
                }
            }
            Style::Dashed | Style::Solid => {
                let pts: Vec<String> =
                    s.x.iter()
                        .zip(&s.y)
                        .filter_map(|(&x, &y)| Some(format!("{:.1},{:.1}", px(x)?, py(y)?)))
                        .collect();
                let dash = if s.style == Style::Dashed {
                    r#" stroke-dasharray="6 4""#
                } else {
                    ""
                };
                let _ = writeln!(
                    out,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
                    pts.join(" ")
                );
            }
        }
    }
    out.push_str("</g>\n");
    for (k, s) in p.series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let ly = y0 + 12.0 + 14.0 * k as f64;
        let lx = x0 + 8.0;
        let mark = match s.style {
            Style::Points { .. } => format!(
                r#"<circle cx="{:.1}" cy="{:.1}" r="2.5" fill="{color}"/>"#,
                lx + 8.0,
                ly - 3.5
            ),
            Style::Dashed => format!(
                r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-dasharray="4 3"/>"#,
                ly - 3.5,
                lx + 16.0,
                ly - 3.5
            ),
            Style::Solid => format!(
                r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}"/>"#,
                ly - 3.5,
                lx + 16.0,
                ly - 3.5
            ),
        };
        let _ = writeln!(
            out,
            r#"{mark}<text x="{:.1}" y="{ly:.1}" font-size="10">{}</text>"#,
            lx + 20.0,
            escape(&s.label)
        );
    }
}

/// Lays panels out on a grid with `columns` columns.
pub fn render(title: &str, panels: &[Panel], columns: usize) -> String {
    let columns = columns.max(1).min(panels.len().max(1));
    let rows = panels.len().div_ceil(columns).max(1);
    let width = PANEL_W * columns as f64;
    let height = PANEL_H * rows as f64 + 30.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="15">{}</text>"#,
        width / 2.0,
        escape(title)
    );
    for (i, p) in panels.iter().enumerate() {
        let ox = PANEL_W * (i % columns) as f64;
        let oy = 30.0 + PANEL_H * (i / columns) as f64;
        render_panel(&mut out, p, ox, oy);
    }
    out.push_str("</svg>\n");
    out
}
