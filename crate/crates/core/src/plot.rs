//! Deterministic SVG 1.1 charts: the objective space with its Pareto front,
//! and the weighted objective against the weight.
//!
//! Output depends only on the input values. Coordinates are printed with two
//! decimals and element order follows the input order.

use std::fmt::Write as _;

use thiserror::Error;

use crate::objectives::ObjectiveTable;
use crate::optimizer::{pareto_front, SelectionResult};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

#[derive(Debug, Error, PartialEq)]
pub enum PlotError {
    #[error("nothing to plot: {0}")]
    Empty(&'static str),
    #[error("non-finite value in plot data")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, PlotError>;

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    /// Span of `values` widened to whole units with one unit of padding.
    fn fit(values: impl Iterator<Item = f64>) -> Self {
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
        let lo = lo.floor();
        let mut hi = hi.ceil();
        if hi <= lo {
            hi = lo + 1.0;
        }
        Axis { lo, hi }
    }

    fn ticks(&self) -> Vec<f64> {
        let span = self.hi - self.lo;
        let step = if span <= 2.0 {
            0.2
        } else if span <= 5.0 {
            0.5
        } else {
            1.0
        };
        let n = (span / step).round() as usize;
        (0..=n).map(|i| self.lo + i as f64 * step).collect()
    }
}

struct Frame {
    x: Axis,
    y: Axis,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.lo) / (self.x.hi - self.x.lo) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.lo) / (self.y.hi - self.y.lo) * (HEIGHT - 2.0 * MARGIN)
    }

    fn draw(&self, out: &mut String, title: &str, x_label: &str, y_label: &str) {
        let (x0, x1) = (MARGIN, WIDTH - MARGIN);
        let (y0, y1) = (HEIGHT - MARGIN, MARGIN);
        let _ = writeln!(
            out,
            r##"<rect x="0" y="0" width="{WIDTH:.0}" height="{HEIGHT:.0}" fill="#ffffff"/>"##
        );
        let _ = writeln!(
            out,
            r##"<text x="{:.2}" y="30.00" text-anchor="middle" font-size="16">{}</text>"##,
            WIDTH / 2.0,
            escape(title)
        );
        let _ = writeln!(
            out,
            r##"<path d="M{x0:.2} {y1:.2} L{x0:.2} {y0:.2} L{x1:.2} {y0:.2}" stroke="#000000" fill="none"/>"##
        );
        for t in self.x.ticks() {
            let x = self.px(t);
            let _ = writeln!(
                out,
                r##"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="#000000"/><text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="11">{t:.1}</text>"##,
                y0 + 5.0,
                y0 + 18.0
            );
        }
        for t in self.y.ticks() {
            let y = self.py(t);
            let _ = writeln!(
                out,
                r##"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="#000000"/><text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11">{t:.1}</text>"##,
                x0 - 5.0,
                x0 - 8.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            out,
            r##"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{}</text>"##,
            WIDTH / 2.0,
            HEIGHT - 15.0,
            escape(x_label)
        );
        let _ = writeln!(
            out,
            r##"<text x="18.00" y="{:.2}" text-anchor="middle" font-size="13" transform="rotate(-90 18.00 {:.2})">{}</text>"##,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(y_label)
        );
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn open() -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH:.0}\" height=\"{HEIGHT:.0}\" viewBox=\"0 0 {WIDTH:.0} {HEIGHT:.0}\">\n"
    )
}

fn polyline(out: &mut String, points: &[(f64, f64)], color: &str, dashed: bool) {
    let pts: Vec<String> = points
        .iter()
        .map(|(x, y)| format!("{x:.2},{y:.2}"))
        .collect();
    let dash = if dashed {
        r#" stroke-dasharray="4 3""#
    } else {
        ""
    };
    let _ = writeln!(
        out,
        r#"<polyline points="{}" stroke="{color}" stroke-width="2" fill="none"{dash}/>"#,
        pts.join(" ")
    );
}

/// All usable rows as points, the Pareto front as a red polyline in
/// ascending `f1`.
pub fn pareto_svg(table: &ObjectiveTable) -> Result<String> {
    let points: Vec<(f64, f64)> = table.usable().filter_map(|r| r.normalized()).collect();
    if points.is_empty() {
        return Err(PlotError::Empty("table has no usable rows"));
    }
    if points.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
        return Err(PlotError::NonFinite);
    }
    let front: Vec<(f64, f64)> = pareto_front(table)
        .iter()
        .filter_map(|r| r.normalized())
        .collect();
    let frame = Frame {
        x: Axis::fit(points.iter().map(|p| p.0)),
        y: Axis::fit(points.iter().map(|p| p.1)),
    };
    let mut out = open();
    frame.draw(
        &mut out,
        &format!("Objective space: {}", table.sediment),
        "f1 (normalized)",
        "f2 (normalized)",
    );
    for row in table.usable() {
        let (a, b) = row.normalized().expect("usable");
        let _ = writeln!(
            out,
            r##"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="#7f7f7f"><title>{}</title></circle>"##,
            frame.px(a),
            frame.py(b),
            row.pattern
        );
    }
    let mapped: Vec<(f64, f64)> = front
        .iter()
        .map(|&(a, b)| (frame.px(a), frame.py(b)))
        .collect();
    polyline(&mut out, &mapped, "#ff0000", false);
    for (x, y) in &mapped {
        let _ = writeln!(
            out,
            r##"<circle cx="{x:.2}" cy="{y:.2}" r="4.5" fill="#ff0000"/>"##
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// One `F(w1)` curve per labelled sweep.
pub fn sweep_svg(series: &[(String, Vec<SelectionResult>)]) -> Result<String> {
    if series.is_empty() || series.iter().any(|(_, s)| s.is_empty()) {
        return Err(PlotError::Empty("no sweep results"));
    }
    let all = || series.iter().flat_map(|(_, s)| s.iter());
    if all().any(|s| !s.value.is_finite()) {
        return Err(PlotError::NonFinite);
    }
    let frame = Frame {
        x: Axis { lo: 0.0, hi: 1.0 },
        y: Axis::fit(all().map(|s| s.value)),
    };
    let mut out = open();
    frame.draw(&mut out, "Weighted objective", "w1", "F = w1 f1 + w2 f2");
    for (i, (label, results)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = results
            .iter()
            .map(|s| (frame.px(s.weights.w1()), frame.py(s.value)))
            .collect();
        polyline(&mut out, &pts, color, false);
        for ((x, y), s) in pts.iter().zip(results) {
            let _ = writeln!(
                out,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"><title>{}</title></circle>"#,
                s.chosen
            );
        }
        let ly = MARGIN + 16.0 * i as f64;
        let lx = WIDTH - MARGIN - 120.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
            lx + 20.0,
            lx + 25.0,
            ly + 4.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
