//! Standalone SVG plots. Every plotted number is also written verbatim into a
//! `data-*` attribute so a reader can recover it without rasterizing.

use std::fmt::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveStyle {
    Line,
    Points,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub style: CurveStyle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "data")]
pub enum PlotData {
    /// Rows are parameter indices, columns are time steps.
    ParamHeatmap(DMatrix<f64>),
    CurveOverlay(Vec<Curve>),
    /// Empirical CDFs, one per named sample.
    Cdf(Vec<(String, Vec<f64>)>),
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }

    fn axes(&self, out: &mut String) {
        let _ = writeln!(
            out,
            r#"<g class="axes" stroke="black"><line x1="{m}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{m}" y1="{m}" x2="{m}" y2="{b}"/></g>"#,
            m = MARGIN,
            b = HEIGHT - MARGIN,
            r = WIDTH - MARGIN
        );
        let _ = writeln!(
            out,
            r#"<g class="ticks" font-size="10"><text x="{m}" y="{ty}" data-x="{x0}">{x0:.3}</text><text x="{r}" y="{ty}" text-anchor="end" data-x="{x1}">{x1:.3}</text><text x="2" y="{b}" data-y="{y0}">{y0:.3}</text><text x="2" y="{t}" data-y="{y1}">{y1:.3}</text></g>"#,
            m = MARGIN,
            r = WIDTH - MARGIN,
            ty = HEIGHT - MARGIN + 14.0,
            b = HEIGHT - MARGIN,
            t = MARGIN,
            x0 = self.x.0,
            x1 = self.x.1,
            y0 = self.y.0,
            y1 = self.y.1
        );
    }
}

fn header(out: &mut String) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
}

/// Diverging blue/white/red ramp on `t ∈ [−1, 1]`.
fn color(t: f64) -> String {
    let t = t.clamp(-1.0, 1.0);
    let (r, g, b) = if t < 0.0 {
        let s = 1.0 + t;
        (s, s, 1.0)
    } else {
        (1.0, 1.0 - t, 1.0 - t)
    };
    format!("#{:02x}{:02x}{:02x}", (r * 255.0).round() as u8, (g * 255.0).round() as u8, (b * 255.0).round() as u8)
}

fn check_finite(values: impl IntoIterator<Item = f64>) -> Result<()> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::NonFinite("plot data"))
    }
}

pub fn emit_svg(data: &PlotData) -> Result<String> {
    let mut out = String::new();
    match data {
        PlotData::ParamHeatmap(m) => {
            if m.is_empty() {
                return Err(Error::InvalidInput("heatmap needs at least one value".into()));
            }
            check_finite(m.iter().copied())?;
            let scale = m.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            let cw = (WIDTH - 2.0 * MARGIN) / m.ncols() as f64;
            let ch = (HEIGHT - 2.0 * MARGIN) / m.nrows() as f64;
            header(&mut out);
            let _ = writeln!(out, r#"<g class="heatmap" data-rows="{}" data-cols="{}">"#, m.nrows(), m.ncols());
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    let v = m[(r, c)];
                    let t = if scale > 0.0 { v / scale } else { 0.0 };
                    let _ = writeln!(
                        out,
                        r#"<rect x="{:.3}" y="{:.3}" width="{cw:.3}" height="{ch:.3}" fill="{}" data-row="{r}" data-col="{c}" data-value="{v}"/>"#,
                        MARGIN + c as f64 * cw,
                        MARGIN + r as f64 * ch,
                        color(t)
                    );
                }
            }
            out.push_str("</g>\n");
        }
        PlotData::CurveOverlay(curves) => {
            if curves.is_empty() || curves.iter().any(|c| c.x.is_empty()) {
                return Err(Error::InvalidInput("overlay needs non-empty curves".into()));
            }
            if let Some(c) = curves.iter().find(|c| c.x.len() != c.y.len()) {
                return Err(Error::Shape(format!("curve '{}' has {} x and {} y values", c.name, c.x.len(), c.y.len())));
            }
            check_finite(curves.iter().flat_map(|c| c.x.iter().chain(&c.y).copied()))?;
            let frame = Frame {
                x: bounds(curves.iter().flat_map(|c| c.x.iter().copied())),
                y: bounds(curves.iter().flat_map(|c| c.y.iter().copied())),
            };
            header(&mut out);
            frame.axes(&mut out);
            for (k, c) in curves.iter().enumerate() {
                draw_curve(&mut out, &frame, &c.name, &c.x, &c.y, c.style, PALETTE[k % PALETTE.len()]);
            }
        }
        PlotData::Cdf(samples) => {
            if samples.is_empty() || samples.iter().any(|(_, s)| s.is_empty()) {
                return Err(Error::InvalidInput("cdf needs non-empty samples".into()));
            }
            check_finite(samples.iter().flat_map(|(_, s)| s.iter().copied()))?;
            let frame = Frame { x: bounds(samples.iter().flat_map(|(_, s)| s.iter().copied())), y: (0.0, 1.0) };
            header(&mut out);
            frame.axes(&mut out);
            for (k, (name, s)) in samples.iter().enumerate() {
                let mut xs = s.clone();
                xs.sort_by(f64::total_cmp);
                let n = xs.len() as f64;
                let ys: Vec<f64> = (1..=xs.len()).map(|i| i as f64 / n).collect();
                draw_curve(&mut out, &frame, name, &xs, &ys, CurveStyle::Line, PALETTE[k % PALETTE.len()]);
            }
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn draw_curve(out: &mut String, frame: &Frame, name: &str, x: &[f64], y: &[f64], style: CurveStyle, color: &str) {
    let xs = x.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
    let ys = y.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
    match style {
        CurveStyle::Line => {
            let pts: Vec<String> =
                x.iter().zip(y).map(|(&a, &b)| format!("{:.3},{:.3}", frame.px(a), frame.py(b))).collect();
            let _ = writeln!(
                out,
                r#"<polyline class="curve" fill="none" stroke="{color}" points="{}" data-name="{}" data-x="{xs}" data-y="{ys}"/>"#,
                pts.join(" "),
                esc(name)
            );
        }
        CurveStyle::Points => {
            let _ = writeln!(out, r#"<g class="points" fill="{color}" data-name="{}" data-x="{xs}" data-y="{ys}">"#, esc(name));
            for (&a, &b) in x.iter().zip(y) {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.3}" cy="{:.3}" r="2.5" data-x="{a}" data-y="{b}"/>"#,
                    frame.px(a),
                    frame.py(b)
                );
            }
            out.push_str("</g>\n");
        }
    }
}
