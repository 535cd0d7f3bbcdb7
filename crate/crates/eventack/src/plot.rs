//! Minimal static SVG line charts for sweep results.

use std::fmt::Write as _;
use std::io::Read;

use serde::Deserialize;

use crate::pipeline::PipelineError;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Deserialize)]
struct SweepRow {
    factor_value: f64,
    order: String,
    mean_eps: f64,
}

/// Groups a sweep CSV into one series per order, in order of first appearance.
pub fn read_sweep_series(reader: impl Read, name: &str) -> Result<Vec<Series>, PipelineError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut series: Vec<Series> = Vec::new();
    for row in rdr.deserialize::<SweepRow>() {
        let r = row.map_err(|e| PipelineError::from_csv(name, e))?;
        match series.iter_mut().find(|s| s.name == r.order) {
            Some(s) => s.points.push((r.factor_value, r.mean_eps)),
            None => series.push(Series {
                name: r.order,
                points: vec![(r.factor_value, r.mean_eps)],
            }),
        }
    }
    if series.is_empty() {
        return Err(PipelineError::EmptyInput(name.to_string()));
    }
    Ok(series)
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Renders the series as an SVG document. Non-finite points are skipped.
pub fn line_chart(series: &[Series], x_label: &str, y_label: &str) -> String {
    let finite = || {
        series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter(|p| p.0.is_finite() && p.1.is_finite())
    };
    let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in finite() {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y1) = (0.0, 1.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let y0 = 0.0;
    let y1 = if y1 > 0.0 { y1 * 1.05 } else { 1.0 };
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - (y - y0) / (y1 - y0) * (H - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let (ax0, ax1, ay0, ay1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let _ = writeln!(
        s,
        r#"<path d="M{ax0} {ay1} L{ax0} {ay0} L{ax1} {ay0}" fill="none" stroke="black"/>"#
    );
    for k in 0..=5 {
        let f = k as f64 / 5.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let (gx, gy) = (px(xv), py(yv));
        let _ = writeln!(
            s,
            r#"<line x1="{gx:.2}" y1="{ay0}" x2="{gx:.2}" y2="{:.2}" stroke="black"/>"#,
            ay0 + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{gx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            ay0 + 18.0,
            tick(xv)
        );
        let _ = writeln!(
            s,
            r##"<line x1="{ax0}" y1="{gy:.2}" x2="{ax1}" y2="{gy:.2}" stroke="#ddd"/>"##
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            ax0 - 6.0,
            gy + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        0.5 * (ax0 + ax1),
        H - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        0.5 * (ay0 + ay1),
        0.5 * (ay0 + ay1),
        escape(y_label)
    );

    for (k, ser) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut d = String::new();
        let mut pen_up = true;
        for &(x, y) in &ser.points {
            if !(x.is_finite() && y.is_finite()) {
                pen_up = true;
                continue;
            }
            let _ = write!(
                d,
                "{}{:.2} {:.2} ",
                if pen_up { "M" } else { "L" },
                px(x),
                py(y)
            );
            pen_up = false;
        }
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            d.trim_end()
        );
        for &(x, y) in ser
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
        {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                px(x),
                py(y)
            );
        }
        let ly = TOP + 10.0 + 20.0 * k as f64;
        let lx = W - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{:.2}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 25.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 32.0,
            ly + 4.0,
            escape(&ser.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 0.01 && v.abs() < 1e4 {
        let t = format!("{v:.3}");
        t.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Per-factor x-axis labels.
pub fn axis_label(factor: &str) -> &'static str {
    match factor {
        "tau" => "tau (s)",
        "noise" => "noise (px)",
        "interval" => "time interval (s)",
        "landmarks" => "landmarks",
        "focal" => "focal length (px)",
        "depth" => "mean depth (units)",
        _ => "factor value",
    }
}
