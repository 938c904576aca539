//! CSV, JSON and SVG writers shared by the subcommands.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

/// 17 significant digits; non-finite values keep their textual form.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Writes a header and rows; `None` cells stay blank.
pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<Option<f64>>]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|c| c.map(num).unwrap_or_default()))?;
    }
    w.flush()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    s.push('\n');
    fs::write(path, s)
}

pub fn ensure_dir(dir: &Path) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    Ok(dir.to_path_buf())
}

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Line plot of polylines in a shared box, with the axis ranges printed in a corner.
pub fn svg_polylines(title: &str, xlabel: &str, ylabel: &str, lines: &[Vec<[f64; 2]>]) -> String {
    let (w, h, m) = (640.0, 480.0, 48.0);
    let pts = lines.iter().flatten().filter(|p| p[0].is_finite() && p[1].is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in pts {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <rect x=\"{m}\" y=\"{m}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>\n\
         <text x=\"{m}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n\
         <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"12\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 12 {})\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"{m}\" y=\"{}\" font-family=\"monospace\" font-size=\"10\">x [{x0:.4}, {x1:.4}]  y [{y0:.4}, {y1:.4}]</text>\n",
        w - 2.0 * m,
        h - 2.0 * m,
        m - 16.0,
        escape(title),
        w / 2.0,
        h - 12.0,
        escape(xlabel),
        h / 2.0,
        h / 2.0,
        escape(ylabel),
        h - m + 14.0,
    );
    for (i, line) in lines.iter().enumerate() {
        let pts: Vec<String> = line
            .iter()
            .filter(|p| p[0].is_finite() && p[1].is_finite())
            .map(|p| format!("{:.2},{:.2}", sx(p[0]), sy(p[1])))
            .collect();
        if pts.is_empty() {
            continue;
        }
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            PALETTE[i % PALETTE.len()],
            pts.join(" ")
        ));
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
