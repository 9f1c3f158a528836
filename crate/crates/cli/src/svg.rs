//! Deterministic SVG figures.

use std::fmt::Write;

use ndarray::Array2;

pub const CELL_PX: usize = 32;
const MARGIN_PX: usize = 40;

/// Gray level (0 = black) for `value` on a scale whose maximum is `max`.
fn gray(value: f64, max: f64) -> u8 {
    if max <= 0.0 {
        return 255;
    }
    let t = (value / max).clamp(0.0, 1.0);
    (255.0 * (1.0 - t)).round() as u8
}

/// Grayscale heatmap of a non-negative matrix with fixed 32 px cells. Darker
/// cells carry more mass; an all-zero matrix renders white. `labels` name the
/// rows and columns.
pub fn heatmap(matrix: &Array2<f64>, labels: &[usize]) -> String {
    let (rows, cols) = matrix.dim();
    let max = matrix.iter().copied().fold(0.0, f64::max);
    let width = MARGIN_PX + cols * CELL_PX;
    let height = MARGIN_PX + rows * CELL_PX;
    let label = |i: usize| labels.get(i).map_or_else(|| (i + 1).to_string(), |l| l.to_string());
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(s, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(s, r#"<g font-family="monospace" font-size="12" text-anchor="middle">"#);
    for j in 0..cols {
        let x = MARGIN_PX + j * CELL_PX + CELL_PX / 2;
        let _ = writeln!(s, r#"<text x="{x}" y="{}">{}</text>"#, MARGIN_PX - 8, label(j));
    }
    for i in 0..rows {
        let y = MARGIN_PX + i * CELL_PX + CELL_PX / 2 + 4;
        let _ = writeln!(s, r#"<text x="{}" y="{y}">{}</text>"#, MARGIN_PX / 2, label(i));
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g class="cells" stroke="gray" stroke-width="0.5">"#);
    for ((i, j), &v) in matrix.indexed_iter() {
        let g = gray(v, max);
        let _ = writeln!(
            s,
            r##"<rect class="cell" x="{}" y="{}" width="{CELL_PX}" height="{CELL_PX}" fill="#{g:02x}{g:02x}{g:02x}"/>"##,
            MARGIN_PX + j * CELL_PX,
            MARGIN_PX + i * CELL_PX,
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}

/// One curve: mean and standard deviation at each x.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub name: String,
    pub x: Vec<f64>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

/// Line plot with one polyline per curve and a shaded mean ± sd band.
pub fn curves(curves: &[Curve], x_label: &str, y_label: &str) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (60.0, 150.0, 20.0, 50.0);
    let x_lo = curves.iter().flat_map(|c| c.x.iter().copied()).fold(f64::INFINITY, f64::min);
    let x_hi = curves.iter().flat_map(|c| c.x.iter().copied()).fold(f64::NEG_INFINITY, f64::max);
    let (x_lo, x_hi) = if x_lo.is_finite() && x_hi > x_lo { (x_lo, x_hi) } else { (0.0, 1.0) };
    let y_hi = curves
        .iter()
        .flat_map(|c| c.mean.iter().zip(&c.sd).map(|(m, s)| m + s))
        .fold(1.0, f64::max);
    let y_lo = curves
        .iter()
        .flat_map(|c| c.mean.iter().zip(&c.sd).map(|(m, s)| m - s))
        .fold(0.0, f64::min);
    let px = |x: f64| left + (x - x_lo) / (x_hi - x_lo) * (w - left - right);
    let py = |y: f64| top + (y_hi - y) / (y_hi - y_lo) * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<g stroke="black" fill="none"><line x1="{l}" y1="{b:.2}" x2="{r:.2}" y2="{b:.2}"/><line x1="{l}" y1="{t}" x2="{l}" y2="{b:.2}"/></g>"#,
        l = left,
        r = w - right,
        t = top,
        b = h - bottom,
    );
    let _ = writeln!(s, r#"<g font-family="monospace" font-size="11">"#);
    for i in 0..=4 {
        let xv = x_lo + (x_hi - x_lo) * i as f64 / 4.0;
        let yv = y_lo + (y_hi - y_lo) * i as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xv:.2}</text>"#, px(xv), h - bottom + 16.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{yv:.2}</text>"#, left - 6.0, py(yv) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_label}</text>"#, px((x_lo + x_hi) / 2.0), h - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{y_label}</text>"#,
        py((y_lo + y_hi) / 2.0),
        py((y_lo + y_hi) / 2.0)
    );
    let _ = writeln!(s, "</g>");
    for (k, c) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let upper = c.x.iter().zip(c.mean.iter().zip(&c.sd)).map(|(&x, (m, sd))| format!("{:.2},{:.2}", px(x), py(m + sd)));
        let lower = c.x.iter().zip(c.mean.iter().zip(&c.sd)).rev().map(|(&x, (m, sd))| format!("{:.2},{:.2}", px(x), py(m - sd)));
        let band: Vec<String> = upper.chain(lower).collect();
        let line: Vec<String> = c.x.iter().zip(&c.mean).map(|(&x, &m)| format!("{:.2},{:.2}", px(x), py(m))).collect();
        let _ = writeln!(s, r#"<polygon class="band" points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#, band.join(" "));
        let _ = writeln!(s, r#"<polyline class="curve" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, line.join(" "));
        let ly = top + 14.0 + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}" font-family="monospace" font-size="11">{}</text>"#,
            w - right + 10.0,
            w - right + 30.0,
            w - right + 36.0,
            ly + 4.0,
            c.name
        );
    }
    s.push_str("</svg>\n");
    s
}
