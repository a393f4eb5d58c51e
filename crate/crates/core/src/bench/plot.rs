//! Minimal SVG charts drawn from the CSV files written by the scenarios.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Axes<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r.records().map(|rec| rec.map(|r| r.iter().map(str::to_string).collect())).collect::<std::result::Result<_, _>>()?;
        Ok(Table { header, rows })
    }

    fn col(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("column '{name}' missing")))
    }

    fn num(&self, row: usize, col: usize) -> Result<f64> {
        self.rows[row][col].parse().map_err(|_| Error::Format(format!("'{}' is not a number", self.rows[row][col])))
    }
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() * step;
    (0..)
        .map(|i| first + i as f64 * step)
        .take_while(|&t| t <= hi + 1e-9 * span)
        .collect()
}

fn fmt_tick(t: f64) -> String {
    if t.abs() >= 1000.0 || t == t.round() {
        format!("{t:.0}")
    } else {
        let s = format!("{t:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }

    fn axes(&self, out: &mut String, axes: &Axes) {
        let _ = write!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>
<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>
"#,
            W / 2.0,
            axes.title,
            W - LEFT - RIGHT,
            H - TOP - BOTTOM
        );
        for t in nice_ticks(self.x.0, self.x.1) {
            let x = self.px(t);
            let _ = writeln!(
                out,
                r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                H - BOTTOM,
                H - BOTTOM + 5.0,
                H - BOTTOM + 18.0,
                fmt_tick(t)
            );
        }
        for t in nice_ticks(self.y.0, self.y.1) {
            let y = self.py(t);
            let _ = writeln!(
                out,
                r#"<line x1="{:.1}" y1="{y:.1}" x2="{LEFT}" y2="{y:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                LEFT - 5.0,
                LEFT - 8.0,
                y + 4.0,
                fmt_tick(t)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text><text transform="translate(16,{:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
            (LEFT + W - RIGHT) / 2.0,
            H - 12.0,
            axes.x_label,
            (TOP + H - BOTTOM) / 2.0,
            axes.y_label
        );
    }
}

/// Line chart of `y_cols` against `x_col`. With `series_col`, rows are split
/// into one line per distinct value of that column (and `y_cols` must hold a
/// single column).
pub fn line_plot_from_csv(
    csv_path: &Path,
    svg_path: &Path,
    x_col: &str,
    y_cols: &[&str],
    series_col: Option<&str>,
    axes: &Axes,
) -> Result<()> {
    let t = Table::read(csv_path)?;
    let xi = t.col(x_col)?;
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for (k, y) in y_cols.iter().enumerate() {
        let yi = t.col(y)?;
        let si = series_col.map(|s| t.col(s)).transpose()?;
        for r in 0..t.rows.len() {
            let name = match si {
                Some(si) => t.rows[r][si].clone(),
                None => format!("{k}:{y}"),
            };
            series.entry(name).or_default().push((t.num(r, xi)?, t.num(r, yi)?));
        }
    }
    let frame = Frame {
        x: range(series.values().flatten().map(|p| p.0)),
        y: range(series.values().flatten().map(|p| p.1)),
    };
    let mut out = String::new();
    frame.axes(&mut out, axes);
    for (n, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[n % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.1},{:.1}", frame.px(x), frame.py(y))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        let label = name.split_once(':').map_or(name.as_str(), |(_, l)| l);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" fill="{color}">{label}</text>"#,
            W - RIGHT - 110.0,
            TOP + 16.0 + 15.0 * n as f64
        );
    }
    out.push_str("</svg>\n");
    std::fs::write(svg_path, out)?;
    Ok(())
}

/// Colour map of `z_col` over the `(x_col, y_col)` grid, from blue (min) to
/// red (max).
pub fn heatmap_from_csv(csv_path: &Path, svg_path: &Path, x_col: &str, y_col: &str, z_col: &str, axes: &Axes) -> Result<()> {
    let t = Table::read(csv_path)?;
    let (xi, yi, zi) = (t.col(x_col)?, t.col(y_col)?, t.col(z_col)?);
    let pts: Vec<(f64, f64, f64)> =
        (0..t.rows.len()).map(|r| Ok((t.num(r, xi)?, t.num(r, yi)?, t.num(r, zi)?))).collect::<Result<_>>()?;
    let xs = distinct(pts.iter().map(|p| p.0));
    let ys = distinct(pts.iter().map(|p| p.1));
    let cell = |v: &[f64]| if v.len() > 1 { (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64 } else { 1.0 };
    let (cx, cy) = (cell(&xs), cell(&ys));
    let frame = Frame {
        x: (xs[0] - cx / 2.0, xs[xs.len() - 1] + cx / 2.0),
        y: (ys[0] - cy / 2.0, ys[ys.len() - 1] + cy / 2.0),
    };
    let (zlo, zhi) = range(pts.iter().map(|p| p.2));
    let mut out = String::new();
    frame.axes(&mut out, axes);
    for &(x, y, z) in &pts {
        let f = (z - zlo) / (zhi - zlo);
        let (r, b) = ((255.0 * f) as u8, (255.0 * (1.0 - f)) as u8);
        let (x0, x1) = (frame.px(x - cx / 2.0), frame.px(x + cx / 2.0));
        let (y0, y1) = (frame.py(y + cy / 2.0), frame.py(y - cy / 2.0));
        let _ = writeln!(
            out,
            r#"<rect x="{x0:.1}" y="{y0:.1}" width="{:.2}" height="{:.2}" fill="rgb({r},60,{b})"/>"#,
            x1 - x0 + 0.3,
            y1 - y0 + 0.3
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{z_col}: {zlo:.3} (blue) to {zhi:.3} (red)</text>"#,
        W - RIGHT,
        TOP - 6.0
    );
    out.push_str("</svg>\n");
    std::fs::write(svg_path, out)?;
    Ok(())
}

fn distinct(v: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut d: Vec<f64> = v.collect();
    d.sort_by(f64::total_cmp);
    d.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    d
}
