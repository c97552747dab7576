//! BLER versus SNR plots as standalone SVG.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::{read_csv, SweepRecord};

/// Points with zero measured BLER are drawn at this floor.
pub const BLER_FLOOR: f64 = 1e-7;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

/// One named curve.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub records: Vec<SweepRecord>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders curves to SVG text, log-scaled in BLER.
pub fn render_svg(series: &[Series]) -> String {
    let snrs = series
        .iter()
        .flat_map(|s| s.records.iter().map(|r| r.snr_db));
    let (mut x0, mut x1) = snrs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
        (a.min(x), b.max(x))
    });
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 - x0 < 1e-9 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let (y_lo, y_hi) = (BLER_FLOOR.log10(), 0.0);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let py = |b: f64| TOP + (y_hi - b.max(BLER_FLOOR).log10()) / (y_hi - y_lo) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for e in (y_lo as i32)..=(y_hi as i32) {
        let y = py(10f64.powi(e));
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{e}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let ticks = 6;
    for i in 0..=ticks {
        let x = x0 + (x1 - x0) * i as f64 / ticks as f64;
        let _ = writeln!(
            svg,
            r##"<line x1="{0:.2}" y1="{TOP}" x2="{0:.2}" y2="{1:.2}" stroke="#eee"/><text x="{0:.2}" y="{2:.2}" text-anchor="middle">{3:.1}</text>"##,
            px(x),
            TOP + ph,
            TOP + ph + 16.0,
            x
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">SNR (dB)</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">BLER</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    let mut any_floor = false;
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = s
            .records
            .iter()
            .map(|r| format!("{:.2},{:.2}", px(r.snr_db), py(r.bler)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="series" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        for r in &s.records {
            let (cx, cy) = (px(r.snr_db), py(r.bler));
            if r.bler > 0.0 {
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3" fill="{color}"/>"#
                );
            } else {
                any_floor = true;
                let _ = writeln!(
                    svg,
                    r#"<circle class="floor" cx="{cx:.2}" cy="{cy:.2}" r="4" fill="white" stroke="{color}"/>"#
                );
            }
        }
        let ly = TOP + 16.0 + 18.0 * i as f64;
        let lx = LEFT + pw - 170.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 24.0,
            lx + 30.0,
            ly + 4.0,
            escape(&s.name)
        );
    }
    if any_floor {
        let _ = writeln!(
            svg,
            r#"<text class="floor-note" x="{:.2}" y="{:.2}">hollow markers: no frame errors observed, drawn at 1e-7</text>"#,
            LEFT + 8.0,
            TOP + ph - 8.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Reads sweep CSVs and writes one SVG with a series per file, named by
/// file stem.
pub fn emit_plot(csv_paths: &[impl AsRef<Path>], out: &Path) -> Result<()> {
    if csv_paths.is_empty() {
        return Err(Error::Config("plot needs at least one csv file".into()));
    }
    let series = csv_paths
        .iter()
        .map(|p| {
            let p = p.as_ref();
            Ok(Series {
                name: p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| p.display().to_string()),
                records: read_csv(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    std::fs::write(out, render_svg(&series)).map_err(|e| Error::io(out, e))
}
