//! Sweep CSV and a static SVG line chart.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::report::{write_file, Failure};

#[derive(Clone, Debug)]
pub struct AdvantageRow {
    pub subset: String,
    pub target: f64,
    pub achieved: f64,
    pub n: usize,
}

impl AdvantageRow {
    /// `achieved - target`.
    pub fn margin(&self) -> f64 {
        self.achieved - self.target
    }
}

fn field(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        "inf".into()
    }
}

pub fn write_csv(dir: &Path, name: &str, rows: &[AdvantageRow]) -> Result<(), Failure> {
    let mut out = String::from("subset,target,achieved,N,margin\n");
    for r in rows {
        let label = if r.subset.contains([',', '"', '\n']) {
            format!("\"{}\"", r.subset.replace('"', "\"\""))
        } else {
            r.subset.clone()
        };
        let _ = writeln!(out, "{label},{},{},{},{}", field(r.target), field(r.achieved), r.n, field(r.margin()));
    }
    write_file(dir, name, &out)
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Achieved advantage against `log10 N`, one line per subset, with the
/// target `1 + R_k` dashed.
pub fn sweep_svg(rows: &[AdvantageRow]) -> String {
    let (w, h, pad) = (640.0, 400.0, 56.0);
    let mut series: BTreeMap<&str, Vec<&AdvantageRow>> = BTreeMap::new();
    for r in rows {
        series.entry(r.subset.as_str()).or_default().push(r);
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).log10()).collect();
    let ys: Vec<f64> = rows
        .iter()
        .flat_map(|r| [r.achieved, r.target])
        .filter(|v| v.is_finite())
        .collect();
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let px = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{pad}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{pad}" y1="{pad}" x2="{pad}" y2="{b}" stroke="black"/>"#,
        b = h - pad,
        r = w - pad
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">log10 N</text>"#,
        w / 2.0,
        h - 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-size="12" transform="rotate(-90 16 {})" text-anchor="middle">advantage</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (x, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="{anchor}">{x:.1}</text>"#,
            px(x),
            h - pad + 14.0
        );
    }
    for y in [y0, y1] {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{y:.4}</text>"#,
            pad - 4.0,
            py(y) + 3.0
        );
    }
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|r| format!("{:.2},{:.2}", px((r.n as f64).log10()), py(r.achieved)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            path.join(" ")
        );
        if let Some(t) = pts.first().map(|r| r.target).filter(|t| t.is_finite()) {
            let _ = writeln!(
                s,
                r#"<line x1="{pad}" y1="{y:.2}" x2="{r}" y2="{y:.2}" stroke="{color}" stroke-dasharray="6 4"/>"#,
                y = py(t),
                r = w - pad
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" fill="{color}">{}</text>"#,
            w - pad - 90.0,
            pad + 14.0 * (i as f64 + 1.0),
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let m = 0.05 * (hi - lo);
        (lo - m, hi + m)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
