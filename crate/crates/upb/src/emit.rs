//! CSV, JSON and SVG output of a [`SweepResult`].

use std::fmt::Write as _;
use std::str::FromStr;

use crate::sweep::SweepResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format '{other}' (expected csv, json or svg)")),
        }
    }
}

pub const CSV_HEADER: &str = "grid,route,direction,g2,status";

/// Rows ordered by grid index, then direction, then route. Numbers use the
/// shortest representation that round-trips; failed points print `NaN`.
pub fn to_csv(r: &SweepResult) -> String {
    let mut order: Vec<usize> = (0..r.series.len()).collect();
    order.sort_by_key(|&i| (r.series[i].direction, r.series[i].route));
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (k, x) in r.grid.iter().enumerate() {
        for &i in &order {
            let s = &r.series[i];
            let g2 = s.g2[k].map_or_else(|| "NaN".to_owned(), |v| format!("{v:?}"));
            let _ = writeln!(
                out,
                "{x:?},{},{},{g2},{}",
                s.route,
                s.direction,
                csv_field(&s.status[k])
            );
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\"").replace(['\n', '\r'], " "))
    } else {
        s.to_owned()
    }
}

/// Pretty JSON with a trailing newline; `null` marks failed points.
pub fn to_json(r: &SweepResult) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("sweep results serialize");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<SweepResult, serde_json::Error> {
    serde_json::from_str(text)
}

/// Range shown on the y axis; values outside are clamped.
pub const SVG_G2_RANGE: (f64, f64) = (1e-6, 1e4);

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Polyline chart of every series against the grid.
pub fn to_svg(r: &SweepResult, log_y: bool) -> String {
    let (w, h) = (800.0, 500.0);
    let (ml, mr, mt, mb) = (70.0, 160.0, 20.0, 50.0);
    let (pw, ph) = (w - ml - mr, h - mt - mb);
    let clamp = |v: f64| v.clamp(SVG_G2_RANGE.0, SVG_G2_RANGE.1);
    let ty = |v: f64| if log_y { clamp(v).log10() } else { clamp(v) };
    let values: Vec<f64> = r
        .series
        .iter()
        .flat_map(|s| s.g2.iter().flatten().map(|&v| ty(v)))
        .collect();
    let (mut y0, mut y1) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !y0.is_finite() {
        (y0, y1) = (0.0, 1.0);
    }
    if log_y {
        (y0, y1) = (y0.floor(), y1.ceil());
    } else {
        y0 = y0.min(0.0);
    }
    if y1 - y0 < 1e-12 {
        y1 = y0 + 1.0;
    }
    let (x0, x1) = match (r.grid.first(), r.grid.last()) {
        (Some(&a), Some(&b)) if b > a => (a, b),
        (Some(&a), _) => (a - 0.5, a + 0.5),
        _ => (0.0, 1.0),
    };
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| mt + ph - (y - y0) / (y1 - y0) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(
        out,
        "<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        out,
        "<rect x=\"{ml}\" y=\"{mt}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>"
    );
    for i in 0..=5 {
        let x = x0 + (x1 - x0) * i as f64 / 5.0;
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
            px(x),
            mt + ph + 18.0,
            tick(x)
        );
    }
    let ticks: Vec<f64> = if log_y {
        (y0 as i64..=y1 as i64).map(|e| e as f64).collect()
    } else {
        (0..=5).map(|i| y0 + (y1 - y0) * i as f64 / 5.0).collect()
    };
    for y in ticks {
        let label = if log_y { format!("1e{}", y as i64) } else { tick(y) };
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{label}</text>",
            ml - 6.0,
            py(y) + 4.0
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
        ml + pw / 2.0,
        h - 8.0,
        r.metadata.variable.as_str()
    );
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{}</text>",
        mt + ph / 2.0,
        mt + ph / 2.0,
        if log_y { "g2 (log)" } else { "g2" }
    );
    for (i, s) in r.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let dash = if s.direction == upb_core::model::Direction::Cw {
            " stroke-dasharray=\"6 3\""
        } else {
            ""
        };
        // A failed point breaks the line.
        let mut segment: Vec<String> = Vec::new();
        let flush = |seg: &mut Vec<String>, out: &mut String| {
            if !seg.is_empty() {
                let _ = writeln!(
                    out,
                    "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash} points=\"{}\"/>",
                    seg.join(" ")
                );
                seg.clear();
            }
        };
        for (x, g) in r.grid.iter().zip(&s.g2) {
            match g {
                Some(v) => segment.push(format!("{:.2},{:.2}", px(*x), py(ty(*v)))),
                None => flush(&mut segment, &mut out),
            }
        }
        flush(&mut segment, &mut out);
        let ly = mt + 16.0 + 18.0 * i as f64;
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>",
            ml + pw + 10.0,
            ml + pw + 34.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\">{} {}</text>",
            ml + pw + 40.0,
            ly + 4.0,
            s.route,
            s.direction
        );
    }
    out.push_str("</svg>\n");
    out
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_owned()
    } else {
        s.to_owned()
    }
}

pub fn render(r: &SweepResult, format: Format, log_y: bool) -> String {
    match format {
        Format::Csv => to_csv(r),
        Format::Json => to_json(r),
        Format::Svg => to_svg(r, log_y),
    }
}
