use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{CellReport, ExperimentReport};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

impl OutputFormat {
    pub const ALL: [OutputFormat; 3] = [OutputFormat::Csv, OutputFormat::Json, OutputFormat::Svg];
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn model_key(c: &CellReport) -> String {
    format!("{}_d{}", c.model.family.name(), c.model.dim)
}

/// `(min, q1, median, q3, max)` with linear interpolation between order
/// statistics.
pub fn five_number_summary(values: &[f64]) -> Option<[f64; 5]> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let h = p * (v.len() - 1) as f64;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        v[lo] + (h - lo as f64) * (v[hi] - v[lo])
    };
    Some([v[0], q(0.25), q(0.5), q(0.75), v[v.len() - 1]])
}

/// Long-form table: one row per (cell, level).
fn rates_csv(report: &ExperimentReport) -> String {
    let mut s = String::from(
        "model,dim,epsilon,method,alpha,frequency,half_width,sd,replications,failures\n",
    );
    for c in &report.cells {
        for r in &c.rates {
            writeln!(
                s,
                "{},{},{},{},{},{:.4},{:.4},{:.4},{},{}",
                c.model.family.name(),
                c.model.dim,
                c.model.epsilon,
                c.method,
                r.alpha,
                r.frequency,
                r.half_width,
                r.sd,
                c.replications,
                c.failures.len()
            )
            .unwrap();
        }
    }
    s
}

/// Power table of one model: rows are (method, level), columns are the
/// discrepancies, cells read `frequency ± half-width`.
fn power_csv(cells: &[&CellReport], alphas: &[f64]) -> String {
    let mut eps: Vec<f64> = Vec::new();
    for c in cells {
        if !eps.contains(&c.model.epsilon) {
            eps.push(c.model.epsilon);
        }
    }
    let mut s = String::from("method,alpha");
    for e in &eps {
        write!(s, ",eps={e}").unwrap();
    }
    s.push('\n');
    let mut methods: Vec<&str> = Vec::new();
    for c in cells {
        if !methods.contains(&c.method.as_str()) {
            methods.push(&c.method);
        }
    }
    for method in methods {
        for (ai, a) in alphas.iter().enumerate() {
            write!(s, "{method},{a}").unwrap();
            for e in &eps {
                let cell = cells
                    .iter()
                    .find(|c| c.method == method && c.model.epsilon == *e);
                match cell.and_then(|c| c.rates.get(ai)) {
                    Some(r) if cell.is_some_and(|c| c.replications > 0) => {
                        write!(s, ",{:.3} ± {:.3}", r.frequency, r.half_width).unwrap()
                    }
                    _ => s.push_str(",NA"),
                }
            }
            s.push('\n');
        }
    }
    s
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

fn svg_open(title: &str) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    )
    .unwrap();
    writeln!(s, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>").unwrap();
    writeln!(
        s,
        "<text x=\"{}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
        (LEFT + W - RIGHT) / 2.0,
        escape(title)
    )
    .unwrap();
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn axes(s: &mut String, x_label: &str, y_label: &str, x_max: f64) {
    let (x0, y0, x1, y1) = (LEFT, H - BOTTOM, W - RIGHT, TOP);
    writeln!(
        s,
        "<path d=\"M{x0} {y1} L{x0} {y0} L{x1} {y0}\" stroke=\"black\" fill=\"none\"/>"
    )
    .unwrap();
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let y = y0 - f * (y0 - y1);
        writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{:.2}</text>",
            x0 - 5.0,
            y + 3.0,
            f
        )
        .unwrap();
        if x_max > 0.0 {
            let x = x0 + f * (x1 - x0);
            writeln!(
                s,
                "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{:.3}</text>",
                x,
                y0 + 14.0,
                f * x_max
            )
            .unwrap();
        }
    }
    writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
        (x0 + x1) / 2.0,
        H - 12.0,
        escape(x_label)
    )
    .unwrap();
    writeln!(
        s,
        "<text x=\"14\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.1})\">{}</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    )
    .unwrap();
}

fn legend(s: &mut String, k: usize, name: &str) {
    let y = TOP + 14.0 * k as f64 + 10.0;
    let x = W - RIGHT + 12.0;
    writeln!(
        s,
        "<rect x=\"{x:.1}\" y=\"{:.1}\" width=\"10\" height=\"10\" fill=\"{}\"/>",
        y - 8.0,
        PALETTE[k % PALETTE.len()]
    )
    .unwrap();
    writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{y:.1}\" font-family=\"sans-serif\" font-size=\"10\">{}</text>",
        x + 14.0,
        escape(name)
    )
    .unwrap();
}

/// Rejection frequency against level, one polyline per method, with the
/// diagonal `f = α` for reference.
fn rejection_svg(title: &str, cells: &[&CellReport], alphas: &[f64]) -> String {
    let x_max = alphas.iter().copied().fold(0.0, f64::max);
    let mut s = svg_open(title);
    axes(&mut s, "level alpha", "rejection frequency", x_max);
    let (x0, y0, x1, y1) = (LEFT, H - BOTTOM, W - RIGHT, TOP);
    let px = |a: f64| x0 + a / x_max * (x1 - x0);
    let py = |f: f64| y0 - f * (y0 - y1);
    writeln!(
        s,
        "<path d=\"M{:.1} {:.1} L{:.1} {:.1}\" stroke=\"gray\" stroke-dasharray=\"4 3\" fill=\"none\"/>",
        px(0.0),
        py(0.0),
        px(x_max),
        py(x_max.min(1.0))
    )
    .unwrap();
    for (k, c) in cells.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut d = String::new();
        for (i, r) in c.rates.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            write!(d, "{cmd}{:.1} {:.1} ", px(r.alpha), py(r.frequency)).unwrap();
        }
        writeln!(
            s,
            "<path d=\"{}\" stroke=\"{color}\" stroke-width=\"2\" fill=\"none\"/>",
            d.trim_end()
        )
        .unwrap();
        for r in &c.rates {
            writeln!(
                s,
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{color}\"/>",
                px(r.alpha),
                py(r.frequency)
            )
            .unwrap();
        }
        legend(&mut s, k, &c.method);
    }
    s.push_str("</svg>\n");
    s
}

/// Box-and-whisker chart of each method's p-values.
fn pvalue_svg(title: &str, cells: &[&CellReport]) -> String {
    let mut s = svg_open(title);
    axes(&mut s, "method", "p-value", 0.0);
    let (x0, y0, x1, y1) = (LEFT, H - BOTTOM, W - RIGHT, TOP);
    let py = |f: f64| y0 - f * (y0 - y1);
    let slot = (x1 - x0) / cells.len().max(1) as f64;
    for (k, c) in cells.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let cx = x0 + slot * (k as f64 + 0.5);
        let half = (slot * 0.3).min(20.0);
        if let Some([lo, q1, med, q3, hi]) = five_number_summary(&c.p_values) {
            writeln!(
                s,
                "<path d=\"M{cx:.1} {:.1} L{cx:.1} {:.1} M{cx:.1} {:.1} L{cx:.1} {:.1}\" stroke=\"{color}\"/>",
                py(lo),
                py(q1),
                py(q3),
                py(hi)
            )
            .unwrap();
            writeln!(
                s,
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>",
                cx - half,
                py(q3),
                2.0 * half,
                (py(q1) - py(q3)).max(0.5)
            )
            .unwrap();
            writeln!(
                s,
                "<path d=\"M{:.1} {:.1} L{:.1} {:.1}\" stroke=\"{color}\" stroke-width=\"3\"/>",
                cx - half,
                py(med),
                cx + half,
                py(med)
            )
            .unwrap();
        }
        legend(&mut s, k, &c.method);
    }
    s.push_str("</svg>\n");
    s
}

/// Writes the requested outputs under `dir` and returns the file paths in
/// creation order. Content depends only on the report.
pub fn emit_outputs(
    report: &ExperimentReport,
    dir: &Path,
    formats: &[OutputFormat],
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut put = |name: String, content: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, content)?;
        files.push(path);
        Ok(())
    };
    let alphas = &report.config.alphas;
    let mut by_model: BTreeMap<String, Vec<&CellReport>> = BTreeMap::new();
    for c in &report.cells {
        by_model.entry(model_key(c)).or_default().push(c);
    }
    if formats.contains(&OutputFormat::Json) {
        put("report.json".into(), report.to_json() + "\n")?;
    }
    if formats.contains(&OutputFormat::Csv) {
        put("rates.csv".into(), rates_csv(report))?;
        for (key, cells) in &by_model {
            put(format!("power_{}.csv", slug(key)), power_csv(cells, alphas))?;
        }
    }
    if formats.contains(&OutputFormat::Svg) && !alphas.is_empty() {
        for (key, cells) in &by_model {
            let mut by_eps: Vec<(f64, Vec<&CellReport>)> = Vec::new();
            for c in cells {
                match by_eps.iter_mut().find(|(e, _)| *e == c.model.epsilon) {
                    Some((_, v)) => v.push(c),
                    None => by_eps.push((c.model.epsilon, vec![c])),
                }
            }
            for (eps, group) in by_eps {
                let title = format!("{key}, eps = {eps}");
                let stem = slug(&format!("{key}_eps{eps}"));
                put(
                    format!("rejection_{stem}.svg"),
                    rejection_svg(&title, &group, alphas),
                )?;
                put(format!("pvalues_{stem}.svg"), pvalue_svg(&title, &group))?;
            }
        }
    }
    Ok(files)
}

/// Wall-clock record kept apart from the deterministic report.
pub fn write_timing(dir: &Path, seconds: f64) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("timing.json");
    std::fs::write(
        &path,
        format!("{{\n  \"wall_clock_seconds\": {seconds:.3}\n}}\n"),
    )?;
    Ok(path)
}
