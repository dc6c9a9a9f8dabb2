//! CSV and SVG emission of aggregated results.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::Result;

use super::{AggregateCell, Method};

/// Output format of [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Aggregate CSV only.
    Csv,
    /// Aggregate CSV plus the two dimension-sweep charts.
    Svg,
}

/// Renders `value` with `digits` significant digits, printf `%g` style:
/// scientific notation outside a moderate exponent range, trailing zeros
/// trimmed.
pub fn format_significant(value: f64, digits: usize) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    if !value.is_finite() {
        return value.to_string();
    }
    let digits = digits.max(1);
    let exponent = value.abs().log10().floor() as i32;
    if exponent < -4 || exponent >= digits as i32 {
        let text = format!("{:.*e}", digits - 1, value);
        // trim trailing zeros in the mantissa: 1.230000e-5 -> 1.23e-5
        match text.split_once('e') {
            Some((mantissa, exp)) => {
                let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
                format!("{mantissa}e{exp}")
            }
            None => text,
        }
    } else {
        let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
        let text = format!("{value:.decimals$}");
        if text.contains('.') {
            text.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            text
        }
    }
}

/// Writes the aggregate table (and, for [`ReportFormat::Svg`], the two
/// dimension-sweep charts) into `out_dir`. Returns the written paths.
///
/// CSV schema: `method,d,n,seed_count,mean_discrepancy,std_discrepancy`,
/// floats at 6 significant digits. Charts plot the per-method mean
/// discrepancy against dimension, averaging the per-(d, n) means with
/// equal weights, on linear and log10 scales.
pub fn emit_report(
    cells: &[AggregateCell],
    out_dir: &Path,
    format: ReportFormat,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    let csv_path = out_dir.join("aggregate.csv");
    let mut csv = std::fs::File::create(&csv_path)?;
    writeln!(csv, "method,d,n,seed_count,mean_discrepancy,std_discrepancy")?;
    for cell in cells {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            cell.method,
            cell.d,
            cell.n,
            cell.seed_count,
            format_significant(cell.mean_discrepancy, 6),
            format_significant(cell.std_discrepancy, 6),
        )?;
    }
    csv.flush()?;
    written.push(csv_path);

    if format == ReportFormat::Svg {
        for (log_scale, name) in [(false, "discrepancy_vs_d_linear.svg"), (true, "discrepancy_vs_d_log.svg")] {
            let path = out_dir.join(name);
            let series = dimension_series(cells, log_scale);
            let y_label = if log_scale {
                "log10 mean discrepancy"
            } else {
                "mean discrepancy"
            };
            std::fs::write(&path, line_chart(&series, "dimension", y_label))?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Per-method `(d, y)` series, averaging the per-(d, n) means over n.
fn dimension_series(cells: &[AggregateCell], log_scale: bool) -> Vec<(String, Vec<(f64, f64)>)> {
    let mut by_method: BTreeMap<Method, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for cell in cells {
        by_method
            .entry(cell.method)
            .or_default()
            .entry(cell.d)
            .or_default()
            .push(cell.mean_discrepancy);
    }
    by_method
        .into_iter()
        .map(|(method, dims)| {
            let points = dims
                .into_iter()
                .map(|(d, means)| {
                    let mean = means.iter().sum::<f64>() / means.len() as f64;
                    let y = if log_scale { mean.log10() } else { mean };
                    (d as f64, y)
                })
                .collect();
            (method.to_string(), points)
        })
        .collect()
}

const CHART_COLORS: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];
const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 130.0;
const MARGIN_TOP: f64 = 25.0;
const MARGIN_BOTTOM: f64 = 50.0;

/// Minimal deterministic SVG line chart: axes, 5 ticks per axis, one
/// polyline per series, legend in series order.
fn line_chart(series: &[(String, Vec<(f64, f64)>)], x_label: &str, y_label: &str) -> String {
    let points: Vec<(f64, f64)> = series.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    let (x_min, x_max) = axis_range(points.iter().map(|p| p.0));
    let (y_min, y_max) = axis_range(points.iter().map(|p| p.1));
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| MARGIN_TOP + plot_h - (y - y_min) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // axes
    svg.push_str(&format!(
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        MARGIN_LEFT,
        MARGIN_TOP + plot_h,
        MARGIN_LEFT + plot_w,
        MARGIN_TOP + plot_h
    ));
    svg.push_str(&format!(
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        MARGIN_LEFT,
        MARGIN_TOP,
        MARGIN_LEFT,
        MARGIN_TOP + plot_h
    ));

    // ticks and grid
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let x = x_min + f * (x_max - x_min);
        let y = y_min + f * (y_max - y_min);
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            sx(x),
            MARGIN_TOP + plot_h,
            sx(x),
            MARGIN_TOP + plot_h + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            sx(x),
            MARGIN_TOP + plot_h + 18.0,
            format_significant(x, 4)
        ));
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            MARGIN_LEFT - 5.0,
            sy(y),
            MARGIN_LEFT,
            sy(y)
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            MARGIN_LEFT - 8.0,
            sy(y) + 4.0,
            format_significant(y, 4)
        ));
    }

    // axis labels
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{x_label}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{y_label}</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    ));

    // series polylines and legend, in input order
    for (idx, (name, pts)) in series.iter().enumerate() {
        let color = CHART_COLORS[idx % CHART_COLORS.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            path.join(" ")
        ));
        for &(x, y) in pts {
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>\n",
                sx(x),
                sy(y)
            ));
        }
        let ly = MARGIN_TOP + 14.0 + idx as f64 * 18.0;
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            WIDTH - MARGIN_RIGHT + 10.0,
            ly - 4.0,
            WIDTH - MARGIN_RIGHT + 30.0,
            ly - 4.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">{name}</text>\n",
            WIDTH - MARGIN_RIGHT + 35.0,
            ly
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

fn axis_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for v in values {
        min = min.min(v);
        max = max.max(v);
    }
    if !min.is_finite() || !max.is_finite() {
        return (0.0, 1.0);
    }
    if min == max {
        // degenerate span: pad symmetrically
        let pad = if min == 0.0 { 1.0 } else { min.abs() * 0.1 };
        return (min - pad, max + pad);
    }
    let pad = (max - min) * 0.05;
    (min - pad, max + pad)
}
