//! Self-contained SVG scaling plots: log-x budget against loss, frontier
//! points as scatter, fitted curves as polylines.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fitting::ScalingFit;
use crate::pareto::FrontierPoint;

pub const WIDTH: f64 = 820.0;
pub const HEIGHT: f64 = 520.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

/// Fitted curves are sampled at this many log-spaced budgets.
pub const CURVE_SAMPLES: usize = 200;
/// Fractional padding on each side of the data range.
pub const MARGIN: f64 = 0.05;

const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

pub struct PlotSeries<'a> {
    pub label: &'a str,
    pub points: &'a [FrontierPoint],
    pub fit: Option<&'a ScalingFit>,
}

/// Data-space extent of the plot plus the pixel mapping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlotAxes {
    /// log10 of the budget range actually drawn.
    pub x_log_min: f64,
    pub x_log_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    /// Unpadded budget range of the data.
    pub data_budget_min: f64,
    pub data_budget_max: f64,
}

impl PlotAxes {
    /// Bounds covering every point with [`MARGIN`] padding (in log space on x).
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a FrontierPoint>) -> Option<Self> {
        let (mut p_lo, mut p_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in points {
            p_lo = p_lo.min(p.total_params_billions);
            p_hi = p_hi.max(p.total_params_billions);
            y_lo = y_lo.min(p.loss);
            y_hi = y_hi.max(p.loss);
        }
        if !p_lo.is_finite() {
            return None;
        }
        let (x_lo, x_hi) = pad(p_lo.log10(), p_hi.log10());
        let (y_lo, y_hi) = pad(y_lo, y_hi);
        Some(PlotAxes {
            x_log_min: x_lo,
            x_log_max: x_hi,
            y_min: y_lo,
            y_max: y_hi,
            data_budget_min: p_lo,
            data_budget_max: p_hi,
        })
    }

    pub fn x_px(&self, budget: f64) -> f64 {
        LEFT + (budget.log10() - self.x_log_min) / (self.x_log_max - self.x_log_min) * plot_width()
    }

    pub fn y_px(&self, loss: f64) -> f64 {
        TOP + (self.y_max - loss) / (self.y_max - self.y_min) * plot_height()
    }
}

fn pad(lo: f64, hi: f64) -> (f64, f64) {
    let span = hi - lo;
    let span = if span > 0.0 { span } else { lo.abs().max(1.0) };
    (lo - MARGIN * span, hi + MARGIN * span)
}

fn plot_width() -> f64 {
    WIDTH - LEFT - RIGHT
}

fn plot_height() -> f64 {
    HEIGHT - TOP - BOTTOM
}

/// `n` budgets spaced evenly in log space from `lo` to `hi` inclusive.
pub fn curve_budgets(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 || lo == hi {
        return vec![lo; n];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// Renders labeled frontiers and their fits into one SVG document.
///
/// Series without points are left out and noted in a warning line. Curves
/// span the unpadded budget range of all plotted data.
pub fn emit_svg_plot(series: &[PlotSeries<'_>]) -> Result<String> {
    if series.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let axes = PlotAxes::from_points(series.iter().flat_map(|s| s.points.iter()));
    let mut svg = String::new();
    let w = &mut svg;
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(
        w,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    )
    .unwrap();

    let mut warnings: Vec<String> = series
        .iter()
        .filter(|s| s.points.is_empty())
        .map(|s| format!("series \"{}\" has no points; omitted", s.label))
        .collect();

    if let Some(axes) = axes {
        write_axes(w, &axes);
        writeln!(
            w,
            r#"<clipPath id="plot-area"><rect x="{LEFT}" y="{TOP}" width="{}" height="{}"/></clipPath>"#,
            plot_width(),
            plot_height()
        )
        .unwrap();
        let budgets = curve_budgets(axes.data_budget_min, axes.data_budget_max, CURVE_SAMPLES);
        for (i, s) in series
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.points.is_empty())
        {
            let color = COLORS[i % COLORS.len()];
            writeln!(w, r#"<g class="series" data-label="{}">"#, escape(s.label)).unwrap();
            for p in s.points {
                writeln!(
                    w,
                    r#"<circle class="point" cx="{:.3}" cy="{:.3}" r="3" fill="{color}" fill-opacity="0.7"/>"#,
                    axes.x_px(p.total_params_billions),
                    axes.y_px(p.loss)
                )
                .unwrap();
            }
            if let Some(fit) = s.fit {
                let pts: Vec<String> = budgets
                    .iter()
                    .map(|&b| format!("{:.3},{:.3}", axes.x_px(b), axes.y_px(fit.eval(b))))
                    .collect();
                writeln!(
                    w,
                    r#"<polyline class="fit" clip-path="url(#plot-area)" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                    pts.join(" ")
                )
                .unwrap();
            }
            writeln!(w, "</g>").unwrap();
        }
    } else {
        warnings.push("no data to plot".to_string());
    }

    writeln!(w, r#"<g class="legend">"#).unwrap();
    for (row, (i, s)) in series
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.points.is_empty())
        .enumerate()
    {
        let color = COLORS[i % COLORS.len()];
        let x = WIDTH - RIGHT + 20.0;
        let y = TOP + 10.0 + 36.0 * row as f64;
        writeln!(w, r#"<circle cx="{x}" cy="{y}" r="4" fill="{color}"/>"#).unwrap();
        writeln!(
            w,
            r#"<text class="legend-label" x="{}" y="{}">{}</text>"#,
            x + 10.0,
            y + 4.0,
            escape(s.label)
        )
        .unwrap();
        if let Some(fit) = s.fit {
            writeln!(
                w,
                r#"<text class="legend-fit" x="{}" y="{}" font-size="10">{:.4}·P^-{:.4} + {:.4}</text>"#,
                x + 10.0,
                y + 18.0,
                fit.a,
                fit.alpha,
                fit.l_inf
            )
            .unwrap();
        }
    }
    writeln!(w, "</g>").unwrap();

    for (i, msg) in warnings.iter().enumerate() {
        writeln!(
            w,
            r##"<text class="warning" x="{LEFT}" y="{}" fill="#b00">warning: {}</text>"##,
            HEIGHT - 8.0 - 14.0 * i as f64,
            escape(msg)
        )
        .unwrap();
    }
    writeln!(w, "</svg>").unwrap();
    Ok(svg)
}

fn write_axes(w: &mut String, axes: &PlotAxes) {
    let (x0, x1) = (LEFT, LEFT + plot_width());
    let (y0, y1) = (TOP, TOP + plot_height());
    writeln!(w, r##"<g class="axes" stroke="#333" fill="none">"##).unwrap();
    writeln!(w, r#"<line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}"/>"#).unwrap();
    writeln!(w, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>"#).unwrap();
    writeln!(w, "</g>").unwrap();

    writeln!(w, r##"<g class="ticks" fill="#333">"##).unwrap();
    let first = axes.x_log_min.ceil() as i32;
    let last = axes.x_log_max.floor() as i32;
    for e in first..=last {
        let budget = 10f64.powi(e);
        let x = axes.x_px(budget);
        writeln!(
            w,
            r##"<line x1="{x:.3}" y1="{y1}" x2="{x:.3}" y2="{}" stroke="#333"/>"##,
            y1 + 5.0
        )
        .unwrap();
        writeln!(
            w,
            r#"<text x="{x:.3}" y="{}" text-anchor="middle">{}</text>"#,
            y1 + 18.0,
            tick_label(budget)
        )
        .unwrap();
    }
    for i in 0..=5 {
        let v = axes.y_min + (axes.y_max - axes.y_min) * i as f64 / 5.0;
        let y = axes.y_px(v);
        writeln!(
            w,
            r##"<line x1="{}" y1="{y:.3}" x2="{x0}" y2="{y:.3}" stroke="#333"/>"##,
            x0 - 5.0
        )
        .unwrap();
        writeln!(
            w,
            r#"<text x="{}" y="{:.3}" text-anchor="end">{v:.3}</text>"#,
            x0 - 8.0,
            y + 4.0
        )
        .unwrap();
    }
    writeln!(
        w,
        r#"<text x="{}" y="{}" text-anchor="middle">total parameters (billions, log scale)</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 20.0
    )
    .unwrap();
    writeln!(
        w,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">oracle loss (nats/token)</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    )
    .unwrap();
    writeln!(w, "</g>").unwrap();
}
