//! Minimal deterministic SVG plotting for experiment artifacts.
//!
//! Fixed-decimal formatting everywhere keeps re-runs byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

/// Visual style of one series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesStyle {
    Line,
    Scatter,
}

/// One plotted series.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: SeriesStyle,
}

impl Series {
    pub fn line(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
            style: SeriesStyle::Line,
        }
    }

    pub fn scatter(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
            style: SeriesStyle::Scatter,
        }
    }
}

/// Figure-level settings.
#[derive(Debug, Clone)]
pub struct PlotConfig {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub width: u32,
    pub height: u32,
}

impl PlotConfig {
    pub fn new(
        title: impl Into<String>,
        x_label: impl Into<String>,
        y_label: impl Into<String>,
    ) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            width: 720,
            height: 480,
        }
    }
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 48.0;

fn finite_range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo <= hi).then_some((lo, hi))
}

fn pad_range((lo, hi): (f64, f64)) -> (f64, f64) {
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = (hi - lo) * 0.05;
        (lo - pad, hi + pad)
    }
}

/// Up to `n` round tick positions covering `[lo, hi]`.
fn nice_ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) || n < 2 {
        return vec![lo];
    }
    let raw = span / n as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    } * mag;
    let mut t = (lo / step).ceil() * step;
    let mut ticks = Vec::new();
    while t <= hi + step * 1e-9 {
        // canonicalize -0.0 for stable formatting
        ticks.push(if t == 0.0 { 0.0 } else { t });
        t += step;
    }
    ticks
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-3) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    }
}

struct Frame {
    w: f64,
    h: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

impl Frame {
    fn sx(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x_range.0) / (self.x_range.1 - self.x_range.0)
            * (self.w - MARGIN_L - MARGIN_R)
    }

    fn sy(&self, y: f64) -> f64 {
        self.h - MARGIN_B
            - (y - self.y_range.0) / (self.y_range.1 - self.y_range.0)
                * (self.h - MARGIN_T - MARGIN_B)
    }
}

fn render_series(svg: &mut String, frame: &Frame, series: &[Series], color_offset: usize) {
    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[(si + color_offset) % PALETTE.len()];
        match s.style {
            SeriesStyle::Line => {
                if s.points.len() >= 2 {
                    let pts: Vec<String> = s
                        .points
                        .iter()
                        .filter(|(x, y)| x.is_finite() && y.is_finite())
                        .map(|&(x, y)| format!("{:.2},{:.2}", frame.sx(x), frame.sy(y)))
                        .collect();
                    let _ = writeln!(
                        svg,
                        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
                        pts.join(" ")
                    );
                }
            }
            SeriesStyle::Scatter => {
                for &(x, y) in s.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
                    let _ = writeln!(
                        svg,
                        "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>",
                        frame.sx(x),
                        frame.sy(y)
                    );
                }
            }
        }
    }
}

fn axes_and_ticks(svg: &mut String, frame: &Frame, cfg: &PlotConfig, right_label: Option<&str>) {
    let x0 = MARGIN_L;
    let x1 = frame.w - MARGIN_R;
    let y0 = frame.h - MARGIN_B;
    let y1 = MARGIN_T;
    let _ = writeln!(
        svg,
        "<rect x=\"{x0:.2}\" y=\"{y1:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#333\"/>",
        x1 - x0,
        y0 - y1
    );
    for t in nice_ticks(frame.x_range.0, frame.x_range.1, 6) {
        let sx = frame.sx(t);
        let _ = writeln!(
            svg,
            "<line x1=\"{sx:.2}\" y1=\"{y0:.2}\" x2=\"{sx:.2}\" y2=\"{:.2}\" stroke=\"#333\"/>",
            y0 + 4.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{sx:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
            y0 + 16.0,
            fmt_tick(t)
        );
    }
    for t in nice_ticks(frame.y_range.0, frame.y_range.1, 6) {
        let sy = frame.sy(t);
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{sy:.2}\" x2=\"{x0:.2}\" y2=\"{sy:.2}\" stroke=\"#333\"/>",
            x0 - 4.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            x0 - 7.0,
            sy + 3.5,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"16\" font-size=\"13\" text-anchor=\"middle\" font-weight=\"bold\">{}</text>",
        (x0 + x1) / 2.0,
        xml_escape(&cfg.title)
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
        (x0 + x1) / 2.0,
        frame.h - 12.0,
        xml_escape(&cfg.x_label)
    );
    let _ = writeln!(
        svg,
        "<text x=\"14\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.2})\">{}</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        xml_escape(&cfg.y_label)
    );
    if let Some(label) = right_label {
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(90 {:.2} {:.2})\">{}</text>",
            x1 + 14.0,
            (y0 + y1) / 2.0,
            x1 + 14.0,
            (y0 + y1) / 2.0,
            xml_escape(label)
        );
    }
}

fn legend(svg: &mut String, series: &[Series], color_offset: usize, slot_offset: usize, w: f64) {
    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[(si + color_offset) % PALETTE.len()];
        let y = MARGIN_T + 14.0 * (si + slot_offset) as f64 + 6.0;
        let x = w - MARGIN_R - 150.0;
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            x + 18.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\">{}</text>",
            x + 24.0,
            y + 3.5,
            xml_escape(&s.label)
        );
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn svg_open(w: u32, h: u32) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w} {h}\" width=\"{w}\" height=\"{h}\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    )
}

/// Renders line/scatter series on shared axes. Empty input still yields a
/// valid figure with axes.
pub fn line_plot(cfg: &PlotConfig, series: &[Series]) -> String {
    let x_range = pad_range(
        finite_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)))
            .unwrap_or((0.0, 1.0)),
    );
    let y_range = pad_range(
        finite_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)))
            .unwrap_or((0.0, 1.0)),
    );
    let frame = Frame {
        w: cfg.width as f64,
        h: cfg.height as f64,
        x_range,
        y_range,
    };
    let mut svg = svg_open(cfg.width, cfg.height);
    axes_and_ticks(&mut svg, &frame, cfg, None);
    render_series(&mut svg, &frame, series, 0);
    legend(&mut svg, series, 0, 0, frame.w);
    svg.push_str("</svg>\n");
    svg
}

/// Two independent y-scales sharing the x axis; `left` series use the left
/// axis, `right` series the right one (labelled `right_label`).
pub fn dual_axis_plot(
    cfg: &PlotConfig,
    left: &[Series],
    right: &[Series],
    right_label: &str,
) -> String {
    let x_range = pad_range(
        finite_range(
            left.iter()
                .chain(right)
                .flat_map(|s| s.points.iter().map(|p| p.0)),
        )
        .unwrap_or((0.0, 1.0)),
    );
    let left_range = pad_range(
        finite_range(left.iter().flat_map(|s| s.points.iter().map(|p| p.1)))
            .unwrap_or((0.0, 1.0)),
    );
    let right_range = pad_range(
        finite_range(right.iter().flat_map(|s| s.points.iter().map(|p| p.1)))
            .unwrap_or((0.0, 1.0)),
    );
    let w = cfg.width as f64;
    let h = cfg.height as f64;
    let left_frame = Frame {
        w,
        h,
        x_range,
        y_range: left_range,
    };
    let right_frame = Frame {
        w,
        h,
        x_range,
        y_range: right_range,
    };
    let mut svg = svg_open(cfg.width, cfg.height);
    axes_and_ticks(&mut svg, &left_frame, cfg, Some(right_label));
    // right-axis ticks
    let x1 = w - MARGIN_R;
    for t in nice_ticks(right_range.0, right_range.1, 6) {
        let sy = right_frame.sy(t);
        let _ = writeln!(
            svg,
            "<line x1=\"{x1:.2}\" y1=\"{sy:.2}\" x2=\"{:.2}\" y2=\"{sy:.2}\" stroke=\"#888\"/>",
            x1 + 4.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"start\" fill=\"#555\">{}</text>",
            x1 + 6.0,
            sy + 3.5,
            fmt_tick(t)
        );
    }
    render_series(&mut svg, &left_frame, left, 0);
    render_series(&mut svg, &right_frame, right, left.len());
    legend(&mut svg, left, 0, 0, w);
    legend(&mut svg, right, left.len(), left.len(), w);
    svg.push_str("</svg>\n");
    svg
}

/// Renders an `nx x ny` scalar field (row-major from the bottom-left cell)
/// over the box `extent` with a symmetric diverging color map.
pub fn heatmap(
    cfg: &PlotConfig,
    nx: usize,
    ny: usize,
    extent: ((f64, f64), (f64, f64)),
    values: &[f64],
) -> String {
    assert_eq!(values.len(), nx * ny, "heatmap grid size mismatch");
    let ((x_lo, x_hi), (y_lo, y_hi)) = extent;
    let frame = Frame {
        w: cfg.width as f64,
        h: cfg.height as f64,
        x_range: (x_lo, x_hi),
        y_range: (y_lo, y_hi),
    };
    let vmax = values
        .iter()
        .filter(|v| v.is_finite())
        .fold(0.0f64, |a, &v| a.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut svg = svg_open(cfg.width, cfg.height);
    for iy in 0..ny {
        for ix in 0..nx {
            let v = values[iy * nx + ix];
            let x = x_lo + (x_hi - x_lo) * ix as f64 / nx as f64;
            let y = y_lo + (y_hi - y_lo) * (iy + 1) as f64 / ny as f64;
            let cw = frame.sx(x_lo + (x_hi - x_lo) / nx as f64) - frame.sx(x_lo);
            let ch = frame.sy(y_lo) - frame.sy(y_lo + (y_hi - y_lo) / ny as f64);
            let _ = writeln!(
                svg,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                frame.sx(x),
                frame.sy(y),
                cw + 0.5,
                ch + 0.5,
                diverging_color(v / vmax)
            );
        }
    }
    axes_and_ticks(&mut svg, &frame, cfg, None);
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\">scale: +-{}</text>",
        MARGIN_L,
        MARGIN_T - 6.0,
        fmt_tick(vmax)
    );
    svg.push_str("</svg>\n");
    svg
}

/// Blue-white-red map on `t` in `[-1, 1]`.
fn diverging_color(t: f64) -> String {
    let t = t.clamp(-1.0, 1.0);
    let (r, g, b) = if t < 0.0 {
        let u = 1.0 + t; // 0 at deep blue, 1 at white
        (37.0 + 218.0 * u, 52.0 + 203.0 * u, 148.0 + 107.0 * u)
    } else {
        let u = 1.0 - t;
        (165.0 + 90.0 * u, 255.0 * u, 38.0 + 217.0 * u)
    };
    format!("rgb({},{},{})", r as u8, g as u8, b as u8)
}

/// Writes SVG text to disk.
pub fn write_svg(path: &Path, svg: &str) -> Result<()> {
    std::fs::write(path, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_renders_series_and_legend() {
        let cfg = PlotConfig::new("demo", "x", "y");
        let svg = line_plot(
            &cfg,
            &[
                Series::line("first", vec![(0.0, 0.0), (1.0, 2.0), (2.0, 1.0)]),
                Series::scatter("second", vec![(0.5, 1.5), (1.5, 0.5)]),
            ],
        );
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.contains(">first<"));
        assert!(svg.contains(">second<"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn empty_input_still_yields_axes() {
        let cfg = PlotConfig::new("empty", "x", "y");
        let svg = line_plot(&cfg, &[]);
        assert!(svg.contains("<rect"));
        assert!(svg.contains("</svg>"));
        assert!(!svg.contains("polyline"));
    }

    #[test]
    fn non_finite_points_are_dropped_not_rendered() {
        let cfg = PlotConfig::new("nan", "x", "y");
        let svg = line_plot(
            &cfg,
            &[Series::scatter(
                "s",
                vec![(0.0, f64::NAN), (1.0, 1.0), (f64::INFINITY, 0.0)],
            )],
        );
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(!svg.contains("NaN"));
        assert!(!svg.contains("inf"));
    }

    #[test]
    fn dual_axis_draws_both_scales() {
        let cfg = PlotConfig::new("dual", "v", "norm");
        let svg = dual_axis_plot(
            &cfg,
            &[Series::line("left", vec![(1.0, 0.1), (2.0, 0.9)])],
            &[Series::line("right", vec![(1.0, 100.0), (2.0, 900.0)])],
            "loss",
        );
        assert!(svg.contains(">left<"));
        assert!(svg.contains(">right<"));
        assert!(svg.contains(">loss<"));
    }

    #[test]
    fn heatmap_renders_every_cell() {
        let cfg = PlotConfig::new("field", "x1", "x2");
        let vals: Vec<f64> = (0..12).map(|i| i as f64 - 6.0).collect();
        let svg = heatmap(&cfg, 4, 3, ((-1.0, 1.0), (-1.0, 1.0)), &vals);
        // 12 cells + background + frame rects
        assert!(svg.matches("<rect").count() >= 14);
        assert!(svg.contains("scale: +-"));
    }

    #[test]
    fn ticks_are_round_and_cover_the_range() {
        let ticks = nice_ticks(0.0, 10.0, 6);
        assert_eq!(ticks, vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        let ticks = nice_ticks(-0.037, 0.089, 6);
        assert!(ticks.len() >= 3);
        for w in ticks.windows(2) {
            assert!(w[1] > w[0]);
        }
    }
}
