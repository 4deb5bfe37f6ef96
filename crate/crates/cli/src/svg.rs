//! Minimal SVG figures: grayscale heatmaps and polyline plots.

use std::fmt::Write;

use arm_core::spectra::SpectrumResult;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SvgError {
    #[error("nothing to plot")]
    Empty,
    #[error("non-finite value in plot data")]
    NonFinite,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;

/// One named curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub class: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinePlot {
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(a, b): (f64, f64)| if a == b { (a - 0.5, b + 0.5) } else { (a, b) };
        Self { x: widen(x), y: widen(y) }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn range(v: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    v.fold(None, |acc, x| match acc {
        None => Some((x, x)),
        Some((a, b)) => Some((a.min(x), b.max(x))),
    })
}

fn open(out: &mut String) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str, log_y: bool) {
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    writeln!(
        out,
        r#"<path class="axes" d="M{x0} {y0} L{x0} {y1} L{x1} {y1}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    for k in 0..TICKS {
        let t = k as f64 / (TICKS - 1) as f64;
        let xv = f.x.0 + t * (f.x.1 - f.x.0);
        let yv = f.y.0 + t * (f.y.1 - f.y.0);
        let (px, py) = (f.px(xv), f.py(yv));
        let ylabel = if log_y { format!("1e{yv:.1}") } else { format!("{yv:.4}") };
        writeln!(
            out,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{xv:.4}</text>"#,
            y1 + 18.0
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{ylabel}</text>"#,
            x0 - 6.0,
            py + 4.0
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text class="x-label" x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text class="y-label" transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (y0 + y1) / 2.0,
        escape(y_label)
    )
    .unwrap();
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axis_label(result: &SpectrumResult) -> &'static str {
    match result.axis.column_name() {
        Some("theta_rad") => "mixing angle theta (rad)",
        _ => "qubit frequency (GHz)",
    }
}

/// Transmission map as one gray cell per grid point (black = 1), probe on x.
pub fn heatmap(result: &SpectrumResult) -> Result<String, SvgError> {
    let slices = result.slices();
    if result.points.is_empty() || slices.is_empty() {
        return Err(SvgError::Empty);
    }
    let axis: Vec<f64> = slices.iter().map(|s| s.axis_value.unwrap_or(0.0)).collect();
    let edges = |v: &[f64]| -> Vec<f64> {
        if v.len() == 1 {
            return vec![v[0] - 0.5, v[0] + 0.5];
        }
        let mut e = vec![v[0] - (v[1] - v[0]) / 2.0];
        e.extend(v.windows(2).map(|w| (w[0] + w[1]) / 2.0));
        e.push(v[v.len() - 1] + (v[v.len() - 1] - v[v.len() - 2]) / 2.0);
        e
    };
    let xe = edges(&result.probe);
    let ye = edges(&axis);
    let (Some(xr), Some(yr)) = (range(xe.iter().copied()), range(ye.iter().copied())) else {
        return Err(SvgError::Empty);
    };
    if !(xr.0.is_finite() && xr.1.is_finite() && yr.0.is_finite() && yr.1.is_finite()) {
        return Err(SvgError::NonFinite);
    }
    let f = Frame::new(xr, yr);
    let mut out = String::new();
    open(&mut out);
    for (j, s) in slices.iter().enumerate() {
        let (ya, yb) = (f.py(ye[j]), f.py(ye[j + 1]));
        for (i, &t) in s.transmission.iter().enumerate() {
            if !t.is_finite() {
                return Err(SvgError::NonFinite);
            }
            let level = (255.0 * (1.0 - t.clamp(0.0, 1.0))).round() as u8;
            let (xa, xb) = (f.px(xe[i]), f.px(xe[i + 1]));
            writeln!(
                out,
                r#"<rect x="{xa:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="rgb({level},{level},{level})"/>"#,
                ya.min(yb),
                xb - xa,
                (yb - ya).abs()
            )
            .unwrap();
        }
    }
    axes(&mut out, &f, "probe frequency (GHz)", axis_label(result), false);
    out.push_str("</svg>\n");
    Ok(out)
}

/// Polyline plot; with `log_y` non-positive values are dropped.
pub fn line_plot(plot: &LinePlot) -> Result<String, SvgError> {
    let series: Vec<Series> = plot
        .series
        .iter()
        .map(|s| Series {
            class: s.class.clone(),
            points: s
                .points
                .iter()
                .filter(|p| !plot.log_y || p.1 > 0.0)
                .map(|&(x, y)| (x, if plot.log_y { y.log10() } else { y }))
                .collect(),
        })
        .collect();
    let all = || series.iter().flat_map(|s| s.points.iter());
    if all().any(|p| !(p.0.is_finite() && p.1.is_finite())) {
        return Err(SvgError::NonFinite);
    }
    let (Some(xr), Some(yr)) = (range(all().map(|p| p.0)), range(all().map(|p| p.1))) else {
        return Err(SvgError::Empty);
    };
    let f = Frame::new(xr, yr);
    let mut out = String::new();
    open(&mut out);
    axes(&mut out, &f, &plot.x_label, &plot.y_label, plot.log_y);
    for s in series.iter().filter(|s| !s.points.is_empty()) {
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.3},{:.3}", f.px(x), f.py(y))).collect();
        writeln!(
            out,
            r#"<polyline class="{}" points="{}" fill="none" stroke="currentColor"/>"#,
            escape(&s.class),
            pts.join(" ")
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Heatmap for two-axis sweeps, a single transmission curve otherwise.
pub fn spectrum_figure(result: &SpectrumResult) -> Result<String, SvgError> {
    if result.axis.column_name().is_some() {
        return heatmap(result);
    }
    line_plot(&LinePlot {
        x_label: "probe frequency (GHz)".into(),
        y_label: "transmission".into(),
        log_y: false,
        series: vec![Series {
            class: "transmission".into(),
            points: result.points.iter().map(|p| (p.omega_p, p.transmission)).collect(),
        }],
    })
}
