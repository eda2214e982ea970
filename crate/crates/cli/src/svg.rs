//! Minimal SVG 1.1 line and heatmap rendering.

use std::fmt::Write;

use magnon_blockade::contour::Polyline;
use magnon_blockade::nonreciprocity::SweepResult;

use crate::figures::{Figure, Overlay, Plot};

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f4e9c", "#c0392b", "#27864a", "#8e44ad", "#d68910", "#2c3e50"];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    log_y: bool,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        let t = if self.log_y { y.log10() } else { y };
        H - BOTTOM - (t - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(v: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    v.filter(|v| v.is_finite())
        .fold(None, |acc, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
        .map(|(lo, hi)| if lo == hi { (lo - 0.5, hi + 0.5) } else { (lo, hi) })
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, x_name: &str, y_name: &str) {
    let (l, r, t, b) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(
        out,
        r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        r - l,
        b - t
    );
    for i in 0..=4 {
        let x = f.x0 + (f.x1 - f.x0) * i as f64 / 4.0;
        let px = f.px(x);
        let _ = writeln!(
            out,
            r#"<line x1="{px:.1}" y1="{b}" x2="{px:.1}" y2="{}" stroke="black"/><text x="{px:.1}" y="{}" text-anchor="middle">{}</text>"#,
            b + 5.0,
            b + 18.0,
            tick(x)
        );
        let t_ = f.y0 + (f.y1 - f.y0) * i as f64 / 4.0;
        let py = H - BOTTOM - (t_ - f.y0) / (f.y1 - f.y0) * (H - TOP - BOTTOM);
        let label = if f.log_y { format!("1e{t_:.1}") } else { tick(t_) };
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{py:.1}" x2="{l}" y2="{py:.1}" stroke="black"/><text x="{}" y="{:.1}" text-anchor="end">{label}</text>"#,
            l - 5.0,
            l - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text><text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        (l + r) / 2.0,
        H - 10.0,
        escape(x_name),
        (t + b) / 2.0,
        (t + b) / 2.0,
        escape(y_name)
    );
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{:.3}", v)
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    }
}

fn path(out: &mut String, f: &Frame, pts: impl Iterator<Item = (f64, f64)>, color: &str, dashed: bool) {
    let mut d = String::new();
    let mut pen_up = true;
    for (x, y) in pts {
        if !(y.is_finite() && (!f.log_y || y > 0.0)) {
            pen_up = true;
            continue;
        }
        let _ = write!(
            d,
            "{}{:.2},{:.2} ",
            if pen_up { "M" } else { "L" },
            f.px(x),
            f.py(y)
        );
        pen_up = false;
    }
    let dash = if dashed { r#" stroke-dasharray="6,4""# } else { "" };
    let _ = writeln!(
        out,
        r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
        d.trim_end()
    );
}

fn legend(out: &mut String, labels: &[(String, &str, bool)]) {
    for (i, (label, color, dashed)) in labels.iter().enumerate() {
        let y = TOP + 12.0 + 18.0 * i as f64;
        let x = W - RIGHT + 10.0;
        let dash = if *dashed { r#" stroke-dasharray="6,4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"{dash}/><text x="{}" y="{}">{}</text>"#,
            x + 20.0,
            x + 25.0,
            y + 4.0,
            escape(label)
        );
    }
}

pub fn lines(
    title: &str,
    x_name: &str,
    y_name: &str,
    x: &[f64],
    curves: &[(String, Vec<f64>)],
    log_y: bool,
) -> String {
    let tr = |v: f64| {
        if log_y {
            if v > 0.0 {
                v.log10()
            } else {
                f64::NAN
            }
        } else {
            v
        }
    };
    let (y0, y1) = bounds(curves.iter().flat_map(|(_, v)| v.iter().map(|&v| tr(v)))).unwrap_or((0.0, 1.0));
    let (x0, x1) = bounds(x.iter().copied()).unwrap_or((0.0, 1.0));
    let f = Frame {
        x0,
        x1,
        y0,
        y1,
        log_y,
    };
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &f, x_name, y_name);
    let mut labels = Vec::new();
    for (i, (label, v)) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        path(
            &mut out,
            &f,
            x.iter().copied().zip(v.iter().copied()),
            color,
            false,
        );
        labels.push((label.clone(), color, false));
    }
    legend(&mut out, &labels);
    out.push_str("</svg>\n");
    out
}

/// Blue-white-red ramp on t in [0, 1].
fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let (r, g, b) = if t < 0.5 {
        let s = t * 2.0;
        (30.0 + 225.0 * s, 60.0 + 195.0 * s, 160.0 + 95.0 * s)
    } else {
        let s = (t - 0.5) * 2.0;
        (255.0 - 60.0 * s, 255.0 - 200.0 * s, 255.0 - 210.0 * s)
    };
    format!("#{:02x}{:02x}{:02x}", r as u8, g as u8, b as u8)
}

#[allow(clippy::too_many_arguments)]
pub fn heatmap(
    title: &str,
    x_name: &str,
    y_name: &str,
    x: &[f64],
    y: &[f64],
    values: &[f64],
    log: bool,
    contours: &[Polyline],
    overlays: &[Overlay],
) -> String {
    let tr = |v: f64| {
        if log {
            if v > 0.0 {
                v.log10()
            } else {
                f64::NAN
            }
        } else {
            v
        }
    };
    // clip the colour scale so a few perfect-blockade cells don't wash out the map
    let (mut lo, hi) = bounds(values.iter().map(|&v| tr(v))).unwrap_or((0.0, 1.0));
    if log {
        lo = lo.max(hi - 8.0);
    }
    let (x0, x1) = bounds(x.iter().copied()).unwrap_or((0.0, 1.0));
    let (y0, y1) = bounds(y.iter().copied()).unwrap_or((0.0, 1.0));
    let f = Frame {
        x0,
        x1,
        y0,
        y1,
        log_y: false,
    };
    let mut out = String::new();
    header(&mut out, title);
    let cw = (W - LEFT - RIGHT) / x.len() as f64;
    let ch = (H - TOP - BOTTOM) / y.len() as f64;
    for (i, _) in x.iter().enumerate() {
        for (j, _) in y.iter().enumerate() {
            let v = tr(values[i * y.len() + j]);
            let fill = if v.is_finite() {
                ramp((v - lo) / (hi - lo))
            } else {
                "#888888".into()
            };
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                LEFT + i as f64 * cw,
                H - BOTTOM - (j + 1) as f64 * ch,
                cw + 0.3,
                ch + 0.3
            );
        }
    }
    axes(&mut out, &f, x_name, y_name);
    let mut labels = Vec::new();
    for c in contours {
        path(&mut out, &f, c.points.iter().copied(), "black", false);
    }
    if !contours.is_empty() {
        labels.push(("level 1".to_string(), "black", false));
    }
    for o in overlays {
        path(&mut out, &f, o.points.iter().copied(), "#00a000", true);
        labels.push((o.label.clone(), "#00a000", true));
    }
    let scale = if log { "log10 scale" } else { "linear scale" };
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}">{scale}: {} .. {}</text>"#,
        W - RIGHT + 10.0,
        H - BOTTOM,
        tick(lo),
        tick(hi)
    );
    legend(&mut out, &labels);
    out.push_str("</svg>\n");
    out
}

pub fn figure(fig: &Figure) -> String {
    let title = format!("{}: {}", fig.name, fig.title);
    match &fig.plot {
        Plot::Lines { x_name, x, curves } => {
            let c: Vec<_> = curves
                .iter()
                .map(|c| (c.label.clone(), c.values.clone()))
                .collect();
            lines(&title, x_name, &fig.observable, x, &c, fig.log_scale)
        }
        Plot::Map {
            x_name,
            y_name,
            x,
            y,
            values,
            contours,
            overlays,
        } => heatmap(
            &title,
            x_name,
            y_name,
            x,
            y,
            values,
            fig.log_scale,
            contours,
            overlays,
        ),
    }
}

pub fn sweep(results: &[(String, SweepResult)]) -> String {
    let first = &results[0].1;
    let log = results
        .iter()
        .all(|(_, r)| r.values.iter().all(|v| !v.is_finite() || *v > 0.0))
        && first.metadata.observable == magnon_blockade::nonreciprocity::Observable::G2;
    match first.axes.as_slice() {
        [a] => {
            let c: Vec<_> = results
                .iter()
                .map(|(n, r)| (n.clone(), r.values.clone()))
                .collect();
            lines("sweep", a.param.name(), "value", &a.values, &c, log)
        }
        [a, b] => heatmap(
            &format!("sweep ({})", results[0].0),
            a.param.name(),
            b.param.name(),
            &a.values,
            &b.values,
            &first.values,
            log,
            &[],
            &[],
        ),
        _ => lines("sweep", "", "", &[], &[], false),
    }
}
