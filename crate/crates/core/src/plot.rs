//! Deterministic SVG scatter plots: marker shape for the protected class,
//! fill colour for the cluster.

use std::fmt::Write;

use crate::error::{invalid_input, Error, Result};
use crate::matrix::Matrix;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];
const SHAPES: [&str; 4] = ["circle", "square", "triangle", "diamond"];

#[derive(Clone, Debug)]
pub struct PlotOptions {
    pub title: String,
    pub width: f64,
    pub height: f64,
    pub marker: f64,
    pub class_names: Vec<String>,
    pub x_label: String,
    pub y_label: String,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            title: String::new(),
            width: 640.0,
            height: 480.0,
            marker: 4.0,
            class_names: Vec::new(),
            x_label: "x".into(),
            y_label: "y".into(),
        }
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn marker(out: &mut String, shape: usize, cx: f64, cy: f64, r: f64, fill: &str, class: &str) {
    let attrs = format!(r##"class="{class}" fill="{fill}" stroke="#222" stroke-width="0.6""##);
    let _ = match SHAPES[shape % SHAPES.len()] {
        "circle" => writeln!(
            out,
            r#"<circle {attrs} cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}"/>"#
        ),
        "square" => writeln!(
            out,
            r#"<rect {attrs} x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/>"#,
            cx - r,
            cy - r,
            2.0 * r,
            2.0 * r
        ),
        "triangle" => writeln!(
            out,
            r#"<polygon {attrs} points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}"/>"#,
            cx,
            cy - 1.2 * r,
            cx - 1.1 * r,
            cy + 0.8 * r,
            cx + 1.1 * r,
            cy + 0.8 * r
        ),
        _ => writeln!(
            out,
            r#"<polygon {attrs} points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}"/>"#,
            cx,
            cy - 1.3 * r,
            cx + 1.3 * r,
            cy,
            cx,
            cy + 1.3 * r,
            cx - 1.3 * r,
            cy
        ),
    };
}

/// Renders `points` (n×2). Every point becomes one element with
/// `class="pt"`; legend entries use `class="legend"`.
pub fn scatter_svg(
    points: &Matrix,
    clusters: &[usize],
    classes: &[usize],
    opts: &PlotOptions,
) -> Result<String> {
    let n = points.rows();
    if n == 0 {
        return Err(invalid_input("nothing to plot"));
    }
    if points.cols() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "scatter plots need 2 coordinates, got {}",
            points.cols()
        )));
    }
    if clusters.len() != n || classes.len() != n {
        return Err(Error::DimensionMismatch(
            "one cluster and one class per point".into(),
        ));
    }
    if !points.all_finite() {
        return Err(Error::NonFinite("plot coordinates".into()));
    }
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in points.iter_rows() {
        xmin = xmin.min(p[0]);
        xmax = xmax.max(p[0]);
        ymin = ymin.min(p[1]);
        ymax = ymax.max(p[1]);
    }
    let span = |lo: f64, hi: f64| if hi > lo { hi - lo } else { 1.0 };
    let (xs, ys) = (span(xmin, xmax), span(ymin, ymax));
    let k = clusters.iter().max().map_or(0, |m| m + 1);
    let q = classes.iter().max().map_or(0, |m| m + 1);

    let legend_w = 130.0;
    let pad = 40.0;
    let plot_w = opts.width - legend_w - 2.0 * pad;
    let plot_h = opts.height - 2.0 * pad;
    let px = |x: f64| pad + (x - xmin) / xs * plot_w;
    let py = |y: f64| pad + plot_h - (y - ymin) / ys * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = opts.width,
        h = opts.height
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#,
        opts.width, opts.height
    );
    if !opts.title.is_empty() {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="22" font-size="15">{}</text>"#,
            pad,
            esc(&opts.title)
        );
    }
    let _ = writeln!(
        out,
        r##"<rect x="{pad}" y="{pad}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="#999"/>"##
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        pad + plot_w / 2.0,
        opts.height - 10.0,
        esc(&opts.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
        pad + plot_h / 2.0,
        pad + plot_h / 2.0,
        esc(&opts.y_label)
    );
    for i in 0..n {
        let p = points.row(i);
        marker(
            &mut out,
            classes[i],
            px(p[0]),
            py(p[1]),
            opts.marker,
            PALETTE[clusters[i] % PALETTE.len()],
            "pt",
        );
    }

    let lx = opts.width - legend_w;
    let mut ly = pad + 8.0;
    let _ = writeln!(out, r#"<text x="{lx}" y="{ly}">cluster</text>"#);
    for c in 0..k {
        ly += 18.0;
        let _ = writeln!(
            out,
            r##"<rect class="legend" x="{lx}" y="{:.2}" width="10" height="10" fill="{}" stroke="#222"/>"##,
            ly - 9.0,
            PALETTE[c % PALETTE.len()]
        );
        let _ = writeln!(out, r#"<text x="{}" y="{ly}">{}</text>"#, lx + 16.0, c + 1);
    }
    ly += 28.0;
    let _ = writeln!(out, r#"<text x="{lx}" y="{ly}">class</text>"#);
    for c in 0..q {
        ly += 18.0;
        marker(
            &mut out,
            c,
            lx + 5.0,
            ly - 4.0,
            opts.marker,
            "#ffffff",
            "legend",
        );
        let name = opts
            .class_names
            .get(c)
            .cloned()
            .unwrap_or_else(|| c.to_string());
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{ly}">{}</text>"#,
            lx + 16.0,
            esc(&name)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
