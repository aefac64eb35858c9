//! Minimal SVG line plots: a framed box, min/max tick labels, up to a few
//! polylines.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 48.0;
const COLORS: [&str; 3] = ["#1f4e9c", "#c0392b", "#555555"];

pub struct Series<'a> {
    pub label: &'a str,
    pub points: &'a [(f64, f64)],
}

fn bounds(series: &[Series]) -> (f64, f64, f64, f64) {
    let pts = series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y1 = y0 + 1.0;
    }
    (x0, x1, y0, y1)
}

/// `equal_aspect` keeps one unit the same length on both axes (for curves).
pub fn plot(title: &str, x_label: &str, y_label: &str, series: &[Series], equal_aspect: bool) -> String {
    let (x0, x1, y0, y1) = bounds(series);
    let (mut sx, mut sy) = ((W - 2.0 * PAD) / (x1 - x0), (H - 2.0 * PAD) / (y1 - y0));
    if equal_aspect {
        let s = sx.min(sy);
        sx = s;
        sy = s;
    }
    let px = |x: f64| PAD + (x - x0) * sx;
    let py = |y: f64| H - PAD - (y - y0) * sy;
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let (bx, by, bw, bh) = (px(x0), py(y1), (x1 - x0) * sx, (y1 - y0) * sy);
    let _ = writeln!(out, r#"<rect x="{bx:.2}" y="{by:.2}" width="{bw:.2}" height="{bh:.2}" fill="none" stroke="black"/>"#);
    let label = |out: &mut String, x: f64, y: f64, anchor: &str, s: &str| {
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="11" text-anchor="{anchor}">{}</text>"#, escape(s));
    };
    label(&mut out, px(x0), py(y0) + 16.0, "start", &format!("{x0:.3}"));
    label(&mut out, px(x1), py(y0) + 16.0, "end", &format!("{x1:.3}"));
    label(&mut out, px(x0) - 4.0, py(y0), "end", &format!("{y0:.3}"));
    label(&mut out, px(x0) - 4.0, py(y1) + 10.0, "end", &format!("{y1:.3}"));
    label(&mut out, px(0.5 * (x0 + x1)), py(y0) + 32.0, "middle", x_label);
    label(&mut out, 14.0, py(0.5 * (y0 + y1)), "middle", y_label);
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let ly = PAD + 14.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{ly:.2}" font-family="sans-serif" font-size="11" fill="{color}" text-anchor="end">{}</text>"#,
            W - PAD - 4.0,
            escape(s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formed() {
        let pts = [(0.0, 0.0), (1.0, 2.0)];
        let s = plot("a<b", "x", "y", &[Series { label: "f", points: &pts }], false);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("a&lt;b"));
        assert_eq!(s.matches("<polyline").count(), 1);
    }
}
