//! Minimal SVG line charts and heatmaps.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
}

fn range(vals: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = vals
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo > hi {
        return None;
    }
    Some(if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) })
}

/// Line chart; with `log_y` non-positive values are dropped.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series], log_y: bool) -> String {
    let ty = |y: f64| if log_y { y.log10() } else { y };
    let keep = |&(x, y): &(f64, f64)| x.is_finite() && y.is_finite() && (!log_y || y > 0.0);
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| s.points.iter().copied().filter(keep).map(|(x, y)| (x, ty(y))).collect())
        .collect();
    let mut out = String::new();
    header(&mut out, title);
    let (Some((x0, x1)), Some((y0, y1))) = (
        range(pts.iter().flatten().map(|p| p.0)),
        range(pts.iter().flatten().map(|p| p.1)),
    ) else {
        out.push_str("</svg>\n");
        return out;
    };
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let ylab = if log_y { format!("1e{yv:.1}") } else { format!("{yv:.3e}") };
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xv:.3}</text>"#, sx(xv), TOP + ph + 16.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{ylab}</text>"#, LEFT - 4.0, sy(yv) + 4.0);
    }
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 10.0, escape(x_label));
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    );
    for (i, (s, p)) in series.iter().zip(&pts).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let d: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, d.join(" "));
        let ly = TOP + 14.0 + 16.0 * i as f64;
        let _ = writeln!(out, r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#, W - RIGHT + 10.0, W - RIGHT + 30.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, W - RIGHT + 35.0, ly + 4.0, escape(&s.label));
    }
    out.push_str("</svg>\n");
    out
}

fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * t.powf(0.8)) as u8;
    let g = (255.0 * (1.0 - (2.0 * t - 1.0).abs()).powf(0.7) * 0.85) as u8;
    let b = (255.0 * (1.0 - t).powf(0.8)) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Heatmap of `(theta_deg, phi_deg, value)` cells on a product grid, phi
/// horizontal. Infinite values are drawn black.
pub fn heatmap(title: &str, cells: &[(f64, f64, f64)], log: bool) -> String {
    let mut thetas: Vec<f64> = cells.iter().map(|c| c.0).collect();
    let mut phis: Vec<f64> = cells.iter().map(|c| c.1).collect();
    for v in [&mut thetas, &mut phis] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let tv = |v: f64| if log { v.log10() } else { v };
    let mut out = String::new();
    header(&mut out, title);
    let Some((v0, v1)) = range(cells.iter().map(|c| tv(c.2))) else {
        out.push_str("</svg>\n");
        return out;
    };
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let (cw, ch) = (pw / phis.len() as f64, ph / thetas.len() as f64);
    for &(t, p, v) in cells {
        let i = thetas.partition_point(|&x| x < t);
        let j = phis.partition_point(|&x| x < p);
        let fill = if v.is_finite() { ramp((tv(v) - v0) / (v1 - v0)) } else { "#000000".into() };
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            LEFT + j as f64 * cw,
            TOP + i as f64 * ch,
            cw + 0.3,
            ch + 0.3
        );
    }
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">phi (deg)</text>"#, LEFT + pw / 2.0, H - 10.0);
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">theta (deg)</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );
    for i in 0..=10 {
        let f = i as f64 / 10.0;
        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{:.1}" width="18" height="{:.1}" fill="{}"/>"#,
            W - RIGHT + 20.0,
            TOP + ph * (1.0 - f) - ph / 11.0,
            ph / 11.0 + 0.5,
            ramp(f)
        );
    }
    let lab = |v: f64| if log { format!("1e{v:.1}") } else { format!("{v:.3e}") };
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, W - RIGHT + 42.0, TOP + 10.0, lab(v1));
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, W - RIGHT + 42.0, TOP + ph, lab(v0));
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_well_formed_documents() {
        let s = line_chart(
            "t",
            "x",
            "y",
            &[Series { label: "a<b".into(), points: vec![(0.0, 1.0), (1.0, 10.0), (2.0, 0.0)] }],
            true,
        );
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("a&lt;b"));
        let h = heatmap("m", &[(0.0, 0.0, 1.0), (0.0, 90.0, f64::INFINITY), (90.0, 0.0, 3.0), (90.0, 90.0, 2.0)], false);
        assert_eq!(h.matches("<rect").count(), 1 + 4 + 11);
        assert!(line_chart("e", "x", "y", &[], false).ends_with("</svg>\n"));
    }
}
