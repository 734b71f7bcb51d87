//! Minimal SVG output: density curves, design scatters, histograms.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 48.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    body: String,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let (x0, x1) = widen(x0, x1);
        let (y0, y1) = widen(y0, y1);
        Frame { x0, x1, y0, y1, body: String::new() }
    }

    fn sx(&self, x: f64) -> f64 {
        PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD)
    }

    fn sy(&self, y: f64) -> f64 {
        H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD)
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, closed: bool) {
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", self.sx(*x), self.sy(*y))).collect();
        let tag = if closed { "polygon" } else { "polyline" };
        let _ = writeln!(
            self.body,
            r#"<{tag} points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#,
            coords.join(" ")
        );
    }

    fn dot(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{r}" fill="{fill}"/>"#,
            self.sx(x),
            self.sy(y)
        );
    }

    fn circle(&mut self, cx: f64, cy: f64, radius: f64, stroke: &str) {
        let rx = radius / (self.x1 - self.x0) * (W - 2.0 * PAD);
        let ry = radius / (self.y1 - self.y0) * (H - 2.0 * PAD);
        let _ = writeln!(
            self.body,
            r#"<ellipse cx="{:.2}" cy="{:.2}" rx="{rx:.2}" ry="{ry:.2}" fill="none" stroke="{stroke}" stroke-dasharray="4 3"/>"#,
            self.sx(cx),
            self.sy(cy)
        );
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64) {
        let (l, r) = (self.sx(x), self.sx(x + w));
        let (t, b) = (self.sy(y + h), self.sy(y));
        let _ = writeln!(
            self.body,
            r##"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="#9ab" stroke="#345"/>"##,
            r - l,
            b - t
        );
    }

    fn finish(self, title: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
            W / 2.0,
            escape(title)
        );
        let (l, r, t, b) = (PAD, W - PAD, PAD, H - PAD);
        let _ = writeln!(s, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t);
        for (v, x, anchor) in [(self.x0, l, "start"), (self.x1, r, "end")] {
            let _ = writeln!(
                s,
                r#"<text x="{x}" y="{}" text-anchor="{anchor}" font-family="sans-serif" font-size="11">{}</text>"#,
                b + 16.0,
                tick(v)
            );
        }
        for (v, y) in [(self.y0, b), (self.y1, t + 10.0)] {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{y}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
                l - 4.0,
                tick(v)
            );
        }
        s.push_str(&self.body);
        s.push_str("</svg>\n");
        s
    }
}

fn widen(a: f64, b: f64) -> (f64, f64) {
    if b > a {
        (a, b)
    } else {
        let d = a.abs().max(1.0) * 0.05;
        (a - d, b + d)
    }
}

fn tick(v: f64) -> String {
    format!("{:.3}", v)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Density curve over a grid, with design points as ticks along the axis.
pub fn density_curve(title: &str, curve: &[(f64, f64)], design: &[f64]) -> String {
    let x0 = curve.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let x1 = curve.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let y1 = curve.iter().map(|p| p.1).fold(0.0, f64::max);
    let mut f = Frame::new(x0, x1, 0.0, y1 * 1.05);
    f.polyline(curve, "#135", false);
    for &x in design {
        f.dot(x, 0.0, 3.0, "#c31");
    }
    f.finish(title)
}

/// Two-dimensional scatter (first two coordinates) with optional region outlines.
pub fn scatter(
    title: &str,
    bounds: ([f64; 2], [f64; 2]),
    points: &[Vec<f64>],
    rejected: &[Vec<f64>],
    polygons: &[Vec<[f64; 2]>],
    circles: &[([f64; 2], f64)],
) -> String {
    let (lo, hi) = bounds;
    let mut f = Frame::new(lo[0], hi[0], lo[1], hi[1]);
    for poly in polygons {
        let pts: Vec<(f64, f64)> = poly.iter().map(|v| (v[0], v[1])).collect();
        f.polyline(&pts, "#678", true);
    }
    for (c, r) in circles {
        f.circle(c[0], c[1], *r, "#aaa");
    }
    for p in rejected {
        f.dot(p[0], p[1], 1.5, "#bbb");
    }
    for p in points {
        f.dot(p[0], p.get(1).copied().unwrap_or(0.0), 2.5, "#c31");
    }
    f.finish(title)
}

/// Histogram with an optional vertical reference line.
pub fn histogram(title: &str, edges: &[f64], counts: &[usize], reference: Option<f64>) -> String {
    let x0 = edges.first().copied().unwrap_or(0.0);
    let mut x1 = edges.last().copied().unwrap_or(1.0);
    let mut x0r = x0;
    if let Some(r) = reference {
        x0r = x0r.min(r);
        x1 = x1.max(r);
    }
    let top = counts.iter().copied().max().unwrap_or(1).max(1) as f64;
    let mut f = Frame::new(x0r, x1, 0.0, top * 1.05);
    for (i, &c) in counts.iter().enumerate() {
        let (a, b) = (edges[i], edges[i + 1]);
        let w = if b > a { b - a } else { (f.x1 - f.x0) / 60.0 };
        f.rect(a, 0.0, w, c as f64);
    }
    if let Some(r) = reference {
        f.polyline(&[(r, 0.0), (r, top * 1.05)], "#c31", false);
    }
    f.finish(title)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documents_are_well_formed() {
        let h = histogram("j <nu>", &[0.0, 1.0, 2.0], &[3, 1], Some(1.5));
        assert!(h.starts_with("<svg") && h.trim_end().ends_with("</svg>"));
        assert!(h.contains("j &lt;nu&gt;"));
        assert_eq!(h.matches("fill=\"#9ab\"").count(), 2);
        let s = scatter("d", ([-1.0, -1.0], [1.0, 1.0]), &[vec![0.0, 0.0]], &[], &[vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]], &[([0.0, 0.0], 0.5)]);
        assert!(s.contains("<polygon") && s.contains("<ellipse"));
        let c = density_curve("m", &[(-1.0, 1.5), (0.0, 0.0), (1.0, 1.5)], &[0.2]);
        assert!(c.contains("<polyline"));
    }
}
