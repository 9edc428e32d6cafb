//! Minimal SVG output for complexes, maps and point clouds in the plane. Three-dimensional
//! input is drawn under a fixed orthographic projection.

use std::fmt::Write;

use crate::complex::Complex;
use crate::geometry::Point;

const SIZE: f64 = 480.0;
const PAD: f64 = 20.0;

/// Plane coordinates of `p`: padded with 0 in dimension 1, projected in dimension ≥ 3.
pub fn to_plane(p: &Point) -> (f64, f64) {
    match p.len() {
        0 => (0.0, 0.0),
        1 => (p[0], 0.0),
        2 => (p[0], p[1]),
        _ => {
            // oblique view: x to the right, y up, z toward the lower left
            let z = p[2];
            let w = if p.len() > 3 { p[3] } else { 0.0 };
            (p[0] - 0.5 * z + 0.25 * w, p[1] - 0.35 * z - 0.25 * w)
        }
    }
}

#[derive(Default)]
pub struct Plot {
    polygons: Vec<(Vec<(f64, f64)>, String)>,
    lines: Vec<(Vec<(f64, f64)>, String)>,
    dots: Vec<((f64, f64), String)>,
}

impl Plot {
    pub fn new() -> Self {
        Self::default()
    }

    /// Triangles filled, edges stroked, vertices dotted.
    pub fn complex(&mut self, k: &Complex, color: &str) -> &mut Self {
        for id in 0..k.num_simplices() {
            let pts: Vec<(f64, f64)> = k.points_of(id).iter().map(|p| to_plane(p)).collect();
            match pts.len() {
                1 => self.dots.push((pts[0], color.to_string())),
                2 => self.lines.push((pts, color.to_string())),
                3 => self.polygons.push((pts, color.to_string())),
                _ => {}
            }
        }
        self
    }

    pub fn polyline(&mut self, pts: &[Point], color: &str) -> &mut Self {
        self.lines.push((pts.iter().map(to_plane).collect(), color.to_string()));
        self
    }

    pub fn points(&mut self, pts: &[Point], color: &str) -> &mut Self {
        self.dots.extend(pts.iter().map(|p| (to_plane(p), color.to_string())));
        self
    }

    pub fn render(&self) -> String {
        let all = self
            .polygons
            .iter()
            .chain(&self.lines)
            .flat_map(|(p, _)| p.iter().copied())
            .chain(self.dots.iter().map(|d| d.0));
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (x, y) in all {
            if x.is_finite() && y.is_finite() {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
        }
        if !x0.is_finite() {
            (x0, y0, x1, y1) = (0.0, 0.0, 1.0, 1.0);
        }
        let span = (x1 - x0).max(y1 - y0).max(1e-12);
        let scale = (SIZE - 2.0 * PAD) / span;
        let tx = |x: f64| PAD + (x - x0) * scale;
        let ty = |y: f64| SIZE - PAD - (y - y0) * scale;
        let fmt = |pts: &[(f64, f64)]| {
            pts.iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", tx(x), ty(y)))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        for (p, c) in &self.polygons {
            let _ = writeln!(s, r#"<polygon points="{}" fill="{c}" fill-opacity="0.2" stroke="none"/>"#, fmt(p));
        }
        for (p, c) in &self.lines {
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="1.5"/>"#, fmt(p));
        }
        for ((x, y), c) in &self.dots {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{c}"/>"#, tx(*x), ty(*y));
        }
        s.push_str("</svg>\n");
        s
    }
}
