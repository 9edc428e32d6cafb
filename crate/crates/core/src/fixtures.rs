//! Small named complexes and maps used by tests, demos and the command line.

use std::f64::consts::PI;

use crate::complex::Complex;
use crate::geometry::{point, Point};

fn build(vertices: &[&[f64]], simplices: &[&[usize]]) -> Complex {
    Complex::new(
        vertices.iter().map(|c| point(c)).collect(),
        simplices.iter().map(|s| s.to_vec()).collect(),
    )
    .expect("fixture is a valid complex")
}

pub fn vertex() -> Complex {
    build(&[&[0.0]], &[&[0]])
}

/// Unit edge `[0, 1] ⊂ ℝ`.
pub fn edge() -> Complex {
    build(&[&[0.0], &[1.0]], &[&[0, 1]])
}

/// Unit right triangle in ℝ².
pub fn triangle() -> Complex {
    build(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]], &[&[0, 1, 2]])
}

/// Two triangles sharing only the vertex at the origin.
pub fn bowtie() -> Complex {
    build(
        &[&[0.0, 0.0], &[-1.0, 0.5], &[-1.0, -0.5], &[1.0, 0.5], &[1.0, -0.5]],
        &[&[0, 1, 2], &[0, 3, 4]],
    )
}

/// Two triangles sharing an edge, planar.
pub fn two_triangles() -> Complex {
    build(
        &[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]],
        &[&[0, 1, 2], &[1, 2, 3]],
    )
}

/// Boundary of the square `|x| + |y| ≤ r`: a circle with four vertices on the axes.
pub fn square_circle(r: f64) -> Complex {
    build(
        &[&[r, 0.0], &[0.0, r], &[-r, 0.0], &[0.0, -r]],
        &[&[0, 1], &[1, 2], &[2, 3], &[0, 3]],
    )
}

fn triangle_circle_vertices(r: f64) -> [Point; 3] {
    [90.0f64, 210.0, 330.0].map(|deg| {
        let a = deg.to_radians();
        point(&[r * a.cos(), r * a.sin()])
    })
}

/// Boundary of an equilateral triangle with circumradius `r`, vertices at 90°, 210°, 330°.
pub fn triangle_circle(r: f64) -> Complex {
    let v = triangle_circle_vertices(r);
    Complex::new(v.to_vec(), vec![vec![0, 1], vec![1, 2], vec![0, 2]]).expect("fixture is valid")
}

/// Radial projection of `x ≠ 0` onto [`triangle_circle`].
pub fn radial_to_triangle_circle(x: &Point, r: f64) -> Point {
    let v = triangle_circle_vertices(r);
    let u = x / x.norm();
    let mut best = f64::INFINITY;
    for (a, b) in [(0, 1), (1, 2), (2, 0)] {
        let e = &v[b] - &v[a];
        // solve t u = a + s e
        let det = u[0] * (-e[1]) - u[1] * (-e[0]);
        if det.abs() < 1e-15 {
            continue;
        }
        let (ax, ay) = (v[a][0], v[a][1]);
        let t = (ax * (-e[1]) - ay * (-e[0])) / det;
        let s = (u[0] * ay - u[1] * ax) / det;
        if t > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&s) {
            best = best.min(t);
        }
    }
    u * best
}

/// `[0, 3] ⊂ ℝ` as three unit edges.
pub fn interval3() -> Complex {
    build(&[&[0.0], &[1.0], &[2.0], &[3.0]], &[&[0, 1], &[1, 2], &[2, 3]])
}

/// `[0, 3] ⊂ ℝ` as a single edge.
pub fn interval3_coarse() -> Complex {
    build(&[&[0.0], &[3.0]], &[&[0, 1]])
}

/// Smooth increasing bijection of `[0, 3]`.
pub fn interval_reparam(x: &Point) -> Point {
    let t = x[0];
    point(&[3.0 * (PI * t / 6.0).sin().powi(2)])
}

/// `[−1, 1]` with vertices `−1, 0, 1`.
pub fn example_source() -> Complex {
    build(&[&[-1.0], &[0.0], &[1.0]], &[&[0, 1], &[1, 2]])
}

/// The arms `{0} × [−1, 0]` and `[0, 1] × {0}` of the cross `{xy = 0}`.
pub fn example_target() -> Complex {
    build(&[&[0.0, -1.0], &[0.0, 0.0], &[1.0, 0.0]], &[&[0, 1], &[1, 2]])
}

/// Two edges meeting at a right angle at the origin.
pub fn bent_path() -> Complex {
    build(&[&[-1.0, 0.0], &[0.0, 0.0], &[0.0, 1.0]], &[&[0, 1], &[1, 2]])
}

/// Two triangles in ℝ³ sharing the edge from the origin to `(0, 1, 0)`, folded along it.
pub fn folded_triangles() -> Complex {
    build(
        &[&[0.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[-1.0, 0.5, 0.0], &[0.7, 0.5, 0.7]],
        &[&[0, 1, 2], &[0, 1, 3]],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid() {
        for k in [
            vertex(),
            edge(),
            triangle(),
            bowtie(),
            two_triangles(),
            square_circle(1.0),
            triangle_circle(1.0),
            interval3(),
            example_source(),
            example_target(),
            bent_path(),
            folded_triangles(),
        ] {
            assert!(k.check_realizable().is_ok());
        }
    }

    #[test]
    fn triangle_projection_lands_on_boundary() {
        let l = triangle_circle(1.0);
        for i in 0..36 {
            let a = i as f64 * 10f64.to_radians();
            let y = radial_to_triangle_circle(&point(&[a.cos(), a.sin()]), 1.0);
            assert!(l.distance_to(&y) < 1e-12, "angle {i}");
        }
    }
}
