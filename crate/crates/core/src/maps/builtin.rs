//! Named demonstration maps.

use nalgebra::DMatrix;

use super::evaluator::MapEvaluator;
use crate::error::{Error, Result};
use crate::geometry::{point, Point};

/// `t ↦ (0, t)` for `t < 0` and `t ↦ (t, 0)` for `t ≥ 0`: a continuous map onto the cross
/// `{xy = 0}` with a corner at the origin.
#[derive(Clone, Copy, Debug, Default)]
pub struct CrossMap;

pub fn cross_map() -> CrossMap {
    CrossMap
}

impl MapEvaluator for CrossMap {
    fn eval(&self, x: &Point) -> Result<Point> {
        let t = x[0];
        Ok(if t < 0.0 { point(&[0.0, t]) } else { point(&[t, 0.0]) })
    }

    fn simplexwise_lipschitz(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// Angle doubling on the diamond `|x| + |y| = radius`, followed by radial projection back
/// onto the diamond. Every diamond vertex is sent to a diamond vertex.
#[derive(Clone, Copy, Debug)]
pub struct Degree2Circle {
    pub radius: f64,
}

pub fn degree2_circle(radius: f64) -> Degree2Circle {
    Degree2Circle { radius }
}

impl MapEvaluator for Degree2Circle {
    fn eval(&self, x: &Point) -> Result<Point> {
        let phi = 2.0 * x[1].atan2(x[0]);
        let (s, c) = phi.sin_cos();
        // snap rounding noise so that vertices land exactly on vertices
        let snap = |t: f64| if t.abs() < 1e-12 { 0.0 } else { t };
        let (s, c) = (snap(s), snap(c));
        let r = self.radius / (c.abs() + s.abs());
        Ok(point(&[r * c, r * s]))
    }
}

/// `x ↦ A x + b`.
#[derive(Clone, Debug)]
pub struct Affine {
    pub a: DMatrix<f64>,
    pub b: Point,
}

pub fn affine(a: DMatrix<f64>, b: Point) -> Result<Affine> {
    if a.nrows() != b.len() {
        return Err(Error::InvalidParameter("affine map: A and b disagree in dimension".into()));
    }
    Ok(Affine { a, b })
}

impl MapEvaluator for Affine {
    fn eval(&self, x: &Point) -> Result<Point> {
        if x.len() != self.a.ncols() {
            return Err(Error::Evaluation(format!(
                "affine map expects dimension {}, got {}",
                self.a.ncols(),
                x.len()
            )));
        }
        Ok(&self.a * x + &self.b)
    }

    fn directional_derivative(&self, _x: &Point, d: &Point) -> Result<Point> {
        Ok(&self.a * d)
    }

    fn simplexwise_lipschitz(&self) -> Option<f64> {
        Some(self.a.singular_values().max())
    }
}

/// Looks up a named evaluator: `cross_map`, `degree2_circle` (radius 1) or `affine`
/// (identity on ℝ^dim).
pub enum Builtin {
    CrossMap,
    Degree2Circle,
    Affine,
}

impl Builtin {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "cross_map" => Some(Self::CrossMap),
            "degree2_circle" => Some(Self::Degree2Circle),
            "affine" => Some(Self::Affine),
            _ => None,
        }
    }

    pub fn evaluator(&self, dim: usize) -> Box<dyn MapEvaluator> {
        match self {
            Self::CrossMap => Box::new(CrossMap),
            Self::Degree2Circle => Box::new(degree2_circle(1.0)),
            Self::Affine => Box::new(Affine {
                a: DMatrix::identity(dim, dim),
                b: Point::zeros(dim),
            }),
        }
    }
}
