//! Closed embedding of an open set `X = {θ > 0}` as the graph `{(x, 1/θ(x))}`.
//!
//! The last coordinate blows up at the boundary of `X`, which is what makes the image closed.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::Point;

#[derive(Clone)]
pub struct GraphEmbedding {
    theta: Arc<dyn Fn(&Point) -> f64 + Send + Sync>,
}

impl GraphEmbedding {
    /// `theta` must be positive exactly on `X`.
    pub fn new(theta: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        Self { theta: Arc::new(theta) }
    }

    pub fn forward(&self, x: &Point) -> Result<Point> {
        let t = (self.theta)(x);
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::NonPositiveWeight {
                point: x.iter().copied().collect(),
                value: t,
            });
        }
        let mut y = Point::zeros(x.len() + 1);
        y.rows_mut(0, x.len()).copy_from(x);
        y[x.len()] = 1.0 / t;
        Ok(y)
    }

    /// Drops the last coordinate.
    pub fn inverse(&self, y: &Point) -> Result<Point> {
        if y.len() < 2 {
            return Err(Error::InvalidParameter("graph points have at least two coordinates".into()));
        }
        Ok(y.rows(0, y.len() - 1).into_owned())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point;

    fn unit_interval() -> GraphEmbedding {
        GraphEmbedding::new(|x: &Point| x[0] * (1.0 - x[0]))
    }

    #[test]
    fn round_trip_and_escape() {
        let e = unit_interval();
        for t in [1e-7, 0.25, 0.5, 0.9] {
            let x = point(&[t]);
            assert_eq!(e.inverse(&e.forward(&x).unwrap()).unwrap(), x);
        }
        assert!(e.forward(&point(&[1e-7])).unwrap()[1] > 1e6);
        assert!(e.forward(&point(&[0.0])).is_err());
        assert!(e.forward(&point(&[1.5])).is_err());
    }
}
