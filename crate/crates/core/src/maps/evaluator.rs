use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::geometry::{self, Point, MEMBERSHIP_TOL};
use crate::sample::rng_for;

/// Step used by finite-difference derivative fallbacks.
pub const FD_STEP: f64 = 1e-5;

/// Oracle contract for a continuous map between subsets of Euclidean spaces.
///
/// Implementations must be deterministic and reentrant.
pub trait MapEvaluator: Send + Sync {
    fn eval(&self, x: &Point) -> Result<Point>;

    /// Directional derivative at `x` along `d`. Defaults to a central difference.
    fn directional_derivative(&self, x: &Point, d: &Point) -> Result<Point> {
        let fwd = self.eval(&(x + d * FD_STEP))?;
        let bwd = self.eval(&(x - d * FD_STEP))?;
        Ok((fwd - bwd) / (2.0 * FD_STEP))
    }

    /// Exact bound on `‖F(x) − F(y)‖ / ‖x − y‖` for `x`, `y` in a common source simplex,
    /// when one is known. `None` means only sampled estimates are available.
    fn simplexwise_lipschitz(&self) -> Option<f64> {
        None
    }
}

impl<T: MapEvaluator + ?Sized> MapEvaluator for &T {
    fn eval(&self, x: &Point) -> Result<Point> {
        (**self).eval(x)
    }
    fn directional_derivative(&self, x: &Point, d: &Point) -> Result<Point> {
        (**self).directional_derivative(x, d)
    }
    fn simplexwise_lipschitz(&self) -> Option<f64> {
        (**self).simplexwise_lipschitz()
    }
}

impl<T: MapEvaluator + ?Sized> MapEvaluator for Box<T> {
    fn eval(&self, x: &Point) -> Result<Point> {
        (**self).eval(x)
    }
    fn directional_derivative(&self, x: &Point, d: &Point) -> Result<Point> {
        (**self).directional_derivative(x, d)
    }
    fn simplexwise_lipschitz(&self) -> Option<f64> {
        (**self).simplexwise_lipschitz()
    }
}

impl<T: MapEvaluator + ?Sized> MapEvaluator for Arc<T> {
    fn eval(&self, x: &Point) -> Result<Point> {
        (**self).eval(x)
    }
    fn directional_derivative(&self, x: &Point, d: &Point) -> Result<Point> {
        (**self).directional_derivative(x, d)
    }
    fn simplexwise_lipschitz(&self) -> Option<f64> {
        (**self).simplexwise_lipschitz()
    }
}

/// Wraps a closure as an evaluator.
pub struct FnMap<F> {
    f: F,
    lipschitz: Option<f64>,
}

impl<F> FnMap<F>
where
    F: Fn(&Point) -> Point + Send + Sync,
{
    pub fn new(f: F) -> Self {
        Self { f, lipschitz: None }
    }

    /// Declares an exact simplexwise Lipschitz bound for the closure.
    pub fn with_lipschitz(mut self, bound: f64) -> Self {
        self.lipschitz = Some(bound);
        self
    }
}

impl<F> MapEvaluator for FnMap<F>
where
    F: Fn(&Point) -> Point + Send + Sync,
{
    fn eval(&self, x: &Point) -> Result<Point> {
        Ok((self.f)(x))
    }

    fn simplexwise_lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }
}

/// Map affine on each simplex of `source`, given by vertex images.
#[derive(Clone, Debug)]
pub struct PlMap {
    source: Complex,
    images: Vec<Point>,
    lipschitz: f64,
}

impl PlMap {
    pub fn new(source: Complex, images: Vec<Point>) -> Result<Self> {
        if images.len() != source.num_vertices() {
            return Err(Error::InvalidParameter(format!(
                "{} vertex images for {} vertices",
                images.len(),
                source.num_vertices()
            )));
        }
        let q = images[0].len();
        if images.iter().any(|y| y.len() != q || y.iter().any(|c| !c.is_finite())) {
            return Err(Error::InvalidParameter("vertex images must be finite and of equal dimension".into()));
        }
        let lipschitz = source
            .maximal()
            .iter()
            .map(|&id| linear_part_norm(&source, id, &images))
            .fold(0.0, f64::max);
        Ok(Self { source, images, lipschitz })
    }

    pub fn identity(k: &Complex) -> Self {
        Self::new(k.clone(), k.vertices().to_vec()).expect("identity images are valid")
    }

    pub fn source(&self) -> &Complex {
        &self.source
    }

    pub fn images(&self) -> &[Point] {
        &self.images
    }

    pub fn image_points(&self, simplex: usize) -> Vec<&Point> {
        self.source.simplex(simplex).iter().map(|&v| &self.images[v]).collect()
    }
}

/// Operator norm of the linear part of the affine map on simplex `id`.
fn linear_part_norm(k: &Complex, id: usize, images: &[Point]) -> f64 {
    let s = k.simplex(id);
    if s.len() == 1 {
        return 0.0;
    }
    let q = images[0].len();
    let mut img_edges = DMatrix::zeros(q, s.len() - 1);
    for (j, &v) in s[1..].iter().enumerate() {
        img_edges.set_column(j, &(&images[v] - &images[s[0]]));
    }
    let m = img_edges * k.frame(id).left_inverse();
    m.singular_values().max()
}

impl MapEvaluator for PlMap {
    fn eval(&self, x: &Point) -> Result<Point> {
        let loc = self.source.locate(x)?;
        Ok(geometry::combine(&self.image_points(loc.simplex), &loc.weights))
    }

    fn simplexwise_lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz)
    }
}

/// A map whose image of each source simplex `t` is certified to lie in a target simplex `ξ_t`.
pub trait CarrierCertified: MapEvaluator {
    fn source(&self) -> &Complex;
    fn target(&self) -> &Complex;
    /// Target simplex id `ξ_t` containing the image of source simplex `t`.
    fn certificate(&self, t: usize) -> usize;
    /// The underlying PL map, when the map is one.
    fn as_pl(&self) -> Option<&PlMap> {
        None
    }
}

/// A PL map together with the target simplices containing each simplex image.
#[derive(Clone, Debug)]
pub struct CertifiedPlMap {
    pl: PlMap,
    target: Complex,
    certificates: Vec<usize>,
}

impl CertifiedPlMap {
    pub fn new(pl: PlMap, target: Complex) -> Result<Self> {
        let certificates = (0..pl.source.num_simplices())
            .map(|t| enclosing_simplex(&target, &pl.image_points(t)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { pl, target, certificates })
    }

    pub fn identity(k: &Complex) -> Self {
        Self {
            pl: PlMap::identity(k),
            target: k.clone(),
            certificates: (0..k.num_simplices()).collect(),
        }
    }

    pub fn pl(&self) -> &PlMap {
        &self.pl
    }
}

/// Smallest simplex of `target` containing all `points`, found from the carrier of their
/// barycenter and confirmed point by point.
pub(crate) fn enclosing_simplex(target: &Complex, points: &[&Point]) -> Result<usize> {
    let c = target.carrier(&geometry::barycenter(points))?;
    for p in points {
        let inside = target
            .barycentric_coords(c, p)
            .map(|w| w.iter().all(|&x| x >= -MEMBERSHIP_TOL))
            .unwrap_or(false);
        if !inside {
            return Err(Error::InvalidParameter(format!(
                "image point {:?} leaves target simplex {:?}",
                p.as_slice(),
                target.simplex(c)
            )));
        }
    }
    Ok(c)
}

impl MapEvaluator for CertifiedPlMap {
    fn eval(&self, x: &Point) -> Result<Point> {
        self.pl.eval(x)
    }

    fn simplexwise_lipschitz(&self) -> Option<f64> {
        self.pl.simplexwise_lipschitz()
    }
}

impl CarrierCertified for CertifiedPlMap {
    fn source(&self) -> &Complex {
        &self.pl.source
    }

    fn target(&self) -> &Complex {
        &self.target
    }

    fn certificate(&self, t: usize) -> usize {
        self.certificates[t]
    }

    fn as_pl(&self) -> Option<&PlMap> {
        Some(&self.pl)
    }
}

/// `outer ∘ inner`.
pub struct Compose {
    pub inner: Arc<dyn MapEvaluator>,
    pub outer: Arc<dyn MapEvaluator>,
}

impl MapEvaluator for Compose {
    fn eval(&self, x: &Point) -> Result<Point> {
        self.outer.eval(&self.inner.eval(x)?)
    }
}

/// Largest observed ratio `‖F(x) − F(y)‖ / ‖x − y‖` over `pairs` random pairs drawn inside
/// common simplices. Half the pairs are global within a simplex, half are local perturbations.
/// The result is an estimate, never a certificate.
pub fn estimate_lipschitz<F: MapEvaluator + ?Sized>(
    f: &F,
    k: &Complex,
    simplices: &[usize],
    pairs: usize,
    seed: u64,
) -> Result<f64> {
    let positive: Vec<usize> = simplices.iter().copied().filter(|&s| k.simplex_dim(s) > 0).collect();
    if positive.is_empty() || pairs == 0 {
        return Ok(0.0);
    }
    let per = pairs.div_ceil(positive.len()).max(2);
    let ratios = positive
        .par_iter()
        .map(|&id| -> Result<f64> {
            let mut rng = rng_for(seed ^ 0x5eed_11b5, id as u64);
            let n = k.simplex(id).len();
            let mut best = 0.0f64;
            for i in 0..per {
                let wx = geometry::uniform_barycentric(&mut rng, n);
                let wy = if i % 2 == 0 {
                    geometry::uniform_barycentric(&mut rng, n)
                } else {
                    let scale = 10f64.powf(rng.random_range(-4.0..-1.0));
                    let mut w: Vec<f64> = wx.iter().map(|&a| (a + scale * rng.random_range(-1.0..1.0)).max(0.0)).collect();
                    let s: f64 = w.iter().sum();
                    w.iter_mut().for_each(|a| *a /= s);
                    w
                };
                let x = k.point_at(id, &wx);
                let y = k.point_at(id, &wy);
                let d = (&x - &y).norm();
                if d < 1e-12 {
                    continue;
                }
                let r = (f.eval(&x)? - f.eval(&y)?).norm() / d;
                best = best.max(r);
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}
