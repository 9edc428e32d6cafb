//! Seeded point samples of polyhedra.
//!
//! Every simplex draws from its own ChaCha stream keyed by (seed, simplex id), so a sample
//! set is reproducible and independent of iteration order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::complex::Complex;
use crate::geometry::Point;

#[derive(Clone, Debug)]
pub struct SamplePoint {
    /// Simplex the point was drawn from. Interior draws have it as their carrier.
    pub simplex: usize,
    pub weights: Vec<f64>,
    pub point: Point,
}

#[derive(Clone, Debug)]
pub struct SampleSet {
    pub seed: u64,
    pub density: usize,
    pub points: Vec<SamplePoint>,
}

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl SampleSet {
    /// `density` uniform points inside each listed simplex.
    pub fn in_simplices(k: &Complex, simplices: &[usize], density: usize, seed: u64) -> Self {
        let points = simplices
            .par_iter()
            .flat_map_iter(|&id| {
                let mut rng = rng_for(seed, id as u64);
                (0..density)
                    .map(|_| {
                        let (point, weights) = k.sample_in(id, &mut rng);
                        SamplePoint { simplex: id, weights, point }
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        Self { seed, density, points }
    }

    /// `density` points per maximal simplex plus every vertex.
    pub fn per_simplex(k: &Complex, density: usize, seed: u64) -> Self {
        let mut s = Self::in_simplices(k, k.maximal(), density, seed);
        s.add_vertices(k);
        s
    }

    /// About `total` points spread evenly over the maximal simplices, plus every vertex.
    pub fn total(k: &Complex, total: usize, seed: u64) -> Self {
        let per = total.div_ceil(k.maximal().len()).max(1);
        Self::per_simplex(k, per, seed)
    }

    /// Appends every vertex as a sample point.
    pub fn add_vertices(&mut self, k: &Complex) {
        for v in 0..k.num_vertices() {
            self.points.push(SamplePoint {
                simplex: k.vertex_simplex(v),
                weights: vec![1.0],
                point: k.vertex(v).clone(),
            });
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SamplePoint> {
        self.points.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point;

    #[test]
    fn reproducible_and_inside() {
        let k = Complex::new(
            vec![point(&[0.0, 0.0]), point(&[1.0, 0.0]), point(&[0.0, 1.0])],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        let a = SampleSet::per_simplex(&k, 100, 7);
        let b = SampleSet::per_simplex(&k, 100, 7);
        assert_eq!(a.len(), 103);
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.point, y.point);
            assert!(k.distance_to(&x.point) < 1e-12);
        }
        let c = SampleSet::per_simplex(&k, 100, 8);
        assert_ne!(a.points[0].point, c.points[0].point);
    }
}
