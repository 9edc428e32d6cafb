//! Sampled star condition `F(St(v, K)) ⊂ St(u, L)` with open stars.
//!
//! A point `y` lies in the open star of a target vertex `u` exactly when `u` is a vertex of
//! the carrier of `y`. So the admissible `u` for a source vertex `v` are the vertices common
//! to the carriers of all sampled images of its star; the one with the largest worst-case
//! barycentric weight is chosen.

use rayon::prelude::*;

use super::evaluator::MapEvaluator;
use crate::complex::Complex;
use crate::error::Result;
use crate::geometry::Point;
use crate::sample::rng_for;

#[derive(Clone, Debug)]
pub struct StarOptions {
    /// Sample points per simplex of positive dimension.
    pub density: usize,
    pub seed: u64,
    /// Worst-case weights below this are too close to a star boundary to decide.
    pub margin_floor: f64,
}

impl Default for StarOptions {
    fn default() -> Self {
        Self {
            density: 1000,
            seed: 0,
            margin_floor: 1e-7,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StarOutcome {
    /// Target vertex per source vertex, with the worst-case weight that certified it.
    Assignment { vertex_image: Vec<usize>, margins: Vec<f64> },
    /// No target vertex works for `vertex`; `witness` is a star point whose image leaves
    /// every remaining candidate star.
    Failure { vertex: usize, witness: Point },
    Inconclusive { vertex: usize, reason: String },
}

/// Sampled images of the simplices of a region of the source.
pub(crate) struct StarSamples {
    /// Per source simplex: sample points and their images. Vertices carry one sample.
    pub points: Vec<Vec<Point>>,
    pub images: Vec<Vec<Point>>,
    pub weights: Vec<Vec<Vec<f64>>>,
}

impl StarSamples {
    pub fn collect<F: MapEvaluator + ?Sized>(
        f: &F,
        k: &Complex,
        in_region: &[bool],
        density: usize,
        seed: u64,
    ) -> Result<Self> {
        let per: Vec<(Vec<Point>, Vec<Point>, Vec<Vec<f64>>)> = (0..k.num_simplices())
            .into_par_iter()
            .map(|id| -> Result<_> {
                if !in_region[id] {
                    return Ok((Vec::new(), Vec::new(), Vec::new()));
                }
                let mut pts = Vec::new();
                let mut ws = Vec::new();
                if k.simplex_dim(id) == 0 {
                    pts.push(k.vertex(k.simplex(id)[0]).clone());
                    ws.push(vec![1.0]);
                } else {
                    let mut rng = rng_for(seed, id as u64);
                    for _ in 0..density {
                        let (p, w) = k.sample_in(id, &mut rng);
                        pts.push(p);
                        ws.push(w);
                    }
                }
                let imgs = pts.iter().map(|p| f.eval(p)).collect::<Result<Vec<_>>>()?;
                Ok((pts, imgs, ws))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut points = Vec::with_capacity(per.len());
        let mut images = Vec::with_capacity(per.len());
        let mut weights = Vec::with_capacity(per.len());
        for (p, i, w) in per {
            points.push(p);
            images.push(i);
            weights.push(w);
        }
        Ok(Self { points, images, weights })
    }

    /// Carriers (vertex lists with weights) of every image in `l`.
    pub fn locate_in(&self, l: &Complex) -> Result<Vec<Vec<(Vec<usize>, Vec<f64>)>>> {
        self.images
            .par_iter()
            .map(|imgs| {
                imgs.iter()
                    .map(|y| {
                        let loc = l.locate(y)?;
                        Ok((l.simplex(loc.simplex).to_vec(), loc.weights))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect()
    }
}

/// Decides the star condition for every vertex `v` with `in_region` star simplices.
/// `skip[s]` excludes simplex `s` from the stars of pinned vertices; `pins[v]` forces the
/// target vertex of `v`.
pub(crate) fn assign_vertices(
    k: &Complex,
    in_region: &[bool],
    samples: &StarSamples,
    located: &[Vec<(Vec<usize>, Vec<f64>)>],
    pins: &[Option<usize>],
    skip_for_pinned: &[bool],
    margin_floor: f64,
) -> StarOutcome {
    let per_vertex: Vec<std::result::Result<Option<(usize, f64)>, StarOutcome>> = (0..k.num_vertices())
        .into_par_iter()
        .map(|v| {
            let pinned = pins[v];
            let star: Vec<usize> = k
                .vertex_star(v)
                .iter()
                .copied()
                .filter(|&s| in_region[s] && !(pinned.is_some() && skip_for_pinned[s]))
                .collect();
            if star.is_empty() && pinned.is_none() {
                return Ok(None);
            }
            // candidates with their running worst-case weight
            let mut cands: Vec<(usize, f64)> = match pinned {
                Some(u) => vec![(u, f64::INFINITY)],
                None => {
                    let vs = k.vertex_simplex(v);
                    match located[vs].first() {
                        Some((verts, _)) => verts.iter().map(|&u| (u, f64::INFINITY)).collect(),
                        None => return Ok(None),
                    }
                }
            };
            for &s in &star {
                for (i, (verts, ws)) in located[s].iter().enumerate() {
                    cands.retain_mut(|(u, m)| match verts.iter().position(|w| w == u) {
                        Some(j) => {
                            *m = m.min(ws[j]);
                            true
                        }
                        None => false,
                    });
                    if cands.is_empty() {
                        return Err(StarOutcome::Failure {
                            vertex: v,
                            witness: samples.points[s][i].clone(),
                        });
                    }
                }
            }
            let best = cands
                .iter()
                .copied()
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
                .unwrap();
            if best.1 < margin_floor {
                return Err(StarOutcome::Inconclusive {
                    vertex: v,
                    reason: format!("best star margin {:.3e} is below {margin_floor:.1e}", best.1),
                });
            }
            Ok(Some(best))
        })
        .collect();

    let mut vertex_image = vec![usize::MAX; k.num_vertices()];
    let mut margins = vec![f64::NAN; k.num_vertices()];
    for (v, r) in per_vertex.into_iter().enumerate() {
        match r {
            Err(outcome) => return outcome,
            Ok(Some((u, m))) => {
                vertex_image[v] = u;
                margins[v] = m;
            }
            Ok(None) => {}
        }
    }
    StarOutcome::Assignment { vertex_image, margins }
}

/// Checks the star condition of `f` from `k` to `l` on sampled stars.
pub fn check_star_condition<F: MapEvaluator + ?Sized>(
    f: &F,
    k: &Complex,
    l: &Complex,
    opts: &StarOptions,
) -> Result<StarOutcome> {
    let everywhere = vec![true; k.num_simplices()];
    let samples = StarSamples::collect(f, k, &everywhere, opts.density, opts.seed)?;
    let located = samples.locate_in(l)?;
    let pins = vec![None; k.num_vertices()];
    let nothing = vec![false; k.num_simplices()];
    Ok(assign_vertices(k, &everywhere, &samples, &located, &pins, &nothing, opts.margin_floor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::maps::evaluator::PlMap;
    use crate::maps::{degree2_circle, FnMap};
    use crate::subdivision::sd_iter;
    use crate::Subcomplex;

    #[test]
    fn identity_assigns_identity() {
        let k = fixtures::triangle();
        let out = check_star_condition(&PlMap::identity(&k), &k, &k, &StarOptions { density: 200, ..Default::default() }).unwrap();
        match out {
            StarOutcome::Assignment { vertex_image, .. } => assert_eq!(vertex_image, vec![0, 1, 2]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn simplicial_map_recovers_vertex_map() {
        let k = fixtures::edge();
        // swap the endpoints
        let f = PlMap::new(k.clone(), vec![k.vertex(1).clone(), k.vertex(0).clone()]).unwrap();
        match check_star_condition(&f, &k, &k, &StarOptions { density: 200, ..Default::default() }).unwrap() {
            StarOutcome::Assignment { vertex_image, .. } => assert_eq!(vertex_image, vec![1, 0]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn square_to_triangle_needs_subdivision() {
        let square = fixtures::square_circle(1.0);
        let tri = fixtures::triangle_circle(1.0);
        let f = FnMap::new(move |x: &Point| fixtures::radial_to_triangle_circle(x, 1.0));
        let opts = StarOptions { density: 1000, ..Default::default() };
        let first = check_star_condition(&f, &square, &tri, &opts).unwrap();
        assert!(matches!(first, StarOutcome::Failure { .. }), "{first:?}");
        let ok = (1..=2).any(|k| {
            let fine = sd_iter(&square, &Subcomplex::empty(), k).unwrap().child;
            matches!(check_star_condition(&f, &fine, &tri, &opts).unwrap(), StarOutcome::Assignment { .. })
        });
        assert!(ok);
    }

    #[test]
    fn degree_two_fails_on_coarse_circle() {
        let c = fixtures::square_circle(1.0);
        let out = check_star_condition(&degree2_circle(1.0), &c, &c, &StarOptions { density: 100, ..Default::default() }).unwrap();
        assert!(matches!(out, StarOutcome::Failure { .. }));
    }
}
