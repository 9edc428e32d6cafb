//! Relative simplicial approximation.
//!
//! Search schedule: start at `(κ, ℓ) = (0, 0)`. While the sampled star condition fails on
//! `sd^κ(K/H)` against `sd^ℓ(L)`, raise `κ`. Once it holds, raise `ℓ` if the sampled error
//! is still at least `ε`, and go back to checking the star condition.

use std::collections::HashMap;

use super::evaluator::MapEvaluator;
use super::simplicial::{SimplicialMap, TargetTower, WeaklySimplicialMap};
use super::star::{assign_vertices, StarOutcome, StarSamples};
use crate::complex::{Complex, Subcomplex};
use crate::error::{Error, Result};
use crate::geometry::MEMBERSHIP_TOL;
use crate::subdivision::Subdivision;

#[derive(Clone, Debug)]
pub struct ZeemanOptions {
    pub max_kappa: usize,
    pub max_ell: usize,
    /// Star samples per simplex of positive dimension.
    pub density: usize,
    pub seed: u64,
    pub margin_floor: f64,
}

impl Default for ZeemanOptions {
    fn default() -> Self {
        Self {
            max_kappa: 8,
            max_ell: 8,
            density: 1000,
            seed: 0,
            margin_floor: 1e-7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ZeemanOutput {
    pub kappa: usize,
    pub ell: usize,
    /// `K → sd^κ(K/H)`.
    pub subdivision: Subdivision,
    /// The approximation. Simplices of `H` sit on level 0, all others on level `ℓ`.
    pub map: WeaklySimplicialMap,
    /// Largest error seen on the star samples of the accepted pair.
    pub sampled_error: f64,
}

impl ZeemanOutput {
    /// The approximation as a simplicial map into `sd^ℓ(L)`. Fails when a positive-dimensional
    /// simplex of `H` is mapped onto a simplex that `sd^ℓ(L)` has subdivided.
    pub fn simplicial(&self) -> Result<SimplicialMap> {
        SimplicialMap::new(
            self.subdivision.child.clone(),
            self.map.tower().level(self.ell).clone(),
            self.map.vertex_image().to_vec(),
        )
    }
}

pub(crate) struct CoreRequest<'a> {
    pub f: &'a dyn MapEvaluator,
    pub k: &'a Complex,
    pub h: &'a Subcomplex,
    /// Mask over simplices of `k` on which the map is wanted.
    pub region: &'a [bool],
    /// Target vertex (tower id) for every vertex of `h`.
    pub pins: &'a HashMap<usize, usize>,
    /// Tower level the current target lives on.
    pub base: usize,
    pub epsilon: f64,
    pub opts: &'a ZeemanOptions,
}

pub(crate) struct CoreOutput {
    pub kappa: usize,
    pub ell: usize,
    pub subdivision: Subdivision,
    pub in_region: Vec<bool>,
    pub in_h: Vec<bool>,
    /// Tower vertex ids for the region vertices of the child, `usize::MAX` elsewhere.
    pub vertex_image: Vec<usize>,
    /// For each non-H region simplex, the level its images span.
    pub level_of: Vec<usize>,
    pub sampled_error: f64,
}

pub(crate) fn zeeman_core(req: &CoreRequest<'_>, tower: &mut TargetTower) -> Result<CoreOutput> {
    let opts = req.opts;
    let mut kappa = 0;
    let mut ell = 0;
    let mut sub = Subdivision::identity(req.k);
    let mut samples: Option<(StarSamples, Vec<bool>, Vec<bool>)> = None;
    loop {
        let child = sub.child.clone();
        if samples.is_none() {
            let in_region: Vec<bool> = (0..child.num_simplices()).map(|c| req.region[sub.carrier_of(c)]).collect();
            let in_h: Vec<bool> = (0..child.num_simplices()).map(|c| req.h.contains(child.simplex(c))).collect();
            let s = StarSamples::collect(req.f, &child, &in_region, opts.density, opts.seed)?;
            samples = Some((s, in_region, in_h));
        }
        let (star_samples, in_region, in_h) = samples.as_ref().unwrap();
        let level = req.base + ell;
        tower.ensure(level)?;
        let target = tower.level(level);
        let located = star_samples.locate_in(target)?;
        let pins: Vec<Option<usize>> = (0..child.num_vertices()).map(|v| req.pins.get(&v).copied()).collect();
        let outcome = assign_vertices(&child, in_region, star_samples, &located, &pins, in_h, opts.margin_floor);

        let failure = match outcome {
            StarOutcome::Assignment { vertex_image, .. } => {
                match check_simplicial(&child, in_region, in_h, &vertex_image, tower, req.base, level) {
                    Err(bad) => Some(format!("images of {:?} span no target simplex", child.simplex(bad))),
                    Ok(level_of) => {
                        let err = sampled_error(&child, in_region, star_samples, &vertex_image, tower.level(level));
                        if err < req.epsilon {
                            return Ok(CoreOutput {
                                kappa,
                                ell,
                                subdivision: sub,
                                in_region: in_region.clone(),
                                in_h: in_h.clone(),
                                vertex_image,
                                level_of,
                                sampled_error: err,
                            });
                        }
                        if ell == opts.max_ell {
                            return Err(Error::IterationCapExceeded {
                                kappa,
                                ell,
                                reason: format!("sampled error {err:.3e} is not below {:.3e}", req.epsilon),
                            });
                        }
                        ell += 1;
                        None
                    }
                }
            }
            StarOutcome::Failure { vertex, witness } => Some(format!(
                "star condition fails at vertex {vertex} (witness {:?})",
                witness.as_slice()
            )),
            StarOutcome::Inconclusive { vertex, reason } => {
                Some(format!("star condition undecided at vertex {vertex}: {reason}"))
            }
        };
        if let Some(reason) = failure {
            if kappa == opts.max_kappa {
                return Err(Error::IterationCapExceeded { kappa, ell, reason });
            }
            kappa += 1;
            sub = sub.refine(req.h)?;
            samples = None;
        }
    }
}

/// Per-simplex levels for non-H region simplices, or the first simplex whose images span
/// nothing. Simplices spanning a simplex on the working level get that level; others may
/// still span one on a coarser level of the tower, which keeps the map weakly simplicial.
fn check_simplicial(
    child: &Complex,
    in_region: &[bool],
    in_h: &[bool],
    vertex_image: &[usize],
    tower: &TargetTower,
    base: usize,
    level: usize,
) -> std::result::Result<Vec<usize>, usize> {
    let mut level_of = vec![usize::MAX; child.num_simplices()];
    for c in 0..child.num_simplices() {
        if !in_region[c] || in_h[c] {
            continue;
        }
        let mut img: Vec<usize> = child.simplex(c).iter().map(|&v| vertex_image[v]).collect();
        img.sort_unstable();
        img.dedup();
        if tower.level(level).find(&img).is_some() {
            level_of[c] = level;
        } else {
            match tower.spanning_level(&img, base.min(level), level) {
                Some(j) => level_of[c] = j,
                None => return Err(c),
            }
        }
    }
    Ok(level_of)
}

fn sampled_error(
    child: &Complex,
    in_region: &[bool],
    samples: &StarSamples,
    vertex_image: &[usize],
    target: &Complex,
) -> f64 {
    let mut worst = 0.0f64;
    for c in 0..child.num_simplices() {
        if !in_region[c] {
            continue;
        }
        let imgs: Vec<_> = child.simplex(c).iter().map(|&v| target.vertex(vertex_image[v])).collect();
        for (w, fx) in samples.weights[c].iter().zip(&samples.images[c]) {
            let g = crate::geometry::combine(&imgs, w);
            worst = worst.max((g - fx).norm());
        }
    }
    worst
}

/// Finds `κ`, `ℓ` and a map `G: sd^κ(K/H) → sd^ℓ(L)`, simplicial off `H`, with `G = F` on the
/// vertices of `H` and sampled `‖G − F‖ < ε`. `F` must send `H` simplicially into `L`.
pub fn zeeman_relative<F: MapEvaluator>(
    f: &F,
    k: &Complex,
    h: &Subcomplex,
    l: &Complex,
    epsilon: f64,
    opts: &ZeemanOptions,
) -> Result<ZeemanOutput> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    h.check_in(k)?;
    let mut pins = HashMap::new();
    for v in h.vertices() {
        let y = f.eval(k.vertex(v))?;
        let loc = l.locate(&y)?;
        let u = l.simplex(loc.simplex);
        if u.len() != 1 || (&y - l.vertex(u[0])).norm() > MEMBERSHIP_TOL {
            return Err(Error::InvalidParameter(format!(
                "the map is not simplicial on H: vertex {v} goes to {:?}, not a target vertex",
                y.as_slice()
            )));
        }
        pins.insert(v, u[0]);
    }
    for s in h.iter() {
        let mut img: Vec<usize> = s.iter().map(|v| pins[v]).collect();
        img.sort_unstable();
        img.dedup();
        if l.find(&img).is_none() {
            return Err(Error::InvalidParameter(format!(
                "the map is not simplicial on H: {s:?} goes to {img:?}"
            )));
        }
    }
    let region = vec![true; k.num_simplices()];
    let f_dyn: &dyn MapEvaluator = f;
    let req = CoreRequest {
        f: f_dyn,
        k,
        h,
        region: &region,
        pins: &pins,
        base: 0,
        epsilon,
        opts,
    };
    let mut tower = TargetTower::new(l.clone());
    let core = zeeman_core(&req, &mut tower)?;
    let child = &core.subdivision.child;
    let level_of: Vec<usize> = (0..child.num_simplices())
        .map(|c| if core.in_h[c] { 0 } else { core.level_of[c] })
        .collect();
    let map = WeaklySimplicialMap::new(child.clone(), tower.truncated(core.ell), core.vertex_image.clone(), level_of)?;
    Ok(ZeemanOutput {
        kappa: core.kappa,
        ell: core.ell,
        subdivision: core.subdivision,
        map,
        sampled_error: core.sampled_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::maps::evaluator::PlMap;

    #[test]
    fn simplicial_input_needs_no_work() {
        let k = fixtures::triangle();
        let h = Subcomplex::generated_by([[0, 1]]);
        let opts = ZeemanOptions { density: 100, ..Default::default() };
        let out = zeeman_relative(&PlMap::identity(&k), &k, &h, &k, 0.1, &opts).unwrap();
        assert_eq!((out.kappa, out.ell), (0, 0));
        assert_eq!(out.map.vertex_image(), &[0, 1, 2]);
        assert!(out.simplicial().is_ok());
    }

    #[test]
    fn rejects_non_simplicial_h() {
        let k = fixtures::edge();
        let f = PlMap::new(k.clone(), vec![crate::geometry::point(&[0.5]), crate::geometry::point(&[1.0])]).unwrap();
        let h = Subcomplex::generated_by([[0]]);
        assert!(zeeman_relative(&f, &k, &h, &k, 0.1, &ZeemanOptions::default()).is_err());
    }

    #[test]
    fn cap_is_reported() {
        let k = fixtures::square_circle(1.0);
        let opts = ZeemanOptions { max_kappa: 1, max_ell: 1, density: 50, ..Default::default() };
        let r = zeeman_relative(&crate::maps::degree2_circle(1.0), &k, &Subcomplex::empty(), &k, 1e-3, &opts);
        assert!(matches!(r, Err(Error::IterationCapExceeded { .. })));
    }
}
