//! Weakly simplicial approximation over a finite filtration `H ⊂ K_0 ⊂ … ⊂ K_N = K`.
//!
//! Stage `m` approximates the current map `F_m` on `K_{m+1}` relative to `K_{m−1}`, blends the
//! result `G` into `F_m` with a cutoff `φ` that is 1 on `P_m = |K_m|` and vanishes near the
//! simplices outside `K_{m+1}`, and pushes the blend back onto `|L|` by nearest-point
//! projection `ϱ`. The last stage covers all of `K`, so the final map is `G_N`, with the
//! level of each simplex given by the stage that first reached it.
//!
//! Since `ϱ` is a nearest-point map, `‖ϱ(z) − z₀‖ ≤ 2‖z − z₀‖` for any `z₀ ∈ |L|`. Asking
//! each stage for error below `ε_{m+1}/6` therefore keeps `‖F_{m+1} − F_m‖ ≤ ε_{m+1}/3`.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use super::evaluator::MapEvaluator;
use super::simplicial::{TargetTower, WeaklySimplicialMap};
use super::zeeman::{zeeman_core, CoreRequest, ZeemanOptions};
use crate::bump::BumpProfile;
use crate::complex::{Complex, Subcomplex};
use crate::error::{Error, Result};
use crate::geometry::{self, Point, MEMBERSHIP_TOL};
use crate::sample::rng_for;
use crate::subdivision::Subdivision;

#[derive(Clone, Debug)]
pub struct StagedOptions {
    pub zeeman: ZeemanOptions,
    /// Samples per simplex used to estimate `ε_n = min ε` on each `P_n`.
    pub epsilon_density: usize,
}

impl Default for StagedOptions {
    fn default() -> Self {
        Self {
            zeeman: ZeemanOptions::default(),
            epsilon_density: 100,
        }
    }
}

#[derive(Clone, Debug)]
pub struct StageReport {
    pub stage: usize,
    pub kappa: usize,
    pub ell: usize,
    /// `ε_{m+1}`, the sampled minimum of `ε` over the stage region.
    pub stage_epsilon: f64,
    /// Error requested from the stage approximation, `ε_{m+1}/6`.
    pub requested_error: f64,
    pub sampled_error: f64,
    /// Distance from `P_m` to the simplices outside `K_{m+1}`; infinite on the last stage.
    pub cutoff_gap: f64,
}

pub struct StagedOutput {
    /// `K → K'`.
    pub subdivision: Subdivision,
    pub map: WeaklySimplicialMap,
    pub stages: Vec<StageReport>,
    /// `ε_0, …, ε_N`.
    pub epsilons: Vec<f64>,
    /// `F_1, …, F_{N+1}`.
    pub stage_maps: Vec<Arc<dyn MapEvaluator>>,
}

/// Nearest point of `|L|`; among near-ties the one closest to `hint` wins.
pub(crate) fn project_to(l: &Complex, z: &Point, hint: &Point) -> Point {
    let (dmin, foot, _) = l.closest_point(z);
    let mut best = foot;
    let mut best_hint = (&best - hint).norm();
    for &id in l.maximal() {
        let (d, f, _) = geometry::closest_point_on_simplex(z, &l.points_of(id));
        if d <= dmin + 1e-9 {
            let dh = (&f - hint).norm();
            if dh < best_hint {
                best = f;
                best_hint = dh;
            }
        }
    }
    best
}

struct Region {
    /// Point sets of the maximal simplices of a subcomplex of `K`.
    simplices: Vec<Vec<Point>>,
}

impl Region {
    fn of(k: &Complex, sub: &Subcomplex) -> Self {
        let ids: Vec<usize> = k.ids_in(sub);
        let simplices = ids
            .iter()
            .copied()
            .filter(|&id| !ids.iter().any(|&o| o != id && k.is_face(id, o)))
            .map(|id| k.points_of(id).into_iter().cloned().collect())
            .collect();
        Self { simplices }
    }

    fn distance(&self, x: &Point) -> f64 {
        self.simplices
            .iter()
            .map(|s| {
                let refs: Vec<&Point> = s.iter().collect();
                geometry::point_simplex_distance(x, &refs)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// `F_{m+1}`: `ϱ(φG + (1−φ)F_m)` on `P_{m+1}`, `F_m` elsewhere.
struct StageMap {
    prev: Arc<dyn MapEvaluator>,
    child: Complex,
    images: Vec<Point>,
    in_region: Vec<bool>,
    core: Region,
    outer: Region,
    gap: f64,
    target: Complex,
    profile: BumpProfile,
}

impl StageMap {
    fn g(&self, x: &Point) -> Result<Option<Point>> {
        let loc = self.child.locate(x)?;
        if !self.in_region[loc.simplex] {
            return Ok(None);
        }
        let pts: Vec<&Point> = self.child.simplex(loc.simplex).iter().map(|&v| &self.images[v]).collect();
        Ok(Some(geometry::combine(&pts, &loc.weights)))
    }

    fn cutoff(&self, x: &Point) -> f64 {
        if !self.gap.is_finite() {
            return 1.0;
        }
        self.profile.value(self.core.distance(x) / (0.9 * self.gap))
    }
}

impl MapEvaluator for StageMap {
    fn eval(&self, x: &Point) -> Result<Point> {
        if self.gap.is_finite() && self.outer.distance(x) > MEMBERSHIP_TOL {
            return self.prev.eval(x);
        }
        let phi = self.cutoff(x);
        if phi == 0.0 {
            return self.prev.eval(x);
        }
        let Some(g) = self.g(x)? else {
            return self.prev.eval(x);
        };
        if phi == 1.0 {
            return Ok(g);
        }
        let fm = self.prev.eval(x)?;
        let blend = &g * phi + &fm * (1.0 - phi);
        Ok(project_to(&self.target, &blend, &fm))
    }
}

fn sampled_min<E: Fn(&Point) -> f64 + Sync + ?Sized>(
    k: &Complex,
    sub: &Subcomplex,
    eps: &E,
    density: usize,
    seed: u64,
) -> Result<f64> {
    let ids = k.ids_in(sub);
    let m = ids
        .par_iter()
        .map(|&id| {
            let mut rng = rng_for(seed ^ 0xe95, id as u64);
            let mut best = f64::INFINITY;
            if k.simplex_dim(id) == 0 {
                best = eps(k.vertex(k.simplex(id)[0]));
            } else {
                for _ in 0..density {
                    best = best.min(eps(&k.sample_in(id, &mut rng).0));
                }
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min);
    if !(m > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be strictly positive, sampled minimum {m}")));
    }
    Ok(m)
}

/// Checks `H ⊂ K_0 ⊂ … ⊂ K_N = K` and that no vertex of `K_{m−1}` lies on a simplex outside
/// `K_m`, which is the combinatorial form of `P_{m−1} ⊂ Int P_m`.
fn check_filtration(k: &Complex, h: &Subcomplex, filtration: &[Subcomplex]) -> Result<()> {
    if filtration.is_empty() {
        return Err(Error::InvalidParameter("empty filtration".into()));
    }
    let all = k.subcomplex_all();
    if filtration.last().unwrap() != &all {
        return Err(Error::InvalidParameter("the last filtration member must be all of K".into()));
    }
    let mut prev = h;
    for (m, km) in filtration.iter().enumerate() {
        km.check_in(k)?;
        if let Some(s) = prev.iter().find(|s| !km.contains(s)) {
            return Err(Error::InvalidParameter(format!("filtration is not nested at {m}: {s:?} missing")));
        }
        for v in prev.vertices() {
            for &s in k.vertex_star(v) {
                if !km.contains(k.simplex(s)) {
                    return Err(Error::InvalidParameter(format!(
                        "filtration member {m} does not contain a neighborhood of the previous one: vertex {v} lies on {:?}",
                        k.simplex(s)
                    )));
                }
            }
        }
        prev = km;
    }
    Ok(())
}

/// Staged weakly simplicial approximation of `f: |K| → |L|` with `‖F* − F‖ < ε` pointwise.
/// `F` must be simplicial on `H`. `epsilon` must be strictly positive on `|K|`.
pub fn staged_weakly_simplicial(
    f: Arc<dyn MapEvaluator>,
    k: &Complex,
    h: &Subcomplex,
    filtration: &[Subcomplex],
    l: &Complex,
    epsilon: &(dyn Fn(&Point) -> f64 + Sync),
    opts: &StagedOptions,
) -> Result<StagedOutput> {
    check_filtration(k, h, filtration)?;
    let n_top = filtration.len() - 1;
    let seed = opts.zeeman.seed;
    let epsilons = filtration
        .iter()
        .map(|km| sampled_min(k, km, epsilon, opts.epsilon_density, seed))
        .collect::<Result<Vec<_>>>()?;

    // members indexed from −1: member(j) = K_{j}, K_{-1} = H, K_{N+1} = K
    let member = |j: isize| -> &Subcomplex {
        if j < 0 {
            h
        } else {
            &filtration[(j as usize).min(n_top)]
        }
    };
    let in_member = |acc: &Subdivision, c: usize, j: isize| member(j).contains(acc.parent.simplex(acc.carrier_of(c)));

    let mut tower = TargetTower::new(l.clone());
    let mut acc = Subdivision::identity(k);
    let mut current: Arc<dyn MapEvaluator> = f.clone();
    let mut images: HashMap<usize, usize> = HashMap::new();
    let mut base = 0usize;
    let mut stages = Vec::new();
    let mut stage_maps = Vec::new();
    // level per simplex vertex set, fixed when the simplex's region stage runs
    let mut levels: HashMap<Vec<usize>, usize> = HashMap::new();

    // pins for H from F itself
    for v in h.vertices() {
        let y = f.eval(k.vertex(v))?;
        let loc = l.locate(&y)?;
        let u = l.simplex(loc.simplex);
        if u.len() != 1 {
            return Err(Error::InvalidParameter(format!("the map is not simplicial on H at vertex {v}")));
        }
        images.insert(v, u[0]);
    }

    for m in 0..=n_top {
        let child = acc.child.clone();
        let region: Vec<bool> = (0..child.num_simplices()).map(|c| in_member(&acc, c, m as isize + 1)).collect();
        let rel = Subcomplex::generated_by(
            (0..child.num_simplices())
                .filter(|&c| in_member(&acc, c, m as isize - 1))
                .map(|c| child.simplex(c).to_vec()),
        );
        let pins: HashMap<usize, usize> = rel.vertices().map(|v| (v, images[&v])).collect();
        let stage_eps = epsilons[(m + 1).min(n_top)];
        let requested = stage_eps / 6.0;
        let req = CoreRequest {
            f: current.as_ref(),
            k: &child,
            h: &rel,
            region: &region,
            pins: &pins,
            base,
            epsilon: requested,
            opts: &opts.zeeman,
        };
        let core = zeeman_core(&req, &mut tower).map_err(|e| e.at_stage(m))?;
        let next = acc.clone().then(core.subdivision.clone());
        let new_child = &next.child;
        let top = base + core.ell;
        for c in 0..new_child.num_simplices() {
            if core.in_region[c] && !core.in_h[c] {
                let first_region = (0..=m as isize + 1).find(|&j| in_member(&next, c, j)).unwrap_or(m as isize + 1);
                // simplices of K_m ∖ K_{m−1} are final after this stage; the last stage
                // settles everything that is left
                if first_region <= m as isize || m == n_top {
                    levels.entry(new_child.simplex(c).to_vec()).or_insert(core.level_of[c]);
                }
            }
        }
        for (v, &u) in core.vertex_image.iter().enumerate() {
            if u != usize::MAX {
                images.insert(v, u);
            }
        }

        let gap = if m == n_top {
            f64::INFINITY
        } else {
            let core_region = Region::of(k, member(m as isize));
            let outside: Vec<usize> = (0..k.num_simplices())
                .filter(|&s| !member(m as isize + 1).contains(k.simplex(s)))
                .collect();
            let mut g = f64::INFINITY;
            for s in &outside {
                for cs in &core_region.simplices {
                    let refs: Vec<&Point> = cs.iter().collect();
                    g = g.min(geometry::simplex_simplex_distance(&refs, &k.points_of(*s)));
                }
            }
            if !(g > 1e-12) {
                return Err(Error::DegenerateComplex(format!("stage {m}: no room for the cutoff (gap {g:.3e})")));
            }
            g
        };
        let finest = tower.level(top);
        let stage_images: Vec<Point> = (0..new_child.num_vertices())
            .map(|v| match core.vertex_image[v] {
                usize::MAX => Point::zeros(l.ambient_dim()),
                u => finest.vertex(u).clone(),
            })
            .collect();
        let map: Arc<dyn MapEvaluator> = Arc::new(StageMap {
            prev: current.clone(),
            child: new_child.clone(),
            images: stage_images,
            in_region: core.in_region.clone(),
            core: Region::of(k, member(m as isize)),
            outer: Region::of(k, member(m as isize + 1)),
            gap,
            target: l.clone(),
            profile: BumpProfile::default(),
        });
        stages.push(StageReport {
            stage: m,
            kappa: core.kappa,
            ell: core.ell,
            stage_epsilon: stage_eps,
            requested_error: requested,
            sampled_error: core.sampled_error,
            cutoff_gap: gap,
        });
        stage_maps.push(map.clone());
        current = map;
        acc = next;
        base = top;
    }

    let kp = acc.child.clone();
    let vertex_image: Vec<usize> = (0..kp.num_vertices())
        .map(|v| images.get(&v).copied().ok_or_else(|| Error::Evaluation(format!("vertex {v} never received an image"))))
        .collect::<Result<_>>()?;
    let level_of: Vec<usize> = (0..kp.num_simplices())
        .map(|c| {
            if h.contains(kp.simplex(c)) {
                0
            } else {
                levels.get(kp.simplex(c)).copied().unwrap_or(base)
            }
        })
        .collect();
    let map = WeaklySimplicialMap::new(kp, tower.truncated(base), vertex_image, level_of)?;
    Ok(StagedOutput {
        subdivision: acc,
        map,
        stages,
        epsilons,
        stage_maps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::maps::evaluator::{FnMap, PlMap};
    use crate::sample::SampleSet;

    fn opts(density: usize) -> StagedOptions {
        StagedOptions {
            zeeman: ZeemanOptions { density, ..Default::default() },
            epsilon_density: 20,
        }
    }

    #[test]
    fn single_stage_matches_relative_approximation() {
        let k = fixtures::edge();
        let f: Arc<dyn MapEvaluator> = Arc::new(PlMap::identity(&k));
        let out = staged_weakly_simplicial(f, &k, &Subcomplex::empty(), &[k.subcomplex_all()], &k, &|_| 0.3, &opts(100)).unwrap();
        assert_eq!(out.stages.len(), 1);
        assert_eq!((out.stages[0].kappa, out.stages[0].ell), (0, 0));
        assert!(out.map.levels().iter().all(|&l| l == 0));
    }

    #[test]
    fn rejects_filtration_without_room() {
        let k = fixtures::interval3();
        let k0 = Subcomplex::generated_by([[0, 1]]);
        let k1 = Subcomplex::generated_by([[0, 1], [1, 2]]);
        assert!(check_filtration(&k, &Subcomplex::empty(), &[k0.clone(), k1, k.subcomplex_all()]).is_ok());
        // vertex 2 of [1,2] lies on [2,3], outside the next member
        let bad = Subcomplex::generated_by([[1, 2]]);
        assert!(check_filtration(&k, &Subcomplex::empty(), &[bad, Subcomplex::generated_by([[0, 1], [1, 2]]), k.subcomplex_all()]).is_err());
    }

    #[test]
    fn interval_three_stages() {
        let k = fixtures::interval3();
        let l = fixtures::interval3_coarse();
        let filtration = [
            Subcomplex::generated_by([[0, 1]]),
            Subcomplex::generated_by([[0, 1], [1, 2]]),
            k.subcomplex_all(),
        ];
        let f: Arc<dyn MapEvaluator> = Arc::new(FnMap::new(fixtures::interval_reparam));
        let out = staged_weakly_simplicial(f.clone(), &k, &Subcomplex::empty(), &filtration, &l, &|_| 0.2, &opts(100)).unwrap();
        let samples = SampleSet::total(&out.map.source().clone(), 10_000, 3);
        for s in samples.iter() {
            let e = (out.map.eval(&s.point).unwrap() - f.eval(&s.point).unwrap()).norm();
            assert!(e < 0.2, "error {e} at {:?}", s.point.as_slice());
        }
        assert!(out.map.coherence_violations().is_empty());
    }
}
