//! Partitions of unity subordinate to a covering, and smooth maps synthesized from them.
//!
//! Given `g: |K| → |L|` with certified carriers `g(t) ⊂ ξ_t`, the smooth map is
//! `h(x) = Σ θ_s(x) g(r_s(x))`. Since `Cl(U_s)` misses every simplex not containing `s`, a point
//! of `W_t` only sees sets `U_s` with `s ⊂ t`, so `h(x)` is a convex combination of points of
//! `ξ_t`. If `g` is `Λ`-Lipschitz on simplices and `η(s) ≤ δ/Λ`, then `‖h − g‖ < δ`.

mod pipeline;

pub use pipeline::{approximate, PipelineBudget, PipelineOptions, PipelineOutput, TargetTriangulation};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bump::BumpProfile;
use crate::complex::{Complex, ComplexJson};
use crate::covering::{build_covering, CoverOptions, Covering, CoveringJson};
use crate::error::{Error, Result};
use crate::geometry::{self, Point, MEMBERSHIP_TOL};
use crate::maps::{estimate_lipschitz, CarrierCertified, CertifiedPlMap, MapEvaluator, PlMap, FD_STEP};
use crate::sample::rng_for;

/// Sums below this are treated as an uncovered point.
pub const UNDERFLOW: f64 = 1e-14;

/// Positive function on the source, `δ` or `ε` in the constructions.
pub type Budget = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

pub fn constant_budget(value: f64) -> Budget {
    Arc::new(move |_: &Point| value)
}

#[derive(Clone, Debug)]
pub struct PartitionOfUnity {
    covering: Arc<Covering>,
    profile: BumpProfile,
    normalized: bool,
}

impl PartitionOfUnity {
    pub fn new(covering: Arc<Covering>, profile: BumpProfile) -> Self {
        Self {
            covering,
            profile,
            normalized: true,
        }
    }

    /// Fault injection: raw bumps without normalization.
    pub fn unnormalized(covering: Arc<Covering>, profile: BumpProfile) -> Self {
        Self {
            covering,
            profile,
            normalized: false,
        }
    }

    pub fn covering(&self) -> &Arc<Covering> {
        &self.covering
    }

    pub fn profile(&self) -> &BumpProfile {
        &self.profile
    }

    /// Nonzero unnormalized bumps `Θ_s(x)`.
    pub fn raw(&self, x: &Point) -> Vec<(usize, f64)> {
        (0..self.covering.records().len())
            .filter_map(|id| {
                let b = self.covering.bump(id, x, &self.profile);
                (b > 0.0).then_some((id, b))
            })
            .collect()
    }

    /// Nonzero `θ_s(x)`.
    pub fn weights(&self, x: &Point) -> Result<Vec<(usize, f64)>> {
        let raw = self.raw(x);
        if !self.normalized {
            return Ok(raw);
        }
        let sum: f64 = raw.iter().map(|(_, b)| b).sum();
        if !(sum >= UNDERFLOW) {
            return Err(Error::NormalizationUnderflow {
                point: x.iter().copied().collect(),
                sum,
            });
        }
        Ok(raw.into_iter().map(|(id, b)| (id, b / sum)).collect())
    }

    pub fn weight(&self, id: usize, x: &Point) -> Result<f64> {
        Ok(self.weights(x)?.into_iter().find(|&(s, _)| s == id).map_or(0.0, |(_, w)| w))
    }

    /// Central-difference gradient of `θ_id` in the ambient space.
    pub fn gradient(&self, id: usize, x: &Point) -> Result<Point> {
        let mut g = Point::zeros(x.len());
        for i in 0..x.len() {
            let mut fwd = x.clone();
            let mut bwd = x.clone();
            fwd[i] += FD_STEP;
            bwd[i] -= FD_STEP;
            g[i] = (self.weight(id, &fwd)? - self.weight(id, &bwd)?) / (2.0 * FD_STEP);
        }
        Ok(g)
    }
}

pub fn partition_of_unity(covering: Arc<Covering>, profile: BumpProfile) -> PartitionOfUnity {
    PartitionOfUnity::new(covering, profile)
}

/// One term `θ_s(x) · g(r_s(x))` of the synthesized sum.
#[derive(Clone, Debug)]
pub struct Contribution {
    pub simplex: usize,
    pub weight: f64,
    pub point: Point,
}

/// `h = Σ θ_s · (g ∘ r_s)`.
#[derive(Clone)]
pub struct SmoothMap {
    g: Arc<dyn CarrierCertified>,
    partition: PartitionOfUnity,
    delta: Budget,
    lipschitz: f64,
    certified: bool,
}

#[derive(Clone, Debug)]
pub struct SmoothOptions {
    pub cover: CoverOptions,
    pub profile: BumpProfile,
    /// Pairs for the sampled Lipschitz estimate when the input has no exact bound.
    pub lipschitz_pairs: usize,
    /// Samples per simplex when taking `min δ` over closed stars.
    pub budget_density: usize,
}

impl Default for SmoothOptions {
    fn default() -> Self {
        Self {
            cover: CoverOptions::default(),
            profile: BumpProfile::default(),
            lipschitz_pairs: 100_000,
            budget_density: 50,
        }
    }
}

/// Sampled `min δ` over the closed star of each simplex.
fn star_minima(k: &Complex, delta: &Budget, density: usize, seed: u64) -> Result<Vec<f64>> {
    let mut per_simplex = vec![f64::INFINITY; k.num_simplices()];
    for (id, m) in per_simplex.iter_mut().enumerate() {
        let mut rng = rng_for(seed ^ 0xde17a, id as u64);
        let mut best = k.points_of(id).iter().map(|v| delta(v)).fold(f64::INFINITY, f64::min);
        if k.simplex_dim(id) > 0 {
            for _ in 0..density {
                best = best.min(delta(&k.sample_in(id, &mut rng).0));
            }
        }
        if !(best > 0.0) {
            return Err(Error::NonPositiveWeight {
                point: k.barycenter(id).iter().copied().collect(),
                value: best,
            });
        }
        *m = best;
    }
    (0..k.num_simplices())
        .map(|id| Ok(k.star(id)?.iter().map(|&s| per_simplex[s]).fold(f64::INFINITY, f64::min)))
        .collect()
}

/// Builds the covering from `δ` and the Lipschitz bound of `g`, then synthesizes.
pub fn smooth(g: Arc<dyn CarrierCertified>, delta: Budget, opts: &SmoothOptions) -> Result<SmoothMap> {
    let k = g.source().clone();
    let (lipschitz, certified) = match g.simplexwise_lipschitz() {
        Some(l) => (l, true),
        None => {
            let est = estimate_lipschitz(g.as_ref(), &k, &(0..k.num_simplices()).collect::<Vec<_>>(), opts.lipschitz_pairs, opts.cover.seed)?;
            (2.0 * est, false)
        }
    };
    if !lipschitz.is_finite() {
        return Err(Error::Inconclusive("the Lipschitz estimate of the input is not finite".into()));
    }
    let budgets = star_minima(&k, &delta, opts.budget_density, opts.cover.seed)?;
    let eta = |id: usize| if lipschitz > 0.0 { budgets[id] / lipschitz } else { budgets[id] };
    let covering = Arc::new(build_covering(&k, &eta, &opts.cover)?);
    let partition = PartitionOfUnity::new(covering, opts.profile);
    synthesize(g, partition, delta, lipschitz, certified)
}

/// Assembles `h` from a covering already fitted to `δ`. Checks that every declared `η(s)`
/// respects `Λ η(s) ≤ δ` at the vertices of the closed star of `s`.
pub fn synthesize(
    g: Arc<dyn CarrierCertified>,
    partition: PartitionOfUnity,
    delta: Budget,
    lipschitz: f64,
    certified: bool,
) -> Result<SmoothMap> {
    let cov = partition.covering().clone();
    let k = cov.complex();
    if g.source().simplices() != k.simplices() || g.source().vertices() != k.vertices() {
        return Err(Error::InvalidParameter("the covering is not built on the source of the map".into()));
    }
    for id in 0..k.num_simplices() {
        for s in k.star(id)? {
            for v in k.points_of(s) {
                if lipschitz * cov.record(id).eta > delta(v) * (1.0 + 1e-12) {
                    return Err(Error::Inconclusive(format!(
                        "budget η = {} of {:?} exceeds δ/Λ at {:?}",
                        cov.record(id).eta,
                        k.simplex(id),
                        v.as_slice()
                    )));
                }
            }
        }
    }
    Ok(SmoothMap {
        g,
        partition,
        delta,
        lipschitz,
        certified,
    })
}

impl SmoothMap {
    pub fn covering(&self) -> &Covering {
        self.partition.covering()
    }

    pub fn partition(&self) -> &PartitionOfUnity {
        &self.partition
    }

    pub fn input(&self) -> &Arc<dyn CarrierCertified> {
        &self.g
    }

    pub fn delta(&self, x: &Point) -> f64 {
        (self.delta)(x)
    }

    /// Simplexwise Lipschitz bound of the input used for the budgets.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Whether the bound is exact rather than a sampled estimate.
    pub fn lipschitz_certified(&self) -> bool {
        self.certified
    }

    pub fn contributions(&self, x: &Point) -> Result<Vec<Contribution>> {
        let cov = self.covering();
        self.partition
            .weights(x)?
            .into_iter()
            .map(|(s, weight)| {
                Ok(Contribution {
                    simplex: s,
                    weight,
                    point: self.g.eval(&cov.retract(s, x))?,
                })
            })
            .collect()
    }

    /// `x ∈ W_t`: no closure `Cl(U_s)` with `s ⊄ t` contains `x`.
    pub fn in_w(&self, t: usize, x: &Point) -> bool {
        let cov = self.covering();
        (0..cov.records().len()).all(|s| cov.complex().is_face(s, t) || !cov.contains_closure(s, x))
    }

    /// Replaces `δ`; a smaller value turns the error check into a deliberate failure.
    pub fn with_delta(mut self, delta: Budget) -> Self {
        self.delta = delta;
        self
    }

    pub fn to_json(&self) -> Result<SmoothMapJson> {
        let pl = self
            .g
            .as_pl()
            .ok_or_else(|| Error::InvalidParameter("only smoothings of PL maps can be serialized".into()))?;
        let probe = self.covering().complex().vertex(0).clone();
        Ok(SmoothMapJson {
            covering: self.covering().to_json(),
            images: pl.images().iter().map(|p| p.iter().copied().collect()).collect(),
            target: self.g.target().to_json(),
            delta: (self.delta)(&probe),
            lipschitz: self.lipschitz,
            certified: self.certified,
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let json: SmoothMapJson = serde_json::from_str(s)?;
        Self::from_json(&json)
    }

    /// Rebuilds a smoothing of a PL map with constant `δ` and the default profile.
    pub fn from_json(json: &SmoothMapJson) -> Result<Self> {
        let covering = Arc::new(Covering::from_json(&json.covering)?);
        let target = Complex::from_json(&json.target)?;
        let pl = PlMap::new(covering.complex().clone(), json.images.iter().map(|c| geometry::point(c)).collect())?;
        let g: Arc<dyn CarrierCertified> = Arc::new(CertifiedPlMap::new(pl, target)?);
        if !(json.delta > 0.0) || !(json.lipschitz >= 0.0) {
            return Err(Error::InvalidParameter("delta must be positive and the Lipschitz bound nonnegative".into()));
        }
        synthesize(
            g,
            PartitionOfUnity::new(covering, BumpProfile::default()),
            constant_budget(json.delta),
            json.lipschitz,
            json.certified,
        )
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmoothMapJson {
    pub covering: CoveringJson,
    /// Vertex images of the PL input.
    pub images: Vec<Vec<f64>>,
    pub target: ComplexJson,
    pub delta: f64,
    pub lipschitz: f64,
    pub certified: bool,
}

impl MapEvaluator for SmoothMap {
    fn eval(&self, x: &Point) -> Result<Point> {
        let terms = self.contributions(x)?;
        let mut y = Point::zeros(terms[0].point.len());
        for t in &terms {
            y += &t.point * t.weight;
        }
        Ok(y)
    }
}

impl CarrierCertified for SmoothMap {
    fn source(&self) -> &Complex {
        self.g.source()
    }

    fn target(&self) -> &Complex {
        self.g.target()
    }

    fn certificate(&self, t: usize) -> usize {
        self.g.certificate(t)
    }
}

/// `ι_ε`: smoothing of the identity of `|K|` with `‖ι_ε(x) − x‖ < ε` and `ι_ε(W_σ) ⊂ σ`.
pub fn identity_smoother(k: &Complex, epsilon: f64, opts: &SmoothOptions) -> Result<SmoothMap> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    smooth(Arc::new(CertifiedPlMap::identity(k)), constant_budget(epsilon), opts)
}

/// `ι_n` at `ε_n = 2^{−n}` for `n = 0..=n_max`.
pub fn smoother_sequence(k: &Complex, n_max: usize, opts: &SmoothOptions) -> Result<Vec<(f64, SmoothMap)>> {
    (0..=n_max)
        .map(|n| {
            let eps = 0.5f64.powi(n as i32);
            Ok((eps, identity_smoother(k, eps, opts)?))
        })
        .collect()
}

/// Barycentric weights of `y` in target simplex `xi`, or `None` off its affine hull.
pub fn carrier_margin(target: &Complex, xi: usize, y: &Point) -> Option<f64> {
    target
        .barycentric_coords(xi, y)
        .ok()
        .map(|w| w.into_iter().fold(f64::INFINITY, f64::min))
}

/// Whether `y` lies in target simplex `xi` up to the membership tolerance.
pub fn in_carrier(target: &Complex, xi: usize, y: &Point) -> bool {
    carrier_margin(target, xi, y).is_some_and(|m| m >= -MEMBERSHIP_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::geometry::point;
    use crate::sample::SampleSet;

    fn opts() -> SmoothOptions {
        SmoothOptions {
            cover: CoverOptions { density: 300, seed: 0 },
            ..Default::default()
        }
    }

    #[test]
    fn constant_map_stays_constant() {
        let k = fixtures::triangle();
        let l = fixtures::vertex();
        let pl = PlMap::new(k.clone(), vec![point(&[0.0]); 3]).unwrap();
        let g = Arc::new(CertifiedPlMap::new(pl, l).unwrap());
        let h = smooth(g, constant_budget(0.1), &opts()).unwrap();
        for p in SampleSet::per_simplex(&k, 200, 0).iter() {
            assert_eq!(h.eval(&p.point).unwrap(), point(&[0.0]));
        }
    }

    #[test]
    fn single_set_partition_is_one() {
        let k = fixtures::vertex();
        let cov = Arc::new(build_covering(&k, &|_| 1.0, &CoverOptions::default()).unwrap());
        let p = partition_of_unity(cov, BumpProfile::default());
        assert_eq!(p.weights(&point(&[0.3])).unwrap(), vec![(0, 1.0)]);
    }

    #[test]
    fn identity_on_edge() {
        let k = fixtures::edge();
        let h = identity_smoother(&k, 0.1, &opts()).unwrap();
        assert_eq!(h.eval(&point(&[0.0])).unwrap(), point(&[0.0]));
        let mut worst = 0.0f64;
        for p in SampleSet::per_simplex(&k, 10_000, 3).iter() {
            let w = h.partition().weights(&p.point).unwrap();
            let sum: f64 = w.iter().map(|x| x.1).sum();
            assert!((sum - 1.0).abs() < 1e-10);
            worst = worst.max((h.eval(&p.point).unwrap() - &p.point).norm());
        }
        assert!(worst < 0.1 && worst > 0.0, "{worst}");
    }

    #[test]
    fn underflow_is_reported_off_the_polyhedron() {
        let k = fixtures::edge();
        let h = identity_smoother(&k, 0.1, &opts()).unwrap();
        assert!(matches!(h.eval(&point(&[5.0])), Err(Error::NormalizationUnderflow { .. })));
    }

    #[test]
    fn json_round_trip() {
        let k = fixtures::triangle();
        let h = identity_smoother(&k, 0.05, &opts()).unwrap();
        let json = serde_json::to_string(&h.to_json().unwrap()).unwrap();
        let back = SmoothMap::from_json(&serde_json::from_str(&json).unwrap()).unwrap();
        let x = point(&[0.21, 0.33]);
        assert_eq!(back.eval(&x).unwrap(), h.eval(&x).unwrap());
    }
}
