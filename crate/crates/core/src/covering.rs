//! Shrunk open simplices, their tubular widenings, and the covering of `|K|` built from them.
//!
//! For a simplex `σ` with barycenter `b`, the shrinking `h_ε(σ)` is the image of `σ` under the
//! homothety of center `b` and ratio `1 − ε`. A point of `σ` lies in the open shrunk simplex
//! iff every barycentric weight exceeds `ε/(d+1)`. The widening of a shrunk simplex is the set
//! of points whose orthogonal foot on the affine hull lands in it, at distance below `η′`.
//!
//! The covering is built by increasing dimension. Vertices get balls. A simplex of positive
//! dimension looks at the part of `σ` that its faces do not already cover firmly (where their
//! bump is at least one half), and shrinks just enough to contain it. Using the firm part
//! instead of the full open sets keeps the unnormalized partition of unity at least one half
//! everywhere on `|K|`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bump::{smooth_step, BumpProfile};
use crate::complex::{Complex, ComplexJson};
use crate::error::{Error, Result};
use crate::geometry::{self, Aabb, Point, MEMBERSHIP_TOL};
use crate::sample::rng_for;

/// Level above which a face's bump counts as covering a point firmly.
pub const FIRM_LEVEL: f64 = 0.5;

/// Core threshold as a fraction of the plateau threshold. The plateau sits at the smallest
/// residual weight, the core boundary at this fraction of it; a wide gap keeps the bumps'
/// derivatives moderate.
pub const CORE_RATIO: f64 = 0.5;

/// Below this, a distance that must be positive is treated as zero.
const POSITIVE_FLOOR: f64 = 1e-12;

/// `h_ε(σ)`.
#[derive(Clone, Debug)]
pub struct Shrinking {
    pub simplex: usize,
    pub epsilon: f64,
    pub vertices: Vec<Point>,
}

impl Shrinking {
    /// Barycentric weight (in `σ`) that every point of the open shrunk simplex exceeds.
    pub fn threshold(&self) -> f64 {
        self.epsilon / self.vertices.len() as f64
    }

    pub fn contains_weights(&self, weights: &[f64]) -> bool {
        weights.iter().all(|&w| w > self.threshold())
    }
}

pub fn shrink(k: &Complex, id: usize, epsilon: f64) -> Result<Shrinking> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("shrinking ratio must lie in (0, 1), got {epsilon}")));
    }
    if id >= k.num_simplices() {
        return Err(Error::UnknownSimplex(id));
    }
    Ok(Shrinking {
        simplex: id,
        epsilon,
        vertices: shrunk_vertices(k, id, epsilon),
    })
}

fn shrunk_vertices(k: &Complex, id: usize, epsilon: f64) -> Vec<Point> {
    let b = k.barycenter(id);
    k.points_of(id).into_iter().map(|v| &b + (v - &b) * (1.0 - epsilon)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum TubeProjection {
    Inside { foot: Point, dist: f64, weights: Vec<f64> },
    OutsideTube { foot: Point, weights: Vec<f64> },
}

/// Orthogonal projection onto the affine hull of simplex `id`. The foot must land in the
/// open simplex; a vertex's tube is all of space.
pub fn tubular_project(k: &Complex, id: usize, x: &Point) -> Result<TubeProjection> {
    if id >= k.num_simplices() {
        return Err(Error::UnknownSimplex(id));
    }
    if x.len() != k.ambient_dim() {
        return Err(Error::InvalidParameter("point dimension does not match the complex".into()));
    }
    let (weights, dist, foot) = project_raw(k, id, x);
    if weights.iter().all(|&w| w > MEMBERSHIP_TOL) {
        Ok(TubeProjection::Inside { foot, dist, weights })
    } else {
        Ok(TubeProjection::OutsideTube { foot, weights })
    }
}

fn project_raw(k: &Complex, id: usize, x: &Point) -> (Vec<f64>, f64, Point) {
    if k.simplex_dim(id) == 0 {
        let v = k.vertex(k.simplex(id)[0]);
        return (vec![1.0], (x - v).norm(), v.clone());
    }
    let frame = k.frame(id);
    let (weights, dist) = frame.barycentric(x);
    (weights, dist, frame.project(x))
}

/// `s⁰_{ε,η}`.
#[derive(Clone, Debug)]
pub struct Widening {
    pub simplex: usize,
    pub epsilon: f64,
    pub eta: f64,
}

impl Widening {
    pub fn new(simplex: usize, epsilon: f64, eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InvalidParameter(format!("bad widening parameters ε = {epsilon}, η = {eta}")));
        }
        Ok(Self { simplex, epsilon, eta })
    }

    pub fn contains(&self, k: &Complex, x: &Point) -> bool {
        match tubular_project(k, self.simplex, x) {
            Ok(TubeProjection::Inside { dist, weights, .. }) => {
                let c = self.epsilon / weights.len() as f64;
                dist < self.eta && weights.iter().all(|&w| w > c)
            }
            _ => false,
        }
    }
}

/// Per-simplex parameters of a covering. `epsilon` is 0 for vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverRecord {
    pub simplex: Vec<usize>,
    pub epsilon: f64,
    /// Displacement budget `η(s⁰)` the covering was asked to respect.
    pub eta: f64,
    pub eta_prime: f64,
    pub base_case: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoveringJson {
    pub complex: ComplexJson,
    pub records: Vec<CoverRecord>,
}

#[derive(Clone, Debug)]
pub struct CoverOptions {
    /// Random samples per simplex when locating the residual set; a lattice of similar size
    /// is added.
    pub density: usize,
    pub seed: u64,
}

impl Default for CoverOptions {
    fn default() -> Self {
        Self { density: 1000, seed: 0 }
    }
}

/// Covering `{U_s}` of `|K|` indexed by the simplices of `K`, with retractions `r_s`.
#[derive(Clone, Debug)]
pub struct Covering {
    complex: Complex,
    records: Vec<CoverRecord>,
    reach: Vec<Aabb>,
    retraction_bias: Option<Point>,
}

fn reach_box(k: &Complex, id: usize, rec: &CoverRecord) -> Aabb {
    let core = if k.simplex_dim(id) == 0 {
        vec![k.vertex(k.simplex(id)[0]).clone()]
    } else {
        shrunk_vertices(k, id, rec.epsilon)
    };
    let refs: Vec<&Point> = core.iter().collect();
    let mut b = Aabb::of(&refs);
    for (lo, hi) in b.min.iter_mut().zip(b.max.iter_mut()) {
        *lo -= rec.eta_prime;
        *hi += rec.eta_prime;
    }
    b
}

impl Covering {
    fn assemble(complex: Complex, records: Vec<CoverRecord>) -> Self {
        let reach = (0..complex.num_simplices()).map(|id| reach_box(&complex, id, &records[id])).collect();
        Self {
            complex,
            records,
            reach,
            retraction_bias: None,
        }
    }

    pub fn complex(&self) -> &Complex {
        &self.complex
    }

    pub fn records(&self) -> &[CoverRecord] {
        &self.records
    }

    pub fn record(&self, id: usize) -> &CoverRecord {
        &self.records[id]
    }

    pub fn widening(&self, id: usize) -> Widening {
        Widening {
            simplex: id,
            epsilon: self.records[id].epsilon,
            eta: self.records[id].eta_prime,
        }
    }

    pub fn shrinking(&self, id: usize) -> Option<Shrinking> {
        shrink(&self.complex, id, self.records[id].epsilon).ok()
    }

    /// `ε/(d+1)`: the core is where every weight of the foot exceeds this.
    pub fn core_threshold(&self, id: usize) -> f64 {
        self.records[id].epsilon / self.complex.simplex(id).len() as f64
    }

    /// Weight above which the core factor of the bump is exactly 1.
    pub fn plateau_threshold(&self, id: usize) -> f64 {
        self.core_threshold(id) / CORE_RATIO
    }

    /// Foot weights, distance to the affine hull and foot point.
    pub fn project(&self, id: usize, x: &Point) -> (Vec<f64>, f64, Point) {
        project_raw(&self.complex, id, x)
    }

    fn near(&self, id: usize, x: &Point) -> bool {
        self.reach[id].distance_lower_bound(x) < self.records[id].eta_prime
    }

    /// `x ∈ U_s`.
    pub fn contains(&self, id: usize, x: &Point) -> bool {
        if !self.near(id, x) {
            return false;
        }
        let (w, dist, _) = self.project(id, x);
        let c = self.core_threshold(id);
        dist < self.records[id].eta_prime && (self.complex.simplex_dim(id) == 0 || w.iter().all(|&wi| wi > c))
    }

    /// `x ∈ Cl(U_s)`.
    pub fn contains_closure(&self, id: usize, x: &Point) -> bool {
        if self.reach[id].distance_lower_bound(x) > self.records[id].eta_prime {
            return false;
        }
        let (w, dist, _) = self.project(id, x);
        let c = self.core_threshold(id);
        dist <= self.records[id].eta_prime && (self.complex.simplex_dim(id) == 0 || w.iter().all(|&wi| wi >= c))
    }

    /// `x ∈ V_s`: the vertex itself, or a point of the open shrunk simplex.
    pub fn in_core(&self, id: usize, x: &Point) -> bool {
        let (w, dist, _) = self.project(id, x);
        let scale = 1.0 + x.amax();
        if self.complex.simplex_dim(id) == 0 {
            return dist <= 1e-12 * scale;
        }
        let c = self.core_threshold(id);
        dist <= 1e-12 * scale && w.iter().all(|&wi| wi > c)
    }

    /// `r_s(x)`.
    pub fn retract(&self, id: usize, x: &Point) -> Point {
        let foot = self.project(id, x).2;
        match &self.retraction_bias {
            Some(b) => foot + b,
            None => foot,
        }
    }

    /// Unnormalized bump `Θ_s`, zero outside `U_s`.
    pub fn bump(&self, id: usize, x: &Point, profile: &BumpProfile) -> f64 {
        if !self.near(id, x) {
            return 0.0;
        }
        raw_bump(&self.complex, &self.records[id], id, x, profile)
    }

    /// Ids of the sets containing `x`.
    pub fn active(&self, x: &Point) -> Vec<usize> {
        (0..self.records.len()).filter(|&id| self.contains(id, x)).collect()
    }

    /// Points of simplex `id` not firmly covered by any proper face: the set the core of `id`
    /// has to contain. Lattice points plus `density` random points.
    pub fn residual_samples(&self, id: usize, density: usize, seed: u64) -> Vec<(Point, Vec<f64>)> {
        residual(&self.complex, &self.records, id, density, seed)
    }

    /// Fault injection: scales the declared budgets `η` without touching the sets.
    pub fn with_eta_scaled(mut self, factor: f64) -> Self {
        for r in &mut self.records {
            r.eta *= factor;
        }
        self
    }

    /// Fault injection: edits one record in place and rebuilds the search boxes.
    pub fn with_record(self, id: usize, edit: impl FnOnce(&mut CoverRecord)) -> Self {
        let mut records = self.records;
        edit(&mut records[id]);
        let bias = self.retraction_bias;
        let mut c = Self::assemble(self.complex, records);
        c.retraction_bias = bias;
        c
    }

    /// Fault injection: shifts every retraction by a constant vector.
    pub fn with_retraction_bias(mut self, bias: Point) -> Self {
        self.retraction_bias = Some(bias);
        self
    }

    pub fn to_json(&self) -> CoveringJson {
        CoveringJson {
            complex: self.complex.to_json(),
            records: self.records.clone(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let json: CoveringJson = serde_json::from_str(s)?;
        Self::from_json(&json)
    }

    pub fn from_json(json: &CoveringJson) -> Result<Self> {
        let complex = Complex::from_json(&json.complex)?;
        let mut records: Vec<Option<CoverRecord>> = vec![None; complex.num_simplices()];
        for r in &json.records {
            let id = complex
                .find(&r.simplex)
                .ok_or_else(|| Error::InvalidParameter(format!("record names unknown simplex {:?}", r.simplex)))?;
            let vertex = complex.simplex_dim(id) == 0;
            let eps_ok = if vertex { r.epsilon == 0.0 } else { r.epsilon > 0.0 && r.epsilon < 1.0 };
            if !eps_ok || !(r.eta > 0.0) || !(r.eta_prime > 0.0) || !r.eta_prime.is_finite() {
                return Err(Error::InvalidParameter(format!("record for {:?} has out-of-range parameters", r.simplex)));
            }
            if records[id].replace(r.clone()).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate record for {:?}", r.simplex)));
            }
        }
        let records = records
            .into_iter()
            .enumerate()
            .map(|(id, r)| r.ok_or_else(|| Error::InvalidParameter(format!("no record for {:?}", complex.simplex(id)))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::assemble(complex, records))
    }
}

fn residual(k: &Complex, records: &[CoverRecord], id: usize, density: usize, seed: u64) -> Vec<(Point, Vec<f64>)> {
    let n = k.simplex(id).len();
    let profile = BumpProfile::default();
    let faces: Vec<usize> = k.faces(id).into_iter().filter(|&f| f != id).collect();
    let mut weights = geometry::barycentric_lattice(n, geometry::lattice_resolution(n, density));
    let mut rng = rng_for(seed ^ 0xc0e5, id as u64);
    weights.extend((0..density).map(|_| geometry::uniform_barycentric(&mut rng, n)));
    weights
        .into_par_iter()
        .filter_map(|w| {
            let x = k.point_at(id, &w);
            let firm = faces.iter().any(|&f| raw_bump(k, &records[f], f, &x, &profile) >= FIRM_LEVEL);
            (!firm).then_some((x, w))
        })
        .collect()
}

/// `Θ_s(x) = P(dist²/η′²) · Π S((μᵢ − c)/(c/CORE_RATIO − c))` for the foot weights `μ`, zero
/// outside `U_s`. Works on a partially built record list.
fn raw_bump(k: &Complex, rec: &CoverRecord, id: usize, x: &Point, profile: &BumpProfile) -> f64 {
    let (w, dist, _) = project_raw(k, id, x);
    let ep = rec.eta_prime;
    if !(dist < ep) {
        return 0.0;
    }
    let mut value = profile.value(dist * dist / (ep * ep));
    if k.simplex_dim(id) > 0 {
        let c = rec.epsilon / w.len() as f64;
        let span = c / CORE_RATIO - c;
        for wi in w {
            if wi <= c {
                return 0.0;
            }
            value *= smooth_step((wi - c) / span);
        }
    }
    value
}

/// Builds the covering with `‖x − r_s(x)‖ < η(s)` on `U_s`. `eta` is indexed by simplex id.
pub fn build_covering(k: &Complex, eta: &(dyn Fn(usize) -> f64 + Sync), opts: &CoverOptions) -> Result<Covering> {
    let n = k.num_simplices();
    let mut records: Vec<CoverRecord> = Vec::with_capacity(n);
    for id in 0..n {
        let e = eta(id);
        if !(e > 0.0) {
            return Err(Error::NonPositiveWeight {
                point: k.barycenter(id).iter().copied().collect(),
                value: e,
            });
        }
        records.push(CoverRecord {
            simplex: k.simplex(id).to_vec(),
            epsilon: 0.0,
            eta: e,
            eta_prime: 0.0,
            base_case: k.simplex_dim(id) == 0,
        });
    }
    // simplices are numbered by dimension, so each level is a contiguous id range
    let mut start = 0;
    while start < n {
        let dim = k.simplex_dim(start);
        let end = (start..n).find(|&i| k.simplex_dim(i) != dim).unwrap_or(n);
        let built = (start..end)
            .into_par_iter()
            .map(|id| build_one(k, &records, id, opts))
            .collect::<Result<Vec<_>>>()?;
        for (id, (epsilon, eta_prime)) in (start..end).zip(built) {
            records[id].epsilon = epsilon;
            records[id].eta_prime = eta_prime;
        }
        start = end;
    }
    Ok(Covering::assemble(k.clone(), records))
}

fn build_one(k: &Complex, records: &[CoverRecord], id: usize, opts: &CoverOptions) -> Result<(f64, f64)> {
    let eta = records[id].eta;
    let others: Vec<usize> = (0..k.num_simplices()).filter(|&t| !k.is_face(id, t)).collect();
    if k.simplex_dim(id) == 0 {
        let v = k.vertex(k.simplex(id)[0]);
        let d = others
            .iter()
            .map(|&t| geometry::point_simplex_distance(v, &k.points_of(t)))
            .fold(f64::INFINITY, f64::min);
        if d < POSITIVE_FLOOR {
            return Err(Error::DegenerateComplex(format!("vertex {:?} touches a non-incident simplex", k.simplex(id))));
        }
        return Ok((0.0, eta.min(d / 2.0)));
    }
    let parts = k.simplex(id).len();
    let uncovered = residual(k, records, id, opts.density, opts.seed);
    let m = uncovered
        .iter()
        .map(|(_, w)| w.iter().copied().fold(f64::INFINITY, f64::min))
        .fold(f64::INFINITY, f64::min);
    let m = if m.is_finite() { m } else { 0.5 / parts as f64 };
    if m < POSITIVE_FLOOR {
        return Err(Error::DegenerateComplex(format!(
            "faces of {:?} leave points arbitrarily close to its boundary uncovered",
            k.simplex(id)
        )));
    }
    let epsilon = CORE_RATIO * parts as f64 * m;
    let core = shrunk_vertices(k, id, epsilon);
    let core_refs: Vec<&Point> = core.iter().collect();
    let d = others
        .iter()
        .map(|&t| geometry::simplex_simplex_distance(&core_refs, &k.points_of(t)))
        .fold(f64::INFINITY, f64::min);
    if d < POSITIVE_FLOOR {
        return Err(Error::DegenerateComplex(format!("core of {:?} touches a disjoint simplex", k.simplex(id))));
    }
    Ok((epsilon, eta.min(d / 2.0)))
}

/// A compact target given as a union of closed simplices, with an open neighborhood.
#[derive(Clone)]
pub struct FamilyMember {
    pub target: Vec<Vec<Point>>,
    pub neighborhood: Arc<dyn Fn(&Point) -> bool + Send + Sync>,
}

impl FamilyMember {
    pub fn distance(&self, x: &Point) -> f64 {
        self.target
            .iter()
            .map(|s| geometry::point_simplex_distance(x, &s.iter().collect::<Vec<_>>()))
            .fold(f64::INFINITY, f64::min)
    }

    fn target_distance(&self, other: &FamilyMember) -> f64 {
        let mut best = f64::INFINITY;
        for a in &self.target {
            let a: Vec<&Point> = a.iter().collect();
            for b in &other.target {
                let b: Vec<&Point> = b.iter().collect();
                best = best.min(geometry::simplex_simplex_distance(&a, &b));
            }
        }
        best
    }
}

/// Shrunk neighborhoods `U_k = V_k ∩ {dist(·, T_k) < collar_k}`.
#[derive(Clone)]
pub struct ShrunkFamily {
    pub members: Vec<FamilyMember>,
    /// Infinite when no other target is disjoint from this one.
    pub collars: Vec<f64>,
}

impl ShrunkFamily {
    pub fn contains(&self, k: usize, x: &Point) -> bool {
        let m = &self.members[k];
        (m.neighborhood)(x) && m.distance(x) < self.collars[k]
    }

    /// Indices of the shrunk sets containing `x`.
    pub fn meeting(&self, x: &Point) -> Vec<usize> {
        (0..self.members.len()).filter(|&k| self.contains(k, x)).collect()
    }
}

/// Shrinks each neighborhood to a collar of half the distance to the targets disjoint from
/// it, so neighborhoods of disjoint targets become disjoint. Fails when a sampled target
/// point is not inside its own neighborhood.
pub fn shrink_family(members: Vec<FamilyMember>, density: usize, seed: u64) -> Result<ShrunkFamily> {
    for (i, m) in members.iter().enumerate() {
        let mut rng = rng_for(seed ^ 0xfa, i as u64);
        for s in &m.target {
            let refs: Vec<&Point> = s.iter().collect();
            let mut pts: Vec<Point> = s.clone();
            pts.extend((0..density).map(|_| geometry::combine(&refs, &geometry::uniform_barycentric(&mut rng, s.len()))));
            if let Some(p) = pts.iter().find(|p| !(m.neighborhood)(p)) {
                return Err(Error::InvalidParameter(format!(
                    "target {i} is not contained in its neighborhood at {:?}",
                    p.as_slice()
                )));
            }
        }
    }
    let collars = (0..members.len())
        .map(|i| {
            (0..members.len())
                .filter(|&j| j != i)
                .map(|j| members[i].target_distance(&members[j]))
                .filter(|&d| d > POSITIVE_FLOOR)
                .fold(f64::INFINITY, f64::min)
                / 2.0
        })
        .collect();
    Ok(ShrunkFamily { members, collars })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::geometry::point;
    use crate::sample::SampleSet;

    #[test]
    fn shrink_edge_by_half() {
        let s = shrink(&fixtures::edge(), 2, 0.5).unwrap();
        assert_eq!(s.vertices, vec![point(&[0.25]), point(&[0.75])]);
        assert!(shrink(&fixtures::edge(), 2, 1.0).is_err());
        assert!(shrink(&fixtures::edge(), 2, 0.0).is_err());
    }

    #[test]
    fn shrinkings_nest() {
        let k = fixtures::triangle();
        let t = k.find(&[0, 1, 2]).unwrap();
        let outer = shrink(&k, t, 0.2).unwrap();
        let inner = shrink(&k, t, 0.6).unwrap();
        for v in &inner.vertices {
            let w = k.barycentric_coords(t, v).unwrap();
            assert!(w.iter().all(|&x| x >= outer.threshold() - 1e-12));
        }
        for v in &outer.vertices {
            let w = k.barycentric_coords(t, v).unwrap();
            assert!(w.iter().all(|&x| x >= 0.2 / 3.0 - 1e-12));
        }
    }

    #[test]
    fn tube_projection_examples() {
        let k = Complex::new(vec![point(&[0.0, 0.0]), point(&[1.0, 0.0])], vec![vec![0, 1]]).unwrap();
        let e = k.find(&[0, 1]).unwrap();
        match tubular_project(&k, e, &point(&[0.5, 0.3])).unwrap() {
            TubeProjection::Inside { foot, dist, .. } => {
                assert!((foot - point(&[0.5, 0.0])).norm() < 1e-15);
                assert!((dist - 0.3).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            tubular_project(&k, e, &point(&[-0.1, 0.05])).unwrap(),
            TubeProjection::OutsideTube { .. }
        ));
        let w = Widening::new(e, 0.5, 0.3).unwrap();
        assert!(w.contains(&k, &point(&[0.5, 0.0])));
        assert!(!w.contains(&k, &point(&[0.5, 0.3])));
        assert!(!w.contains(&k, &point(&[0.2, 0.0])));
    }

    #[test]
    fn single_vertex_is_one_ball() {
        let k = fixtures::vertex();
        let c = build_covering(&k, &|_| 0.3, &CoverOptions::default()).unwrap();
        assert_eq!(c.records().len(), 1);
        assert!(c.records()[0].base_case);
        assert_eq!(c.records()[0].eta_prime, 0.3);
        assert_eq!(c.retract(0, &point(&[0.2])), point(&[0.0]));
    }

    #[test]
    fn edge_is_covered() {
        let k = fixtures::edge();
        let c = build_covering(&k, &|_| 0.1, &CoverOptions::default()).unwrap();
        let s = SampleSet::per_simplex(&k, 1000, 1);
        for p in s.iter() {
            assert!(!c.active(&p.point).is_empty(), "{:?}", p.point.as_slice());
        }
        for id in 0..k.num_simplices() {
            for p in s.iter().filter(|p| c.contains(id, &p.point)) {
                assert!((&p.point - c.retract(id, &p.point)).norm() < c.record(id).eta);
            }
        }
    }

    #[test]
    fn bowtie_closures_avoid_disjoint_simplices() {
        let k = fixtures::bowtie();
        let c = build_covering(&k, &|_| 0.5, &CoverOptions::default()).unwrap();
        let left = k.find(&[0, 1, 2]).unwrap();
        let right = k.find(&[0, 3, 4]).unwrap();
        let s = SampleSet::per_simplex(&k, 5000, 2);
        let mut margin = f64::INFINITY;
        for p in s.iter().filter(|p| c.contains_closure(left, &p.point)) {
            margin = margin.min(geometry::point_simplex_distance(&p.point, &k.points_of(right)));
        }
        assert!(margin > 0.0 && margin.is_finite());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let k = fixtures::triangle();
        let c = build_covering(&k, &|_| 0.2, &CoverOptions { density: 300, seed: 4 }).unwrap();
        let text = serde_json::to_string(&c.to_json()).unwrap();
        let back = Covering::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.records(), c.records());
        let x = point(&[0.3, 0.3]);
        for id in 0..k.num_simplices() {
            assert_eq!(back.bump(id, &x, &BumpProfile::default()), c.bump(id, &x, &BumpProfile::default()));
        }
    }

    #[test]
    fn family_collars_separate_disjoint_targets() {
        let wide: Arc<dyn Fn(&Point) -> bool + Send + Sync> = Arc::new(|x: &Point| x[0].abs() < 5.0);
        let a = FamilyMember { target: vec![vec![point(&[0.0]), point(&[1.0])]], neighborhood: wide.clone() };
        let b = FamilyMember { target: vec![vec![point(&[2.0]), point(&[3.0])]], neighborhood: wide };
        let fam = shrink_family(vec![a.clone(), b], 10, 0).unwrap();
        for i in 0..=300 {
            let x = point(&[-1.0 + i as f64 * 0.02]);
            assert!(fam.meeting(&x).len() <= 1);
        }
        let single = shrink_family(vec![a], 10, 0).unwrap();
        assert!(single.collars[0].is_infinite());
        let tight: Arc<dyn Fn(&Point) -> bool + Send + Sync> = Arc::new(|x: &Point| x[0] > 0.0 && x[0] < 1.0);
        let touching = FamilyMember { target: vec![vec![point(&[0.0]), point(&[1.0])]], neighborhood: tight };
        assert!(shrink_family(vec![touching], 10, 0).is_err());
    }
}
