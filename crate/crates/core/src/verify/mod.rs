//! Sampled verification: sup distances, derivative-continuity probes and audit reports.
//!
//! A passing report means no counterexample was found at the declared density. Universal
//! statements cannot be proven by sampling, which is why `Inconclusive` is a real outcome.

mod audit;

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::Complex;
use crate::covering::Covering;
use crate::error::{Error, Result};
use crate::geometry::{self, Point};
use crate::maps::MapEvaluator;
use crate::sample::{rng_for, SampleSet};

pub use audit::{
    audit, audit_covering, audit_smooth_map, audit_subdivision, audit_weakly_simplicial, c1_report, AuditOptions,
    Auditable, WsmReference,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    /// 0 pass, 1 fail, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub check: String,
    pub status: Status,
    pub metrics: BTreeMap<String, serde_json::Value>,
    pub paper_tag: String,
}

impl Report {
    pub fn new(check: &str, tag: &str) -> Self {
        Self {
            check: check.to_string(),
            status: Status::Pass,
            metrics: BTreeMap::new(),
            paper_tag: tag.to_string(),
        }
    }

    pub fn metric(mut self, name: &str, value: impl Serialize) -> Self {
        self.metrics.insert(
            name.to_string(),
            serde_json::to_value(value).unwrap_or(serde_json::Value::Null),
        );
        self
    }

    pub fn pass_if(mut self, ok: bool) -> Self {
        self.status = if ok { Status::Pass } else { Status::Fail };
        self
    }

    pub fn inconclusive(mut self, why: &str) -> Self {
        self.status = Status::Inconclusive;
        self.metric("reason", why)
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// The worst status wins.
pub fn overall(reports: &[Report]) -> Status {
    reports.iter().map(|r| r.status).max().unwrap_or(Status::Pass)
}

#[derive(Clone, Debug, Serialize)]
pub struct SupDistance {
    pub value: f64,
    pub argmax: Vec<f64>,
}

/// Largest `‖a(x) − b(x)‖` over the sample set. Ties go to the earliest sample.
pub fn sup_distance(a: &dyn MapEvaluator, b: &dyn MapEvaluator, samples: &SampleSet) -> Result<SupDistance> {
    let best = samples
        .points
        .par_iter()
        .enumerate()
        .map(|(i, p)| -> Result<(f64, usize)> {
            let ya = a.eval(&p.point)?;
            let yb = b.eval(&p.point)?;
            if ya.len() != yb.len() {
                return Err(Error::InvalidParameter("maps have different targets".into()));
            }
            Ok(((ya - yb).norm(), i))
        })
        .try_reduce(|| (0.0, usize::MAX), |x, y| Ok(pick_max(x, y)))?;
    Ok(SupDistance {
        value: best.0,
        argmax: if best.1 == usize::MAX {
            Vec::new()
        } else {
            samples.points[best.1].point.iter().copied().collect()
        },
    })
}

/// Deterministic `(value, index)` maximum: larger value, then smaller index.
pub(crate) fn pick_max(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}

pub(crate) fn pick_min(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    let (v, i) = pick_max((-a.0, a.1), (-b.0, b.1));
    (-v, i)
}

/// A point where a path enters along `incoming` and leaves along `outgoing`.
#[derive(Clone, Debug)]
pub struct Crossing {
    pub point: Point,
    pub incoming: Point,
    pub outgoing: Point,
}

impl Crossing {
    pub fn straight(point: Point, direction: Point) -> Self {
        Self {
            point,
            incoming: direction.clone(),
            outgoing: direction,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeRow {
    pub point: Vec<f64>,
    pub before: Vec<f64>,
    pub after: Vec<f64>,
    pub mismatch: f64,
}

/// One-sided directional derivatives on both sides of each crossing, using the second-order
/// stencil `(3f(p) − 4f(p − h·u) + f(p − 2h·u)) / 2h` and its mirror. The mismatch is the norm
/// of their difference: about 0 for C¹ maps, the size of the jump at a kink.
pub fn c1_probe(f: &dyn MapEvaluator, crossings: &[Crossing], h: f64) -> Result<Vec<ProbeRow>> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("probe step must be positive, got {h}")));
    }
    crossings
        .par_iter()
        .map(|c| {
            let at = |x: Point| {
                f.eval(&x).map_err(|e| {
                    Error::Evaluation(format!(
                        "probe step leaves the domain near {:?}: {e}",
                        c.point.as_slice()
                    ))
                })
            };
            let y0 = at(c.point.clone())?;
            let m1 = at(&c.point - &c.incoming * h)?;
            let m2 = at(&c.point - &c.incoming * (2.0 * h))?;
            let p1 = at(&c.point + &c.outgoing * h)?;
            let p2 = at(&c.point + &c.outgoing * (2.0 * h))?;
            let before = (&y0 * 3.0 - &m1 * 4.0 + m2) / (2.0 * h);
            let after = (&p1 * 4.0 - &y0 * 3.0 - p2) / (2.0 * h);
            Ok(ProbeRow {
                point: c.point.iter().copied().collect(),
                mismatch: (&after - &before).norm(),
                before: before.iter().copied().collect(),
                after: after.iter().copied().collect(),
            })
        })
        .collect()
}

pub fn max_mismatch(rows: &[ProbeRow]) -> f64 {
    rows.iter().map(|r| r.mismatch).fold(0.0, f64::max)
}

/// Unit vector from the affine hull of `face` toward `opposite`.
fn inward_normal(k: &Complex, face: usize, opposite: &Point) -> Option<Point> {
    let foot = k.frame(face).project(opposite);
    let n = opposite - foot;
    let len = n.norm();
    (len > 1e-12).then(|| n / len)
}

/// Barycentric weights kept away from the face boundary so that probe steps stay inside.
fn interior_weights<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let w = geometry::uniform_barycentric(rng, n);
    w.iter().map(|x| 0.8 * x + 0.2 / n as f64).collect()
}

/// Crossings through every face shared by exactly two maximal simplices of one dimension
/// higher, `per_face` points each (one for a vertex face). The path comes in normal to the
/// face inside one simplex and leaves normal to it inside the other.
pub fn interfaces(k: &Complex, per_face: usize, seed: u64) -> Vec<Crossing> {
    let mut out = Vec::new();
    for face in 0..k.num_simplices() {
        let d = k.simplex_dim(face);
        let cofaces: Vec<usize> = k
            .maximal()
            .iter()
            .copied()
            .filter(|&m| k.simplex_dim(m) == d + 1 && k.is_face(face, m))
            .collect();
        if cofaces.len() != 2 {
            continue;
        }
        let opp = |m: usize| {
            let v = *k.simplex(m).iter().find(|v| !k.simplex(face).contains(v)).expect("coface has an extra vertex");
            k.vertex(v).clone()
        };
        let (Some(na), Some(nb)) = (inward_normal(k, face, &opp(cofaces[0])), inward_normal(k, face, &opp(cofaces[1])))
        else {
            continue;
        };
        let mut rng = rng_for(seed ^ 0x1f7e, face as u64);
        let count = if d == 0 { 1 } else { per_face };
        for _ in 0..count {
            let w = interior_weights(&mut rng, d + 1);
            out.push(Crossing {
                point: k.point_at(face, &w),
                incoming: -na.clone(),
                outgoing: nb.clone(),
            });
        }
    }
    out
}

/// Straight crossings through the regime boundaries of a covering inside `|K|`: the rim and
/// plateau of each tube, and the rim and plateau of each shrunk core.
pub fn covering_crossings(cov: &Covering, per_set: usize, seed: u64) -> Vec<Crossing> {
    let k = cov.complex();
    let mut out = Vec::new();
    for s in 0..k.num_simplices() {
        let rec = cov.record(s);
        let d = k.simplex_dim(s);
        let mut rng = rng_for(seed ^ 0xc2055, s as u64);
        let c = cov.core_threshold(s);
        // core boundaries, traversed along the simplex
        if d > 0 {
            let b = k.barycenter(s);
            for (j, &v) in k.simplex(s).iter().enumerate() {
                let dir = k.vertex(v) - &b;
                let dir = dir.normalize();
                for lambda in [c, cov.plateau_threshold(s)] {
                    let mut w = vec![lambda; d + 1];
                    w[j] = 1.0 - d as f64 * lambda;
                    out.push(Crossing::straight(k.point_at(s, &w), dir.clone()));
                }
            }
        }
        // tube boundaries, traversed away from the simplex inside each coface
        for m in k.maximal().iter().copied().filter(|&m| m != s && k.is_face(s, m)) {
            for _ in 0..per_set {
                let foot_w: Vec<f64> = if d == 0 {
                    vec![1.0]
                } else {
                    let u = geometry::uniform_barycentric(&mut rng, d + 1);
                    let lo = cov.plateau_threshold(s) * 1.01;
                    u.iter().map(|x| lo + (1.0 - (d + 1) as f64 * lo) * x).collect()
                };
                let foot = k.point_at(s, &foot_w);
                let target = k.point_at(m, &interior_weights(&mut rng, k.simplex(m).len()));
                let Some(n) = inward_normal(k, s, &target) else { continue };
                let n = if d == 0 { (&target - &foot).normalize() } else { n };
                for r in [0.5 * rec.eta_prime, rec.eta_prime] {
                    let p = &foot + &n * r;
                    let inside = k
                        .barycentric_coords(m, &p)
                        .map(|w| w.iter().all(|&x| x > 1e-4))
                        .unwrap_or(false);
                    if inside {
                        out.push(Crossing::straight(p, n.clone()));
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::geometry::point;
    use crate::maps::{FnMap, PlMap, FD_STEP};

    #[test]
    fn sup_distance_examples() {
        let k = fixtures::triangle();
        let s = SampleSet::total(&k, 500, 0);
        let id = PlMap::identity(&k);
        assert_eq!(sup_distance(&id, &id, &s).unwrap().value, 0.0);
        let shifted = FnMap::new(|x: &Point| {
            let mut y = x.clone();
            y[0] += 0.01;
            y
        });
        let d = sup_distance(&id, &shifted, &s).unwrap();
        assert!((d.value - 0.01).abs() < 1e-15);
        assert!(s.points.iter().any(|p| p.point.as_slice() == d.argmax.as_slice()));
    }

    #[test]
    fn probe_detects_kinks_only() {
        let c = [Crossing::straight(point(&[0.0]), point(&[1.0]))];
        let abs = FnMap::new(|x: &Point| point(&[x[0].abs()]));
        let sq = FnMap::new(|x: &Point| point(&[x[0] * x[0].abs()]));
        assert!((c1_probe(&abs, &c, FD_STEP).unwrap()[0].mismatch - 2.0).abs() < 1e-9);
        assert!(c1_probe(&sq, &c, FD_STEP).unwrap()[0].mismatch < 1e-3);
        assert!(c1_probe(&abs, &c, 0.0).is_err());
    }

    #[test]
    fn interfaces_of_fixtures() {
        let bent = fixtures::bent_path();
        let cs = interfaces(&bent, 10, 0);
        assert_eq!(cs.len(), 1);
        let rows = c1_probe(&PlMap::identity(&bent), &cs, FD_STEP).unwrap();
        assert!((rows[0].mismatch - 2f64.sqrt()).abs() < 1e-9);
        // a straight subdivided interval is C¹ as a map into ℝ
        let line = fixtures::interval3();
        let rows = c1_probe(&PlMap::identity(&line), &interfaces(&line, 10, 0), FD_STEP).unwrap();
        assert!(max_mismatch(&rows) < 1e-9);
        let folded = fixtures::folded_triangles();
        let cs = interfaces(&folded, 10, 0);
        assert_eq!(cs.len(), 10);
        assert!(max_mismatch(&c1_probe(&PlMap::identity(&folded), &cs, FD_STEP).unwrap()) > 0.5);
        assert!(interfaces(&fixtures::triangle(), 10, 0).is_empty());
    }

    #[test]
    fn statuses_combine() {
        let a = Report::new("a", "t");
        let b = Report::new("b", "t").inconclusive("why");
        let c = Report::new("c", "t").pass_if(false);
        assert_eq!(overall(&[a.clone()]), Status::Pass);
        assert_eq!(overall(&[a.clone(), b.clone()]), Status::Inconclusive);
        assert_eq!(overall(&[a, b, c]), Status::Fail);
        assert_eq!(Status::Inconclusive.exit_code(), 2);
        let json = serde_json::to_string(&Report::new("x", "y").metric("m", 1.5)).unwrap();
        assert_eq!(json, r#"{"check":"x","status":"pass","metrics":{"m":1.5},"paper_tag":"y"}"#);
    }
}
