//! Per-object audits. Every check returns a report; none of them return errors for a failed
//! property, only for malformed input.

use rand::Rng;
use rayon::prelude::*;

use super::{c1_probe, covering_crossings, interfaces, max_mismatch, pick_max, pick_min, sup_distance, Report};
use crate::complex::{Complex, Subcomplex};
use crate::covering::Covering;
use crate::geometry::{self, Point, MEMBERSHIP_TOL};
use crate::maps::{CarrierCertified, MapEvaluator, WeaklySimplicialMap, FD_STEP};
use crate::sample::{rng_for, SampleSet};
use crate::smoothing::{carrier_margin, SmoothMap};
use crate::subdivision::Subdivision;

#[derive(Clone, Debug)]
pub struct AuditOptions {
    /// Samples per simplex for membership checks.
    pub density: usize,
    /// Total samples for sup norms.
    pub sup_samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub probe_step: f64,
    pub probe_tolerance: f64,
    /// Probe points per shared face.
    pub probe_per_face: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            density: 1000,
            sup_samples: 10_000,
            seed: 0,
            tolerance: MEMBERSHIP_TOL,
            probe_step: FD_STEP,
            probe_tolerance: 1e-2,
            probe_per_face: 100,
        }
    }
}

/// Reference data for auditing an approximation `G` of `F`.
pub struct WsmReference<'a> {
    pub f: &'a dyn MapEvaluator,
    pub epsilon: f64,
    /// Subcomplex on which `G` must agree with `F` exactly.
    pub pinned: Subcomplex,
}

pub enum Auditable<'a> {
    Subdivision(&'a Subdivision),
    Covering(&'a Covering),
    SmoothMap(&'a SmoothMap),
    WeaklySimplicial(&'a WeaklySimplicialMap, Option<WsmReference<'a>>),
}

pub fn audit(object: &Auditable<'_>, opts: &AuditOptions) -> Vec<Report> {
    match object {
        Auditable::Subdivision(s) => audit_subdivision(s, opts),
        Auditable::Covering(c) => audit_covering(c, opts),
        Auditable::SmoothMap(h) => audit_smooth_map(h, opts),
        Auditable::WeaklySimplicial(g, r) => audit_weakly_simplicial(g, r.as_ref(), opts),
    }
}

fn all_ids(k: &Complex) -> Vec<usize> {
    (0..k.num_simplices()).collect()
}

fn coords(p: &Point) -> Vec<f64> {
    p.iter().copied().collect()
}

/// Smallest barycentric weight of `x` in simplex `id`, `−∞` off its affine hull.
fn weight_margin(k: &Complex, id: usize, x: &Point) -> f64 {
    k.barycentric_coords(id, x)
        .map(|w| w.into_iter().fold(f64::INFINITY, f64::min))
        .unwrap_or(f64::NEG_INFINITY)
}

pub fn audit_subdivision(sd: &Subdivision, opts: &AuditOptions) -> Vec<Report> {
    let child = &sd.child;
    let parent = &sd.parent;

    let per = opts.density.min(100);
    let worst = (0..child.num_simplices())
        .into_par_iter()
        .map(|id| {
            let p = sd.carrier_of(id);
            let mut rng = rng_for(opts.seed, id as u64);
            let mut m = child.points_of(id).iter().map(|v| weight_margin(parent, p, v)).fold(f64::INFINITY, f64::min);
            if child.simplex_dim(id) > 0 {
                for _ in 0..per {
                    m = m.min(weight_margin(parent, p, &child.sample_in(id, &mut rng).0));
                }
            }
            (m, id)
        })
        .reduce(|| (f64::INFINITY, usize::MAX), pick_min);
    let carrier = Report::new("subdivision.carrier", "carrier-map")
        .metric("min_margin", worst.0)
        .metric("worst_child", (worst.1 != usize::MAX).then(|| child.simplex(worst.1).to_vec()))
        .pass_if(worst.0 >= -opts.tolerance);

    let mut max_rel = 0.0f64;
    for &m in parent.maximal() {
        let d = parent.simplex_dim(m);
        let pv = parent.volume(m);
        let cv: f64 = (0..child.num_simplices())
            .filter(|&c| sd.carrier_of(c) == m && child.simplex_dim(c) == d)
            .map(|c| child.volume(c))
            .sum();
        let rel = if pv > 0.0 { (cv - pv).abs() / pv } else { cv.abs() };
        max_rel = max_rel.max(rel);
    }
    let volume = Report::new("subdivision.volume", "volume-conservation")
        .metric("max_relative_error", max_rel)
        .pass_if(max_rel <= 1e-9);

    let realizable = match child.check_realizable() {
        Ok(()) => Report::new("subdivision.realizable", "geometric-realization").pass_if(true),
        Err(e) => Report::new("subdivision.realizable", "geometric-realization")
            .metric("error", e.to_string())
            .pass_if(false),
    };

    let moved: Vec<usize> = (0..parent.num_vertices())
        .filter(|&v| v >= child.num_vertices() || child.vertex(v) != parent.vertex(v))
        .collect();
    let retention = Report::new("subdivision.vertex-retention", "parent-vertices-kept")
        .metric("moved_vertices", &moved)
        .pass_if(moved.is_empty());

    vec![carrier, volume, realizable, retention]
}

/// Random unit vector orthogonal to the affine hull of `id`, if the ambient space has room.
fn normal_direction<R: Rng + ?Sized>(k: &Complex, id: usize, rng: &mut R) -> Option<Point> {
    let p = k.ambient_dim();
    if k.simplex_dim(id) >= p {
        return None;
    }
    for _ in 0..16 {
        let v = Point::from_fn(p, |_, _| rng.random_range(-1.0..1.0));
        let origin = k.frame(id).origin().clone();
        let proj = k.frame(id).project(&(&origin + &v)) - &origin;
        let n = v - proj;
        if n.norm() > 1e-6 {
            return Some(n.normalize());
        }
    }
    None
}

/// Points of `Cl(U_s)`: closed-core feet pushed out to the full tube radius.
fn closure_samples(cov: &Covering, id: usize, count: usize, seed: u64) -> Vec<Point> {
    let k = cov.complex();
    let rec = cov.record(id);
    let mut rng = rng_for(seed ^ 0xc105, id as u64);
    let d = k.simplex_dim(id);
    let c = cov.core_threshold(id);
    (0..count)
        .map(|i| {
            let foot = if d == 0 {
                k.vertex(k.simplex(id)[0]).clone()
            } else {
                let u = geometry::uniform_barycentric(&mut rng, d + 1);
                let w: Vec<f64> = if i % 4 == 0 {
                    // pin one weight to the threshold: the rim of the core
                    let j = i / 4 % (d + 1);
                    let rest = 1.0 - c;
                    let others: f64 = u.iter().enumerate().filter(|&(t, _)| t != j).map(|(_, x)| x).sum();
                    u.iter()
                        .enumerate()
                        .map(|(t, x)| {
                            if t == j {
                                c
                            } else {
                                let share = if others > 0.0 { x / others } else { 1.0 / d as f64 };
                                c + (rest - d as f64 * c) * share
                            }
                        })
                        .collect()
                } else {
                    u.iter().map(|x| c + (1.0 - (d + 1) as f64 * c) * x).collect()
                };
                k.point_at(id, &w)
            };
            // alternate between the rim of the tube and its inside
            let r = if i % 2 == 0 { rec.eta_prime } else { rec.eta_prime * rng.random::<f64>() };
            match normal_direction(k, id, &mut rng) {
                Some(n) => foot + n * r,
                None => foot,
            }
        })
        .collect()
}

fn core_samples(cov: &Covering, id: usize, count: usize, seed: u64) -> Vec<Point> {
    let k = cov.complex();
    let d = k.simplex_dim(id);
    if d == 0 {
        return vec![k.vertex(k.simplex(id)[0]).clone()];
    }
    let mut rng = rng_for(seed ^ 0xc04e, id as u64);
    let c = cov.core_threshold(id) * 1.001;
    (0..count)
        .map(|_| {
            let u = geometry::uniform_barycentric(&mut rng, d + 1);
            let w: Vec<f64> = u.iter().map(|x| c + (1.0 - (d + 1) as f64 * c) * x).collect();
            k.point_at(id, &w)
        })
        .collect()
}

pub fn audit_covering(cov: &Covering, opts: &AuditOptions) -> Vec<Report> {
    let k = cov.complex();
    let mut samples = SampleSet::in_simplices(k, &all_ids(k), opts.density, opts.seed);
    samples.add_vertices(k);

    // (i)
    let uncovered: Vec<usize> = samples
        .points
        .par_iter()
        .enumerate()
        .filter(|(_, p)| cov.active(&p.point).is_empty())
        .map(|(i, _)| i)
        .collect();
    let coverage = Report::new("covering.coverage", "covering-property-i")
        .metric("samples", samples.len())
        .metric("uncovered", uncovered.len())
        .metric("first_uncovered", uncovered.first().map(|&i| coords(&samples.points[i].point)))
        .pass_if(uncovered.is_empty());

    // (ii)
    let margin = (0..k.num_simplices())
        .into_par_iter()
        .map(|s| {
            let others: Vec<usize> = (0..k.num_simplices()).filter(|&t| !k.is_face(s, t)).collect();
            let pts = closure_samples(cov, s, opts.density, opts.seed);
            let mut best = (f64::INFINITY, usize::MAX);
            for x in &pts {
                for &t in &others {
                    best = pick_min(best, (geometry::point_simplex_distance(x, &k.points_of(t)), s));
                }
            }
            best
        })
        .reduce(|| (f64::INFINITY, usize::MAX), pick_min);
    let disjoint = Report::new("covering.disjointness", "covering-property-ii")
        .metric("min_margin", margin.0)
        .metric("worst_simplex", (margin.1 != usize::MAX).then(|| k.simplex(margin.1).to_vec()))
        .pass_if(margin.0 > 0.0);

    // (iii)
    let disp = samples
        .points
        .par_iter()
        .map(|p| {
            cov.active(&p.point)
                .into_iter()
                .map(|s| ((&p.point - cov.retract(s, &p.point)).norm() / cov.record(s).eta, s))
                .fold((0.0, usize::MAX), pick_max)
        })
        .reduce(|| (0.0, usize::MAX), pick_max);
    let displacement = Report::new("covering.displacement", "covering-property-iii")
        .metric("max_ratio_to_eta", disp.0)
        .metric(
            "max_displacement",
            (disp.1 != usize::MAX).then(|| disp.0 * cov.record(disp.1).eta),
        )
        .metric("worst_simplex", (disp.1 != usize::MAX).then(|| k.simplex(disp.1).to_vec()))
        .pass_if(disp.0 < 1.0);

    // local finiteness: sets meeting at a point are faces of one simplex
    let strangers = samples
        .points
        .par_iter()
        .filter(|p| {
            let act = cov.active(&p.point);
            act.iter().enumerate().any(|(i, &a)| {
                act[i + 1..].iter().any(|&b| {
                    let mut u: Vec<usize> = k.simplex(a).iter().chain(k.simplex(b)).copied().collect();
                    u.sort_unstable();
                    u.dedup();
                    k.find(&u).is_none()
                })
            })
        })
        .count();
    let finite = Report::new("covering.local-finiteness", "neighbors-share-a-simplex")
        .metric("violations", strangers)
        .pass_if(strangers == 0);

    // ε certificate
    let cert = (0..k.num_simplices())
        .into_par_iter()
        .filter(|&s| k.simplex_dim(s) > 0)
        .map(|s| {
            let c = cov.core_threshold(s);
            cov.residual_samples(s, opts.density, opts.seed)
                .iter()
                .map(|(_, w)| (w.iter().fold(f64::INFINITY, |m, &x| m.min(x)) - c, s))
                .fold((f64::INFINITY, usize::MAX), pick_min)
        })
        .reduce(|| (f64::INFINITY, usize::MAX), pick_min);
    let certificate = Report::new("covering.epsilon-certificate", "residual-inside-shrinking")
        .metric("min_margin", cert.0)
        .metric("worst_simplex", (cert.1 != usize::MAX).then(|| k.simplex(cert.1).to_vec()))
        .pass_if(cert.0 >= 1e-9);

    // idempotence on cores
    let idem = (0..k.num_simplices())
        .into_par_iter()
        .map(|s| {
            core_samples(cov, s, opts.density.min(200), opts.seed)
                .iter()
                .map(|x| ((cov.retract(s, x) - x).norm(), s))
                .fold((0.0, usize::MAX), pick_max)
        })
        .reduce(|| (0.0, usize::MAX), pick_max);
    let idempotence = Report::new("covering.idempotence", "retraction-fixes-core")
        .metric("max_motion", idem.0)
        .pass_if(idem.0 <= 1e-12);

    vec![coverage, disjoint, displacement, finite, certificate, idempotence]
}

/// The probe as a stand-alone check, on the shared faces of `k` plus any extra crossings.
pub fn c1_report(f: &dyn MapEvaluator, k: &Complex, extra: Vec<super::Crossing>, opts: &AuditOptions) -> Report {
    let mut crossings = interfaces(k, opts.probe_per_face, opts.seed);
    crossings.extend(extra);
    let r = Report::new("probe.c1", "derivative-continuity").metric("crossings", crossings.len());
    if crossings.is_empty() {
        return r.inconclusive("no crossings to probe");
    }
    match c1_probe(f, &crossings, opts.probe_step) {
        Ok(rows) => {
            let worst = rows.iter().enumerate().map(|(i, r)| (r.mismatch, i)).fold((0.0, usize::MAX), pick_max);
            r.metric("max_mismatch", worst.0)
                .metric("worst_point", (worst.1 != usize::MAX).then(|| rows[worst.1].point.clone()))
                .pass_if(max_mismatch(&rows) < opts.probe_tolerance)
        }
        Err(e) => r.inconclusive(&e.to_string()),
    }
}

pub fn audit_smooth_map(h: &SmoothMap, opts: &AuditOptions) -> Vec<Report> {
    let k = h.covering().complex();
    let target = h.target();
    let samples = SampleSet::total(k, opts.sup_samples, opts.seed);

    // partition of unity
    let part = samples
        .points
        .par_iter()
        .map(|p| match h.partition().weights(&p.point) {
            Ok(ws) => {
                let sum: f64 = ws.iter().map(|w| w.1).sum();
                let negative = ws.iter().any(|w| w.1 < 0.0);
                let outside = ws.iter().any(|&(s, w)| w > 0.0 && !h.covering().contains(s, &p.point));
                ((sum - 1.0).abs(), negative || outside)
            }
            Err(_) => (f64::INFINITY, true),
        })
        .reduce(|| (0.0, false), |a, b| (a.0.max(b.0), a.1 || b.1));
    let partition = Report::new("smooth.partition", "partition-of-unity")
        .metric("max_sum_error", part.0)
        .metric("support_or_sign_violation", part.1)
        .pass_if(part.0 <= 1e-10 && !part.1);

    struct Row {
        err_ratio: f64,
        margin: f64,
        tested: usize,
        combo_err: f64,
        combo_margin: f64,
        failed: bool,
    }
    let rows: Vec<Row> = samples
        .points
        .par_iter()
        .map(|p| {
            let x = &p.point;
            let (Ok(y), Ok(gx), Ok(terms)) = (h.eval(x), h.input().eval(x), h.contributions(x)) else {
                return Row { err_ratio: f64::INFINITY, margin: f64::NEG_INFINITY, tested: 0, combo_err: f64::INFINITY, combo_margin: f64::NEG_INFINITY, failed: true };
            };
            let err_ratio = (&y - &gx).norm() / h.delta(x);
            let mut margin = f64::INFINITY;
            let mut combo_margin = f64::INFINITY;
            let mut tested = 0;
            // rebuild h(x) from the certified terms
            let sum: f64 = terms.iter().map(|t| t.weight).sum();
            let mut rebuilt = Point::zeros(y.len());
            for t in &terms {
                rebuilt += &t.point * t.weight;
            }
            let mut combo_err = (rebuilt - &y).norm() / (1.0 + y.amax()) + (sum - 1.0).abs();
            if terms.iter().any(|t| t.weight < 0.0) {
                combo_err = f64::INFINITY;
            }
            for t in k.faces(p.simplex) {
                if !h.in_w(t, x) {
                    continue;
                }
                tested += 1;
                let xi = h.certificate(t);
                margin = margin.min(carrier_margin(target, xi, &y).unwrap_or(f64::NEG_INFINITY));
                for term in &terms {
                    combo_margin = combo_margin.min(carrier_margin(target, xi, &term.point).unwrap_or(f64::NEG_INFINITY));
                }
            }
            Row { err_ratio, margin, tested, combo_err, combo_margin, failed: false }
        })
        .collect();
    let failed = rows.iter().filter(|r| r.failed).count();
    let tested: usize = rows.iter().map(|r| r.tested).sum();
    let max_ratio = rows.iter().map(|r| r.err_ratio).fold(0.0, f64::max);
    let min_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let combo_err = rows.iter().map(|r| r.combo_err).fold(0.0, f64::max);
    let combo_margin = rows.iter().map(|r| r.combo_margin).fold(f64::INFINITY, f64::min);

    let carrier = Report::new("smooth.carrier", "image-in-certified-simplex")
        .metric("pairs_tested", tested)
        .metric("min_margin", min_margin)
        .metric("evaluation_failures", failed);
    let carrier = if tested == 0 && failed == 0 {
        carrier.inconclusive("no sample fell in any W_t")
    } else {
        carrier.pass_if(failed == 0 && min_margin >= -opts.tolerance)
    };
    let error = Report::new("smooth.error", "within-delta")
        .metric("max_ratio_to_delta", max_ratio)
        .metric("samples", samples.len())
        .metric("lipschitz", h.lipschitz())
        .metric("lipschitz_certified", h.lipschitz_certified())
        .pass_if(failed == 0 && max_ratio < 1.0);
    let combo = Report::new("smooth.convex-combination", "weighted-sum-of-certified-points")
        .metric("max_reconstruction_error", combo_err)
        .metric("min_term_margin", combo_margin)
        .pass_if(failed == 0 && combo_err <= 1e-10 && combo_margin >= -opts.tolerance);

    let probe = c1_report(h, k, covering_crossings(h.covering(), 4, opts.seed), opts);
    vec![partition, carrier, error, combo, probe]
}

pub fn audit_weakly_simplicial(g: &WeaklySimplicialMap, reference: Option<&WsmReference<'_>>, opts: &AuditOptions) -> Vec<Report> {
    let k = g.source();
    let violations = g.coherence_violations();
    let coherence = Report::new("wsm.coherence", "weakly-simplicial-levels")
        .metric("violations", violations.iter().map(|&i| k.simplex(i).to_vec()).collect::<Vec<_>>())
        .pass_if(violations.is_empty());

    let base = g.tower().base();
    let worst = k
        .maximal()
        .par_iter()
        .flat_map_iter(|&m| k.faces(m))
        .map(|t| {
            let mut rng = rng_for(opts.seed, t as u64);
            let xi = g.certificate(t);
            let mut pts: Vec<Point> = k.points_of(t).into_iter().cloned().collect();
            if k.simplex_dim(t) > 0 {
                pts.extend((0..opts.density.min(100)).map(|_| k.sample_in(t, &mut rng).0));
            }
            pts.iter()
                .map(|x| (g.eval(x).ok().and_then(|y| carrier_margin(base, xi, &y)).unwrap_or(f64::NEG_INFINITY), t))
                .fold((f64::INFINITY, usize::MAX), pick_min)
        })
        .reduce(|| (f64::INFINITY, usize::MAX), pick_min);
    let carrier = Report::new("wsm.carrier", "image-in-certified-simplex")
        .metric("min_margin", worst.0)
        .metric("worst_simplex", (worst.1 != usize::MAX).then(|| k.simplex(worst.1).to_vec()))
        .pass_if(worst.0 >= -opts.tolerance);

    let mut out = vec![coherence, carrier];
    if let Some(r) = reference {
        let samples = SampleSet::total(k, opts.sup_samples, opts.seed);
        let approx = match sup_distance(g, r.f, &samples) {
            Ok(d) => Report::new("wsm.approximation", "within-epsilon")
                .metric("sup_error", d.value)
                .metric("argmax", d.argmax)
                .metric("epsilon", r.epsilon)
                .pass_if(d.value < r.epsilon),
            Err(e) => Report::new("wsm.approximation", "within-epsilon").inconclusive(&e.to_string()),
        };
        let moved: Vec<usize> = r
            .pinned
            .vertices()
            .filter(|&v| match r.f.eval(k.vertex(v)) {
                Ok(fv) => fv != *g.image_of_vertex(v),
                Err(_) => true,
            })
            .collect();
        let relative = Report::new("wsm.relative", "exact-on-pinned-subcomplex")
            .metric("disagreeing_vertices", &moved)
            .pass_if(moved.is_empty());
        out.push(approx);
        out.push(relative);
    }
    out
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::covering::{build_covering, CoverOptions};
    use crate::fixtures;
    use crate::geometry::point;
    use crate::maps::{degree2_circle, zeeman_relative, CertifiedPlMap, PlMap, ZeemanOptions};
    use crate::smoothing::{identity_smoother, synthesize, constant_budget, PartitionOfUnity, SmoothOptions};
    use crate::subdivision::sd;
    use crate::verify::{overall, Status};

    fn quick() -> AuditOptions {
        AuditOptions {
            density: 200,
            sup_samples: 2000,
            probe_per_face: 10,
            ..AuditOptions::default()
        }
    }

    fn status_of(reports: &[Report], check: &str) -> Status {
        reports.iter().find(|r| r.check == check).unwrap_or_else(|| panic!("missing {check}")).status
    }

    #[test]
    fn fresh_subdivision_passes_and_faults_fail() {
        let k = fixtures::triangle();
        let s = sd(&k).unwrap();
        let reports = audit_subdivision(&s, &quick());
        assert_eq!(overall(&reports), Status::Pass, "{reports:#?}");

        let mut carriers = s.carriers().to_vec();
        let last = carriers.len() - 1;
        carriers[last] = 0;
        let bad = s.clone().with_carriers(carriers).unwrap();
        assert_eq!(status_of(&audit_subdivision(&bad, &quick()), "subdivision.carrier"), Status::Fail);

        let mut verts = s.child.vertices().to_vec();
        verts[0] = point(&[0.4, 0.4]);
        let moved = Complex::new_trusted(verts, s.child.simplices().to_vec()).unwrap();
        let r = audit_subdivision(&s.clone().with_child(moved).unwrap(), &quick());
        assert_eq!(status_of(&r, "subdivision.volume"), Status::Fail);
        assert_eq!(status_of(&r, "subdivision.realizable"), Status::Fail);
        assert_eq!(status_of(&r, "subdivision.vertex-retention"), Status::Fail);
    }

    fn cover() -> Covering {
        build_covering(&fixtures::bowtie(), &|_| 0.1, &CoverOptions { density: 300, seed: 0 }).unwrap()
    }

    #[test]
    fn covering_passes_and_each_fault_fails() {
        let c = cover();
        let reports = audit_covering(&c, &quick());
        assert_eq!(overall(&reports), Status::Pass, "{reports:#?}");

        let halved = c.clone().with_eta_scaled(0.5);
        assert_eq!(status_of(&audit_covering(&halved, &quick()), "covering.displacement"), Status::Fail);

        let corner = c.complex().find(&[1]).unwrap();
        let fat = c.clone().with_record(corner, |r| r.eta_prime = 3.0);
        let r = audit_covering(&fat, &quick());
        assert_eq!(status_of(&r, "covering.disjointness"), Status::Fail);
        assert_eq!(status_of(&r, "covering.local-finiteness"), Status::Fail);

        let edge = c.complex().find(&[0, 1]).unwrap();
        let thin = c.clone().with_record(edge, |r| r.epsilon = 0.95);
        let r = audit_covering(&thin, &quick());
        assert_eq!(status_of(&r, "covering.epsilon-certificate"), Status::Fail);
        assert_eq!(status_of(&r, "covering.coverage"), Status::Fail);

        let biased = c.with_retraction_bias(point(&[1e-6, 0.0]));
        assert_eq!(status_of(&audit_covering(&biased, &quick()), "covering.idempotence"), Status::Fail);
    }

    /// Claims every simplex maps into target simplex 0.
    struct Miscertified(CertifiedPlMap);

    impl MapEvaluator for Miscertified {
        fn eval(&self, x: &Point) -> crate::Result<Point> {
            self.0.eval(x)
        }
        fn simplexwise_lipschitz(&self) -> Option<f64> {
            self.0.simplexwise_lipschitz()
        }
    }

    impl CarrierCertified for Miscertified {
        fn source(&self) -> &Complex {
            self.0.source()
        }
        fn target(&self) -> &Complex {
            self.0.target()
        }
        fn certificate(&self, _t: usize) -> usize {
            0
        }
    }

    #[test]
    fn smooth_map_passes_and_faults_fail() {
        let k = fixtures::bent_path();
        let opts = SmoothOptions { cover: CoverOptions { density: 300, seed: 0 }, ..SmoothOptions::default() };
        let h = identity_smoother(&k, 0.1, &opts).unwrap();
        let reports = audit_smooth_map(&h, &quick());
        assert_eq!(overall(&reports), Status::Pass, "{reports:#?}");

        let tight = h.clone().with_delta(constant_budget(1e-4));
        assert_eq!(status_of(&audit_smooth_map(&tight, &quick()), "smooth.error"), Status::Fail);

        let cov = Arc::new(h.covering().clone());
        let g: Arc<dyn CarrierCertified> = Arc::new(CertifiedPlMap::identity(&k));
        let raw = synthesize(g, PartitionOfUnity::unnormalized(cov.clone(), Default::default()), constant_budget(0.1), 1.0, true).unwrap();
        let r = audit_smooth_map(&raw, &quick());
        assert_eq!(status_of(&r, "smooth.partition"), Status::Fail);
        assert_eq!(status_of(&r, "smooth.convex-combination"), Status::Fail);

        let lying: Arc<dyn CarrierCertified> = Arc::new(Miscertified(CertifiedPlMap::identity(&k)));
        let bad = synthesize(lying, PartitionOfUnity::new(cov, Default::default()), constant_budget(0.1), 1.0, true).unwrap();
        let r = audit_smooth_map(&bad, &quick());
        assert_eq!(status_of(&r, "smooth.carrier"), Status::Fail);
        assert_eq!(status_of(&r, "smooth.convex-combination"), Status::Fail);

        let kinked = c1_report(&PlMap::identity(&k), &k, Vec::new(), &quick());
        assert_eq!(kinked.status, Status::Fail);
    }

    #[test]
    fn weakly_simplicial_audit() {
        let k = fixtures::square_circle(1.0);
        let f = degree2_circle(1.0);
        let out = zeeman_relative(&f, &k, &Subcomplex::empty(), &k, 0.5, &ZeemanOptions::default()).unwrap();
        let reference = WsmReference { f: &f, epsilon: 0.5, pinned: Subcomplex::empty() };
        let reports = audit_weakly_simplicial(&out.map, Some(&reference), &quick());
        assert_eq!(overall(&reports), Status::Pass, "{reports:#?}");

        let finest = out.map.tower().finest().num_vertices();
        let tampered = (0..finest)
            .map(|u| out.map.tampered(0, u).unwrap())
            .find(|t| !t.coherence_violations().is_empty())
            .expect("some tampering breaks coherence");
        let r = audit_weakly_simplicial(&tampered, Some(&reference), &quick());
        assert_eq!(status_of(&r, "wsm.coherence"), Status::Fail);
        assert_eq!(status_of(&r, "wsm.carrier"), Status::Fail);

        let origin_pinned = WsmReference { f: &f, epsilon: 1e-6, pinned: Subcomplex::generated_by([vec![0]]) };
        let r = audit_weakly_simplicial(&tampered, Some(&origin_pinned), &quick());
        assert_eq!(status_of(&r, "wsm.approximation"), Status::Fail);
        assert_eq!(status_of(&r, "wsm.relative"), Status::Fail);
    }
}
