//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each, and exits nonzero
//! if any failed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use plsmooth::analytic::{retraction_report, singular_locus_scan, NormalCrossingsModel, Polynomial, SingularEmbedding};
use plsmooth::covering::{build_covering, CoverOptions};
use plsmooth::embedding::GraphEmbedding;
use plsmooth::fixtures;
use plsmooth::geometry::point;
use plsmooth::maps::{cross_map, degree2_circle, zeeman_relative, MapEvaluator, PlMap, ZeemanOptions, FD_STEP};
use plsmooth::sample::{rng_for, SampleSet};
use plsmooth::smoothing::{identity_smoother, smoother_sequence, constant_budget, SmoothOptions};
use plsmooth::smoothing::{approximate, PipelineOptions, TargetTriangulation};
use plsmooth::subdivision::{sd, sd_mod};
use plsmooth::verify::{
    audit_covering, audit_smooth_map, c1_probe, c1_report, covering_crossings, max_mismatch, sup_distance,
    AuditOptions, Crossing, Report, Status,
};
use plsmooth::{Complex, Point, Subcomplex};
use rand::Rng;

type Outcome = Result<(), String>;

fn ensure(ok: bool, what: impl Into<String>) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn report<'a>(reports: &'a [Report], check: &str) -> &'a Report {
    reports.iter().find(|r| r.check == check).expect("check is present")
}

fn metric(r: &Report, name: &str) -> f64 {
    r.metrics.get(name).and_then(|v| v.as_f64()).unwrap_or(f64::NAN)
}

/// Random sub-triangulation of a jittered 3×3 grid, with a random subcomplex.
fn random_pair(seed: u64) -> (Complex, Subcomplex) {
    let mut rng = rng_for(seed, 7);
    let n = 4;
    let vertices: Vec<Point> = (0..n * n)
        .map(|i| {
            let (x, y) = ((i % n) as f64, (i / n) as f64);
            point(&[x + rng.random_range(-0.2..0.2), y + rng.random_range(-0.2..0.2)])
        })
        .collect();
    let mut triangles = Vec::new();
    for cy in 0..n - 1 {
        for cx in 0..n - 1 {
            let (a, b, c, d) = (cy * n + cx, cy * n + cx + 1, (cy + 1) * n + cx, (cy + 1) * n + cx + 1);
            let pair = if rng.random::<bool>() { [vec![a, b, d], vec![a, d, c]] } else { [vec![a, b, c], vec![b, d, c]] };
            for t in pair {
                if rng.random::<f64>() < 0.7 {
                    triangles.push(t);
                }
            }
        }
    }
    if triangles.is_empty() {
        triangles.push(vec![0, 1, n]);
    }
    let k = Complex::new(vertices, triangles).expect("grid triangles form a complex");
    let picked: Vec<Vec<usize>> = k.simplices().iter().filter(|_| rng.random::<f64>() < 0.15).cloned().collect();
    (k, Subcomplex::generated_by(picked))
}

fn criterion_1() -> Outcome {
    let k = fixtures::triangle();
    let s = sd(&k).map_err(|e| e.to_string())?;
    let tops = s.child.maximal().iter().filter(|&&m| s.child.simplex_dim(m) == 2).count();
    ensure(tops == 6 && s.child.num_vertices() == 7, format!("{tops} top simplices, {} vertices", s.child.num_vertices()))?;
    let area: f64 = s.child.maximal().iter().map(|&m| s.child.volume(m)).sum();
    ensure(((area - 0.5) / 0.5).abs() <= 1e-9, format!("area {area}"))?;

    for k in [fixtures::triangle(), fixtures::bowtie(), fixtures::two_triangles(), random_pair(99).0] {
        let same = sd_mod(&k, &k.subcomplex_all()).map_err(|e| e.to_string())?;
        ensure(same.child.simplices() == k.simplices() && same.child.vertices() == k.vertices(), "sd_mod(K, K) ≠ K")?;
        let plain = sd(&k).map_err(|e| e.to_string())?;
        let empty = sd_mod(&k, &Subcomplex::empty()).map_err(|e| e.to_string())?;
        ensure(
            plain.child.simplices() == empty.child.simplices() && plain.child.vertices() == empty.child.vertices(),
            "sd_mod(K, ∅) ≠ sd(K)",
        )?;
    }

    for seed in 0..20 {
        let (k, h) = random_pair(seed);
        let s = sd_mod(&k, &h).map_err(|e| e.to_string())?;
        for simplex in h.iter() {
            ensure(s.child.find(simplex).is_some(), format!("seed {seed}: {simplex:?} lost"))?;
            for &v in simplex {
                ensure(s.child.vertex(v) == k.vertex(v), format!("seed {seed}: vertex {v} moved"))?;
            }
        }
    }
    Ok(())
}

fn criterion_2() -> Outcome {
    let k = fixtures::square_circle(1.0);
    let f = degree2_circle(1.0);
    let pinned = Subcomplex::generated_by([vec![0]]);
    for eps in [0.5, 0.2] {
        let out = zeeman_relative(&f, &k, &pinned, &k, eps, &ZeemanOptions::default()).map_err(|e| e.to_string())?;
        let fv = f.eval(k.vertex(0)).map_err(|e| e.to_string())?;
        ensure(*out.map.image_of_vertex(0) == fv, "pinned vertex moved")?;
        let samples = SampleSet::total(&out.subdivision.child, 10_000, 1);
        let d = sup_distance(&out.map, &f, &samples).map_err(|e| e.to_string())?;
        println!("    ε = {eps}: κ = {}, ℓ = {}, sup error {:.4} over {} samples", out.kappa, out.ell, d.value, samples.len());
        ensure(d.value < eps, format!("sup error {} ≥ {eps}", d.value))?;
        ensure(out.kappa <= 4 && out.ell <= 4, format!("κ = {}, ℓ = {}", out.kappa, out.ell))?;
    }
    Ok(())
}

fn criterion_3() -> Outcome {
    let opts = AuditOptions::default();
    for (name, k) in [("edge", fixtures::edge()), ("triangle", fixtures::triangle()), ("bowtie", fixtures::bowtie())] {
        let cov = build_covering(&k, &|_| 0.1, &CoverOptions::default()).map_err(|e| e.to_string())?;
        let r = audit_covering(&cov, &opts);
        for check in ["covering.coverage", "covering.disjointness", "covering.displacement"] {
            ensure(report(&r, check).status == Status::Pass, format!("{name}: {check} {:?}", report(&r, check)))?;
        }
        println!(
            "    {name}: disjointness margin {:.4}, displacement/η {:.4}",
            metric(report(&r, "covering.disjointness"), "min_margin"),
            metric(report(&r, "covering.displacement"), "max_ratio_to_eta")
        );
        let halved = audit_covering(&cov.with_eta_scaled(0.5), &opts);
        ensure(report(&halved, "covering.displacement").status == Status::Fail, format!("{name}: η/2 fixture passed (iii)"))?;
    }
    Ok(())
}

fn criterion_4() -> Outcome {
    let opts = SmoothOptions::default();
    let audit_opts = AuditOptions::default();
    for (name, k) in [("edge", fixtures::edge()), ("triangle", fixtures::triangle())] {
        for eps in [0.1, 0.01] {
            let h = identity_smoother(&k, eps, &opts).map_err(|e| e.to_string())?;
            let id = PlMap::identity(&k);
            let d = sup_distance(&h, &id, &SampleSet::total(&k, 10_000, 2)).map_err(|e| e.to_string())?;
            ensure(d.value < eps, format!("{name} ε = {eps}: displacement {}", d.value))?;
            let r = audit_smooth_map(&h, &audit_opts);
            let part = report(&r, "smooth.partition");
            let carrier = report(&r, "smooth.carrier");
            let probe = report(&r, "probe.c1");
            println!(
                "    {name} ε = {eps}: sup {:.3e}, Σθ error {:.1e}, carrier margin {:.3e}, probe {:.2e} at {} crossings",
                d.value,
                metric(part, "max_sum_error"),
                metric(carrier, "min_margin"),
                metric(probe, "max_mismatch"),
                metric(probe, "crossings")
            );
            ensure(part.status == Status::Pass, format!("{name}: {part:?}"))?;
            ensure(metric(carrier, "min_margin") >= -1e-9 && carrier.status == Status::Pass, format!("{name}: {carrier:?}"))?;
            ensure(probe.status == Status::Pass, format!("{name}: {probe:?}"))?;
        }
    }
    // sensitivity control: the PL identity kinks where the polyhedron bends
    for (name, k) in [("bent path", fixtures::bent_path()), ("folded triangles", fixtures::folded_triangles())] {
        let raw = c1_report(&PlMap::identity(&k), &k, Vec::new(), &audit_opts);
        ensure(raw.status == Status::Fail, format!("{name}: raw PL identity passed the probe"))?;
        let h = identity_smoother(&k, 0.1, &opts).map_err(|e| e.to_string())?;
        let smooth = c1_report(&h, &k, covering_crossings(h.covering(), 4, 0), &audit_opts);
        println!(
            "    {name}: PL identity mismatch {:.3}, smoothed {:.2e}",
            metric(&raw, "max_mismatch"),
            metric(&smooth, "max_mismatch")
        );
        ensure(smooth.status == Status::Pass, format!("{name}: {smooth:?}"))?;
    }
    Ok(())
}

fn criterion_5() -> Outcome {
    let k = fixtures::example_source();
    let l = fixtures::example_target();
    let f: Arc<dyn MapEvaluator> = Arc::new(cross_map());
    let out = approximate(f.clone(), &k, &TargetTriangulation::inclusion(&l), constant_budget(0.05), &PipelineOptions::default())
        .map_err(|e| e.to_string())?;
    let samples = SampleSet::total(&k, 10_000, 3);
    let mut off = 0.0f64;
    for p in samples.iter() {
        let y = out.map.eval(&p.point).map_err(|e| e.to_string())?;
        off = off.max(l.distance_to(&y));
    }
    let d = sup_distance(out.map.as_ref(), f.as_ref(), &samples).map_err(|e| e.to_string())?;
    let origin = [Crossing::straight(point(&[0.0]), point(&[1.0]))];
    let smooth = max_mismatch(&c1_probe(out.map.as_ref(), &origin, FD_STEP).map_err(|e| e.to_string())?);
    let raw = max_mismatch(&c1_probe(f.as_ref(), &origin, FD_STEP).map_err(|e| e.to_string())?);
    println!("    distance to Y {off:.1e}, sup error {:.4}, probe at origin {smooth:.2e} (input {raw:.3})", d.value);
    ensure(off <= 1e-9, format!("image leaves Y by {off}"))?;
    ensure(d.value < 0.05, format!("sup error {}", d.value))?;
    ensure(smooth < 1e-2, format!("probe mismatch {smooth}"))?;
    ensure(raw > 0.5, format!("input mismatch {raw}"))
}

fn criterion_6() -> Outcome {
    let k = fixtures::two_triangles();
    let seq = smoother_sequence(&k, 4, &SmoothOptions::default()).map_err(|e| e.to_string())?;
    let samples = SampleSet::total(&k, 10_000, 4);
    let id = PlMap::identity(&k);
    let images: Vec<Point> = k
        .vertices()
        .iter()
        .map(|v| point(&[v[0] + 0.3 * v[1] * v[1], (2.0 * v[0]).sin() + v[1], v[0] * v[1]]))
        .collect();
    let f = PlMap::new(k.clone(), images).map_err(|e| e.to_string())?;
    let lip = f.simplexwise_lipschitz().unwrap_or(f64::INFINITY);
    let (mut prev_id, mut prev_f) = (f64::INFINITY, f64::INFINITY);
    for (eps, iota) in &seq {
        let e_id = sup_distance(iota, &id, &samples).map_err(|e| e.to_string())?.value;
        let mut e_f = 0.0f64;
        for p in samples.iter() {
            let a = f.eval(&iota.eval(&p.point).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            e_f = e_f.max((a - f.eval(&p.point).map_err(|e| e.to_string())?).norm());
        }
        println!("    ε = {eps}: ‖ι − id‖ {e_id:.4e}, ‖f∘ι − f‖ {e_f:.4e} (bound {:.4e})", eps * lip);
        ensure(e_id < *eps && e_id <= prev_id, format!("ε = {eps}: identity error {e_id}"))?;
        ensure(e_f < eps * lip && e_f <= prev_f, format!("ε = {eps}: composed error {e_f}"))?;
        prev_id = e_id;
        prev_f = e_f;
    }
    Ok(())
}

fn criterion_7() -> Outcome {
    let m = NormalCrossingsModel::new(2, vec![1.0, 1.0]).map_err(|e| e.to_string())?;
    let r = retraction_report(&m, 2.0, 401).map_err(|e| e.to_string())?;
    println!(
        "    {} points: W′ misses {}, identity misses {}, displacement {:.4}, commutator {:.1e}, probe {:.2e}",
        r.grid_points, r.w_prime_misses, r.identity_misses, r.max_displacement_on_x, r.commutator, r.probe_mismatch
    );
    ensure(r.grid_points == 401 * 401, "grid size")?;
    ensure(r.w_prime_misses == 0, "W′ point not sent into X")?;
    ensure(r.identity_misses == 0, "identity fails away from X")?;
    ensure(r.component_misses == 0, "component not preserved")?;
    ensure(r.max_displacement_on_x <= 1.0, "displacement above η")?;
    ensure(r.commutator <= 1e-15, "Ψ₁, Ψ₂ do not commute")?;
    ensure(r.probe_mismatch < 1e-3, "probe mismatch")
}

fn criterion_8() -> Outcome {
    let e = SingularEmbedding::new(Polynomial::parse("x").map_err(|e| e.to_string())?);
    let s = singular_locus_scan(&e, 1.0, 101, 1e-8).map_err(|e| e.to_string())?;
    println!(
        "    {} points: residual {:.1e}, gradient zeros {:?}",
        s.points, s.max_residual, s.gradient_zeros
    );
    ensure(s.points >= 10_000, "grid too small")?;
    ensure(s.max_residual <= 1e-12, format!("residual {}", s.max_residual))?;
    ensure(s.gradient_zeros == vec![vec![0.0, 0.0, 0.0]] && s.locus_mismatches == 0, "singular locus")?;
    ensure(s.projection_exact, "projection is not exact")?;
    let empty = singular_locus_scan(
        &SingularEmbedding::new(Polynomial::parse("x^2 + 1").map_err(|e| e.to_string())?),
        1.0,
        101,
        1e-8,
    )
    .map_err(|e| e.to_string())?;
    ensure(empty.gradient_zeros.is_empty(), "gradient zeros for x² + 1")
}

fn criterion_9() -> Outcome {
    let g = GraphEmbedding::new(|x: &Point| x[0] * (1.0 - x[0]));
    let mut worst = 0.0f64;
    for i in 1..10_000 {
        let x = point(&[i as f64 / 10_000.0]);
        let back = g.inverse(&g.forward(&x).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        worst = worst.max((back - x).norm());
    }
    let lifted = g.forward(&point(&[1e-7])).map_err(|e| e.to_string())?[1];
    println!("    round trip {worst:.1e}, lift at 1e-7 = {lifted:.4e}");
    ensure(worst <= 1e-12, "round trip")?;
    ensure(lifted > 1e6, "no escape to infinity")?;
    ensure(g.forward(&point(&[0.0])).is_err() && g.forward(&point(&[1.0])).is_err(), "boundary accepted")
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 subdivision laws", criterion_1),
        ("2 relative simplicial approximation", criterion_2),
        ("3 covering audit", criterion_3),
        ("4 identity smoother", criterion_4),
        ("5 end-to-end cross fixture", criterion_5),
        ("6 smoother sequence", criterion_6),
        ("7 weak retraction model", criterion_7),
        ("8 singular embedding", criterion_8),
        ("9 graph embedding", criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        let outcome = outcome.and_then(|()| ensure(secs < 60.0, format!("took {secs:.1} s")));
        match outcome {
            Ok(()) => println!("PASS criterion {name} ({secs:.1} s)"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name} ({secs:.1} s): {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
