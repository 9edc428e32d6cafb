use std::path::Path;
use std::sync::Arc;

use plsmooth::analytic::{
    retraction_report, singular_lift as lift, singular_locus_scan, weak_retract, z_slice, NormalCrossingsModel,
    Polynomial, SingularEmbedding,
};
use plsmooth::covering::{build_covering, CoverOptions, Covering};
use plsmooth::maps::{
    zeeman_relative, Builtin, CarrierCertified, MapEvaluator, PlMap, WeaklySimplicialMap, ZeemanOptions,
};
use plsmooth::sample::SampleSet;
use plsmooth::smoothing::{
    self, approximate, constant_budget, identity_smoother as build_identity_smoother, PipelineOptions, SmoothMap,
    SmoothOptions, TargetTriangulation,
};
use plsmooth::subdivision::{mesh_size, sd_iter};
use plsmooth::svg::Plot;
use plsmooth::verify::{
    audit_covering, audit_smooth_map, audit_subdivision, audit_weakly_simplicial, c1_report, covering_crossings,
    overall, sup_distance, AuditOptions, Report, WsmReference,
};
use plsmooth::{Complex, Point, Subdivision};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::{parse, AuditKind, Common, PlotKind};

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_json(path: Option<&Path>, value: &impl serde::Serialize) -> CliResult<()> {
    match path {
        Some(p) => write(p, &serde_json::to_string_pretty(value)?),
        None => Ok(()),
    }
}

fn load<T>(path: &Path, parse: impl FnOnce(&str) -> plsmooth::Result<T>) -> CliResult<T> {
    parse(&read(path)?).map_err(|source| CliError::Load {
        path: path.to_path_buf(),
        source,
    })
}

fn load_complex(path: &Path) -> CliResult<Complex> {
    load(path, Complex::from_json_str)
}

fn builtin(name: &str, dim: usize) -> CliResult<Arc<dyn MapEvaluator>> {
    let b = Builtin::from_name(name)
        .ok_or_else(|| CliError::Usage(format!("unknown map {name:?}; try cross_map, degree2_circle or affine")))?;
    Ok(Arc::from(b.evaluator(dim)))
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{name} must be positive and finite, got {v}")))
    }
}

fn audit_options(c: &Common) -> AuditOptions {
    let mut o = AuditOptions {
        seed: c.seed,
        ..AuditOptions::default()
    };
    if let Some(d) = c.density {
        o.density = d.max(1);
    }
    if let Some(t) = c.tolerance {
        o.tolerance = t;
    }
    o
}

fn smooth_options(c: &Common) -> SmoothOptions {
    let mut o = SmoothOptions::default();
    o.cover = cover_options(c);
    o
}

fn cover_options(c: &Common) -> CoverOptions {
    CoverOptions {
        density: c.density.unwrap_or(CoverOptions::default().density).max(1),
        seed: c.seed,
    }
}

fn coords(p: &Point) -> Vec<f64> {
    p.iter().copied().collect()
}

/// Prints `{command, status, reports, result}` and returns the exit code of the reports.
fn emit(command: &str, reports: Vec<Report>, result: Value, c: &Common) -> CliResult<u8> {
    let status = overall(&reports);
    let doc = json!({ "command": command, "status": status, "reports": reports, "result": result });
    let text = if c.compact {
        serde_json::to_string(&doc)?
    } else {
        serde_json::to_string_pretty(&doc)?
    };
    println!("{text}");
    Ok(status.exit_code() as u8)
}

fn describe(sd: &Subdivision) -> Value {
    json!({
        "vertices": sd.child.num_vertices(),
        "simplices": sd.child.num_simplices(),
        "mesh_size": mesh_size(&sd.child, None),
    })
}

pub fn subdivide(input: &Path, keep: Option<&str>, times: usize, out: Option<&Path>, c: &Common) -> CliResult<u8> {
    let k = load_complex(input)?;
    let h = parse::subcomplex(keep)?;
    h.check_in(&k)?;
    let s = sd_iter(&k, &h, times)?;
    write_json(out, &s.to_json())?;
    let name = if keep.is_some() { "subdivide-mod" } else { "subdivide" };
    emit(name, audit_subdivision(&s, &audit_options(c)), describe(&s), c)
}

pub fn approx(
    input: &Path,
    target: Option<&Path>,
    map: &str,
    epsilon: f64,
    pin: Option<&str>,
    out: Option<&Path>,
    c: &Common,
) -> CliResult<u8> {
    let epsilon = positive("epsilon", epsilon)?;
    let k = load_complex(input)?;
    let l = match target {
        Some(t) => load_complex(t)?,
        None => k.clone(),
    };
    let f = builtin(map, k.ambient_dim())?;
    let h = parse::subcomplex(pin)?;
    let opts = ZeemanOptions {
        seed: c.seed,
        density: c.density.unwrap_or(ZeemanOptions::default().density).max(1),
        ..ZeemanOptions::default()
    };
    let z = zeeman_relative(&f, &k, &h, &l, epsilon, &opts)?;
    write_json(out, &z.map.to_json())?;
    let reference = WsmReference {
        f: f.as_ref(),
        epsilon,
        pinned: h,
    };
    let reports = audit_weakly_simplicial(&z.map, Some(&reference), &audit_options(c));
    let result = json!({
        "kappa": z.kappa,
        "ell": z.ell,
        "sampled_error": z.sampled_error,
        "source": describe(&z.subdivision),
    });
    emit("approx", reports, result, c)
}

fn smooth_result(h: &SmoothMap) -> Value {
    let cov = h.covering();
    json!({
        "lipschitz": h.lipschitz(),
        "lipschitz_certified": h.lipschitz_certified(),
        "cover_sets": cov.records().len(),
        "min_eta_prime": cov.records().iter().map(|r| r.eta_prime).fold(f64::INFINITY, f64::min),
    })
}

fn plot_map(path: Option<&Path>, source: &Complex, target: &Complex, h: &dyn MapEvaluator, c: &Common) -> CliResult<()> {
    let Some(path) = path else { return Ok(()) };
    let samples = SampleSet::per_simplex(source, c.density.unwrap_or(50).min(200), c.seed);
    let images: Vec<Point> = samples.iter().filter_map(|p| h.eval(&p.point).ok()).collect();
    let mut plot = Plot::new();
    plot.complex(target, "#888").points(&images, "#c33");
    write(path, &plot.render())
}

pub fn smooth(input: &Path, epsilon: f64, out: Option<&Path>, svg: Option<&Path>, c: &Common) -> CliResult<u8> {
    let delta = positive("epsilon", epsilon)?;
    let g = load(input, WeaklySimplicialMap::from_json_str)?;
    let target = g.tower().finest().clone();
    let h = smoothing::smooth(Arc::new(g), constant_budget(delta), &smooth_options(c))?;
    write_json(out, &h.to_json()?)?;
    plot_map(svg, h.source(), &target, &h, c)?;
    let result = smooth_result(&h);
    emit("smooth", audit_smooth_map(&h, &audit_options(c)), result, c)
}

pub fn identity_smoother(
    input: &Path,
    epsilon: f64,
    out: Option<&Path>,
    svg: Option<&Path>,
    c: &Common,
) -> CliResult<u8> {
    let epsilon = positive("epsilon", epsilon)?;
    let k = load_complex(input)?;
    let h = build_identity_smoother(&k, epsilon, &smooth_options(c))?;
    write_json(out, &h.to_json()?)?;
    plot_map(svg, &k, &k, &h, c)?;
    let opts = audit_options(c);
    let mut reports = audit_smooth_map(&h, &opts);
    let samples = SampleSet::total(&k, opts.sup_samples, opts.seed);
    reports.push(match sup_distance(&h, &PlMap::identity(&k), &samples) {
        Ok(d) => Report::new("identity.error", "close-to-identity")
            .metric("sup_error", d.value)
            .metric("argmax", d.argmax)
            .metric("epsilon", epsilon)
            .pass_if(d.value < epsilon),
        Err(e) => Report::new("identity.error", "close-to-identity").inconclusive(&e.to_string()),
    });
    emit("identity-smoother", reports, smooth_result(&h), c)
}

pub fn pipeline(
    input: &Path,
    target: &Path,
    map: &str,
    epsilon: f64,
    out: Option<&Path>,
    svg: Option<&Path>,
    c: &Common,
) -> CliResult<u8> {
    let epsilon = positive("epsilon", epsilon)?;
    let k = load_complex(input)?;
    let l = load_complex(target)?;
    let f = builtin(map, k.ambient_dim())?;
    let mut opts = PipelineOptions::default();
    opts.staged.zeeman.seed = c.seed;
    opts.smooth = smooth_options(c);
    if let Some(d) = c.density {
        opts.staged.zeeman.density = d.max(1);
    }
    let run = approximate(f.clone(), &k, &TargetTriangulation::inclusion(&l), constant_budget(epsilon), &opts)?;
    write_json(out, &run.smooth.to_json()?)?;
    plot_map(svg, &k, &l, run.map.as_ref(), c)?;

    let aopts = audit_options(c);
    let samples = SampleSet::total(&k, aopts.sup_samples, aopts.seed);
    let mut off = 0.0f64;
    let mut failures = 0usize;
    for p in samples.iter() {
        match run.map.eval(&p.point) {
            Ok(y) => off = off.max(l.distance_to(&y)),
            Err(_) => failures += 1,
        }
    }
    let image = Report::new("pipeline.image", "image-in-target")
        .metric("max_distance_to_target", off)
        .metric("evaluation_failures", failures)
        .pass_if(failures == 0 && off <= aopts.tolerance);
    let error = match sup_distance(run.map.as_ref(), f.as_ref(), &samples) {
        Ok(d) => Report::new("pipeline.error", "within-epsilon")
            .metric("sup_error", d.value)
            .metric("argmax", d.argmax)
            .metric("epsilon", epsilon)
            .pass_if(d.value < epsilon),
        Err(e) => Report::new("pipeline.error", "within-epsilon").inconclusive(&e.to_string()),
    };
    let crossings = covering_crossings(run.smooth.covering(), 4, aopts.seed);
    let probe = c1_report(run.map.as_ref(), &k, crossings, &aopts);
    let result = json!({
        "budgets": run.budgets.iter().map(|b| json!({
            "stage": b.stage, "epsilon": b.epsilon, "mu": b.mu, "delta": b.delta, "budget": b.budget,
        })).collect::<Vec<_>>(),
        "psi_lipschitz": run.psi_lipschitz.0,
        "psi_lipschitz_exact": run.psi_lipschitz.1,
        "stages": run.staged.stages.iter().map(|s| json!({
            "kappa": s.kappa, "ell": s.ell, "sampled_error": s.sampled_error,
        })).collect::<Vec<_>>(),
        "smooth": smooth_result(&run.smooth),
    });
    emit("pipeline", vec![image, error, probe], result, c)
}

pub fn cover(input: &Path, eta: f64, out: Option<&Path>, c: &Common) -> CliResult<u8> {
    let eta = positive("eta", eta)?;
    let k = load_complex(input)?;
    let cov = build_covering(&k, &|_| eta, &cover_options(c))?;
    write_json(out, &cov.to_json())?;
    let result = json!({
        "sets": cov.records().len(),
        "min_eta_prime": cov.records().iter().map(|r| r.eta_prime).fold(f64::INFINITY, f64::min),
    });
    emit("cover", audit_covering(&cov, &audit_options(c)), result, c)
}

pub fn retract_nc(
    dim: usize,
    active: usize,
    eta: &str,
    half_width: f64,
    grid: usize,
    at: Option<&str>,
    c: &Common,
) -> CliResult<u8> {
    let mut etas = parse::numbers(eta)?;
    if etas.len() == 1 {
        etas = vec![etas[0]; active];
    }
    if etas.len() != active {
        return Err(CliError::Usage(format!("expected 1 or {active} values for --eta, got {}", etas.len())));
    }
    let model = NormalCrossingsModel::new(dim, etas)?;
    let r = retraction_report(&model, half_width, grid)?;
    let probe_tol = c.tolerance.unwrap_or(1e-3);
    let reports = vec![
        Report::new("retract.onto-x", "w-prime-retracts-into-x")
            .metric("misses", r.w_prime_misses)
            .pass_if(r.w_prime_misses == 0),
        Report::new("retract.identity", "identity-away-from-tube")
            .metric("misses", r.identity_misses)
            .pass_if(r.identity_misses == 0),
        Report::new("retract.components", "preserves-strata")
            .metric("misses", r.component_misses)
            .metric("max_displacement_on_x", r.max_displacement_on_x)
            .pass_if(r.component_misses == 0),
        Report::new("retract.commute", "factors-commute")
            .metric("commutator", r.commutator)
            .pass_if(r.commutator <= 1e-12),
        Report::new("probe.c1", "smooth-across-regimes")
            .metric("max_mismatch", r.probe_mismatch)
            .metric("tolerance", probe_tol)
            .pass_if(r.probe_mismatch < probe_tol),
    ];
    let image = match at {
        Some(s) => {
            let x = Point::from_vec(parse::numbers(s)?);
            if x.len() != dim {
                return Err(CliError::Usage(format!("--at needs {dim} coordinates")));
            }
            Some(coords(&weak_retract(&model, &x)?))
        }
        None => None,
    };
    let result = json!({ "grid_points": r.grid_points, "report": r, "retract": image });
    emit("retract-nc", reports, result, c)
}

pub fn singular_lift(
    poly: &str,
    at: Option<&str>,
    half_width: f64,
    grid: usize,
    svg: Option<&Path>,
    c: &Common,
) -> CliResult<u8> {
    let e = SingularEmbedding::new(Polynomial::parse(poly)?);
    let tol = c.tolerance.unwrap_or(1e-8);
    let scan = singular_locus_scan(&e, half_width, grid, tol)?;
    let mut reports = vec![
        Report::new("singular.residual", "lift-lies-on-z")
            .metric("max_residual", scan.max_residual)
            .pass_if(scan.max_residual <= 1e-12),
        Report::new("singular.locus", "singular-locus-over-zeros-of-f")
            .metric("gradient_zeros", &scan.gradient_zeros)
            .metric("mismatches", scan.locus_mismatches)
            .pass_if(scan.locus_mismatches == 0),
        Report::new("singular.projection", "projection-inverts-lift")
            .metric("exact", scan.projection_exact)
            .pass_if(scan.projection_exact),
    ];
    let lifted = match at {
        Some(s) => {
            let v = parse::numbers(s)?;
            if v.len() != e.n() + 1 {
                return Err(CliError::Usage(format!("--at needs {} coordinates (x then y1)", e.n() + 1)));
            }
            let (x, y1) = v.split_at(e.n());
            let p = lift(&e, x, y1[0])?;
            let residual = e.g(&p).abs();
            reports.push(
                Report::new("singular.lift", "lift-lies-on-z")
                    .metric("residual", residual)
                    .pass_if(residual <= 1e-12 * (1.0 + p[e.n() + 1].abs().powi(3))),
            );
            Some(p)
        }
        None => None,
    };
    if let Some(path) = svg {
        if e.n() != 1 {
            return Err(CliError::Usage("--svg needs a univariate polynomial".into()));
        }
        let mut plot = Plot::new();
        plot.polyline(&z_slice(&e, half_width, 401), "#236");
        write(path, &plot.render())?;
    }
    let result = json!({ "vars": e.n(), "points": scan.points, "lift": lifted });
    emit("singular-lift", reports, result, c)
}

pub fn audit(
    kind: AuditKind,
    input: &Path,
    map: Option<&str>,
    epsilon: Option<f64>,
    pin: Option<&str>,
    c: &Common,
) -> CliResult<u8> {
    let opts = audit_options(c);
    let reports = match kind {
        AuditKind::Subdivision => audit_subdivision(&load(input, Subdivision::from_json_str)?, &opts),
        AuditKind::Covering => audit_covering(&load(input, Covering::from_json_str)?, &opts),
        AuditKind::Smooth => audit_smooth_map(&load(input, SmoothMap::from_json_str)?, &opts),
        AuditKind::Wsm => {
            let g = load(input, WeaklySimplicialMap::from_json_str)?;
            match (map, epsilon) {
                (Some(name), Some(eps)) => {
                    let f = builtin(name, g.source().ambient_dim())?;
                    let reference = WsmReference {
                        f: f.as_ref(),
                        epsilon: positive("epsilon", eps)?,
                        pinned: parse::subcomplex(pin)?,
                    };
                    audit_weakly_simplicial(&g, Some(&reference), &opts)
                }
                (None, None) => audit_weakly_simplicial(&g, None, &opts),
                _ => return Err(CliError::Usage("--map and --epsilon go together".into())),
            }
        }
    };
    emit("audit", reports, json!({ "kind": format!("{kind:?}").to_lowercase() }), c)
}

pub fn plot(kind: PlotKind, input: Option<&Path>, poly: Option<&str>, out: &Path, c: &Common) -> CliResult<u8> {
    let need = || input.ok_or_else(|| CliError::Usage("--in is required for this kind".into()));
    let mut plot = Plot::new();
    match kind {
        PlotKind::Complex => {
            plot.complex(&load_complex(need()?)?, "#236");
        }
        PlotKind::Subdivision => {
            let s = load(need()?, Subdivision::from_json_str)?;
            plot.complex(&s.child, "#9ab").complex(&s.parent, "#236");
        }
        PlotKind::Covering => {
            let cov = load(need()?, Covering::from_json_str)?;
            let samples = SampleSet::per_simplex(cov.complex(), c.density.unwrap_or(100).min(500), c.seed);
            let cores: Vec<Point> = samples
                .iter()
                .filter(|p| (0..cov.records().len()).any(|s| cov.in_core(s, &p.point)))
                .map(|p| p.point.clone())
                .collect();
            plot.complex(cov.complex(), "#9ab").points(&cores, "#c33");
        }
        PlotKind::Wsm => {
            let g = load(need()?, WeaklySimplicialMap::from_json_str)?;
            let samples = SampleSet::per_simplex(g.source(), c.density.unwrap_or(50).min(200), c.seed);
            let images: Vec<Point> = samples.iter().filter_map(|p| g.eval(&p.point).ok()).collect();
            plot.complex(g.tower().finest(), "#9ab").points(&images, "#c33");
        }
        PlotKind::Smooth => {
            let h = load(need()?, SmoothMap::from_json_str)?;
            let samples = SampleSet::per_simplex(h.source(), c.density.unwrap_or(50).min(200), c.seed);
            let images: Vec<Point> = samples.iter().filter_map(|p| h.eval(&p.point).ok()).collect();
            plot.complex(h.target(), "#9ab").points(&images, "#c33");
        }
        PlotKind::Singular => {
            let poly = poly.ok_or_else(|| CliError::Usage("--poly is required for singular plots".into()))?;
            let e = SingularEmbedding::new(Polynomial::parse(poly)?);
            if e.n() != 1 {
                return Err(CliError::Usage("singular plots need a univariate polynomial".into()));
            }
            plot.polyline(&z_slice(&e, 1.0, 401), "#236");
        }
    }
    write(out, &plot.render())?;
    emit("plot", Vec::new(), json!({ "svg": out.display().to_string() }), c)
}
