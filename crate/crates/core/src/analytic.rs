//! Coordinate models of two analytic constructions: the weak retraction onto a union of
//! coordinate hyperplanes `{x₁⋯x_r = 0}`, and the singular hypersurface
//! `Z = {f(x)² + y₁² − y₂³ = 0}` that lifts `ℝⁿ × ℝ` homeomorphically.

use rayon::prelude::*;
use serde::Serialize;

use crate::bump::BumpProfile;
use crate::error::{Error, Result};
use crate::geometry::{point, Point};
use crate::maps::FnMap;
use crate::verify::{c1_probe, Crossing};

/// `X = {x₁⋯x_r = 0} ⊂ ℝ^d` with constant gauges `η_j`.
#[derive(Clone, Debug)]
pub struct NormalCrossingsModel {
    dim: usize,
    eta: Vec<f64>,
    profile: BumpProfile,
}

impl NormalCrossingsModel {
    /// `eta.len()` is the number of active coordinates `r`.
    pub fn new(dim: usize, eta: Vec<f64>) -> Result<Self> {
        if eta.is_empty() || eta.len() > dim {
            return Err(Error::InvalidParameter(format!(
                "need 1 ≤ r ≤ d, got r = {} and d = {dim}",
                eta.len()
            )));
        }
        if let Some(e) = eta.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::InvalidParameter(format!("gauges must be positive, got {e}")));
        }
        Ok(Self {
            dim,
            eta,
            profile: BumpProfile::default(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn active(&self) -> usize {
        self.eta.len()
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    /// `Ψ_j`: scales `x_j` by `f(x_j²/η_j²)`, where `f = 0` on `[0, 1/4]` and `f = 1` on `[1, ∞)`.
    pub fn psi(&self, j: usize, x: &Point) -> Point {
        let mut y = x.clone();
        let t = x[j] * x[j] / (self.eta[j] * self.eta[j]);
        y[j] = x[j] * self.profile.rising(t);
        y
    }

    /// `x` lies on some hyperplane `x_j = 0`.
    pub fn on_x(&self, x: &Point) -> bool {
        (0..self.active()).any(|j| x[j] == 0.0)
    }

    /// `x ∈ W′ = {∃ j : |x_j| < η_j/2}`.
    pub fn in_w_prime(&self, x: &Point) -> bool {
        (0..self.active()).any(|j| x[j].abs() < self.eta[j] / 2.0)
    }
}

/// `ρ = Ψ_r ∘ ⋯ ∘ Ψ₁`.
pub fn weak_retract(model: &NormalCrossingsModel, x: &Point) -> Result<Point> {
    if x.len() != model.dim {
        return Err(Error::InvalidParameter(format!("expected a point of ℝ^{}", model.dim)));
    }
    let mut y = x.clone();
    for j in 0..model.active() {
        y = model.psi(j, &y);
    }
    Ok(y)
}

#[derive(Clone, Debug, Serialize)]
pub struct RetractionReport {
    pub grid_points: usize,
    /// Max `‖ρ(x) − x‖` over grid points on `X`.
    pub max_displacement_on_x: f64,
    /// Grid points of `W′` whose image has no exactly vanishing active coordinate.
    pub w_prime_misses: usize,
    /// Grid points with every `|x_j| ≥ η_j` that `ρ` moves.
    pub identity_misses: usize,
    /// Points of `X` sent off `X`, or with a vanishing coordinate made nonzero.
    pub component_misses: usize,
    /// Max `‖Ψ_i Ψ_j x − Ψ_j Ψ_i x‖` over pairs of active coordinates.
    pub commutator: f64,
    /// Largest one-sided derivative mismatch across `|x_j| = η_j/2` and `|x_j| = η_j`.
    pub probe_mismatch: f64,
}

/// Scans `[−half_width, half_width]^d` with `n` points per axis (first two axes only when
/// `d > 2`; the rest are held at zero).
pub fn retraction_report(model: &NormalCrossingsModel, half_width: f64, n: usize) -> Result<RetractionReport> {
    if n < 2 {
        return Err(Error::InvalidParameter("grid needs at least two points per axis".into()));
    }
    let d = model.dim();
    let axes = d.min(2);
    let coord = |i: usize| -> f64 {
        // symmetric so that 0 is hit exactly when n is odd
        let mid = (n - 1) as f64 / 2.0;
        (i as f64 - mid) / mid * half_width
    };
    let total = n.pow(axes as u32);
    let grid: Vec<Point> = (0..total)
        .map(|k| {
            let mut x = Point::zeros(d);
            let mut r = k;
            for a in 0..axes {
                x[a] = coord(r % n);
                r /= n;
            }
            x
        })
        .collect();

    struct Acc {
        disp: f64,
        w: usize,
        id: usize,
        comp: usize,
        comm: f64,
    }
    let acc = grid
        .par_iter()
        .map(|x| {
            let y = weak_retract(model, x).expect("grid points have the model dimension");
            let mut a = Acc { disp: 0.0, w: 0, id: 0, comp: 0, comm: 0.0 };
            if model.on_x(x) {
                a.disp = (&y - x).norm();
                let kept = (0..model.active()).all(|k| x[k] != 0.0 || y[k] == 0.0);
                if !kept || !model.on_x(&y) {
                    a.comp = 1;
                }
            }
            if model.in_w_prime(x) && !model.on_x(&y) {
                a.w = 1;
            }
            if (0..model.active()).all(|j| x[j].abs() >= model.eta[j]) && y != *x {
                a.id = 1;
            }
            for i in 0..model.active() {
                for j in 0..i {
                    let ij = model.psi(i, &model.psi(j, x));
                    let ji = model.psi(j, &model.psi(i, x));
                    a.comm = a.comm.max((ij - ji).norm());
                }
            }
            a
        })
        .reduce(
            || Acc { disp: 0.0, w: 0, id: 0, comp: 0, comm: 0.0 },
            |a, b| Acc {
                disp: a.disp.max(b.disp),
                w: a.w + b.w,
                id: a.id + b.id,
                comp: a.comp + b.comp,
                comm: a.comm.max(b.comm),
            },
        );

    let rho = FnMap::new({
        let m = model.clone();
        move |x: &Point| weak_retract(&m, x).expect("probe points have the model dimension")
    });
    let mut crossings = Vec::new();
    for j in 0..model.active() {
        let mut dir = Point::zeros(d);
        dir[j] = 1.0;
        for level in [model.eta[j] / 2.0, model.eta[j]] {
            for sign in [-1.0, 1.0] {
                for i in 0..9 {
                    let mut p = Point::zeros(d);
                    for a in 0..d.min(2) {
                        p[a] = half_width * (i as f64 / 8.0 * 2.0 - 1.0) * 0.9;
                    }
                    p[j] = sign * level;
                    crossings.push(Crossing::straight(p, dir.clone()));
                }
            }
        }
    }
    let probe = c1_probe(&rho, &crossings, crate::maps::FD_STEP)?;
    Ok(RetractionReport {
        grid_points: total,
        max_displacement_on_x: acc.disp,
        w_prime_misses: acc.w,
        identity_misses: acc.id,
        component_misses: acc.comp,
        commutator: acc.comm,
        probe_mismatch: probe.iter().map(|r| r.mismatch).fold(0.0, f64::max),
    })
}

/// Polynomial on `ℝⁿ` as a list of `(coefficient, exponents)` terms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polynomial {
    pub vars: usize,
    pub terms: Vec<(f64, Vec<u32>)>,
}

const MAX_VARS: usize = 16;
const MAX_DEGREE: u32 = 64;
const MAX_TERMS: usize = 1024;

impl Polynomial {
    /// Univariate polynomial `c₀ + c₁x + …`.
    pub fn from_coefficients(coeffs: &[f64]) -> Self {
        Self {
            vars: 1,
            terms: coeffs.iter().enumerate().map(|(k, &c)| (c, vec![k as u32])).collect(),
        }
    }

    /// Accepts a coefficient list `"c0,c1,…"` (ascending powers of `x`) or a sum of terms such
    /// as `"3*x0*x1^2 - x1 + 1"`. A bare `x` means `x0`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        if !s.contains('x') {
            let coeffs = s
                .split(',')
                .map(|c| parse_number(c.trim()))
                .collect::<Result<Vec<f64>>>()?;
            if coeffs.len() > MAX_DEGREE as usize + 1 {
                return Err(Error::Parse(format!("degree above {MAX_DEGREE}")));
            }
            return Ok(Self::from_coefficients(&coeffs));
        }
        parse_terms(s)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| c * e.iter().enumerate().map(|(i, &k)| x[i].powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.vars];
        for (c, e) in &self.terms {
            for (i, gi) in g.iter_mut().enumerate() {
                if e[i] == 0 {
                    continue;
                }
                let mut t = c * e[i] as f64;
                for (j, &k) in e.iter().enumerate() {
                    let p = if j == i { k - 1 } else { k };
                    t *= x[j].powi(p as i32);
                }
                *gi += t;
            }
        }
        g
    }
}

fn parse_number(s: &str) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| Error::Parse(format!("not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("not a finite number: {s:?}")));
    }
    Ok(v)
}

fn parse_terms(s: &str) -> Result<Polynomial> {
    // split on top-level + and −, keeping the sign; an exponent marker never precedes a sign
    let mut pieces: Vec<(f64, String)> = Vec::new();
    let mut sign = 1.0;
    let mut cur = String::new();
    let mut prev: Option<char> = None;
    for ch in s.chars().filter(|c| !c.is_whitespace()) {
        let exp_sign = matches!(prev, Some('e') | Some('E')) && cur.chars().any(|c| c.is_ascii_digit());
        if (ch == '+' || ch == '-') && !exp_sign {
            if !cur.is_empty() {
                pieces.push((sign, std::mem::take(&mut cur)));
                sign = 1.0;
            } else if prev.is_some() && !matches!(prev, Some('+') | Some('-')) {
                return Err(Error::Parse("misplaced sign".into()));
            }
            if ch == '-' {
                sign = -sign;
            }
        } else {
            cur.push(ch);
        }
        prev = Some(ch);
    }
    if cur.is_empty() {
        return Err(Error::Parse("dangling operator".into()));
    }
    pieces.push((sign, cur));
    if pieces.len() > MAX_TERMS {
        return Err(Error::Parse(format!("more than {MAX_TERMS} terms")));
    }

    let mut raw: Vec<(f64, Vec<(usize, u32)>)> = Vec::new();
    let mut vars = 1;
    for (sign, body) in pieces {
        let mut coef = sign;
        let mut powers = Vec::new();
        for factor in body.split('*') {
            if factor.is_empty() {
                return Err(Error::Parse(format!("empty factor in {body:?}")));
            }
            if let Some(rest) = factor.strip_prefix('x') {
                let (idx, exp) = match rest.split_once('^') {
                    Some((i, e)) => (i, Some(e)),
                    None => (rest, None),
                };
                let var = if idx.is_empty() {
                    0
                } else {
                    idx.parse::<usize>().map_err(|_| Error::Parse(format!("bad variable {factor:?}")))?
                };
                if var >= MAX_VARS {
                    return Err(Error::Parse(format!("at most {MAX_VARS} variables")));
                }
                let exp = match exp {
                    Some(e) => e.parse::<u32>().map_err(|_| Error::Parse(format!("bad exponent in {factor:?}")))?,
                    None => 1,
                };
                if exp > MAX_DEGREE {
                    return Err(Error::Parse(format!("exponent above {MAX_DEGREE}")));
                }
                vars = vars.max(var + 1);
                powers.push((var, exp));
            } else {
                coef *= parse_number(factor)?;
            }
        }
        raw.push((coef, powers));
    }
    let terms = raw
        .into_iter()
        .map(|(c, powers)| {
            let mut e = vec![0u32; vars];
            for (v, k) in powers {
                e[v] = e[v].saturating_add(k).min(MAX_DEGREE * MAX_TERMS as u32);
            }
            (c, e)
        })
        .collect();
    Ok(Polynomial { vars, terms })
}

/// `g(x, y₁, y₂) = f(x)² + y₁² − y₂³` and its zero set `Z`.
#[derive(Clone, Debug)]
pub struct SingularEmbedding {
    pub f: Polynomial,
}

impl SingularEmbedding {
    pub fn new(f: Polynomial) -> Self {
        Self { f }
    }

    pub fn n(&self) -> usize {
        self.f.vars
    }

    /// `p = (x, y₁, y₂)`.
    pub fn g(&self, p: &[f64]) -> f64 {
        let n = self.n();
        let fx = self.f.eval(&p[..n]);
        fx * fx + p[n] * p[n] - p[n + 1].powi(3)
    }

    pub fn gradient(&self, p: &[f64]) -> Vec<f64> {
        let n = self.n();
        let fx = self.f.eval(&p[..n]);
        let mut g: Vec<f64> = self.f.gradient(&p[..n]).into_iter().map(|d| 2.0 * fx * d).collect();
        g.push(2.0 * p[n]);
        g.push(-3.0 * p[n + 1] * p[n + 1]);
        g
    }

    /// `π(x, y₁, y₂) = (x, y₁)`.
    pub fn project(&self, p: &[f64]) -> Vec<f64> {
        p[..self.n() + 1].to_vec()
    }
}

/// `(x, y₁) ↦ (x, y₁, (f(x)² + y₁²)^{1/3})`, the unique point of `Z` over `(x, y₁)`.
pub fn singular_lift(e: &SingularEmbedding, x: &[f64], y1: f64) -> Result<Vec<f64>> {
    if x.len() != e.n() {
        return Err(Error::InvalidParameter(format!("expected {} x-coordinates", e.n())));
    }
    let fx = e.f.eval(x);
    let y2 = (fx * fx + y1 * y1).cbrt();
    let mut p = x.to_vec();
    p.push(y1);
    p.push(y2);
    Ok(p)
}

#[derive(Clone, Debug, Serialize)]
pub struct SingularScan {
    pub points: usize,
    /// Max `|g(lift)| / max(1, f² + y₁²)`.
    pub max_residual: f64,
    /// Lifted points with `‖∇g‖ < tol`.
    pub gradient_zeros: Vec<Vec<f64>>,
    /// Points where `‖∇g‖ < tol` and `|f|, |y₁|, |y₂| < tol` disagree.
    pub locus_mismatches: usize,
    /// `π ∘ lift` returned its input bit for bit everywhere.
    pub projection_exact: bool,
}

/// Scans `x ∈ [−w, w]ⁿ`, `y₁ ∈ [−w, w]` with `per_axis` points per axis (odd counts hit 0).
pub fn singular_locus_scan(e: &SingularEmbedding, half_width: f64, per_axis: usize, tol: f64) -> Result<SingularScan> {
    if per_axis < 2 {
        return Err(Error::InvalidParameter("need at least two points per axis".into()));
    }
    let dims = e.n() + 1;
    let total = per_axis
        .checked_pow(dims as u32)
        .filter(|&t| t <= 50_000_000)
        .ok_or_else(|| Error::InvalidParameter("scan grid is too large".into()))?;
    let mid = (per_axis - 1) as f64 / 2.0;
    let rows = (0..total)
        .into_par_iter()
        .map(|k| -> Result<(f64, Option<Vec<f64>>, bool, bool)> {
            let mut q = vec![0.0; dims];
            let mut r = k;
            for c in q.iter_mut() {
                *c = (((r % per_axis) as f64) - mid) / mid * half_width;
                r /= per_axis;
            }
            let p = singular_lift(e, &q[..dims - 1], q[dims - 1])?;
            let fx = e.f.eval(&q[..dims - 1]);
            let scale = (fx * fx + q[dims - 1] * q[dims - 1]).max(1.0);
            let residual = e.g(&p).abs() / scale;
            let grad_norm = e.gradient(&p).iter().map(|g| g * g).sum::<f64>().sqrt();
            let zero = grad_norm < tol;
            let on_locus = fx.abs() < tol && p[dims - 1].abs() < tol && p[dims].abs() < tol;
            let exact = e.project(&p) == q;
            Ok((residual, zero.then_some(p), zero != on_locus, exact))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SingularScan {
        points: total,
        max_residual: rows.iter().map(|r| r.0).fold(0.0, f64::max),
        gradient_zeros: rows.iter().filter_map(|r| r.1.clone()).collect(),
        locus_mismatches: rows.iter().filter(|r| r.2).count(),
        projection_exact: rows.iter().all(|r| r.3),
    })
}

/// `y₂ ↦` the slice `{(x, y₂) : y₁ = 0}` of `Z` for a univariate `f`, as a polyline.
pub fn z_slice(e: &SingularEmbedding, half_width: f64, n: usize) -> Vec<Point> {
    (0..n)
        .map(|i| {
            let x = -half_width + 2.0 * half_width * i as f64 / (n - 1).max(1) as f64;
            let p = singular_lift(e, &[x], 0.0).expect("univariate");
            point(&[p[0], p[2]])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> NormalCrossingsModel {
        NormalCrossingsModel::new(2, vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn retract_examples() {
        let m = model();
        assert_eq!(weak_retract(&m, &point(&[0.1, 0.3])).unwrap(), point(&[0.0, 0.0]));
        assert_eq!(weak_retract(&m, &point(&[2.0, 3.0])).unwrap(), point(&[2.0, 3.0]));
        assert_eq!(weak_retract(&m, &point(&[0.0, 0.0])).unwrap(), point(&[0.0, 0.0]));
        assert!(NormalCrossingsModel::new(2, vec![]).is_err());
        assert!(NormalCrossingsModel::new(2, vec![1.0, 0.0]).is_err());
        assert!(NormalCrossingsModel::new(1, vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn report_on_small_grid() {
        let r = retraction_report(&model(), 2.0, 81).unwrap();
        assert_eq!(r.w_prime_misses, 0);
        assert_eq!(r.identity_misses, 0);
        assert_eq!(r.component_misses, 0);
        assert!(r.max_displacement_on_x <= 1.0);
        assert!(r.commutator <= 1e-15);
        assert!(r.probe_mismatch < 1e-3, "{}", r.probe_mismatch);
    }

    #[test]
    fn smaller_gauges_move_less() {
        let big = retraction_report(&model(), 2.0, 81).unwrap();
        let small = retraction_report(&NormalCrossingsModel::new(2, vec![0.1, 0.1]).unwrap(), 2.0, 81).unwrap();
        assert!(small.max_displacement_on_x * 10.0 <= big.max_displacement_on_x + 1e-12);
    }

    #[test]
    fn parse_both_syntaxes() {
        let a = Polynomial::parse("1, 0, 1").unwrap();
        let b = Polynomial::parse("x^2 + 1").unwrap();
        for t in [-1.5, 0.0, 2.0] {
            assert_eq!(a.eval(&[t]), b.eval(&[t]));
        }
        let c = Polynomial::parse("3*x0*x1^2 - x1 + 2.5e-1").unwrap();
        assert_eq!(c.vars, 2);
        assert_eq!(c.eval(&[2.0, 1.0]), 6.0 - 1.0 + 0.25);
        assert_eq!(c.gradient(&[2.0, 1.0]), vec![3.0, 12.0 - 1.0]);
        assert_eq!(Polynomial::parse("-x").unwrap().eval(&[2.0]), -2.0);
        for bad in ["", "x^", "x^-1", "1,,2", "x**2", "x +", "nan", "x99", "*x"] {
            assert!(Polynomial::parse(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn lift_examples() {
        let e = SingularEmbedding::new(Polynomial::parse("x").unwrap());
        assert_eq!(singular_lift(&e, &[0.0], 0.0).unwrap(), vec![0.0, 0.0, 0.0]);
        assert_eq!(singular_lift(&e, &[1.0], 0.0).unwrap(), vec![1.0, 0.0, 1.0]);
        let p = singular_lift(&e, &[0.0], 2.0).unwrap();
        assert!((p[2] - 4f64.cbrt()).abs() < 1e-15);
        assert!(e.g(&p).abs() < 1e-12);
        assert_eq!(e.project(&p), vec![0.0, 2.0]);
    }

    #[test]
    fn scans() {
        let e = SingularEmbedding::new(Polynomial::parse("x").unwrap());
        let s = singular_locus_scan(&e, 1.0, 41, 1e-8).unwrap();
        assert_eq!(s.gradient_zeros, vec![vec![0.0, 0.0, 0.0]]);
        assert_eq!(s.locus_mismatches, 0);
        assert!(s.projection_exact);
        let empty = singular_locus_scan(&SingularEmbedding::new(Polynomial::parse("x^2+1").unwrap()), 1.0, 41, 1e-8).unwrap();
        assert!(empty.gradient_zeros.is_empty());
    }
}
