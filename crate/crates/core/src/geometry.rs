//! Small dense-geometry helpers shared by the complex kernel and the covering code.
//!
//! Everything here works on simplices given as slices of vertex positions in
//! ℝ^p with p ≤ 4, so brute-force enumeration of faces is cheap and exact.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::Exp1;

pub type Point = DVector<f64>;

/// Barycentric weight at or above `-MEMBERSHIP_TOL` counts as inside.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Normalized Gram determinant below which a vertex set counts as affinely dependent.
const INDEPENDENCE_TOL: f64 = 1e-16;

pub fn point(coords: &[f64]) -> Point {
    DVector::from_column_slice(coords)
}

pub fn distance(a: &Point, b: &Point) -> f64 {
    (a - b).norm()
}

/// Affine coordinate frame of a simplex: origin `v0`, edge matrix `E = [v1-v0 … vd-v0]`
/// and the left inverse `(EᵀE)⁻¹Eᵀ` used for barycentric solves.
#[derive(Clone, Debug)]
pub struct AffineFrame {
    origin: Point,
    edges: DMatrix<f64>,
    left_inverse: DMatrix<f64>,
    gram_det: f64,
}

impl AffineFrame {
    /// Returns `None` when the vertices are affinely dependent.
    pub fn new(vertices: &[&Point]) -> Option<Self> {
        let origin = vertices[0].clone();
        let p = origin.len();
        let d = vertices.len() - 1;
        let mut edges = DMatrix::zeros(p, d);
        let mut length_product = 1.0;
        for (j, v) in vertices[1..].iter().enumerate() {
            let e = *v - &origin;
            length_product *= e.norm_squared();
            edges.set_column(j, &e);
        }
        if d == 0 {
            return Some(Self {
                origin,
                edges,
                left_inverse: DMatrix::zeros(0, p),
                gram_det: 1.0,
            });
        }
        if d > p || length_product == 0.0 {
            return None;
        }
        let gram = edges.transpose() * &edges;
        let gram_det = gram.determinant();
        if !(gram_det / length_product > INDEPENDENCE_TOL) {
            return None;
        }
        let inv = gram.try_inverse()?;
        let left_inverse = inv * edges.transpose();
        Some(Self {
            origin,
            edges,
            left_inverse,
            gram_det,
        })
    }

    pub fn dim(&self) -> usize {
        self.edges.ncols()
    }

    pub fn origin(&self) -> &Point {
        &self.origin
    }

    /// `(EᵀE)⁻¹Eᵀ`: maps a displacement to the non-origin barycentric weights.
    pub fn left_inverse(&self) -> &DMatrix<f64> {
        &self.left_inverse
    }

    /// Barycentric weights of the orthogonal projection of `x` onto the affine hull,
    /// together with the distance from `x` to that hull.
    pub fn barycentric(&self, x: &Point) -> (Vec<f64>, f64) {
        let rel = x - &self.origin;
        let w = &self.left_inverse * &rel;
        let residual = (&self.edges * &w - &rel).norm();
        let mut weights = Vec::with_capacity(w.len() + 1);
        weights.push(1.0 - w.sum());
        weights.extend(w.iter().copied());
        (weights, residual)
    }

    /// Orthogonal projection onto the affine hull.
    pub fn project(&self, x: &Point) -> Point {
        let rel = x - &self.origin;
        let w = &self.left_inverse * &rel;
        &self.origin + &self.edges * w
    }

    /// d-dimensional volume of the simplex.
    pub fn volume(&self) -> f64 {
        let d = self.dim();
        self.gram_det.max(0.0).sqrt() / factorial(d)
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Convex combination `Σ wᵢ vᵢ`.
pub fn combine(vertices: &[&Point], weights: &[f64]) -> Point {
    let mut out = DVector::zeros(vertices[0].len());
    for (v, w) in vertices.iter().zip(weights) {
        out.axpy(*w, v, 1.0);
    }
    out
}

pub fn barycenter(vertices: &[&Point]) -> Point {
    let w = 1.0 / vertices.len() as f64;
    let mut out = DVector::zeros(vertices[0].len());
    for v in vertices {
        out.axpy(w, v, 1.0);
    }
    out
}

pub fn diameter(vertices: &[&Point]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            best = best.max(distance(vertices[i], vertices[j]));
        }
    }
    best
}

/// Nonempty subsets of `0..n` as bitmasks paired with their index lists.
fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..(1u32 << n)).map(move |mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
}

/// Closest point of the closed simplex spanned by `vertices` to `x`.
/// Returns the distance, the closest point and its barycentric weights.
pub fn closest_point_on_simplex(x: &Point, vertices: &[&Point]) -> (f64, Point, Vec<f64>) {
    let n = vertices.len();
    if let Some(frame) = AffineFrame::new(vertices) {
        let (w, _) = frame.barycentric(x);
        if w.iter().all(|&wi| wi >= 0.0) {
            let foot = combine(vertices, &w);
            return ((x - &foot).norm(), foot, w);
        }
    }
    let mut best: Option<(f64, Point, Vec<f64>)> = None;
    for face in subsets(n) {
        if face.len() == n {
            continue;
        }
        let fv: Vec<&Point> = face.iter().map(|&i| vertices[i]).collect();
        let Some(frame) = AffineFrame::new(&fv) else {
            continue;
        };
        let (w, _) = frame.barycentric(x);
        if w.iter().any(|&wi| wi < 0.0) {
            continue;
        }
        let foot = combine(&fv, &w);
        let d = (x - &foot).norm();
        if best.as_ref().is_none_or(|b| d < b.0) {
            let mut full = vec![0.0; n];
            for (k, &i) in face.iter().enumerate() {
                full[i] = w[k];
            }
            best = Some((d, foot, full));
        }
    }
    best.expect("vertex faces always qualify")
}

pub fn point_simplex_distance(x: &Point, vertices: &[&Point]) -> f64 {
    closest_point_on_simplex(x, vertices).0
}

/// Solves `Σλᵢaᵢ − Σμⱼbⱼ ≈ 0` in the least-squares sense with `Σλ = Σμ = 1`.
/// Returns `(λ, μ, residual)` or `None` when the system is rank deficient.
fn affine_pair_solve(a: &[&Point], b: &[&Point]) -> Option<(Vec<f64>, Vec<f64>, f64)> {
    let p = a[0].len();
    let cols = a.len() - 1 + b.len() - 1;
    let rhs = b[0] - a[0];
    if cols == 0 {
        return Some((vec![1.0], vec![1.0], rhs.norm()));
    }
    if cols > p {
        return None;
    }
    let mut m = DMatrix::zeros(p, cols);
    let mut scale = 1.0;
    for (j, v) in a[1..].iter().enumerate() {
        let e = *v - a[0];
        scale *= e.norm_squared();
        m.set_column(j, &e);
    }
    for (j, v) in b[1..].iter().enumerate() {
        let e = b[0] - *v;
        scale *= e.norm_squared();
        m.set_column(a.len() - 1 + j, &e);
    }
    let gram = m.transpose() * &m;
    let det = gram.determinant();
    if !(scale > 0.0 && det / scale > INDEPENDENCE_TOL) {
        return None;
    }
    let z = gram.try_inverse()? * (m.transpose() * &rhs);
    let residual = (&m * &z - &rhs).norm();
    let mut lambda = Vec::with_capacity(a.len());
    let za = z.rows(0, a.len() - 1);
    lambda.push(1.0 - za.sum());
    lambda.extend(za.iter().copied());
    let mut mu = Vec::with_capacity(b.len());
    let zb = z.rows(a.len() - 1, b.len() - 1);
    mu.push(1.0 - zb.sum());
    mu.extend(zb.iter().copied());
    Some((lambda, mu, residual))
}

/// Exact Euclidean distance between two closed simplices, by enumeration of face pairs.
pub fn simplex_simplex_distance(a: &[&Point], b: &[&Point]) -> f64 {
    let mut best = f64::INFINITY;
    for fa in subsets(a.len()) {
        let va: Vec<&Point> = fa.iter().map(|&i| a[i]).collect();
        for fb in subsets(b.len()) {
            let vb: Vec<&Point> = fb.iter().map(|&i| b[i]).collect();
            if let Some((l, m, r)) = affine_pair_solve(&va, &vb) {
                if r < best && l.iter().all(|&x| x >= 0.0) && m.iter().all(|&x| x >= 0.0) {
                    best = r;
                }
            }
        }
    }
    best
}

/// Finds a point lying in the relative interior of a face of `a` and of a face of `b`
/// whose vertex index sets differ. `a_ids`/`b_ids` are global vertex ids used to decide
/// whether two faces are the same shared face. Used for the geometric-realizability check.
pub fn improper_intersection(
    a: &[&Point],
    a_ids: &[usize],
    b: &[&Point],
    b_ids: &[usize],
    tol: f64,
) -> Option<Point> {
    for fa in subsets(a.len()) {
        let va: Vec<&Point> = fa.iter().map(|&i| a[i]).collect();
        let ida: Vec<usize> = fa.iter().map(|&i| a_ids[i]).collect();
        for fb in subsets(b.len()) {
            let idb: Vec<usize> = fb.iter().map(|&i| b_ids[i]).collect();
            if ida == idb {
                continue;
            }
            let vb: Vec<&Point> = fb.iter().map(|&i| b[i]).collect();
            let Some((l, m, r)) = affine_pair_solve(&va, &vb) else {
                continue;
            };
            let scale = 1.0 + va.iter().chain(vb.iter()).map(|v| v.amax()).fold(0.0, f64::max);
            if r <= tol * scale && l.iter().all(|&x| x > tol) && m.iter().all(|&x| x > tol) {
                return Some(combine(&va, &l));
            }
        }
    }
    None
}

/// Uniform sample from the standard simplex with `n` vertices (Dirichlet(1, …, 1)).
pub fn uniform_barycentric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let mut w: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = w.iter().sum();
    for x in &mut w {
        *x /= s;
    }
    w
}

/// Barycentric weights of the lattice `{k / n : k ∈ ℕ^parts, Σk = n}`, boundary included.
pub fn barycentric_lattice(parts: usize, n: usize) -> Vec<Vec<f64>> {
    fn rec(parts: usize, left: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.iter().map(|&k| k as f64 / n as f64).collect());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(parts - 1, left - k, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        return out;
    }
    if n == 0 {
        out.push(vec![1.0 / parts as f64; parts]);
        return out;
    }
    rec(parts, n, n, &mut Vec::with_capacity(parts), &mut out);
    out
}

/// Largest lattice resolution whose point count stays within `budget`.
pub fn lattice_resolution(parts: usize, budget: usize) -> usize {
    let count = |n: usize| -> usize {
        // C(n + parts - 1, parts - 1)
        let mut c: u128 = 1;
        for i in 1..parts {
            c = c * (n + i) as u128 / i as u128;
        }
        c.min(usize::MAX as u128) as usize
    };
    if parts <= 1 {
        return 0;
    }
    let mut n = 1;
    while count(n + 1) <= budget && n < 1 << 20 {
        n += 1;
    }
    n
}

/// Axis-aligned bounding box.
#[derive(Clone, Debug)]
pub struct Aabb {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Aabb {
    pub fn of(vertices: &[&Point]) -> Self {
        let p = vertices[0].len();
        let mut min = vec![f64::INFINITY; p];
        let mut max = vec![f64::NEG_INFINITY; p];
        for v in vertices {
            for k in 0..p {
                min[k] = min[k].min(v[k]);
                max[k] = max[k].max(v[k]);
            }
        }
        Self { min, max }
    }

    pub fn overlaps(&self, other: &Aabb, slack: f64) -> bool {
        self.min
            .iter()
            .zip(&self.max)
            .zip(other.min.iter().zip(&other.max))
            .all(|((a0, a1), (b0, b1))| a0 - slack <= *b1 && b0 - slack <= *a1)
    }

    /// Lower bound on the distance from `x` to anything inside the box.
    pub fn distance_lower_bound(&self, x: &Point) -> f64 {
        let mut s = 0.0;
        for k in 0..self.min.len() {
            let d = if x[k] < self.min[k] {
                self.min[k] - x[k]
            } else if x[k] > self.max[k] {
                x[k] - self.max[k]
            } else {
                0.0
            };
            s += d * d;
        }
        s.sqrt()
    }
}
