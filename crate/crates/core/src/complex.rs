//! Finite geometric simplicial complexes in ℝ^p.
//!
//! Simplices are stored as sorted vertex-id lists and numbered by (dimension, lexicographic
//! order), so ids are stable for a given vertex set. Maximal simplices carry precomputed
//! affine frames and bounding boxes for point location.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Aabb, AffineFrame, Point, MEMBERSHIP_TOL};

pub const MAX_AMBIENT_DIM: usize = 4;

/// Subcomplex given by vertex-id sets. Vertex ids survive subdivision modulo the subcomplex,
/// so the same value can be reused on every level of an iterated subdivision.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subcomplex {
    simplices: BTreeSet<Vec<usize>>,
}

impl Subcomplex {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Face closure of the given simplices.
    pub fn generated_by<I, S>(simplices: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[usize]>,
    {
        let mut out = BTreeSet::new();
        for s in simplices {
            let mut s = s.as_ref().to_vec();
            s.sort_unstable();
            s.dedup();
            for face in faces_of(&s) {
                out.insert(face);
            }
        }
        Self { simplices: out }
    }

    pub fn contains(&self, simplex: &[usize]) -> bool {
        self.simplices.contains(simplex)
    }

    pub fn contains_vertex(&self, v: usize) -> bool {
        self.simplices.contains(&[v][..])
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.simplices.iter()
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.simplices.iter().filter(|s| s.len() == 1).map(|s| s[0])
    }

    /// Errors unless every simplex is present in `k`.
    pub fn check_in(&self, k: &Complex) -> Result<()> {
        for s in &self.simplices {
            if k.find(s).is_none() {
                return Err(Error::NotSubcomplex(format!("simplex {s:?} is not in the complex")));
            }
        }
        Ok(())
    }
}

/// All nonempty faces of a sorted vertex list, the list itself included.
pub fn faces_of(simplex: &[usize]) -> Vec<Vec<usize>> {
    let n = simplex.len();
    (1u32..(1u32 << n))
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).map(|i| simplex[i]).collect())
        .collect()
}

fn is_face(face: &[usize], of: &[usize]) -> bool {
    face.iter().all(|v| of.binary_search(v).is_ok())
}

/// Location of a point: its carrier simplex and barycentric weights there.
#[derive(Clone, Debug, PartialEq)]
pub struct Location {
    pub simplex: usize,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Complex {
    vertices: Vec<Point>,
    simplices: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    frames: Vec<AffineFrame>,
    maximal: Vec<usize>,
    boxes: Vec<Aabb>,
    grid: Grid,
    vertex_star: Vec<Vec<usize>>,
}

/// Uniform bucket grid over the bounding boxes of maximal simplices.
#[derive(Clone, Debug)]
struct Grid {
    bounds: Aabb,
    cells_per_axis: usize,
    cells: Vec<Vec<usize>>,
}

impl Grid {
    fn build(boxes: &[Aabb]) -> Self {
        let p = boxes[0].min.len();
        let mut bounds = boxes[0].clone();
        for b in boxes {
            for k in 0..p {
                bounds.min[k] = bounds.min[k].min(b.min[k]);
                bounds.max[k] = bounds.max[k].max(b.max[k]);
            }
        }
        let n = ((4 * boxes.len()) as f64).powf(1.0 / p as f64).floor().max(1.0) as usize;
        let mut cells = vec![Vec::new(); n.pow(p as u32)];
        let grid = Self {
            bounds,
            cells_per_axis: n,
            cells: Vec::new(),
        };
        for (i, b) in boxes.iter().enumerate() {
            let lo: Vec<usize> = (0..p).map(|k| grid.axis_cell(k, b.min[k] - 1e-9)).collect();
            let hi: Vec<usize> = (0..p).map(|k| grid.axis_cell(k, b.max[k] + 1e-9)).collect();
            let mut idx = lo.clone();
            loop {
                cells[grid.flat(&idx)].push(i);
                let mut k = 0;
                loop {
                    if k == p {
                        break;
                    }
                    if idx[k] < hi[k] {
                        idx[k] += 1;
                        break;
                    }
                    idx[k] = lo[k];
                    k += 1;
                }
                if k == p {
                    break;
                }
            }
        }
        Self { cells, ..grid }
    }

    fn axis_cell(&self, k: usize, t: f64) -> usize {
        let (a, b) = (self.bounds.min[k], self.bounds.max[k]);
        if b <= a {
            return 0;
        }
        let c = ((t - a) / (b - a) * self.cells_per_axis as f64).floor();
        c.clamp(0.0, (self.cells_per_axis - 1) as f64) as usize
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().rev().fold(0, |acc, &i| acc * self.cells_per_axis + i)
    }

    /// Maximal-simplex indices whose boxes may contain `x`.
    fn candidates(&self, x: &Point) -> &[usize] {
        let idx: Vec<usize> = (0..x.len()).map(|k| self.axis_cell(k, x[k])).collect();
        &self.cells[self.flat(&idx)]
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexJson {
    pub vertices: Vec<Vec<f64>>,
    pub simplices: Vec<Vec<usize>>,
}

impl Complex {
    /// Builds a complex from vertex coordinates and generating simplices, completing face
    /// closure and validating affine independence and geometric realizability.
    pub fn new(vertices: Vec<Point>, generators: Vec<Vec<usize>>) -> Result<Self> {
        let k = Self::assemble(vertices, generators)?;
        k.check_realizable()?;
        Ok(k)
    }

    /// Like [`Complex::new`] but skips the pairwise intersection test. Used by constructions
    /// that are valid by design, such as subdivisions of a valid complex.
    pub fn new_trusted(vertices: Vec<Point>, generators: Vec<Vec<usize>>) -> Result<Self> {
        Self::assemble(vertices, generators)
    }

    fn assemble(vertices: Vec<Point>, generators: Vec<Vec<usize>>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidComplex("no vertices".into()));
        }
        let p = vertices[0].len();
        if p == 0 || p > MAX_AMBIENT_DIM {
            return Err(Error::InvalidComplex(format!(
                "ambient dimension {p} outside 1..={MAX_AMBIENT_DIM}"
            )));
        }
        for (i, v) in vertices.iter().enumerate() {
            if v.len() != p {
                return Err(Error::InvalidComplex(format!(
                    "vertex {i} has {} coordinates, expected {p}",
                    v.len()
                )));
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidComplex(format!("vertex {i} has a non-finite coordinate")));
            }
        }
        let mut all = BTreeSet::new();
        for g in generators {
            let mut s = g;
            s.sort_unstable();
            let len = s.len();
            s.dedup();
            if s.len() != len {
                return Err(Error::InvalidComplex(format!("simplex {s:?} repeats a vertex")));
            }
            if s.is_empty() {
                return Err(Error::InvalidComplex("empty simplex".into()));
            }
            if let Some(&bad) = s.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::InvalidComplex(format!("vertex index {bad} out of range")));
            }
            if s.len() > p + 1 {
                return Err(Error::InvalidComplex(format!(
                    "simplex {s:?} has dimension {} above ambient dimension {p}",
                    s.len() - 1
                )));
            }
            if s.len() > 20 {
                return Err(Error::InvalidComplex("simplex too large".into()));
            }
            for f in faces_of(&s) {
                all.insert(f);
            }
        }
        // every vertex is a 0-simplex, isolated ones included
        for v in 0..vertices.len() {
            all.insert(vec![v]);
        }
        let mut simplices: Vec<Vec<usize>> = all.into_iter().collect();
        simplices.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let index: HashMap<Vec<usize>, usize> =
            simplices.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();

        let mut vertex_star = vec![Vec::new(); vertices.len()];
        for (id, s) in simplices.iter().enumerate() {
            for &v in s {
                vertex_star[v].push(id);
            }
        }
        let mut frames = Vec::with_capacity(simplices.len());
        for s in &simplices {
            let pts: Vec<&Point> = s.iter().map(|&v| &vertices[v]).collect();
            let frame = AffineFrame::new(&pts).ok_or_else(|| {
                Error::InvalidComplex(format!("simplex {s:?} is affinely dependent"))
            })?;
            frames.push(frame);
        }
        let maximal: Vec<usize> = (0..simplices.len())
            .filter(|&id| {
                let s = &simplices[id];
                !vertex_star[s[0]].iter().any(|&o| simplices[o].len() > s.len() && is_face(s, &simplices[o]))
            })
            .collect();
        let boxes = maximal
            .iter()
            .map(|&id| {
                let pts: Vec<&Point> = simplices[id].iter().map(|&v| &vertices[v]).collect();
                Aabb::of(&pts)
            })
            .collect::<Vec<_>>();
        let grid = Grid::build(&boxes);
        Ok(Self {
            vertices,
            simplices,
            index,
            frames,
            maximal,
            boxes,
            grid,
            vertex_star,
        })
    }

    /// Pairwise check that maximal simplices meet exactly in a common face.
    pub fn check_realizable(&self) -> Result<()> {
        let n = self.maximal.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.boxes[a].min[0].total_cmp(&self.boxes[b].min[0]));
        let slack = 1e-9;
        for (oi, &i) in order.iter().enumerate() {
            for &j in &order[oi + 1..] {
                if self.boxes[j].min[0] > self.boxes[i].max[0] + slack {
                    break;
                }
                if !self.boxes[i].overlaps(&self.boxes[j], slack) {
                    continue;
                }
                let (si, sj) = (self.maximal[i], self.maximal[j]);
                let a = self.points_of(si);
                let b = self.points_of(sj);
                if let Some(x) = geometry::improper_intersection(
                    &a,
                    &self.simplices[si],
                    &b,
                    &self.simplices[sj],
                    MEMBERSHIP_TOL,
                ) {
                    return Err(Error::InvalidComplex(format!(
                        "simplices {:?} and {:?} meet improperly near {:?}",
                        self.simplices[si],
                        self.simplices[sj],
                        x.as_slice()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn ambient_dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn dim(&self) -> usize {
        self.simplices.last().map_or(0, |s| s.len() - 1)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_simplices(&self) -> usize {
        self.simplices.len()
    }

    pub fn vertex(&self, v: usize) -> &Point {
        &self.vertices[v]
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn simplex(&self, id: usize) -> &[usize] {
        &self.simplices[id]
    }

    pub fn simplices(&self) -> &[Vec<usize>] {
        &self.simplices
    }

    pub fn simplex_dim(&self, id: usize) -> usize {
        self.simplices[id].len() - 1
    }

    pub fn frame(&self, id: usize) -> &AffineFrame {
        &self.frames[id]
    }

    pub fn maximal(&self) -> &[usize] {
        &self.maximal
    }

    pub fn find(&self, simplex: &[usize]) -> Option<usize> {
        self.index.get(simplex).copied()
    }

    /// Id of the 0-simplex of vertex `v`.
    pub fn vertex_simplex(&self, v: usize) -> usize {
        self.index[&vec![v]]
    }

    pub fn points_of(&self, id: usize) -> Vec<&Point> {
        self.simplices[id].iter().map(|&v| &self.vertices[v]).collect()
    }

    pub fn is_face(&self, face: usize, of: usize) -> bool {
        is_face(&self.simplices[face], &self.simplices[of])
    }

    /// Ids of all simplices having vertex `v`.
    pub fn vertex_star(&self, v: usize) -> &[usize] {
        &self.vertex_star[v]
    }

    /// Simplices having `id` as a face, `id` included.
    pub fn star(&self, id: usize) -> Result<Vec<usize>> {
        let s = self.simplices.get(id).ok_or(Error::UnknownSimplex(id))?;
        Ok(self.vertex_star[s[0]]
            .iter()
            .copied()
            .filter(|&o| is_face(s, &self.simplices[o]))
            .collect())
    }

    /// Proper and improper faces of `id`, as simplex ids.
    pub fn faces(&self, id: usize) -> Vec<usize> {
        faces_of(&self.simplices[id]).iter().map(|f| self.index[f]).collect()
    }

    pub fn barycenter(&self, id: usize) -> Point {
        geometry::barycenter(&self.points_of(id))
    }

    pub fn diameter(&self, id: usize) -> f64 {
        geometry::diameter(&self.points_of(id))
    }

    pub fn volume(&self, id: usize) -> f64 {
        self.frames[id].volume()
    }

    /// Barycentric weights of `x` in simplex `id`, in the simplex's vertex order.
    pub fn barycentric_coords(&self, id: usize, x: &Point) -> Result<Vec<f64>> {
        let frame = self.frames.get(id).ok_or(Error::UnknownSimplex(id))?;
        if x.len() != self.ambient_dim() {
            return Err(Error::InvalidParameter(format!(
                "point has dimension {}, complex lives in dimension {}",
                x.len(),
                self.ambient_dim()
            )));
        }
        let (w, residual) = frame.barycentric(x);
        if residual > MEMBERSHIP_TOL * (1.0 + x.amax()) {
            return Err(Error::OutsideAffineHull { simplex: id, residual });
        }
        Ok(w)
    }

    /// Point with the given barycentric weights in simplex `id`.
    pub fn point_at(&self, id: usize, weights: &[f64]) -> Point {
        geometry::combine(&self.points_of(id), weights)
    }

    /// Minimal simplex containing `x`: every barycentric weight there exceeds the tolerance.
    /// Ties between equal-dimension candidates go to the lowest id.
    pub fn locate(&self, x: &Point) -> Result<Location> {
        if x.len() != self.ambient_dim() {
            return Err(Error::InvalidParameter(format!(
                "point has dimension {}, complex lives in dimension {}",
                x.len(),
                self.ambient_dim()
            )));
        }
        let scale = 1.0 + x.amax();
        let mut best: Option<Location> = None;
        for &k in self.grid.candidates(x) {
            let id = self.maximal[k];
            if self.boxes[k].distance_lower_bound(x) > MEMBERSHIP_TOL * scale {
                continue;
            }
            let (w, residual) = self.frames[id].barycentric(x);
            if residual > MEMBERSHIP_TOL * scale || w.iter().any(|&wi| wi < -MEMBERSHIP_TOL) {
                continue;
            }
            let s = &self.simplices[id];
            let face: Vec<usize> = s.iter().zip(&w).filter(|(_, &wi)| wi > MEMBERSHIP_TOL).map(|(&v, _)| v).collect();
            let (face, mut fw): (Vec<usize>, Vec<f64>) = if face.is_empty() {
                // all weights tiny cannot happen when they sum to one, kept for safety
                let (i, _) = w.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
                (vec![s[i]], vec![1.0])
            } else {
                s.iter().zip(&w).filter(|(_, &wi)| wi > MEMBERSHIP_TOL).map(|(&v, &wi)| (v, wi)).unzip()
            };
            let total: f64 = fw.iter().sum();
            for x in &mut fw {
                *x /= total;
            }
            let fid = self.index[&face];
            let better = match &best {
                None => true,
                Some(b) => {
                    let (bd, fd) = (self.simplices[b.simplex].len(), face.len());
                    fd < bd || (fd == bd && fid < b.simplex)
                }
            };
            if better {
                best = Some(Location { simplex: fid, weights: fw });
            }
        }
        best.ok_or_else(|| Error::NotInPolyhedron {
            point: x.iter().copied().collect(),
            distance: self.distance_to(x),
        })
    }

    /// Carrier simplex id of `x`.
    pub fn carrier(&self, x: &Point) -> Result<usize> {
        self.locate(x).map(|l| l.simplex)
    }

    /// Euclidean distance from `x` to |K|.
    pub fn distance_to(&self, x: &Point) -> f64 {
        self.closest_point(x).0
    }

    /// Nearest point of |K| to `x`, with its distance and the maximal simplex realizing it.
    pub fn closest_point(&self, x: &Point) -> (f64, Point, usize) {
        let mut best: Option<(f64, Point, usize)> = None;
        let consider = |k: usize, best: &mut Option<(f64, Point, usize)>| {
            if let Some(b) = best.as_ref() {
                if self.boxes[k].distance_lower_bound(x) > b.0 {
                    return;
                }
            }
            let id = self.maximal[k];
            let (d, foot, _) = geometry::closest_point_on_simplex(x, &self.points_of(id));
            let better = match best.as_ref() {
                None => true,
                Some(b) => d < b.0 || (d == b.0 && id < b.2),
            };
            if better {
                *best = Some((d, foot, id));
            }
        };
        // seed with the grid cell so that most boxes are pruned
        for &k in self.grid.candidates(x) {
            consider(k, &mut best);
        }
        for k in 0..self.maximal.len() {
            consider(k, &mut best);
        }
        best.expect("complex has at least one simplex")
    }

    /// Exact distance between the closed simplices `a` and `b`.
    pub fn simplex_distance(&self, a: usize, b: usize) -> f64 {
        geometry::simplex_simplex_distance(&self.points_of(a), &self.points_of(b))
    }

    pub fn subcomplex_all(&self) -> Subcomplex {
        Subcomplex {
            simplices: self.simplices.iter().cloned().collect(),
        }
    }

    /// Ids of the simplices of `self` that belong to `h`.
    pub fn ids_in(&self, h: &Subcomplex) -> Vec<usize> {
        h.iter().filter_map(|s| self.find(s)).collect()
    }

    /// Uniform random point of simplex `id` with its barycentric weights.
    pub fn sample_in<R: Rng + ?Sized>(&self, id: usize, rng: &mut R) -> (Point, Vec<f64>) {
        let w = geometry::uniform_barycentric(rng, self.simplices[id].len());
        (self.point_at(id, &w), w)
    }

    pub fn to_json(&self) -> ComplexJson {
        ComplexJson {
            vertices: self.vertices.iter().map(|v| v.iter().copied().collect()).collect(),
            simplices: self.maximal.iter().map(|&id| self.simplices[id].clone()).collect(),
        }
    }

    pub fn from_json(json: &ComplexJson) -> Result<Self> {
        let vertices = json.vertices.iter().map(|c| geometry::point(c)).collect();
        Self::new(vertices, json.simplices.clone())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let json: ComplexJson = serde_json::from_str(s)?;
        Self::from_json(&json)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point;

    fn edge() -> Complex {
        Complex::new(vec![point(&[0.0]), point(&[1.0])], vec![vec![0, 1]]).unwrap()
    }

    fn two_triangles() -> Complex {
        Complex::new(
            vec![point(&[0.0, 0.0]), point(&[1.0, 0.0]), point(&[0.0, 1.0]), point(&[1.0, 1.0])],
            vec![vec![0, 1, 2], vec![1, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn carrier_on_edge() {
        let k = edge();
        assert_eq!(k.simplex(k.carrier(&point(&[0.5])).unwrap()), &[0, 1]);
        assert_eq!(k.simplex(k.carrier(&point(&[0.0])).unwrap()), &[0]);
        assert!(matches!(k.carrier(&point(&[2.0])), Err(Error::NotInPolyhedron { .. })));
    }

    #[test]
    fn stars() {
        let k = edge();
        let v0 = k.vertex_simplex(0);
        let st: Vec<&[usize]> = k.star(v0).unwrap().into_iter().map(|i| k.simplex(i)).collect();
        assert_eq!(st, vec![&[0][..], &[0, 1][..]]);
        let top = k.find(&[0, 1]).unwrap();
        assert_eq!(k.star(top).unwrap(), vec![top]);
        let t = two_triangles();
        let shared = t.find(&[1, 2]).unwrap();
        assert_eq!(t.star(shared).unwrap().len(), 3);
        assert!(matches!(t.star(99), Err(Error::UnknownSimplex(99))));
    }

    #[test]
    fn barycentric_examples() {
        let t = two_triangles();
        let tri = t.find(&[0, 1, 2]).unwrap();
        let w = t.barycentric_coords(tri, &point(&[1.0 / 3.0, 1.0 / 3.0])).unwrap();
        for wi in w {
            assert!((wi - 1.0 / 3.0).abs() < 1e-12);
        }
        let e = edge();
        let w = e.barycentric_coords(e.find(&[0, 1]).unwrap(), &point(&[0.5])).unwrap();
        assert_eq!(w, vec![0.5, 0.5]);
        let w = e.barycentric_coords(e.find(&[0, 1]).unwrap(), &point(&[1.0])).unwrap();
        assert_eq!(w, vec![0.0, 1.0]);
    }

    #[test]
    fn outside_affine_hull_is_an_error() {
        let k = Complex::new(vec![point(&[0.0, 0.0]), point(&[1.0, 0.0])], vec![vec![0, 1]]).unwrap();
        assert!(matches!(
            k.barycentric_coords(2, &point(&[0.5, 0.1])),
            Err(Error::OutsideAffineHull { .. })
        ));
    }

    #[test]
    fn rejects_crossing_edges() {
        let r = Complex::new(
            vec![point(&[0.0, 0.0]), point(&[1.0, 1.0]), point(&[0.0, 1.0]), point(&[1.0, 0.0])],
            vec![vec![0, 1], vec![2, 3]],
        );
        assert!(matches!(r, Err(Error::InvalidComplex(_))));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Complex::new(vec![point(&[f64::NAN])], vec![]).is_err());
        assert!(Complex::new(vec![point(&[0.0])], vec![vec![0, 3]]).is_err());
        assert!(Complex::new(vec![point(&[0.0]), point(&[1.0]), point(&[2.0])], vec![vec![0, 1, 2]]).is_err());
    }

    #[test]
    fn json_round_trip_completes_faces() {
        let k = Complex::from_json_str(r#"{"vertices":[[0,0],[1,0],[0,1]],"simplices":[[2,0,1]]}"#).unwrap();
        assert_eq!(k.num_simplices(), 7);
        let again = Complex::from_json(&k.to_json()).unwrap();
        assert_eq!(again.simplices(), k.simplices());
    }

    #[test]
    fn carrier_prefers_lowest_dimension() {
        let t = two_triangles();
        let mid = point(&[0.5, 0.5]);
        assert_eq!(t.simplex(t.carrier(&mid).unwrap()), &[1, 2]);
    }
}
