use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::evaluator::{enclosing_simplex, CarrierCertified, MapEvaluator, PlMap};
use crate::complex::{Complex, ComplexJson};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::subdivision::sd;

/// Iterated barycentric subdivisions `L, sd(L), sd²(L), …`, grown on demand.
/// Vertex ids of a level are valid in every finer level.
#[derive(Clone, Debug)]
pub struct TargetTower {
    levels: Vec<Complex>,
}

impl TargetTower {
    pub fn new(base: Complex) -> Self {
        Self { levels: vec![base] }
    }

    pub fn from_levels(levels: Vec<Complex>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidParameter("a tower needs at least its base level".into()));
        }
        Ok(Self { levels })
    }

    /// Makes sure levels `0..=j` exist.
    pub fn ensure(&mut self, j: usize) -> Result<()> {
        while self.levels.len() <= j {
            let next = sd(self.levels.last().unwrap())?.child;
            self.levels.push(next);
        }
        Ok(())
    }

    pub fn level(&self, j: usize) -> &Complex {
        &self.levels[j]
    }

    pub fn base(&self) -> &Complex {
        &self.levels[0]
    }

    pub fn finest(&self) -> &Complex {
        self.levels.last().unwrap()
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn truncated(&self, depth: usize) -> Self {
        Self {
            levels: self.levels[..=depth.min(self.depth())].to_vec(),
        }
    }

    /// Smallest level `j ≤ max` on which `vertices` span a simplex, if any.
    pub fn spanning_level(&self, vertices: &[usize], min: usize, max: usize) -> Option<usize> {
        (min..=max.min(self.depth())).find(|&j| self.levels[j].find(vertices).is_some())
    }
}

fn image_set(source: &Complex, id: usize, vertex_image: &[usize]) -> Vec<usize> {
    let mut s: Vec<usize> = source.simplex(id).iter().map(|&v| vertex_image[v]).collect();
    s.sort_unstable();
    s.dedup();
    s
}

/// Vertex map sending every source simplex onto a (possibly lower-dimensional) target simplex.
#[derive(Clone, Debug)]
pub struct SimplicialMap {
    target: Complex,
    vertex_image: Vec<usize>,
    pl: PlMap,
}

impl SimplicialMap {
    pub fn new(source: Complex, target: Complex, vertex_image: Vec<usize>) -> Result<Self> {
        if vertex_image.len() != source.num_vertices() {
            return Err(Error::InvalidParameter("vertex map has the wrong length".into()));
        }
        if let Some(&bad) = vertex_image.iter().find(|&&u| u >= target.num_vertices()) {
            return Err(Error::InvalidParameter(format!("vertex image {bad} is not a target vertex")));
        }
        for id in 0..source.num_simplices() {
            let img = image_set(&source, id, &vertex_image);
            if target.find(&img).is_none() {
                return Err(Error::InvalidParameter(format!(
                    "simplex {:?} maps to {img:?}, which is not a target simplex",
                    source.simplex(id)
                )));
            }
        }
        let images = vertex_image.iter().map(|&u| target.vertex(u).clone()).collect();
        let pl = PlMap::new(source, images)?;
        Ok(Self { target, vertex_image, pl })
    }

    pub fn source(&self) -> &Complex {
        self.pl.source()
    }

    pub fn target(&self) -> &Complex {
        &self.target
    }

    pub fn vertex_image(&self) -> &[usize] {
        &self.vertex_image
    }
}

impl MapEvaluator for SimplicialMap {
    fn eval(&self, x: &Point) -> Result<Point> {
        self.pl.eval(x)
    }

    fn simplexwise_lipschitz(&self) -> Option<f64> {
        self.pl.simplexwise_lipschitz()
    }
}

/// Map affine on each source simplex whose vertex images span a simplex of
/// `sd^{ℓ(σ)}(L)`, with `ℓ(σ)` stored per simplex.
#[derive(Clone, Debug)]
pub struct WeaklySimplicialMap {
    tower: TargetTower,
    vertex_image: Vec<usize>,
    level_of: Vec<usize>,
    certificate: Vec<usize>,
    pl: PlMap,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeaklySimplicialJson {
    pub source: ComplexJson,
    pub target: ComplexJson,
    /// Number of barycentric subdivisions of the target that vertex ids refer to.
    pub depth: usize,
    pub vertex_image: BTreeMap<usize, usize>,
    /// Level per source simplex, keyed by comma-separated vertex ids.
    pub levels: BTreeMap<String, usize>,
}

impl WeaklySimplicialMap {
    /// Validates level coherence: every simplex's images span a simplex of its level.
    pub fn new(
        source: Complex,
        tower: TargetTower,
        vertex_image: Vec<usize>,
        level_of: Vec<usize>,
    ) -> Result<Self> {
        let map = Self::assemble(source, tower, vertex_image, level_of)?;
        if let Some(&bad) = map.coherence_violations().first() {
            return Err(Error::InvalidParameter(format!(
                "images of simplex {:?} do not span a simplex of level {}",
                map.source().simplex(bad),
                map.level_of[bad]
            )));
        }
        Ok(map)
    }

    fn assemble(
        source: Complex,
        tower: TargetTower,
        vertex_image: Vec<usize>,
        level_of: Vec<usize>,
    ) -> Result<Self> {
        if vertex_image.len() != source.num_vertices() || level_of.len() != source.num_simplices() {
            return Err(Error::InvalidParameter("vertex or level table has the wrong length".into()));
        }
        let finest = tower.finest();
        if let Some(&bad) = vertex_image.iter().find(|&&u| u >= finest.num_vertices()) {
            return Err(Error::InvalidParameter(format!("vertex image {bad} is not a target vertex")));
        }
        if let Some(&bad) = level_of.iter().find(|&&l| l > tower.depth()) {
            return Err(Error::InvalidParameter(format!("level {bad} exceeds the tower depth")));
        }
        let images: Vec<Point> = vertex_image.iter().map(|&u| finest.vertex(u).clone()).collect();
        let pl = PlMap::new(source, images)?;
        let certificate = (0..pl.source().num_simplices())
            .map(|t| enclosing_simplex(tower.base(), &pl.image_points(t)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            tower,
            vertex_image,
            level_of,
            certificate,
            pl,
        })
    }

    /// Simplices whose vertex images fail to span a simplex of their recorded level.
    pub fn coherence_violations(&self) -> Vec<usize> {
        let source = self.pl.source();
        (0..source.num_simplices())
            .filter(|&id| {
                let img = image_set(source, id, &self.vertex_image);
                self.tower.level(self.level_of[id]).find(&img).is_none()
            })
            .collect()
    }

    /// Copy with one vertex image replaced and certificates kept from the original.
    /// Produces deliberately broken maps for audit fault injection.
    pub fn tampered(&self, vertex: usize, new_image: usize) -> Result<Self> {
        let mut out = self.clone();
        if new_image >= self.tower.finest().num_vertices() || vertex >= self.vertex_image.len() {
            return Err(Error::InvalidParameter("tampering index out of range".into()));
        }
        out.vertex_image[vertex] = new_image;
        let images = out.vertex_image.iter().map(|&u| self.tower.finest().vertex(u).clone()).collect();
        out.pl = PlMap::new(self.pl.source().clone(), images)?;
        Ok(out)
    }

    pub fn source(&self) -> &Complex {
        self.pl.source()
    }

    pub fn tower(&self) -> &TargetTower {
        &self.tower
    }

    pub fn vertex_image(&self) -> &[usize] {
        &self.vertex_image
    }

    pub fn level_of(&self, simplex: usize) -> usize {
        self.level_of[simplex]
    }

    pub fn levels(&self) -> &[usize] {
        &self.level_of
    }

    /// Image point of source vertex `v`.
    pub fn image_of_vertex(&self, v: usize) -> &Point {
        &self.pl.images()[v]
    }

    pub fn as_pl(&self) -> &PlMap {
        &self.pl
    }

    pub fn to_json(&self) -> WeaklySimplicialJson {
        let source = self.source();
        WeaklySimplicialJson {
            source: source.to_json(),
            target: self.tower.base().to_json(),
            depth: self.tower.depth(),
            vertex_image: self.vertex_image.iter().copied().enumerate().collect(),
            levels: (0..source.num_simplices())
                .map(|id| {
                    let key = source.simplex(id).iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
                    (key, self.level_of[id])
                })
                .collect(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let json: WeaklySimplicialJson = serde_json::from_str(s)?;
        Self::from_json(&json)
    }

    pub fn from_json(json: &WeaklySimplicialJson) -> Result<Self> {
        let source = Complex::from_json(&json.source)?;
        let mut tower = TargetTower::new(Complex::from_json(&json.target)?);
        if json.depth > 10 {
            return Err(Error::InvalidParameter("subdivision depth above 10".into()));
        }
        tower.ensure(json.depth)?;
        let mut vertex_image = vec![usize::MAX; source.num_vertices()];
        for (&v, &u) in &json.vertex_image {
            if v >= vertex_image.len() {
                return Err(Error::InvalidParameter(format!("vertex {v} is not a source vertex")));
            }
            vertex_image[v] = u;
        }
        if vertex_image.contains(&usize::MAX) {
            return Err(Error::InvalidParameter("missing vertex images".into()));
        }
        let mut level_of = vec![usize::MAX; source.num_simplices()];
        for (key, &level) in &json.levels {
            let ids = key
                .split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|e| Error::Parse(format!("level key {key:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let mut ids = ids;
            ids.sort_unstable();
            let id = source
                .find(&ids)
                .ok_or_else(|| Error::InvalidParameter(format!("level key {key:?} is not a source simplex")))?;
            level_of[id] = level;
        }
        if level_of.contains(&usize::MAX) {
            return Err(Error::InvalidParameter("missing simplex levels".into()));
        }
        Self::new(source, tower, vertex_image, level_of)
    }
}

impl MapEvaluator for WeaklySimplicialMap {
    fn eval(&self, x: &Point) -> Result<Point> {
        self.pl.eval(x)
    }

    fn simplexwise_lipschitz(&self) -> Option<f64> {
        self.pl.simplexwise_lipschitz()
    }
}

impl CarrierCertified for WeaklySimplicialMap {
    fn source(&self) -> &Complex {
        self.pl.source()
    }

    fn target(&self) -> &Complex {
        self.tower.base()
    }

    fn certificate(&self, t: usize) -> usize {
        self.certificate[t]
    }

    fn as_pl(&self) -> Option<&PlMap> {
        Some(&self.pl)
    }
}
