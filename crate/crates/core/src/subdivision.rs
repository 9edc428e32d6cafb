//! Barycentric subdivision, subdivision modulo a subcomplex, and their iterates.
//!
//! Child complexes keep every parent vertex under its original id and append one barycenter
//! per subdivided simplex of positive dimension, in parent simplex order. Because of this,
//! a subcomplex given by vertex ids names the same simplices on every level.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::complex::{Complex, ComplexJson, Subcomplex};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Subdivision {
    pub child: Complex,
    pub parent: Complex,
    carrier_of: Vec<usize>,
    /// Number of subdivision steps composed into this one.
    pub levels: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CarrierEntry {
    pub child: Vec<usize>,
    pub parent: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubdivisionJson {
    pub vertices: Vec<Vec<f64>>,
    pub simplices: Vec<Vec<usize>>,
    pub carriers: Vec<CarrierEntry>,
    pub levels: usize,
    pub parent: ComplexJson,
}

impl Subdivision {
    pub fn identity(k: &Complex) -> Self {
        Self {
            child: k.clone(),
            parent: k.clone(),
            carrier_of: (0..k.num_simplices()).collect(),
            levels: 0,
        }
    }

    /// Parent simplex id recorded for child simplex `id`.
    pub fn carrier_of(&self, id: usize) -> usize {
        self.carrier_of[id]
    }

    pub fn carriers(&self) -> &[usize] {
        &self.carrier_of
    }

    /// Replaces the carrier table. Used to build deliberately broken fixtures for audits.
    pub fn with_carriers(mut self, carriers: Vec<usize>) -> Result<Self> {
        if carriers.len() != self.child.num_simplices() {
            return Err(Error::InvalidParameter("carrier table has the wrong length".into()));
        }
        if let Some(&bad) = carriers.iter().find(|&&c| c >= self.parent.num_simplices()) {
            return Err(Error::UnknownSimplex(bad));
        }
        self.carrier_of = carriers;
        Ok(self)
    }

    /// Replaces the child complex while keeping the carrier table; for fault-injection fixtures.
    pub fn with_child(mut self, child: Complex) -> Result<Self> {
        if child.simplices() != self.child.simplices() {
            return Err(Error::InvalidParameter("replacement child must keep the simplex list".into()));
        }
        self.child = child;
        Ok(self)
    }

    pub fn to_json(&self) -> SubdivisionJson {
        let child = self.child.to_json();
        SubdivisionJson {
            vertices: child.vertices,
            simplices: child.simplices,
            carriers: (0..self.child.num_simplices())
                .map(|id| CarrierEntry {
                    child: self.child.simplex(id).to_vec(),
                    parent: self.parent.simplex(self.carrier_of[id]).to_vec(),
                })
                .collect(),
            levels: self.levels,
            parent: self.parent.to_json(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let json: SubdivisionJson = serde_json::from_str(s)?;
        Self::from_json(&json)
    }

    pub fn from_json(json: &SubdivisionJson) -> Result<Self> {
        let parent = Complex::from_json(&json.parent)?;
        let child = Complex::from_json(&ComplexJson {
            vertices: json.vertices.clone(),
            simplices: json.simplices.clone(),
        })?;
        let mut carrier_of = vec![usize::MAX; child.num_simplices()];
        for entry in &json.carriers {
            let c = child
                .find(&entry.child)
                .ok_or_else(|| Error::InvalidParameter(format!("carrier entry names unknown child {:?}", entry.child)))?;
            let p = parent
                .find(&entry.parent)
                .ok_or_else(|| Error::InvalidParameter(format!("carrier entry names unknown parent {:?}", entry.parent)))?;
            carrier_of[c] = p;
        }
        if let Some(missing) = carrier_of.iter().position(|&c| c == usize::MAX) {
            return Err(Error::InvalidParameter(format!(
                "no carrier recorded for child simplex {:?}",
                child.simplex(missing)
            )));
        }
        Ok(Self {
            child,
            parent,
            carrier_of,
            levels: json.levels,
        })
    }
}

/// First barycentric subdivision.
pub fn sd(k: &Complex) -> Result<Subdivision> {
    sd_mod(k, &Subcomplex::empty())
}

/// Subdivision of `k` modulo the subcomplex `h`: simplices are `σ0 ∪ {b(σ1), …, b(σr)}` with
/// `σ0 ∈ H` (possibly empty), `σ1 < … < σr` in `K ∖ H` and `σ0` a proper face of `σ1`.
pub fn sd_mod(k: &Complex, h: &Subcomplex) -> Result<Subdivision> {
    h.check_in(k)?;
    let n = k.num_simplices();
    let in_h: Vec<bool> = (0..n).map(|id| h.contains(k.simplex(id))).collect();

    let mut vertices = k.vertices().to_vec();
    let mut bary = vec![usize::MAX; n];
    for id in 0..n {
        if in_h[id] {
            continue;
        }
        if k.simplex_dim(id) == 0 {
            bary[id] = k.simplex(id)[0];
        } else {
            bary[id] = vertices.len();
            vertices.push(k.barycenter(id));
        }
    }

    // proper cofaces outside H, per simplex
    let cofaces: Vec<Vec<usize>> = (0..n)
        .map(|id| {
            k.star(id)
                .expect("id in range")
                .into_iter()
                .filter(|&c| c != id && !in_h[c])
                .collect()
        })
        .collect();

    let mut chains: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut emit = |verts: &[usize], top: usize| {
        let mut s = verts.to_vec();
        s.sort_unstable();
        chains.insert(s, top);
    };

    // explicit stack of (vertex list, last chain element)
    let mut stack: Vec<(Vec<usize>, usize)> = Vec::new();
    for id in 0..n {
        if in_h[id] {
            stack.push((k.simplex(id).to_vec(), id));
        } else {
            stack.push((vec![bary[id]], id));
        }
        while let Some((verts, last)) = stack.pop() {
            emit(&verts, last);
            for &c in &cofaces[last] {
                let mut next = verts.clone();
                next.push(bary[c]);
                stack.push((next, c));
            }
        }
    }

    let generators: Vec<Vec<usize>> = chains.keys().cloned().collect();
    let child = Complex::new_trusted(vertices, generators)?;
    let carrier_of = (0..child.num_simplices())
        .map(|id| {
            chains.get(child.simplex(id)).copied().ok_or_else(|| {
                Error::InvalidComplex(format!("child simplex {:?} is not a chain", child.simplex(id)))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Subdivision {
        child,
        parent: k.clone(),
        carrier_of,
        levels: 1,
    })
}

impl Subdivision {
    /// One more subdivision step of the child modulo `h`, carriers composed by lookup.
    pub fn refine(self, h: &Subcomplex) -> Result<Subdivision> {
        let step = sd_mod(&self.child, h)?;
        Ok(self.then(step))
    }

    /// Composes `self: A → B` with `next: B → C` into `A → C`.
    pub fn then(self, next: Subdivision) -> Subdivision {
        let carrier_of = next.carrier_of.iter().map(|&c| self.carrier_of[c]).collect();
        Subdivision {
            child: next.child,
            parent: self.parent,
            carrier_of,
            levels: self.levels + next.levels,
        }
    }
}

/// `k`-fold subdivision modulo `h` with composed carriers; `k = 0` is the identity.
pub fn sd_iter(k: &Complex, h: &Subcomplex, times: usize) -> Result<Subdivision> {
    let mut acc = Subdivision::identity(k);
    for _ in 0..times {
        acc = acc.refine(h)?;
    }
    Ok(acc)
}

/// `[K, sd(K), sd²(K), …, sd^levels(K)]`. Vertex ids of each level persist in the next.
pub fn tower(k: &Complex, levels: usize) -> Result<Vec<Complex>> {
    let mut out = vec![k.clone()];
    for _ in 0..levels {
        let next = sd(out.last().unwrap())?.child;
        out.push(next);
    }
    Ok(out)
}

/// Largest simplex diameter, ignoring simplices of `away_from` when given.
pub fn mesh_size(k: &Complex, away_from: Option<&Subcomplex>) -> f64 {
    (0..k.num_simplices())
        .filter(|&id| away_from.is_none_or(|h| !h.contains(k.simplex(id))))
        .map(|id| k.diameter(id))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point;

    fn edge() -> Complex {
        Complex::new(vec![point(&[0.0]), point(&[1.0])], vec![vec![0, 1]]).unwrap()
    }

    fn triangle() -> Complex {
        Complex::new(
            vec![point(&[0.0, 0.0]), point(&[1.0, 0.0]), point(&[0.5, 3f64.sqrt() / 2.0])],
            vec![vec![0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn edge_splits_at_midpoint() {
        let s = sd(&edge()).unwrap();
        assert_eq!(s.child.num_vertices(), 3);
        assert_eq!(s.child.vertex(2)[0], 0.5);
        assert_eq!(s.child.maximal().len(), 2);
    }

    #[test]
    fn triangle_counts_and_mesh() {
        let s = sd(&triangle()).unwrap();
        assert_eq!(s.child.num_vertices(), 7);
        assert_eq!(s.child.maximal().len(), 6);
        assert!(mesh_size(&s.child, None) <= 2.0 / 3.0 + 1e-12);
    }

    #[test]
    fn relative_edge_example() {
        let k = edge();
        let h = Subcomplex::generated_by([[0]]);
        let s = sd_mod(&k, &h).unwrap();
        let max: Vec<&[usize]> = s.child.maximal().iter().map(|&i| s.child.simplex(i)).collect();
        assert_eq!(max, vec![&[0, 2][..], &[1, 2][..]]);
    }

    #[test]
    fn modulo_everything_is_identity() {
        let k = triangle();
        let s = sd_mod(&k, &k.subcomplex_all()).unwrap();
        assert_eq!(s.child.simplices(), k.simplices());
        assert_eq!(s.child.vertices(), k.vertices());
    }

    #[test]
    fn iterates_and_mesh_halving() {
        let k = edge();
        assert_eq!(sd_iter(&k, &Subcomplex::empty(), 0).unwrap().child.simplices(), k.simplices());
        for times in 0..5 {
            let s = sd_iter(&k, &Subcomplex::empty(), times).unwrap();
            assert!((mesh_size(&s.child, None) - 0.5f64.powi(times as i32)).abs() < 1e-15);
        }
    }

    #[test]
    fn carriers_compose() {
        let k = triangle();
        let s = sd_iter(&k, &Subcomplex::empty(), 2).unwrap();
        let top = k.find(&[0, 1, 2]).unwrap();
        for &m in s.child.maximal() {
            assert_eq!(s.carrier_of(m), top);
        }
        for v in 0..3 {
            assert_eq!(s.carrier_of(s.child.vertex_simplex(v)), k.vertex_simplex(v));
        }
    }

    #[test]
    fn json_round_trip() {
        let s = sd(&triangle()).unwrap();
        let back = Subdivision::from_json(&s.to_json()).unwrap();
        assert_eq!(back.carriers(), s.carriers());
        assert_eq!(back.levels, 1);
    }
}
