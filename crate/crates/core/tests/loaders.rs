//! Structured perturbations of valid documents. The loaders must either accept the input or
//! return an error; evaluating whatever they accept must not panic either.

use plsmooth::analytic::Polynomial;
use plsmooth::covering::{build_covering, CoverOptions, Covering};
use plsmooth::fixtures;
use plsmooth::maps::{degree2_circle, zeeman_relative, MapEvaluator, WeaklySimplicialMap, ZeemanOptions};
use plsmooth::smoothing::{identity_smoother, SmoothMap, SmoothOptions};
use plsmooth::subdivision::{sd, Subdivision};
use plsmooth::{Complex, Subcomplex};
use proptest::prelude::*;
use serde_json::Value;

fn coordinate() -> impl Strategy<Value = f64> {
    prop_oneof![
        -2.0..2.0f64,
        Just(0.0),
        Just(1e-300),
        Just(-1e308),
        Just(1e308),
        (-3i32..3).prop_map(f64::from),
    ]
}

/// Rewrites number leaves: the `k`-th number visited gets `pick(k)` when selected.
fn perturb(v: &mut Value, picks: &[(usize, f64)], counter: &mut usize) {
    match v {
        Value::Number(n) => {
            if let Some(&(_, x)) = picks.iter().find(|(k, _)| *k == *counter) {
                *v = if n.is_u64() && x.fract() == 0.0 && x >= 0.0 && x < 64.0 {
                    Value::from(x as u64)
                } else if let Some(f) = serde_json::Number::from_f64(x) {
                    Value::Number(f)
                } else {
                    Value::Null
                };
            }
            *counter += 1;
        }
        Value::Array(items) => items.iter_mut().for_each(|i| perturb(i, picks, counter)),
        Value::Object(map) => map.values_mut().for_each(|i| perturb(i, picks, counter)),
        _ => {}
    }
}

fn mutate(doc: &Value, picks: &[(usize, f64)]) -> String {
    let mut d = doc.clone();
    perturb(&mut d, picks, &mut 0);
    d.to_string()
}

fn picks() -> impl Strategy<Value = Vec<(usize, f64)>> {
    prop::collection::vec((0usize..400, coordinate()), 1..6)
}

fn fast_smooth() -> SmoothOptions {
    SmoothOptions {
        cover: CoverOptions { density: 100, seed: 0 },
        ..SmoothOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn complex_loader(p in picks()) {
        let doc = serde_json::to_value(fixtures::two_triangles().to_json()).unwrap();
        if let Ok(k) = Complex::from_json_str(&mutate(&doc, &p)) {
            for id in 0..k.num_simplices() {
                let _ = k.locate(&k.barycenter(id));
            }
        }
    }

    #[test]
    fn subdivision_loader(p in picks()) {
        let doc = serde_json::to_value(sd(&fixtures::triangle()).unwrap().to_json()).unwrap();
        let _ = Subdivision::from_json_str(&mutate(&doc, &p));
    }

    #[test]
    fn covering_loader(p in picks()) {
        let k = fixtures::interval3();
        let cov = build_covering(&k, &|_| 0.2, &CoverOptions { density: 100, seed: 0 }).unwrap();
        let doc = serde_json::to_value(cov.to_json()).unwrap();
        if let Ok(c) = Covering::from_json_str(&mutate(&doc, &p)) {
            let k = c.complex();
            for id in 0..k.num_simplices() {
                let x = k.barycenter(id);
                let _ = c.active(&x);
                let _ = c.retract(id, &x);
            }
        }
    }

    #[test]
    fn map_loader(p in picks()) {
        let k = fixtures::square_circle(1.0);
        let z = zeeman_relative(&degree2_circle(1.0), &k, &Subcomplex::empty(), &k, 0.5, &ZeemanOptions {
            density: 100,
            ..ZeemanOptions::default()
        })
        .unwrap();
        let doc = serde_json::to_value(z.map.to_json()).unwrap();
        if let Ok(g) = WeaklySimplicialMap::from_json_str(&mutate(&doc, &p)) {
            for id in 0..g.source().num_simplices() {
                let _ = g.eval(&g.source().barycenter(id));
            }
        }
    }

    #[test]
    fn smooth_map_loader(p in picks()) {
        let h = identity_smoother(&fixtures::edge(), 0.2, &fast_smooth()).unwrap();
        let doc = serde_json::to_value(h.to_json().unwrap()).unwrap();
        if let Ok(h) = SmoothMap::from_json_str(&mutate(&doc, &p)) {
            let k = h.covering().complex();
            for id in 0..k.num_simplices() {
                let _ = h.eval(&k.barycenter(id));
            }
        }
    }

    #[test]
    fn polynomial_parser(s in "[-+*^x0-9. e,]{0,40}") {
        if let Ok(p) = Polynomial::parse(&s) {
            let x = vec![0.5; p.vars];
            let _ = p.eval(&x);
            prop_assert_eq!(p.gradient(&x).len(), p.vars);
        }
    }
}
