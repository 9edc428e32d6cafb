#![no_main]

use libfuzzer_sys::fuzz_target;
use plsmooth::analytic::{singular_lift, Polynomial, SingularEmbedding};

fuzz_target!(|data: &str| {
    let Ok(p) = Polynomial::parse(data) else { return };
    let x = vec![0.5; p.vars];
    let v = p.eval(&x);
    let g = p.gradient(&x);
    assert_eq!(g.len(), p.vars);
    if v.is_finite() && g.iter().all(|d| d.is_finite()) {
        let e = SingularEmbedding::new(p);
        if let Ok(lift) = singular_lift(&e, &x, 0.25) {
            assert_eq!(e.project(&lift), [x.as_slice(), &[0.25]].concat());
        }
    }
});
