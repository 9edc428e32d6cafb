#![no_main]

use libfuzzer_sys::fuzz_target;
use plsmooth::maps::{MapEvaluator, WeaklySimplicialMap};

fuzz_target!(|data: &str| {
    let Ok(g) = WeaklySimplicialMap::from_json_str(data) else { return };
    let back = WeaklySimplicialMap::from_json(&g.to_json()).expect("reload of a valid map");
    assert_eq!(back.vertex_image(), g.vertex_image());
    assert_eq!(back.levels(), g.levels());
    let k = g.source();
    for id in 0..k.num_simplices().min(8) {
        let _ = g.eval(&k.barycenter(id));
    }
});
