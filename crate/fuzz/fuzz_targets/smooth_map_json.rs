#![no_main]

use libfuzzer_sys::fuzz_target;
use plsmooth::maps::MapEvaluator;
use plsmooth::smoothing::SmoothMap;

fuzz_target!(|data: &str| {
    let Ok(h) = SmoothMap::from_json_str(data) else { return };
    let k = h.covering().complex();
    for id in 0..k.num_simplices().min(8) {
        // evaluation may fail with an error, never a panic
        let _ = h.eval(&k.barycenter(id));
    }
});
