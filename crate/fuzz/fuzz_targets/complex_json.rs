#![no_main]

use libfuzzer_sys::fuzz_target;
use plsmooth::Complex;

fuzz_target!(|data: &str| {
    let Ok(k) = Complex::from_json_str(data) else { return };
    // anything accepted must survive a round trip unchanged
    let back = Complex::from_json(&k.to_json()).expect("reload of a valid complex");
    assert_eq!(back.simplices(), k.simplices());
    assert_eq!(back.vertices(), k.vertices());
    if k.num_simplices() > 0 {
        let _ = k.locate(&k.barycenter(0));
    }
});
