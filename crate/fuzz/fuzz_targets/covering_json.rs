#![no_main]

use libfuzzer_sys::fuzz_target;
use plsmooth::covering::Covering;

fuzz_target!(|data: &str| {
    let Ok(c) = Covering::from_json_str(data) else { return };
    let back = Covering::from_json(&c.to_json()).expect("reload of a valid covering");
    assert_eq!(back.records(), c.records());
    let k = c.complex();
    for id in 0..k.num_simplices().min(8) {
        let x = k.barycenter(id);
        let _ = c.active(&x);
        let _ = c.retract(id, &x);
    }
});
