#![no_main]

use libfuzzer_sys::fuzz_target;
use plsmooth::Subdivision;

fuzz_target!(|data: &str| {
    let Ok(s) = Subdivision::from_json_str(data) else { return };
    let back = Subdivision::from_json(&s.to_json()).expect("reload of a valid subdivision");
    assert_eq!(back.carriers(), s.carriers());
    assert_eq!(back.child.simplices(), s.child.simplices());
});
