#![no_main]
use libfuzzer_sys::fuzz_target;

use qdelab_core::arith::parse::parse_rf;

fuzz_target!(|data: &str| {
    if let Ok(f) = parse_rf(data) {
        let again = parse_rf(&f.to_string()).expect("display output parses");
        assert_eq!(again, f);
    }
});
