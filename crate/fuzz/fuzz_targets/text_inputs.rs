#![no_main]
use libfuzzer_sys::fuzz_target;

use qdelab_core::arith::{parse_exp, parse_q};
use qdelab_core::models::partition::Partition;
use qdelab_core::wall::farey::Interval;

fuzz_target!(|data: &str| {
    if let Ok(e) = parse_exp(data) {
        assert_eq!(parse_exp(&e.to_string()).unwrap(), e);
    }
    let _ = parse_q(data);
    if let Ok(iv) = data.parse::<Interval>() {
        assert!(iv.lo <= iv.hi);
    }
    if let Ok(p) = data.parse::<Partition>() {
        assert_eq!(p.to_string().parse::<Partition>().unwrap(), p);
    }
});
