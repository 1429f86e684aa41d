#![no_main]
use libfuzzer_sys::fuzz_target;

use qdelab_core::arith::json::decode_json;
use qdelab_core::qde::{FundamentalSolution, QDESystem, SolutionJson, SystemJson};

fuzz_target!(|data: &str| {
    if let Ok(j) = decode_json::<SystemJson>(data) {
        if let Ok(sys) = QDESystem::from_json(&j) {
            assert_eq!(QDESystem::from_json(&sys.to_json()).unwrap(), sys);
        }
    }
    if let Ok(j) = decode_json::<SolutionJson>(data) {
        let _ = FundamentalSolution::from_json(&j);
    }
});
