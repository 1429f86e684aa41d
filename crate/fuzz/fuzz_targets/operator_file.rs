#![no_main]
use libfuzzer_sys::fuzz_target;

use qdelab_core::arith::json::decode_json;
use qdelab_core::models::{ExternalOperator, ManifestJson, Model};

fuzz_target!(|data: &str| {
    let _ = ExternalOperator::from_json_str(data);
    if let Ok(m) = decode_json::<ManifestJson>(data) {
        match (m.kind.as_str(), m.n) {
            ("hilb", Some(n)) if n <= 6 => {
                let _ = Model::hilb(n);
            }
            (other, _) => {
                let _ = Model::builtin(other);
            }
        }
    }
});
