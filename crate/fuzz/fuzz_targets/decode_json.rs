#![no_main]
use libfuzzer_sys::fuzz_target;

use qdelab_core::arith::json::{
    decode_field_matrix, decode_rf, decode_series, field_matrix_to_json, rf_to_json, series_to_json,
};

fuzz_target!(|data: &str| {
    if let Ok(f) = decode_rf(data) {
        let text = serde_json::to_string(&rf_to_json(&f)).unwrap();
        assert_eq!(decode_rf(&text).unwrap(), f);
    }
    if let Ok(s) = decode_series(data) {
        let text = serde_json::to_string(&series_to_json(&s)).unwrap();
        assert_eq!(decode_series(&text).unwrap(), s);
    }
    if let Ok(m) = decode_field_matrix(data) {
        let text = serde_json::to_string(&field_matrix_to_json(&m)).unwrap();
        assert_eq!(decode_field_matrix(&text).unwrap(), m);
    }
});
