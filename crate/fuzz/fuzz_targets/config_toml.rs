#![no_main]
use libfuzzer_sys::fuzz_target;

use std::path::Path;

use qdelab_cli::config::Config;

fuzz_target!(|data: &str| {
    if let Ok(c) = Config::from_toml(data, Path::new("fuzz.toml")) {
        let _ = c.validate();
    }
});
