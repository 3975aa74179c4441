#![no_main]

use hardrods_cli::config::RunConfig;
use libfuzzer_sys::fuzz_target;

// The config file is the one surface that parses untrusted input: parsing
// and validation must never panic, whatever the bytes.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = RunConfig::from_toml(text) {
            let _ = cfg.validate();
        }
    }
});
