#![no_main]
use libfuzzer_sys::fuzz_target;
use spin_readout::config::{parse_params, parse_params_file, ParamsFile};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_params(text) {
        assert!(p.validate().is_ok());
        // accepted files survive a trip through the canonical form
        let again = parse_params(&ParamsFile::from_params(&p).canonical_json());
        assert!(again.is_ok());
    }
    if let Err(e) = parse_params_file(text) {
        let _ = e.to_string();
    }
});
