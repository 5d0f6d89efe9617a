#![no_main]
use libfuzzer_sys::fuzz_target;
use spin_readout::config::parse_grid;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(values) = parse_grid(text) {
        assert!(!values.is_empty());
        assert!(values.len() <= 10_000_000);
    }
});
