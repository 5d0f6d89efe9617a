#![no_main]
use clap::Parser;
use libfuzzer_sys::fuzz_target;
use spin_readout_cli::Cli;

// NUL-separated argument vectors; parsing only, nothing is executed
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let args = std::iter::once("spin-readout").chain(text.split('\0'));
    let _ = Cli::try_parse_from(args);
});
