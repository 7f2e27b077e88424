#![no_main]

use clap::Parser;
use dklab_cli::cli::Cli;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let args = std::iter::once("dklab").chain(text.split('\n'));
    let _ = Cli::try_parse_from(args);
    let _ = dklab_cli::cli::thread_count(Some(text));
});
