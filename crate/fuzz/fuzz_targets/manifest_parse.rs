#![no_main]

use dklab_cli::RunManifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = RunManifest::parse(text) {
        let again = RunManifest::parse(&m.to_toml()).expect("manifest re-parses");
        assert_eq!(again.results_sha256, m.results_sha256);
    }
});
