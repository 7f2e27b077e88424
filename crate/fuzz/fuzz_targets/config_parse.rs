#![no_main]

use dklab_cli::{Experiment, FileConfig, Overrides, RunConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(file) = FileConfig::parse(text) else {
        return;
    };
    let experiments = match file.experiment {
        Some(e) => vec![e],
        None => Experiment::ALL.to_vec(),
    };
    for e in experiments {
        if let Ok(cfg) = RunConfig::resolve(e, Some(file.clone()), &Overrides::default()) {
            let echoed = FileConfig::parse(&cfg.to_toml()).expect("resolved config re-parses");
            let again = RunConfig::resolve(e, Some(echoed), &Overrides::default()).expect("resolved config re-validates");
            assert_eq!(again.to_toml(), cfg.to_toml());
        }
    }
});
