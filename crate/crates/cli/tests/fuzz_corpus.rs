//! Runs the fuzz target properties over the checked-in corpus seeds.

use std::path::{Path, PathBuf};

use clap::Parser;
use dklab_cli::cli::{thread_count, Cli};
use dklab_cli::{Experiment, FileConfig, Overrides, RunConfig, RunManifest};

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let text = std::fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "{target} corpus is empty");
    out
}

#[test]
fn config_seeds_round_trip() {
    let mut resolved = 0;
    for (path, text) in seeds("config_parse") {
        let Ok(file) = FileConfig::parse(&text) else {
            continue;
        };
        let experiments = file.experiment.map_or(Experiment::ALL.to_vec(), |e| vec![e]);
        for e in experiments {
            if let Ok(cfg) = RunConfig::resolve(e, Some(file.clone()), &Overrides::default()) {
                let echoed = FileConfig::parse(&cfg.to_toml()).unwrap();
                let again = RunConfig::resolve(e, Some(echoed), &Overrides::default())
                    .unwrap_or_else(|err| panic!("{}: {err}", path.display()));
                assert_eq!(again, cfg, "{}", path.display());
                resolved += 1;
            }
        }
    }
    assert!(resolved >= 6);
}

#[test]
fn manifest_seeds_round_trip() {
    for (path, text) in seeds("manifest_parse") {
        let m = RunManifest::parse(&text).unwrap_or_else(|err| panic!("{}: {err}", path.display()));
        assert_eq!(RunManifest::parse(&m.to_toml()).unwrap(), m);
    }
}

#[test]
fn cli_seeds_do_not_panic() {
    let mut parsed = 0;
    for (_, text) in seeds("cli_args") {
        if Cli::try_parse_from(std::iter::once("dklab").chain(text.split('\n'))).is_ok() {
            parsed += 1;
        }
        let _ = thread_count(Some(&text));
    }
    assert!(parsed >= 4);
}
