//! Run manifests and replay.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{Experiment, RunConfig};
use crate::error::{exit, CliError, Result};
use crate::experiments::{run_experiment, CheckVerdict, SeedRecord};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Structured-text record of one run, sufficient to reproduce its results
/// table bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub version: String,
    pub experiment: Experiment,
    pub wall_time_seconds: f64,
    pub passed: bool,
    /// Results table, relative to the manifest's directory.
    pub results: PathBuf,
    pub results_sha256: String,
    pub verdicts: Vec<CheckVerdict>,
    pub seeds: Vec<SeedRecord>,
    pub config: RunConfig,
}

impl RunManifest {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("manifest: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// `results.csv` → `results.manifest.toml`, next to it.
pub fn manifest_path(results: &Path) -> PathBuf {
    results.with_extension("manifest.toml")
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub results_path: PathBuf,
    pub manifest_path: PathBuf,
    pub manifest: RunManifest,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.manifest.passed {
            exit::PASS
        } else {
            exit::STATISTICAL_FAIL
        }
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Runs the experiment and writes the results table and its manifest.
pub fn run_and_record(cfg: &RunConfig) -> Result<RunSummary> {
    let start = Instant::now();
    let outcome = run_experiment(cfg)?;
    let csv = outcome.table.to_csv();
    let results_path = cfg.output.clone();
    let manifest_path = manifest_path(&results_path);
    let manifest = RunManifest {
        version: VERSION.to_string(),
        experiment: cfg.experiment,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        passed: outcome.passed(),
        results: PathBuf::from(results_path.file_name().expect("validated")),
        results_sha256: sha256_hex(csv.as_bytes()),
        verdicts: outcome.verdicts,
        seeds: outcome.seeds,
        config: cfg.clone(),
    };
    write(&results_path, csv.as_bytes())?;
    write(&manifest_path, manifest.to_toml().as_bytes())?;
    Ok(RunSummary {
        results_path,
        manifest_path,
        manifest,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub results_path: PathBuf,
    pub recorded_sha256: String,
    pub replayed_sha256: String,
    /// 1-based line number and the two differing lines.
    pub first_difference: Option<(usize, String, String)>,
}

impl ReplayReport {
    pub fn identical(&self) -> bool {
        self.first_difference.is_none() && self.recorded_sha256 == self.replayed_sha256
    }

    pub fn exit_code(&self) -> i32 {
        if self.identical() {
            exit::PASS
        } else {
            exit::STATISTICAL_FAIL
        }
    }
}

fn first_difference(a: &str, b: &str) -> Option<(usize, String, String)> {
    if a == b {
        return None;
    }
    let mut la = a.lines();
    let mut lb = b.lines();
    for line in 1.. {
        match (la.next(), lb.next()) {
            (Some(x), Some(y)) if x == y => continue,
            (None, None) => return Some((line, "<trailing bytes differ>".into(), String::new())),
            (x, y) => {
                let show = |v: Option<&str>| v.unwrap_or("<end of file>").to_string();
                return Some((line, show(x), show(y)));
            }
        }
    }
    unreachable!()
}

/// Re-runs the configuration recorded in `manifest_path` and diffs the
/// regenerated table against the recorded one byte for byte.
pub fn replay(manifest_path: &Path) -> Result<ReplayReport> {
    let manifest = RunManifest::load(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new(""));
    let results_path = dir.join(&manifest.results);
    let recorded = std::fs::read(&results_path).map_err(|e| CliError::io(&results_path, e))?;
    let replayed = run_experiment(&manifest.config)?.table.to_csv();
    let recorded_text = String::from_utf8_lossy(&recorded);
    let mut first = first_difference(&recorded_text, &replayed);
    if first.is_none() && sha256_hex(&recorded) != manifest.results_sha256 {
        first = Some((0, "<recorded file does not match the manifest digest>".into(), String::new()));
    }
    Ok(ReplayReport {
        results_path,
        recorded_sha256: manifest.results_sha256,
        replayed_sha256: sha256_hex(replayed.as_bytes()),
        first_difference: first,
    })
}
