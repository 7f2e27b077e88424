//! Argument parsing and dispatch for the `dklab` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Experiment, FileConfig, Overrides, RunConfig};
use crate::error::{exit, CliError, Result};
use crate::manifest::{replay, run_and_record};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "DKLAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "dklab", version, about = "Numerical laboratory for the Dean-Kawasaki equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo check of the Laplace duality against Cole-Hopf.
    Duality(RunArgs),
    /// Martingale and quadratic variation statistics of the particle solution.
    Martingale(RunArgs),
    /// Generating-function analysis of the occupation number.
    Pgf(RunArgs),
    /// First-negativity ensemble of the naive SPDE scheme.
    Breakdown(RunArgs),
    /// Residual order, extremum principles and gradient estimate of V_t f.
    #[command(name = "vhj-check")]
    VhjCheck(RunArgs),
    /// Re-run a manifest and compare its results table byte for byte.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "R", allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long = "t", value_name = "R", allow_negative_numbers = true)]
    pub t: Option<f64>,
    #[arg(long, value_name = "N")]
    pub replicates: Option<usize>,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "N")]
    pub grid: Option<usize>,
    /// Results table; the manifest is written next to it.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            alpha: self.alpha,
            t: self.t,
            replicates: self.replicates,
            seed: self.seed,
            grid: self.grid,
            output: self.out.clone(),
        }
    }

    pub fn resolve(&self, experiment: Experiment) -> Result<RunConfig> {
        let file = self.config.as_deref().map(FileConfig::load).transpose()?;
        RunConfig::resolve(experiment, file, &self.overrides())
    }
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Manifest written by a previous run.
    #[arg(value_name = "MANIFEST")]
    pub manifest: PathBuf,
}

/// Parses `DKLAB_THREADS`: a positive integer, or `max`/`0` for all cores.
pub fn thread_count(value: Option<&str>) -> Result<usize> {
    let all = || std::thread::available_parallelism().map_or(1, |n| n.get());
    match value.map(str::trim) {
        None | Some("") | Some("max") | Some("0") => Ok(all()),
        Some(v) => v
            .parse::<usize>()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a positive integer or \"max\", got {v:?}"))),
    }
}

fn execute(command: &Command, out: &mut dyn Write) -> Result<i32> {
    let (experiment, args) = match command {
        Command::Duality(a) => (Experiment::Duality, a),
        Command::Martingale(a) => (Experiment::Martingale, a),
        Command::Pgf(a) => (Experiment::Pgf, a),
        Command::Breakdown(a) => (Experiment::Breakdown, a),
        Command::VhjCheck(a) => (Experiment::VhjCheck, a),
        Command::Replay(r) => {
            let report = replay(&r.manifest)?;
            if report.identical() {
                let _ = writeln!(out, "replay: identical {} sha256 {}", report.results_path.display(), report.replayed_sha256);
            } else {
                let _ = writeln!(out, "replay: MISMATCH {}", report.results_path.display());
                if let Some((line, a, b)) = &report.first_difference {
                    let _ = writeln!(out, "  line {line}\n  recorded: {a}\n  replayed: {b}");
                }
            }
            return Ok(report.exit_code());
        }
    };
    let cfg = args.resolve(experiment)?;
    let summary = run_and_record(&cfg)?;
    let m = &summary.manifest;
    let passed = m.verdicts.iter().filter(|v| v.passed).count();
    let _ = writeln!(
        out,
        "{experiment}: {} ({passed}/{} checks) results {} manifest {}",
        if m.passed { "pass" } else { "FAIL" },
        m.verdicts.len(),
        summary.results_path.display(),
        summary.manifest_path.display()
    );
    for v in m.verdicts.iter().filter(|v| !v.passed) {
        let _ = writeln!(out, "  failed {}: {}", v.name, v.detail);
    }
    Ok(summary.exit_code())
}

/// Full entry point: parses `args`, runs inside a thread pool sized by
/// `threads_env`, and returns the exit code.
pub fn run_cli<I, T>(args: I, threads_env: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::PASS };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = thread_count(threads_env).and_then(|n| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
        let mut buf = Vec::new();
        let code = pool.install(|| execute(&cli.command, &mut buf));
        let _ = out.write_all(&buf);
        code
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
