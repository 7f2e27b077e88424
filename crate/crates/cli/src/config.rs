//! Run configuration: TOML file, command-line overrides, defaults and
//! validation.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use dklab_core::particles::integer_alpha;
use dklab_core::pgf::{IntervalSet, WeightedAtoms, MAX_SERIES_ORDER};
use dklab_core::{FourierFunction, TorusDomain};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Duality,
    Martingale,
    Pgf,
    Breakdown,
    VhjCheck,
}

impl Experiment {
    pub const ALL: [Self; 5] = [Self::Duality, Self::Martingale, Self::Pgf, Self::Breakdown, Self::VhjCheck];

    pub fn name(self) -> &'static str {
        match self {
            Self::Duality => "duality",
            Self::Martingale => "martingale",
            Self::Pgf => "pgf",
            Self::Breakdown => "breakdown",
            Self::VhjCheck => "vhj-check",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PgfMethod {
    #[default]
    Series,
    Limit,
}

/// `mean + Σ cos_k cos 2πkx + Σ sin_k sin 2πkx` with a label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub id: String,
    #[serde(default)]
    pub mean: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl FunctionSpec {
    pub fn new(id: &str, mean: f64, cos: &[f64], sin: &[f64]) -> Self {
        Self {
            id: id.to_string(),
            mean,
            cos: cos.to_vec(),
            sin: sin.to_vec(),
        }
    }

    pub fn to_fourier(&self) -> FourierFunction {
        FourierFunction::new(self.mean, self.cos.clone(), self.sin.clone())
    }
}

/// Density without a label, for `mu0.density`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    #[serde(default = "one")]
    pub mean: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

impl DensitySpec {
    pub fn to_fourier(&self) -> FourierFunction {
        FourierFunction::new(self.mean, self.cos.clone(), self.sin.clone())
    }
}

/// Initial measure: atoms (uniform weights unless given) or a density.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mu0Spec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensitySpec>,
}

impl Mu0Spec {
    pub fn atoms(positions: Vec<f64>) -> Self {
        Self {
            atoms: Some(positions),
            ..Self::default()
        }
    }

    /// Atoms with equal weights, if that is what this describes.
    pub fn uniform_atoms(&self) -> Option<&[f64]> {
        let atoms = self.atoms.as_deref()?;
        match &self.weights {
            None => Some(atoms),
            Some(w) if w.iter().all(|&x| x == w[0]) => Some(atoms),
            Some(_) => None,
        }
    }

    pub fn weighted_atoms(&self) -> Option<dklab_core::Result<WeightedAtoms>> {
        let atoms = self.atoms.clone()?;
        Some(match &self.weights {
            Some(w) => WeightedAtoms::new(atoms, w.clone()),
            None => WeightedAtoms::uniform(atoms),
        })
    }
}

/// TOML integers are signed 64-bit; seeds above `i64::MAX` are written as
/// decimal strings. Both forms are accepted on input.
pub mod seed_format {
    use serde::{de, Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(i64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*v) {
            Ok(i) => s.serialize_i64(i),
            Err(_) => s.serialize_str(&v.to_string()),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Int(i) => u64::try_from(i).map_err(|_| de::Error::custom("seed must be nonnegative")),
            Repr::Text(t) => t.parse().map_err(|_| de::Error::custom(format!("invalid seed {t:?}"))),
        }
    }

    pub mod option {
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &Option<u64>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(x) => super::serialize(x, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
            #[derive(Deserialize)]
            struct Wrap(#[serde(with = "super")] u64);
            Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
        }
    }
}

/// Contents of a configuration file. Every key is optional here; required
/// keys are enforced by [`RunConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub experiment: Option<Experiment>,
    pub alpha: Option<f64>,
    pub t: Option<f64>,
    pub replicates: Option<usize>,
    #[serde(default, with = "seed_format::option")]
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    pub output: Option<PathBuf>,
    pub mu0: Option<Mu0Spec>,
    pub functions: Option<Vec<FunctionSpec>>,
    pub set: Option<Vec<[f64; 2]>>,
    pub order: Option<usize>,
    pub method: Option<PgfMethod>,
    pub coverages: Option<Vec<f64>>,
    pub steps: Option<usize>,
    pub dt_fraction: Option<f64>,
    pub noise_scale: Option<f64>,
    pub min_hit_fraction: Option<f64>,
    pub random_functions: Option<usize>,
    pub dt0: Option<f64>,
    pub levels: Option<usize>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("configuration: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

/// Values given on the command line; they take precedence over the file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub t: Option<f64>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    pub output: Option<PathBuf>,
}

pub const DEFAULT_T: f64 = 0.05;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_GRID: usize = 256;
pub const DEFAULT_ORDER: usize = 10;
pub const DEFAULT_DT_FRACTION: f64 = 0.5;
pub const DEFAULT_MIN_HIT_FRACTION: f64 = 0.95;
pub const DEFAULT_RANDOM_FUNCTIONS: usize = 50;
pub const DEFAULT_DT0: f64 = 0.01;
pub const DEFAULT_LEVELS: usize = 4;
pub const DEFAULT_SET: [f64; 2] = [0.25, 0.75];
/// Smallest replicate count accepted for the duality test.
pub const MIN_DUALITY_REPLICATES: usize = 10_000;
/// Smallest replicate count accepted for the martingale test.
pub const MIN_MARTINGALE_REPLICATES: usize = 100;

fn default_replicates(e: Experiment) -> usize {
    match e {
        Experiment::Duality | Experiment::Martingale | Experiment::Pgf => 100_000,
        Experiment::Breakdown => 100,
        Experiment::VhjCheck => 0,
    }
}

fn default_steps(e: Experiment) -> usize {
    match e {
        Experiment::Breakdown => 10_000,
        _ => 200,
    }
}

fn default_functions(e: Experiment) -> Vec<FunctionSpec> {
    match e {
        Experiment::Martingale => vec![
            FunctionSpec::new("cos1", 0.0, &[1.0], &[]),
            FunctionSpec::new("mix", 0.0, &[0.3], &[0.0, 0.0, 0.2]),
        ],
        _ => dklab_core::duality::TestFunction::default_suite()
            .into_iter()
            .map(|tf| FunctionSpec {
                id: tf.id,
                mean: tf.f.mean(),
                cos: tf.f.cos_coeffs().to_vec(),
                sin: tf.f.sin_coeffs().to_vec(),
            })
            .collect(),
    }
}

fn default_mu0(e: Experiment, alpha: f64) -> Mu0Spec {
    match e {
        Experiment::Breakdown => Mu0Spec {
            density: Some(DensitySpec {
                mean: 1.0,
                cos: vec![],
                sin: vec![],
            }),
            ..Mu0Spec::default()
        },
        _ => match integer_alpha(alpha) {
            Ok(n) => Mu0Spec::atoms((0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()),
            Err(_) => Mu0Spec::atoms(vec![0.5]),
        },
    }
}

/// A fully resolved and validated configuration. This is what manifests
/// echo, so replaying one never depends on defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub alpha: f64,
    pub t: f64,
    pub replicates: usize,
    #[serde(with = "seed_format")]
    pub seed: u64,
    pub grid: usize,
    pub output: PathBuf,
    pub order: usize,
    pub method: PgfMethod,
    pub steps: usize,
    pub dt_fraction: f64,
    pub noise_scale: f64,
    pub min_hit_fraction: f64,
    pub random_functions: usize,
    pub dt0: f64,
    pub levels: usize,
    pub set: Vec<[f64; 2]>,
    pub coverages: Vec<f64>,
    pub mu0: Mu0Spec,
    pub functions: Vec<FunctionSpec>,
}

impl RunConfig {
    /// Merges `file` and `overrides` (which win) over the defaults of
    /// `experiment`, then validates.
    pub fn resolve(experiment: Experiment, file: Option<FileConfig>, overrides: &Overrides) -> Result<Self> {
        let file = file.unwrap_or_default();
        if let Some(e) = file.experiment {
            if e != experiment {
                return Err(CliError::invalid(
                    "experiment",
                    format!("file declares {e} but the {experiment} subcommand was used"),
                ));
            }
        }
        let alpha = overrides
            .alpha
            .or(file.alpha)
            .ok_or_else(|| CliError::invalid("alpha", "required but missing"))?;
        let cfg = Self {
            experiment,
            alpha,
            t: overrides.t.or(file.t).unwrap_or(DEFAULT_T),
            replicates: overrides
                .replicates
                .or(file.replicates)
                .unwrap_or(default_replicates(experiment)),
            seed: overrides.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            grid: overrides.grid.or(file.grid).unwrap_or(DEFAULT_GRID),
            output: overrides
                .output
                .clone()
                .or(file.output)
                .unwrap_or_else(|| PathBuf::from(format!("dklab-{experiment}.csv"))),
            order: file.order.unwrap_or(DEFAULT_ORDER),
            method: file.method.unwrap_or_default(),
            steps: file.steps.unwrap_or(default_steps(experiment)),
            dt_fraction: file.dt_fraction.unwrap_or(DEFAULT_DT_FRACTION),
            noise_scale: file.noise_scale.unwrap_or(1.0),
            min_hit_fraction: file.min_hit_fraction.unwrap_or(DEFAULT_MIN_HIT_FRACTION),
            random_functions: file.random_functions.unwrap_or(DEFAULT_RANDOM_FUNCTIONS),
            dt0: file.dt0.unwrap_or(DEFAULT_DT0),
            levels: file.levels.unwrap_or(DEFAULT_LEVELS),
            set: file.set.unwrap_or_else(|| vec![DEFAULT_SET]),
            coverages: file.coverages.unwrap_or_default(),
            mu0: file.mu0.unwrap_or_else(|| default_mu0(experiment, alpha)),
            functions: file.functions.unwrap_or_else(|| default_functions(experiment)),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every constraint before anything is computed.
    pub fn validate(&self) -> Result<()> {
        let e = self.experiment;
        check(self.alpha.is_finite() && self.alpha > 0.0, "alpha", "must be positive and finite")?;
        if matches!(e, Experiment::Duality | Experiment::Martingale) {
            integer_alpha(self.alpha).map_err(|err| CliError::invalid("alpha", err.to_string()))?;
        }
        match e {
            Experiment::Duality => check(self.t.is_finite() && self.t >= 0.0, "t", "must be finite and nonnegative")?,
            _ => check(self.t.is_finite() && self.t > 0.0, "t", "must be positive and finite")?,
        }
        let min_replicates = match e {
            Experiment::Duality => MIN_DUALITY_REPLICATES,
            Experiment::Martingale => MIN_MARTINGALE_REPLICATES,
            Experiment::Breakdown => 1,
            Experiment::Pgf | Experiment::VhjCheck => 0,
        };
        check(
            self.replicates >= min_replicates,
            "replicates",
            format!("must be at least {min_replicates} for {e}"),
        )?;
        check(self.replicates <= u32::MAX as usize, "replicates", "must fit in 32 bits")?;
        TorusDomain::new(self.grid).map_err(|err| CliError::invalid("grid", err.to_string()))?;
        check(
            !self.output.as_os_str().is_empty() && self.output.file_name().is_some(),
            "output",
            "must name a file",
        )?;
        check(
            (1..=MAX_SERIES_ORDER).contains(&self.order),
            "order",
            format!("must be in 1..={MAX_SERIES_ORDER}"),
        )?;
        check(self.steps >= 1, "steps", "must be at least 1")?;
        check(
            self.dt_fraction > 0.0 && self.dt_fraction <= 1.0,
            "dt_fraction",
            "must be in (0, 1]",
        )?;
        check(
            self.noise_scale.is_finite() && self.noise_scale >= 0.0,
            "noise_scale",
            "must be finite and nonnegative",
        )?;
        check(
            (0.0..=1.0).contains(&self.min_hit_fraction),
            "min_hit_fraction",
            "must be in [0, 1]",
        )?;
        check(self.levels >= 2, "levels", "must be at least 2")?;
        if e == Experiment::VhjCheck {
            check(self.dt0 > 0.0 && self.dt0 < self.t, "dt0", "must be positive and below t")?;
        }
        for &c in &self.coverages {
            check(c > 0.0 && c < 1.0, "coverages", "each coverage must be in (0, 1)")?;
        }
        let arcs: Vec<(f64, f64)> = self.set.iter().map(|a| (a[0], a[1])).collect();
        IntervalSet::new(&arcs).map_err(|err| CliError::invalid("set", err.to_string()))?;
        self.validate_functions()?;
        self.validate_mu0()
    }

    fn validate_functions(&self) -> Result<()> {
        let needs_functions = matches!(
            self.experiment,
            Experiment::Duality | Experiment::Martingale | Experiment::VhjCheck
        );
        check(
            !needs_functions || !self.functions.is_empty() || self.random_functions > 0,
            "functions",
            "must not be empty",
        )?;
        let mut seen = HashSet::new();
        for f in &self.functions {
            check(
                !f.id.is_empty() && f.id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)),
                "functions.id",
                format!("{:?} must be nonempty and use only [A-Za-z0-9-_.]", f.id),
            )?;
            check(seen.insert(f.id.as_str()), "functions.id", format!("{:?} is repeated", f.id))?;
            check(
                f.to_fourier().is_finite(),
                "functions",
                format!("{} has non-finite coefficients", f.id),
            )?;
        }
        Ok(())
    }

    fn validate_mu0(&self) -> Result<()> {
        let mu0 = &self.mu0;
        match (&mu0.atoms, &mu0.density) {
            (Some(_), Some(_)) => return Err(CliError::invalid("mu0", "give either atoms or density, not both")),
            (None, None) => return Err(CliError::invalid("mu0", "needs atoms or density")),
            (None, Some(_)) if mu0.weights.is_some() => {
                return Err(CliError::invalid("mu0.weights", "only allowed with atoms"))
            }
            _ => {}
        }
        if let Some(d) = &mu0.density {
            let rho = d.to_fourier();
            check(rho.is_finite(), "mu0.density", "has non-finite coefficients")?;
            if self.experiment != Experiment::Breakdown {
                let dom = TorusDomain::new(self.grid).expect("validated");
                let (lo, _) = rho.grid_extrema(&dom, 4);
                check(lo >= 0.0, "mu0.density", "must be nonnegative")?;
                check((d.mean - 1.0).abs() <= 1e-12, "mu0.density.mean", "must be 1")?;
            }
            check(
                !matches!(self.experiment, Experiment::Duality | Experiment::Martingale),
                "mu0",
                format!("{} needs atoms", self.experiment),
            )?;
        }
        if let Some(res) = mu0.weighted_atoms() {
            res.map_err(|err| CliError::invalid("mu0", err.to_string()))?;
            check(
                self.experiment != Experiment::Breakdown,
                "mu0",
                "breakdown needs a density",
            )?;
        }
        if matches!(self.experiment, Experiment::Duality | Experiment::Martingale) {
            let n = integer_alpha(self.alpha).expect("validated");
            let atoms = mu0
                .uniform_atoms()
                .ok_or_else(|| CliError::invalid("mu0.weights", "must be equal for a particle system"))?;
            check(
                atoms.len() == n,
                "mu0.atoms",
                format!("alpha = {n} requires exactly {n} atoms, got {}", atoms.len()),
            )?;
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

fn check(ok: bool, field: &str, reason: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::invalid(field, reason))
    }
}
