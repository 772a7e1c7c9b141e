//! Plain-text run configuration: one `key = value` per line, `#` comments.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use cfs_core::gaussian::FouSpec;
use cfs_core::jumps::{BnsSpec, CtmcSpec, SubordinatorSpec};
use cfs_core::models::{Conditioning, Integrand, ModelKind, ModelSpec, ModelTag, PathCoefficient, Profile, VolDriver};
use cfs_core::smallball::Monitoring;
use cfs_core::suite::ReportFormat;
use cfs_core::TimeGrid;

use crate::error::CliError;

type Result<T> = std::result::Result<T, CliError>;

/// Keys every command accepts.
pub const COMMON_KEYS: &[&str] = &[
    "seed",
    "reps",
    "workers",
    "out",
    "format",
    "t_end",
    "n_steps",
    "conditioning",
    "monitoring",
    "model",
    "log_space",
    "name",
];

pub const SMALLBALL_KEYS: &[&str] = &["t_frac", "epsilon", "target", "amplitude", "n_segments"];

pub const BATTERY_KEYS: &[&str] = &["preset", "t_fracs", "eps_factors", "amplitude", "n_segments"];

pub const DEFAULT_N_STEPS: usize = 1024;

/// Parameter keys of a model family.
pub fn model_keys(tag: ModelTag) -> &'static [&'static str] {
    match tag {
        ModelTag::MixedFbm => &["hurst", "fbm_scale"],
        ModelTag::WienerIntegral => &["drift", "k", "k_slope", "k_hurst", "k_vol"],
        ModelTag::SvPrice => &["p0", "mu", "rho", "sigma", "kappa", "theta", "xi", "v0"],
        ModelTag::BnsPrice => {
            &["p0", "mu", "lambda", "jump_rate", "jump_size_rate", "gamma_shape", "gamma_rate", "window"]
        }
        ModelTag::ComteRenaultPrice => &["p0", "mu", "hurst", "alpha", "vol", "v0"],
        ModelTag::RegimePrice => &["p0", "mu", "levels", "generator", "initial"],
        ModelTag::SdePrice => &["p0", "mu_ratio", "sigma_ratio", "sigma_base", "sigma_slope", "mu_bar", "sigma_bar"],
        ModelTag::DoleansCe | ModelTag::BridgeCe => &[],
        ModelTag::ExpDriftPrice => &["f", "g"],
    }
}

/// Raw key-value pairs from the file, overlaid with command-line flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`, got {line:?}", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(CliError::Config(format!("line {}: empty key", n + 1)));
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(CliError::Config(format!("line {}: key `{key}` given twice", n + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets `key`, replacing any value from the file.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| CliError::Config(format!("key `{key}`: cannot parse {v:?}"))))
            .transpose()
    }

    pub fn parsed_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    pub fn parsed_req<T: FromStr>(&self, key: &str) -> Result<T> {
        self.require(key)?;
        Ok(self.parsed(key)?.expect("present"))
    }

    /// Comma-separated list of numbers.
    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key).map(|v| parse_list(key, v)).transpose()
    }

    /// Fails on the first key outside `allowed`.
    pub fn check_known(&self, allowed: &[&str]) -> Result<()> {
        match self.entries.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::Config(format!("unknown key `{k}`"))),
            None => Ok(()),
        }
    }
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| CliError::Config(format!("key `{key}`: bad number {x:?}"))))
        .collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::Config(format!("key `{key}`: expected true or false, got {v:?}"))),
    }
}

/// Settings shared by every estimating command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub reps: u64,
    pub workers: Option<usize>,
    pub out: PathBuf,
    pub format: ReportFormat,
    pub grid: TimeGrid<f64>,
    pub conditioning: Conditioning,
    pub monitoring: Monitoring,
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let seed = raw.parsed_req("seed")?;
        let reps = raw.parsed_req("reps")?;
        let workers = raw.parsed::<usize>("workers")?;
        if workers == Some(0) {
            return Err(CliError::Config("key `workers` must be ≥ 1".into()));
        }
        let out = PathBuf::from(raw.get("out").unwrap_or("."));
        if !out.is_dir() {
            return Err(CliError::Config(format!("output directory {} does not exist", out.display())));
        }
        let format = match raw.get("format") {
            None => ReportFormat::Csv,
            Some(f) => ReportFormat::parse(f)
                .ok_or_else(|| CliError::Config(format!("key `format`: expected csv, json or plotdata, got {f:?}")))?,
        };
        let t_end = raw.parsed_or("t_end", 1.0)?;
        let n_steps = raw.parsed_or("n_steps", DEFAULT_N_STEPS)?;
        let grid = TimeGrid::new(0.0, t_end, n_steps)?;
        let conditioning = match raw.get("conditioning") {
            None => Conditioning::default(),
            Some(c) => Conditioning::parse(c)
                .ok_or_else(|| CliError::Config(format!("key `conditioning`: expected fixed or redraw, got {c:?}")))?,
        };
        let monitoring = match raw.get("monitoring") {
            None => Monitoring::default(),
            Some(m) => Monitoring::parse(m)
                .ok_or_else(|| CliError::Config(format!("key `monitoring`: expected bridge or grid, got {m:?}")))?,
        };
        Ok(Self { seed, reps, workers, out, format, grid, conditioning, monitoring })
    }
}

/// The model tag named by `model`, if any.
pub fn model_tag(raw: &RawConfig) -> Result<Option<ModelTag>> {
    raw.get("model")
        .map(|m| ModelTag::parse(m).ok_or_else(|| CliError::Config(format!("unknown model tag {m:?}"))))
        .transpose()
}

/// Builds the model described by `model` and its parameter keys.
pub fn model_spec(raw: &RawConfig, tag: ModelTag) -> Result<ModelSpec> {
    let f = |key: &str, default: f64| raw.parsed_or(key, default);
    let req = |key: &str| raw.parsed_req::<f64>(key);
    let kind = match tag {
        ModelTag::MixedFbm => ModelKind::MixedFbm { hurst: req("hurst")?, fbm_scale: f("fbm_scale", 1.0)? },
        ModelTag::WienerIntegral => {
            let drift = Profile::Constant(f("drift", 0.0)?);
            let integrand = if raw.contains("k_hurst") || raw.contains("k_vol") {
                Integrand::ExpFbm { hurst: req("k_hurst")?, vol: req("k_vol")? }
            } else {
                let (k, slope) = (f("k", 1.0)?, f("k_slope", 0.0)?);
                Integrand::Deterministic(if slope == 0.0 {
                    Profile::Constant(k)
                } else {
                    Profile::Affine { intercept: k, slope }
                })
            };
            ModelKind::WienerIntegral { drift, integrand }
        }
        ModelTag::SvPrice => {
            let vol = if raw.contains("sigma") {
                VolDriver::Constant { sigma: req("sigma")? }
            } else {
                VolDriver::Heston { kappa: req("kappa")?, theta: req("theta")?, xi: req("xi")?, v0: req("v0")? }
            };
            ModelKind::SvPrice { p0: f("p0", 1.0)?, mu: f("mu", 0.0)?, rho: f("rho", 0.0)?, vol }
        }
        ModelTag::BnsPrice => {
            let subordinator = if raw.contains("gamma_shape") || raw.contains("gamma_rate") {
                SubordinatorSpec::Gamma { shape_rate: req("gamma_shape")?, rate: req("gamma_rate")? }
            } else {
                SubordinatorSpec::CompoundPoissonExp { jump_rate: req("jump_rate")?, size_rate: req("jump_size_rate")? }
            };
            let bns = BnsSpec { subordinator, decay: req("lambda")?, window: raw.parsed("window")? };
            ModelKind::BnsPrice { p0: f("p0", 1.0)?, mu: f("mu", 0.0)?, bns }
        }
        ModelTag::ComteRenaultPrice => ModelKind::ComteRenaultPrice {
            p0: f("p0", 1.0)?,
            mu: f("mu", 0.0)?,
            fou: FouSpec {
                hurst: req("hurst")?,
                mean_reversion: req("alpha")?,
                vol: req("vol")?,
                initial: f("v0", 0.0)?,
            },
        },
        ModelTag::RegimePrice => {
            let levels = parse_list("levels", raw.require("levels")?)?;
            let generator = raw
                .require("generator")?
                .split(';')
                .map(|row| parse_list("generator", row))
                .collect::<Result<Vec<_>>>()?;
            let ctmc = CtmcSpec { generator, levels, initial: raw.parsed_or("initial", 0)? };
            ModelKind::RegimePrice { p0: f("p0", 1.0)?, mu: f("mu", 0.0)?, ctmc }
        }
        ModelTag::SdePrice => {
            let sigma = if raw.contains("sigma_ratio") {
                PathCoefficient::Constant(req("sigma_ratio")?)
            } else {
                PathCoefficient::RunningMaxRatio { base: req("sigma_base")?, slope: req("sigma_slope")? }
            };
            ModelKind::SdePrice {
                p0: f("p0", 1.0)?,
                mu: PathCoefficient::Constant(req("mu_ratio")?),
                sigma,
                mu_bar: req("mu_bar")?,
                sigma_bar: req("sigma_bar")?,
            }
        }
        ModelTag::DoleansCe => ModelKind::DoleansCe,
        ModelTag::BridgeCe => ModelKind::BridgeCe,
        ModelTag::ExpDriftPrice => {
            ModelKind::ExpDriftPrice { drift: Profile::Constant(f("f", 0.0)?), vol: Profile::Constant(f("g", 1.0)?) }
        }
    };
    let mut spec = ModelSpec::new(kind);
    if let Some(v) = raw.get("log_space") {
        spec.log_space = parse_bool("log_space", v)?;
    }
    if let Some(name) = raw.get("name") {
        spec = spec.named(name);
    }
    spec.validate()?;
    Ok(spec)
}
