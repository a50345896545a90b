//! Flat key/value experiment configuration.
//!
//! Files are TOML. Tables and dotted keys are flattened, so `[ip] eta = 1e-4`
//! and `ip.eta = 1e-4` are the same setting. Overrides (for example from
//! command-line flags) are applied after the file, key by key, through the
//! same parser. Unknown keys are rejected.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::MackeyGlass;
use crate::error::{Error, Result};
use crate::evolve::{EvolutionConfig, HyperRanges};
use crate::experiment::{DatasetSpec, ModelSpec, SplitSpec};
use crate::init::Scale;
use crate::ip::IpConfig;
use crate::topology::TopologyKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputFormat {
    Csv,
    Text,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "text" => Ok(OutputFormat::Text),
            _ => Err(Error::Config(format!("format must be csv or text, got {s:?}"))),
        }
    }
}

impl OutputFormat {
    fn as_str(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Text => "text",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaSettings {
    pub evolution: EvolutionConfig,
    pub ranges: HyperRanges,
    /// Seeds averaged per fitness evaluation.
    pub fitness_seeds: usize,
}

impl Default for GaSettings {
    fn default() -> Self {
        Self {
            evolution: EvolutionConfig::default(),
            ranges: HyperRanges::default(),
            fitness_seeds: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub split: SplitSpec,
    pub topology: TopologyKind,
    pub n_r: usize,
    pub init: crate::init::InitSpec,
    pub beta: f64,
    pub ip: IpConfig,
    pub ip_enabled: bool,
    pub runs: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub ga: GaSettings,
    pub sweep_topologies: Vec<TopologyKind>,
}

/// Every accepted key, in the order `to_toml` writes them.
pub const KEYS: &[&str] = &[
    "preset",
    "dataset",
    "csv.path",
    "csv.column",
    "mg.tau",
    "mg.dt",
    "mg.a",
    "mg.b",
    "mg.p",
    "mg.x0",
    "mg.transient",
    "train_len",
    "test_len",
    "horizon",
    "washout",
    "normalize",
    "topology",
    "n_r",
    "rho_hat",
    "sigma_in",
    "sigma_l",
    "s_in",
    "s_hat_l",
    "s_l",
    "alpha",
    "beta",
    "ip.enabled",
    "ip.eta",
    "ip.mu",
    "ip.sigma",
    "ip.epochs",
    "runs",
    "seed",
    "output",
    "format",
    "ga.population",
    "ga.generations",
    "ga.tournament_size",
    "ga.crossover_p",
    "ga.mutation_p",
    "ga.per_individual_mutation",
    "ga.fitness_seeds",
    "ga.max_width",
    "ga.max_depth",
    "ga.n_r",
    "ga.beta_min",
    "ga.beta_max",
    "ga.alpha_min",
    "ga.alpha_max",
    "ga.rho_hat_min",
    "ga.rho_hat_max",
    "ga.sigma_min",
    "ga.sigma_max",
    "ga.sparsity_min",
    "ga.sparsity_max",
    "ga.p_xavier",
    "sweep.topologies",
];

fn all_topologies() -> Vec<TopologyKind> {
    vec![
        TopologyKind::Wide(3),
        TopologyKind::Layered(3),
        TopologyKind::CrissCross(2),
        TopologyKind::WideLayered { width: 2, depth: 2 },
    ]
}

impl Default for ExperimentConfig {
    /// The Mackey-Glass 84-step benchmark with the Wide(3) setting.
    fn default() -> Self {
        let m = ModelSpec::mackey_glass_wide();
        Self {
            dataset: DatasetSpec::MackeyGlass(MackeyGlass::default()),
            split: SplitSpec::mackey_glass(),
            topology: m.topology,
            n_r: m.n_r,
            init: m.init,
            beta: m.beta,
            ip: IpConfig::default(),
            ip_enabled: false,
            runs: 10,
            seed: 0,
            output: None,
            format: OutputFormat::Csv,
            ga: GaSettings::default(),
            sweep_topologies: all_topologies(),
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected a boolean, got {v:?}"))),
    }
}

fn list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn toml_to_string(key: &str, v: &toml::Value) -> Result<String> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(format!("{f:?}")),
        toml::Value::Boolean(b) => Ok(b.to_string()),
        toml::Value::Array(items) => Ok(items
            .iter()
            .map(|i| toml_to_string(key, i))
            .collect::<Result<Vec<_>>>()?
            .join(",")),
        _ => Err(Error::Config(format!("{key}: unsupported value {v}"))),
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, String)>) -> Result<()> {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out)?,
            other => out.push((key.clone(), toml_to_string(&key, other)?)),
        }
    }
    Ok(())
}

/// Parses TOML text into flat `(key, value)` pairs.
pub fn flatten_toml(text: &str) -> Result<Vec<(String, String)>> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(format!("invalid config file: {}", e.message())))?;
    let mut out = Vec::new();
    flatten("", &table, &mut out)?;
    Ok(out)
}

impl ExperimentConfig {
    /// Applies one setting. Range checks happen in [`ExperimentConfig::validate`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value;
        match key {
            "preset" => match v.trim() {
                "mackey-glass" => *self = Self { output: self.output.clone(), ..Self::default() },
                "temperature" => {
                    let m = ModelSpec::temperature_wide_layered();
                    self.split = SplitSpec::temperature();
                    self.topology = m.topology;
                    self.n_r = m.n_r;
                    self.init = m.init;
                    self.beta = m.beta;
                    if !matches!(self.dataset, DatasetSpec::Csv { .. }) {
                        self.dataset = DatasetSpec::Csv {
                            path: PathBuf::from("daily-minimum-temperatures.csv"),
                            column: "Temp".into(),
                        };
                    }
                }
                other => return Err(Error::Config(format!("preset must be mackey-glass or temperature, got {other:?}"))),
            },
            "dataset" => match v.trim() {
                "mackey-glass" => {
                    if !matches!(self.dataset, DatasetSpec::MackeyGlass(_)) {
                        self.dataset = DatasetSpec::MackeyGlass(MackeyGlass::default());
                    }
                }
                "csv" => {
                    if !matches!(self.dataset, DatasetSpec::Csv { .. }) {
                        self.dataset = DatasetSpec::Csv { path: PathBuf::new(), column: "value".into() };
                    }
                }
                other => return Err(Error::Config(format!("dataset must be mackey-glass or csv, got {other:?}"))),
            },
            "csv.path" | "csv.column" => {
                if !matches!(self.dataset, DatasetSpec::Csv { .. }) {
                    self.dataset = DatasetSpec::Csv { path: PathBuf::new(), column: "value".into() };
                }
                if let DatasetSpec::Csv { path, column } = &mut self.dataset {
                    if key == "csv.path" {
                        *path = PathBuf::from(v.trim());
                    } else {
                        *column = v.trim().to_string();
                    }
                }
            }
            k if k.starts_with("mg.") => {
                let DatasetSpec::MackeyGlass(mg) = &mut self.dataset else {
                    return Err(Error::Config(format!("{k} only applies to dataset = \"mackey-glass\"")));
                };
                match k {
                    "mg.tau" => mg.tau = parse(k, v)?,
                    "mg.dt" => mg.dt = parse(k, v)?,
                    "mg.a" => mg.a = parse(k, v)?,
                    "mg.b" => mg.b = parse(k, v)?,
                    "mg.p" => mg.p = parse(k, v)?,
                    "mg.x0" => mg.x0 = parse(k, v)?,
                    "mg.transient" => mg.transient = parse(k, v)?,
                    _ => return Err(Error::Config(format!("unknown key {k:?}"))),
                }
            }
            "train_len" => self.split.train_len = parse(key, v)?,
            "test_len" => self.split.test_len = parse(key, v)?,
            "horizon" => self.split.horizon = parse(key, v)?,
            "washout" => self.split.washout = parse(key, v)?,
            "normalize" => self.split.normalize = parse_bool(key, v)?,
            "topology" => self.topology = v.parse()?,
            "n_r" => self.n_r = parse(key, v)?,
            "rho_hat" => self.init.rho_hat = v.parse::<Scale>()?,
            "sigma_in" => self.init.sigma_in = v.parse::<Scale>()?,
            "sigma_l" => self.init.sigma_l = v.parse::<Scale>()?,
            "s_in" => self.init.s_in = parse(key, v)?,
            "s_hat_l" => self.init.s_hat_l = parse(key, v)?,
            "s_l" => self.init.s_l = parse(key, v)?,
            "alpha" => self.init.alpha = parse(key, v)?,
            "beta" => self.beta = parse(key, v)?,
            "ip.enabled" => self.ip_enabled = parse_bool(key, v)?,
            "ip.eta" => self.ip.eta = parse(key, v)?,
            "ip.mu" => self.ip.mu = parse(key, v)?,
            "ip.sigma" => self.ip.sigma = parse(key, v)?,
            "ip.epochs" => self.ip.epochs = parse(key, v)?,
            "runs" => self.runs = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "output" => self.output = Some(PathBuf::from(v.trim())),
            "format" => self.format = v.parse()?,
            "ga.population" => self.ga.evolution.population = parse(key, v)?,
            "ga.generations" => self.ga.evolution.generations = parse(key, v)?,
            "ga.tournament_size" => self.ga.evolution.tournament_size = parse(key, v)?,
            "ga.crossover_p" => self.ga.evolution.crossover_p = parse(key, v)?,
            "ga.mutation_p" => self.ga.evolution.mutation_p = parse(key, v)?,
            "ga.per_individual_mutation" => self.ga.evolution.per_individual_mutation = parse_bool(key, v)?,
            "ga.fitness_seeds" => self.ga.fitness_seeds = parse(key, v)?,
            "ga.max_width" => self.ga.ranges.max_width = parse(key, v)?,
            "ga.max_depth" => self.ga.ranges.max_depth = parse(key, v)?,
            "ga.n_r" => self.ga.ranges.n_r = list(v).map(|s| parse(key, s)).collect::<Result<_>>()?,
            "ga.beta_min" => self.ga.ranges.beta.0 = parse(key, v)?,
            "ga.beta_max" => self.ga.ranges.beta.1 = parse(key, v)?,
            "ga.alpha_min" => self.ga.ranges.alpha.0 = parse(key, v)?,
            "ga.alpha_max" => self.ga.ranges.alpha.1 = parse(key, v)?,
            "ga.rho_hat_min" => self.ga.ranges.rho_hat.0 = parse(key, v)?,
            "ga.rho_hat_max" => self.ga.ranges.rho_hat.1 = parse(key, v)?,
            "ga.sigma_min" => self.ga.ranges.sigma.0 = parse(key, v)?,
            "ga.sigma_max" => self.ga.ranges.sigma.1 = parse(key, v)?,
            "ga.sparsity_min" => self.ga.ranges.sparsity.0 = parse(key, v)?,
            "ga.sparsity_max" => self.ga.ranges.sparsity.1 = parse(key, v)?,
            "ga.p_xavier" => self.ga.ranges.p_xavier = parse(key, v)?,
            "sweep.topologies" => {
                self.sweep_topologies = list(v).map(str::parse).collect::<Result<_>>()?;
            }
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies pairs in order, except that `preset` always goes first and
    /// `dataset` second, so later keys refine them.
    pub fn apply<I, K, V>(&mut self, pairs: I) -> Result<()>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut pairs: Vec<(K, V)> = pairs.into_iter().collect();
        let rank = |k: &str| match k {
            "preset" => 0,
            "dataset" => 1,
            _ => 2,
        };
        pairs.sort_by_key(|(k, _)| rank(k.as_ref()));
        for (k, v) in &pairs {
            self.set(k.as_ref(), v.as_ref())?;
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply(flatten_toml(text)?)?;
        c.validate()?;
        Ok(c)
    }

    /// Reads `path` (if any), then applies `overrides`, then validates.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut c = Self::default();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            c.apply(flatten_toml(&text)?)?;
        }
        c.apply(overrides.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
        c.validate()?;
        Ok(c)
    }

    pub fn model_spec(&self) -> ModelSpec {
        ModelSpec {
            topology: self.topology,
            n_r: self.n_r,
            init: self.init,
            beta: self.beta,
            ip: self.ip_enabled.then_some(self.ip),
        }
    }

    pub fn with_model(&self, m: &ModelSpec) -> Self {
        let mut c = self.clone();
        c.topology = m.topology;
        c.n_r = m.n_r;
        c.init = m.init;
        c.beta = m.beta;
        c.ip_enabled = m.ip.is_some();
        if let Some(ip) = m.ip {
            c.ip = ip;
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        self.model_spec().validate()?;
        self.ip.validate()?;
        if self.runs == 0 {
            return Err(Error::Parameter("runs must be >= 1".into()));
        }
        if self.split.train_len == 0 || self.split.test_len == 0 {
            return Err(Error::Parameter("train_len and test_len must be >= 1".into()));
        }
        if self.split.washout >= self.split.train_len || self.split.washout >= self.split.test_len {
            return Err(Error::Parameter(format!(
                "washout {} must be shorter than train_len and test_len",
                self.split.washout
            )));
        }
        match &self.dataset {
            DatasetSpec::MackeyGlass(mg) => mg.validate()?,
            DatasetSpec::Csv { path, column } => {
                if path.as_os_str().is_empty() {
                    return Err(Error::Config("csv.path is required when dataset = \"csv\"".into()));
                }
                if column.is_empty() {
                    return Err(Error::Config("csv.column must not be empty".into()));
                }
            }
        }
        if self.sweep_topologies.is_empty() {
            return Err(Error::Config("sweep.topologies must list at least one topology".into()));
        }
        for t in &self.sweep_topologies {
            t.validate()?;
        }
        self.ga.evolution.validate()?;
        self.ga.ranges.space()?;
        if self.ga.fitness_seeds == 0 {
            return Err(Error::Parameter("ga.fitness_seeds must be >= 1".into()));
        }
        Ok(())
    }

    /// Flat TOML that [`ExperimentConfig::from_toml_str`] reads back to an
    /// equal configuration.
    pub fn to_toml(&self) -> String {
        fn q(s: &str) -> String {
            toml::Value::String(s.to_string()).to_string()
        }
        fn f(v: f64) -> String {
            format!("{v:?}")
        }
        fn scale(s: Scale) -> String {
            match s {
                Scale::Xavier => q("X"),
                Scale::Value(v) => f(v),
            }
        }
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        match &self.dataset {
            DatasetSpec::MackeyGlass(mg) => {
                line("dataset", q("mackey-glass"));
                line("mg.tau", f(mg.tau));
                line("mg.dt", f(mg.dt));
                line("mg.a", f(mg.a));
                line("mg.b", f(mg.b));
                line("mg.p", f(mg.p));
                line("mg.x0", f(mg.x0));
                line("mg.transient", mg.transient.to_string());
            }
            DatasetSpec::Csv { path, column } => {
                line("dataset", q("csv"));
                line("csv.path", q(&path.to_string_lossy()));
                line("csv.column", q(column));
            }
        }
        line("train_len", self.split.train_len.to_string());
        line("test_len", self.split.test_len.to_string());
        line("horizon", self.split.horizon.to_string());
        line("washout", self.split.washout.to_string());
        line("normalize", self.split.normalize.to_string());
        line("topology", q(&self.topology.to_string()));
        line("n_r", self.n_r.to_string());
        line("rho_hat", scale(self.init.rho_hat));
        line("sigma_in", scale(self.init.sigma_in));
        line("sigma_l", scale(self.init.sigma_l));
        line("s_in", f(self.init.s_in));
        line("s_hat_l", f(self.init.s_hat_l));
        line("s_l", f(self.init.s_l));
        line("alpha", f(self.init.alpha));
        line("beta", f(self.beta));
        line("ip.enabled", self.ip_enabled.to_string());
        line("ip.eta", f(self.ip.eta));
        line("ip.mu", f(self.ip.mu));
        line("ip.sigma", f(self.ip.sigma));
        line("ip.epochs", self.ip.epochs.to_string());
        line("runs", self.runs.to_string());
        line("seed", self.seed.to_string());
        if let Some(o) = &self.output {
            line("output", q(&o.to_string_lossy()));
        }
        line("format", q(self.format.as_str()));
        let ga = &self.ga;
        line("ga.population", ga.evolution.population.to_string());
        line("ga.generations", ga.evolution.generations.to_string());
        line("ga.tournament_size", ga.evolution.tournament_size.to_string());
        line("ga.crossover_p", f(ga.evolution.crossover_p));
        line("ga.mutation_p", f(ga.evolution.mutation_p));
        line("ga.per_individual_mutation", ga.evolution.per_individual_mutation.to_string());
        line("ga.fitness_seeds", ga.fitness_seeds.to_string());
        line("ga.max_width", ga.ranges.max_width.to_string());
        line("ga.max_depth", ga.ranges.max_depth.to_string());
        line(
            "ga.n_r",
            format!("[{}]", ga.ranges.n_r.iter().map(|v| f(*v)).collect::<Vec<_>>().join(", ")),
        );
        line("ga.beta_min", f(ga.ranges.beta.0));
        line("ga.beta_max", f(ga.ranges.beta.1));
        line("ga.alpha_min", f(ga.ranges.alpha.0));
        line("ga.alpha_max", f(ga.ranges.alpha.1));
        line("ga.rho_hat_min", f(ga.ranges.rho_hat.0));
        line("ga.rho_hat_max", f(ga.ranges.rho_hat.1));
        line("ga.sigma_min", f(ga.ranges.sigma.0));
        line("ga.sigma_max", f(ga.ranges.sigma.1));
        line("ga.sparsity_min", f(ga.ranges.sparsity.0));
        line("ga.sparsity_max", f(ga.ranges.sparsity.1));
        line("ga.p_xavier", f(ga.ranges.p_xavier));
        line(
            "sweep.topologies",
            format!(
                "[{}]",
                self.sweep_topologies.iter().map(|t| q(&t.to_string())).collect::<Vec<_>>().join(", ")
            ),
        );
        out
    }
}
