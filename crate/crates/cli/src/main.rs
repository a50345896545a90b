//! `deepesn` command-line driver.
//!
//! Exit status: 0 on success, 2 for configuration errors, 3 for data errors
//! and 4 for numerical failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use deepesn::config::ExperimentConfig;
use deepesn::evolve::{self, GenerationStats};
use deepesn::experiment::{self, DatasetSpec};
use deepesn::report::{self, ReportRow};
use deepesn::topology::TopologyKind;
use deepesn::{Error, ErrorKind};

#[derive(Parser, Debug)]
#[command(name = "deepesn", version, about = "Modular deep echo state network benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a Mackey-Glass series as single-column CSV.
    GenerateData {
        /// Number of samples; defaults to train_len + test_len + horizon.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Evaluate one configuration over `runs` seeds.
    Run,
    /// Evaluate every topology in `sweep.topologies`, with and without IP.
    Sweep,
    /// Genetic search over hyperparameters and topology.
    Evolve {
        /// Where to write the best genome as a config file; defaults to the
        /// output path with a `.toml` extension, or `best-genome.toml`.
        #[arg(long)]
        best_config: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `wide:N`, `layered:N`, `crisscross:N` or `wide+layered:WxD`.
    #[arg(long, global = true)]
    topology: Option<String>,
    /// Enable intrinsic-plasticity pre-training.
    #[arg(long, global = true)]
    ip: bool,
    #[arg(long, global = true)]
    runs: Option<usize>,
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_parser = ["csv", "text"])]
    format: Option<String>,
    #[arg(long, global = true)]
    n_r: Option<String>,
    #[arg(long, global = true)]
    beta: Option<String>,
    #[arg(long, global = true)]
    alpha: Option<String>,
    /// Number or `X`.
    #[arg(long, global = true)]
    rho_hat: Option<String>,
    /// Number or `X`.
    #[arg(long, global = true)]
    sigma_in: Option<String>,
    /// Number or `X`.
    #[arg(long, global = true)]
    sigma_l: Option<String>,
    #[arg(long, global = true)]
    s_in: Option<String>,
    #[arg(long, global = true)]
    s_hat_l: Option<String>,
    #[arg(long, global = true)]
    s_l: Option<String>,
    #[arg(long, global = true)]
    train_len: Option<String>,
    #[arg(long, global = true)]
    test_len: Option<String>,
    #[arg(long, global = true)]
    horizon: Option<String>,
    #[arg(long, global = true)]
    washout: Option<String>,
    /// Read the series from this CSV instead of generating Mackey-Glass.
    #[arg(long, global = true)]
    csv: Option<String>,
    /// CSV column to read, or the header written by `generate-data`.
    #[arg(long, global = true)]
    column: Option<String>,
    /// Any config key, as `key=value`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn overrides(&self, generating: bool) -> Result<Vec<(String, String)>, Error> {
        let mut out = Vec::new();
        let mut push = |k: &str, v: &Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v.clone()));
            }
        };
        push("csv.path", &self.csv);
        if !generating {
            push("csv.column", &self.column);
        }
        push("topology", &self.topology);
        push("n_r", &self.n_r);
        push("beta", &self.beta);
        push("alpha", &self.alpha);
        push("rho_hat", &self.rho_hat);
        push("sigma_in", &self.sigma_in);
        push("sigma_l", &self.sigma_l);
        push("s_in", &self.s_in);
        push("s_hat_l", &self.s_hat_l);
        push("s_l", &self.s_l);
        push("train_len", &self.train_len);
        push("test_len", &self.test_len);
        push("horizon", &self.horizon);
        push("washout", &self.washout);
        push("format", &self.format);
        if self.csv.is_some() {
            out.push(("dataset".into(), "csv".into()));
        }
        if self.ip {
            out.push(("ip.enabled".into(), "true".into()));
        }
        if let Some(s) = self.seed {
            out.push(("seed".into(), s.to_string()));
        }
        if let Some(r) = self.runs {
            out.push(("runs".into(), r.to_string()));
        }
        if let Some(o) = &self.output {
            out.push(("output".into(), o.to_string_lossy().into_owned()));
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            out.push((k.trim().to_string(), v.to_string()));
        }
        Ok(out)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Config => 2,
        ErrorKind::Data => 3,
        ErrorKind::Numerical => 4,
    }
}

/// Attaches the failing stage to an error while keeping its kind.
fn stage(name: &'static str) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Dimension(m) => Error::Dimension(format!("{name}: {m}")),
        Error::Parameter(m) => Error::Parameter(format!("{name}: {m}")),
        Error::Singular(m) => Error::Singular(format!("{name}: {m}")),
        Error::Infeasible(m) => Error::Infeasible(format!("{name}: {m}")),
        Error::Degenerate(m) => Error::Degenerate(format!("{name}: {m}")),
        Error::Numerical(m) => Error::Numerical(format!("{name}: {m}")),
        Error::Divergence(m) => Error::Divergence(format!("{name}: {m}")),
        Error::Data(m) => Error::Data(format!("{name}: {m}")),
        Error::Config(m) => Error::Config(format!("{name}: {m}")),
        other => other,
    }
}

fn row(topology: TopologyKind, n_r: usize, ip: bool, report: deepesn::metrics::EvalReport) -> ReportRow {
    ReportRow {
        topology: topology.to_string(),
        n_l: topology.n_reservoirs(),
        n_r,
        ip,
        report,
    }
}

fn run(cfg: &ExperimentConfig) -> Result<(), Error> {
    let split = experiment::prepare_split(&cfg.dataset, &cfg.split).map_err(stage("data"))?;
    let spec = cfg.model_spec();
    log::info!("evaluating {} over {} runs", spec.topology, cfg.runs);
    let r = experiment::evaluate(&split, &spec, cfg.runs, cfg.seed).map_err(stage("evaluate"))?;
    let rows = [row(spec.topology, spec.n_r, cfg.ip_enabled, r)];
    report::emit(&rows, cfg.format, cfg.output.as_deref()).map_err(stage("report"))
}

fn sweep(cfg: &ExperimentConfig) -> Result<(), Error> {
    let split = experiment::prepare_split(&cfg.dataset, &cfg.split).map_err(stage("data"))?;
    let mut rows = Vec::new();
    for &topology in &cfg.sweep_topologies {
        for ip in [false, true] {
            let mut spec = cfg.model_spec();
            spec.topology = topology;
            spec.ip = ip.then_some(cfg.ip);
            log::info!("evaluating {topology} (ip {ip}) over {} runs", cfg.runs);
            let r = experiment::evaluate(&split, &spec, cfg.runs, cfg.seed).map_err(stage("evaluate"))?;
            rows.push(row(topology, spec.n_r, ip, r));
        }
    }
    report::emit(&rows, cfg.format, cfg.output.as_deref()).map_err(stage("report"))
}

fn generate(cfg: &ExperimentConfig, samples: Option<usize>, column: &str) -> Result<(), Error> {
    let DatasetSpec::MackeyGlass(mg) = &cfg.dataset else {
        return Err(Error::Config("generate-data needs dataset = \"mackey-glass\"".into()));
    };
    let series = mg.generate(samples.unwrap_or(cfg.split.total_len())).map_err(stage("generate"))?;
    match &cfg.output {
        Some(p) => series.write_csv(p, column),
        None => series
            .write_csv_to(std::io::stdout().lock(), column)
            .map_err(|e| Error::Data(format!("cannot write to stdout: {e}"))),
    }
}

fn evolve_cmd(cfg: &ExperimentConfig, best_config: Option<&Path>) -> Result<(), Error> {
    let series = experiment::load_series(&cfg.dataset, &cfg.split).map_err(stage("data"))?;
    let validation = experiment::validation_split(&series, &cfg.split).map_err(stage("data"))?;
    let space = cfg.ga.ranges.space()?;
    let mut ga = cfg.ga.evolution;
    ga.seed = cfg.seed;
    let fitness = |g: &evolve::Genome| match evolve::decode(&space, g, &cfg.ip) {
        Ok(spec) => experiment::validation_fitness(&validation, &spec, cfg.ga.fitness_seeds, cfg.seed),
        Err(_) => f64::INFINITY,
    };

    let sink: Box<dyn std::io::Write> = match &cfg.output {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|source| Error::Io { path: p.clone(), source })?),
        None => Box::new(std::io::stdout()),
    };
    let mut log_csv = csv::Writer::from_writer(sink);
    let io = |e: csv::Error| Error::Data(format!("cannot write evolution log: {e}"));
    log_csv
        .write_record(["generation", "best_fitness", "mean_fitness", "best_genome"])
        .map_err(io)?;
    let mut write_err = None;
    let result = evolve::evolve_with(&space, fitness, &ga, |s: &GenerationStats| {
        log::info!("generation {}: best {:.6e}", s.generation, s.best_fitness);
        let rec = [
            s.generation.to_string(),
            format!("{:e}", s.best_fitness),
            format!("{:e}", s.mean_fitness),
            format!("{{{}}}", space.describe(&s.best)),
        ];
        if let Err(e) = log_csv.write_record(&rec).and_then(|_| log_csv.flush().map_err(csv::Error::from)) {
            write_err.get_or_insert(e);
        }
    })
    .map_err(stage("evolve"))?;
    if let Some(e) = write_err {
        return Err(io(e));
    }

    let best = evolve::decode(&space, &result.best, &cfg.ip).map_err(stage("evolve"))?;
    let mut out = cfg.with_model(&best);
    out.output = None;
    let path = match (best_config, &cfg.output) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(o)) => o.with_extension("toml"),
        (None, None) => PathBuf::from("best-genome.toml"),
    };
    std::fs::write(&path, out.to_toml()).map_err(|source| Error::Io { path: path.clone(), source })?;
    log::info!("best fitness {:.6e}; config written to {}", result.best_fitness, path.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let generating = matches!(cli.command, Command::GenerateData { .. });
    let outcome = cli.common.overrides(generating).and_then(|ov| {
        let cfg = ExperimentConfig::load(cli.common.config.as_deref(), &ov).map_err(stage("config"))?;
        match &cli.command {
            Command::GenerateData { samples } => {
                generate(&cfg, *samples, cli.common.column.as_deref().unwrap_or("value"))
            }
            Command::Run => run(&cfg),
            Command::Sweep => sweep(&cfg),
            Command::Evolve { best_config } => evolve_cmd(&cfg, best_config.as_deref()),
        }
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
