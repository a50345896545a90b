//! Benchmark driver: data preparation, multi-seed runs and evaluation.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::data::{self, ForecastSplit, MackeyGlass, TimeSeries};
use crate::error::{Error, Result};
use crate::init::{build_model, EsnModel, InitSpec};
use crate::ip::{self, IpConfig};
use crate::metrics::{EvalReport, RunMetrics};
use crate::numerics::{Matrix, RngStream};
use crate::readout;
use crate::reservoir;
use crate::topology::{Connectivity, TopologyKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DatasetSpec {
    /// Generated series; enough samples are produced to cover the split.
    MackeyGlass(MackeyGlass),
    Csv { path: PathBuf, column: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_len: usize,
    pub test_len: usize,
    pub horizon: usize,
    pub washout: usize,
    pub normalize: bool,
}

impl SplitSpec {
    pub fn mackey_glass() -> Self {
        Self {
            train_len: 8000,
            test_len: 2000,
            horizon: 84,
            washout: 100,
            normalize: true,
        }
    }

    pub fn temperature() -> Self {
        Self {
            train_len: 2920,
            test_len: 730,
            horizon: 1,
            washout: 30,
            normalize: true,
        }
    }

    pub fn total_len(&self) -> usize {
        self.train_len + self.test_len + self.horizon
    }
}

/// Everything needed to build, train and score one model configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub topology: TopologyKind,
    pub n_r: usize,
    pub init: InitSpec,
    pub beta: f64,
    pub ip: Option<IpConfig>,
}

impl ModelSpec {
    /// Hyperparameters of the Mackey-Glass 84-step benchmark.
    pub fn mackey_glass_wide() -> Self {
        Self {
            topology: TopologyKind::Wide(3),
            n_r: 256,
            init: InitSpec::default(),
            beta: 2e-8,
            ip: None,
        }
    }

    /// Hyperparameters of the daily-minimum-temperature 1-step benchmark.
    pub fn temperature_wide_layered() -> Self {
        Self {
            topology: TopologyKind::WideLayered { width: 2, depth: 2 },
            n_r: 1024,
            init: InitSpec {
                rho_hat: crate::init::Scale::Xavier,
                sigma_in: crate::init::Scale::Value(0.4),
                sigma_l: crate::init::Scale::Xavier,
                s_in: 0.6,
                s_hat_l: 0.3,
                s_l: 0.6,
                alpha: 1.0,
            },
            beta: 7e-4,
            ip: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.topology.validate()?;
        self.init.validate()?;
        if self.n_r == 0 {
            return Err(Error::Parameter("n_r must be >= 1".into()));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::Parameter(format!("beta must be >= 0, got {}", self.beta)));
        }
        if let Some(ip) = &self.ip {
            ip.validate()?;
        }
        Ok(())
    }
}

pub fn load_series(dataset: &DatasetSpec, split: &SplitSpec) -> Result<TimeSeries> {
    match dataset {
        DatasetSpec::MackeyGlass(mg) => mg.generate(split.total_len()),
        DatasetSpec::Csv { path, column } => data::load_csv_series(path, column),
    }
}

pub fn prepare_split(dataset: &DatasetSpec, split: &SplitSpec) -> Result<ForecastSplit> {
    let series = load_series(dataset, split)?;
    data::make_split(
        &series,
        split.train_len,
        split.test_len,
        split.horizon,
        split.washout,
        split.normalize,
    )
}

/// A trained model together with its test-set forecast.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub model: EsnModel,
    pub metrics: RunMetrics,
    /// Post-washout targets and predictions, in original units.
    pub target: Vec<f64>,
    pub prediction: Vec<f64>,
}

fn row(values: &[f64]) -> Matrix {
    Matrix::from_row_slice(1, values.len(), values)
}

/// Builds, optionally pre-trains, fits and scores one model.
pub fn fit_and_score(split: &ForecastSplit, spec: &ModelSpec, stream: &RngStream) -> Result<RunOutcome> {
    let connectivity = Connectivity::build(spec.topology)?;
    let mut model = build_model(&connectivity, 1, spec.n_r, &spec.init, &stream.child("init"))?;
    let train_in = split.train_in.as_row();
    if let Some(ip_cfg) = &spec.ip {
        model = ip::pretrain(&model, &train_in, ip_cfg)?;
    }
    let w = split.washout;
    let states = reservoir::run(&model, &train_in, w)?;
    let targets = row(&split.train_target.values[w..]);
    let weights = readout::train_readout(&states, &targets, spec.beta)?;

    let test_states = reservoir::run(&model, &split.test_in.as_row(), w)?;
    let predicted = readout::predict(&weights, &test_states)?;
    if predicted.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite prediction".into()));
    }
    let prediction = split.to_original(predicted.row(0).transpose().as_slice());
    let target = split.to_original(&split.test_target.values[w..]);
    let metrics = RunMetrics::compute(&target, &prediction)?;
    Ok(RunOutcome {
        model: model.with_readout(weights)?,
        metrics,
        target,
        prediction,
    })
}

/// Evaluates `runs` independently seeded models (stream `run/<i>`) and
/// averages their metrics.
pub fn evaluate(split: &ForecastSplit, spec: &ModelSpec, runs: usize, seed: u64) -> Result<EvalReport> {
    spec.validate()?;
    if runs == 0 {
        return Err(Error::Parameter("runs must be >= 1".into()));
    }
    let root = RngStream::root(seed);
    let one = |i: usize| fit_and_score(split, spec, &root.child("run").child(i)).map(|o| o.metrics);
    #[cfg(feature = "parallel")]
    let per_run: Result<Vec<RunMetrics>> = {
        use rayon::prelude::*;
        (0..runs).into_par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_run: Result<Vec<RunMetrics>> = (0..runs).map(one).collect();
    EvalReport::from_runs(per_run?, split.test_in.len() - split.washout)
}

/// Split for model selection: the last fifth of the training region is held
/// out as a validation tail, and the test region is never touched.
pub fn validation_split(series: &TimeSeries, split: &SplitSpec) -> Result<ForecastSplit> {
    let tail = split.train_len / 5;
    if tail == 0 {
        return Err(Error::Data(format!(
            "training region of {} samples is too short for a validation tail",
            split.train_len
        )));
    }
    data::make_split(
        series,
        split.train_len - tail,
        tail,
        split.horizon,
        split.washout,
        split.normalize,
    )
}

/// Mean validation RMSE over `seeds` runs, or `+inf` if any stage fails.
pub fn validation_fitness(validation: &ForecastSplit, spec: &ModelSpec, seeds: usize, seed: u64) -> f64 {
    match evaluate(validation, spec, seeds, seed) {
        Ok(r) if r.rmse.is_finite() => r.rmse,
        Ok(_) => f64::INFINITY,
        Err(e) => {
            log::debug!("candidate {} rejected: {e}", spec.topology);
            f64::INFINITY
        }
    }
}
