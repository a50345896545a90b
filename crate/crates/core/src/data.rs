//! Benchmark series: Mackey-Glass generation, CSV ingestion and forecast
//! splits.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub values: Vec<f64>,
    pub dt: f64,
    pub name: String,
}

impl TimeSeries {
    pub fn new(name: impl Into<String>, values: Vec<f64>, dt: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Data("time series is empty".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite value at index {i}")));
        }
        Ok(Self {
            values,
            dt,
            name: name.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The series as a `1 x N_t` input matrix.
    pub fn as_row(&self) -> Matrix {
        Matrix::from_row_slice(1, self.values.len(), &self.values)
    }

    fn slice(&self, range: std::ops::Range<usize>, suffix: &str) -> TimeSeries {
        TimeSeries {
            values: self.values[range].to_vec(),
            dt: self.dt,
            name: format!("{}/{}", self.name, suffix),
        }
    }

    /// Writes a single-column CSV with the given header.
    pub fn write_csv(&self, path: &Path, column: &str) -> Result<()> {
        let io = |source| Error::Io { path: path.to_path_buf(), source };
        let f = File::create(path).map_err(io)?;
        self.write_csv_to(std::io::BufWriter::new(f), column)
            .map_err(io)
    }

    pub fn write_csv_to<W: Write>(&self, mut out: W, column: &str) -> std::io::Result<()> {
        writeln!(out, "{column}")?;
        for v in &self.values {
            writeln!(out, "{v}")?;
        }
        out.flush()
    }
}

/// Mackey-Glass delay differential equation
/// `dx/dt = a x(t-tau) / (1 + x(t-tau)^p) - b x(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MackeyGlass {
    pub tau: f64,
    pub dt: f64,
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub x0: f64,
    /// Leading samples dropped from the output.
    pub transient: usize,
}

impl Default for MackeyGlass {
    fn default() -> Self {
        Self {
            tau: 17.0,
            dt: 1.0,
            a: 0.2,
            b: 0.1,
            p: 10.0,
            x0: 1.2,
            transient: 1000,
        }
    }
}

impl MackeyGlass {
    pub fn validate(&self) -> Result<()> {
        let m = self.delay_steps()?;
        if self.transient < m {
            return Err(Error::Parameter(format!(
                "transient {} shorter than the delay ({m} steps)",
                self.transient
            )));
        }
        for (name, v) in [("a", self.a), ("b", self.b), ("p", self.p), ("x0", self.x0)] {
            if !v.is_finite() {
                return Err(Error::Parameter(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }

    fn delay_steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Parameter(format!("dt must be > 0, got {}", self.dt)));
        }
        let ratio = self.tau / self.dt;
        let steps = ratio.round();
        if !(self.tau > 0.0) || (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::Parameter(format!(
                "tau / dt must be a positive integer, got {} / {}",
                self.tau, self.dt
            )));
        }
        Ok(steps as usize)
    }

    /// Integrates with classical RK4 from a constant history `x0` on
    /// `[-tau, 0]`. Sample `i` of the result is `x((transient + i) * dt)`.
    ///
    /// The delayed term is read from the stored grid: `x(t - tau)` for the
    /// first stage, the same point for the two half-step stages, and
    /// `x(t + dt - tau)` for the last stage.
    pub fn generate(&self, n: usize) -> Result<TimeSeries> {
        if n == 0 {
            return Err(Error::Parameter("requested zero samples".into()));
        }
        self.validate()?;
        let m = self.delay_steps()?;
        let total = self.transient + n;
        // hist[k] = x((k - m) * dt); the first m + 1 entries are the history
        let mut hist = Vec::with_capacity(total + m);
        hist.resize(m + 1, self.x0);
        let integral_p = self.p.fract() == 0.0 && self.p.abs() < i32::MAX as f64;
        let drive = |xd: f64| {
            let pow = if integral_p { xd.powi(self.p as i32) } else { xd.powf(self.p) };
            self.a * xd / (1.0 + pow)
        };
        let f = |x: f64, xd: f64| drive(xd) - self.b * x;
        let h = self.dt;
        for k in 0..total - 1 {
            let i = k + m;
            let x = hist[i];
            let xd = hist[i - m];
            let xd_next = hist[i + 1 - m];
            let k1 = f(x, xd);
            let k2 = f(x + 0.5 * h * k1, xd);
            let k3 = f(x + 0.5 * h * k2, xd);
            let k4 = f(x + h * k3, xd_next);
            let next = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if !next.is_finite() {
                return Err(Error::Numerical(format!("Mackey-Glass integration diverged at step {k}")));
            }
            hist.push(next);
        }
        let values = hist[m + self.transient..].to_vec();
        TimeSeries::new("mackey-glass", values, self.dt)
    }
}

/// Reads one named column from a CSV file with a header row.
pub fn load_csv_series(path: &Path, column: &str) -> Result<TimeSeries> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| Error::Data(format!("{}: unreadable header: {e}", path.display())))?
        .clone();
    if headers.is_empty() {
        return Err(Error::Data(format!("{}: file is empty", path.display())));
    }
    let idx = headers.iter().position(|h| h == column).ok_or_else(|| {
        Error::Data(format!(
            "{}: no column {column:?} (found {:?})",
            path.display(),
            headers.iter().collect::<Vec<_>>()
        ))
    })?;
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        // row 1 is the header
        let row = i + 2;
        let record = record.map_err(|e| Error::Data(format!("{}: row {row}: {e}", path.display())))?;
        let cell = record
            .get(idx)
            .ok_or_else(|| Error::Data(format!("{}: row {row}: missing column {column:?}", path.display())))?;
        let v: f64 = cell.parse().map_err(|_| {
            Error::Data(format!("{}: row {row}: non-numeric value {cell:?}", path.display()))
        })?;
        if !v.is_finite() {
            return Err(Error::Data(format!("{}: row {row}: non-finite value {cell:?}", path.display())));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    TimeSeries::new(name, values, 1.0)
}

/// Affine map to `[0, 1]`: `normalized = (v - offset) / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub scale: f64,
    pub offset: f64,
}

impl Scaler {
    pub fn fit(values: &[f64]) -> Result<Self> {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(hi > lo) {
            return Err(Error::Degenerate("cannot normalize a constant series".into()));
        }
        Ok(Self { scale: hi - lo, offset: lo })
    }

    pub fn apply(&self, v: f64) -> f64 {
        (v - self.offset) / self.scale
    }

    pub fn invert(&self, v: f64) -> f64 {
        v * self.scale + self.offset
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSplit {
    pub train_in: TimeSeries,
    pub train_target: TimeSeries,
    pub test_in: TimeSeries,
    pub test_target: TimeSeries,
    pub horizon: usize,
    pub washout: usize,
    /// Present when the split was normalized; fitted on the training input.
    pub scaler: Option<Scaler>,
}

impl ForecastSplit {
    /// Maps model-space values back to original units.
    pub fn to_original(&self, values: &[f64]) -> Vec<f64> {
        match self.scaler {
            Some(s) => values.iter().map(|&v| s.invert(v)).collect(),
            None => values.to_vec(),
        }
    }
}

/// Splits `series` into contiguous train and test segments with targets
/// shifted `horizon` steps ahead.
pub fn make_split(
    series: &TimeSeries,
    train_len: usize,
    test_len: usize,
    horizon: usize,
    washout: usize,
    normalize: bool,
) -> Result<ForecastSplit> {
    if train_len == 0 || test_len == 0 {
        return Err(Error::Data("train and test lengths must be > 0".into()));
    }
    let needed = train_len + test_len + horizon;
    if needed > series.len() {
        return Err(Error::Data(format!(
            "split needs {needed} samples (train {train_len} + test {test_len} + horizon {horizon}), series has {}",
            series.len()
        )));
    }
    if washout >= train_len || washout >= test_len {
        return Err(Error::Data(format!(
            "washout {washout} must be shorter than both train ({train_len}) and test ({test_len})"
        )));
    }
    let scaler = if normalize {
        Some(Scaler::fit(&series.values[..train_len])?)
    } else {
        None
    };
    let source = match scaler {
        Some(s) => TimeSeries {
            values: series.values.iter().map(|&v| s.apply(v)).collect(),
            dt: series.dt,
            name: series.name.clone(),
        },
        None => series.clone(),
    };
    let test_start = train_len;
    Ok(ForecastSplit {
        train_in: source.slice(0..train_len, "train_in"),
        train_target: source.slice(horizon..train_len + horizon, "train_target"),
        test_in: source.slice(test_start..test_start + test_len, "test_in"),
        test_target: source.slice(test_start + horizon..test_start + test_len + horizon, "test_target"),
        horizon,
        washout,
        scaler,
    })
}
