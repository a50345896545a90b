//! Forecast error measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_pair(u: &[f64], u_hat: &[f64]) -> Result<()> {
    if u.len() != u_hat.len() {
        return Err(Error::Data(format!(
            "series lengths differ: {} vs {}",
            u.len(),
            u_hat.len()
        )));
    }
    if u.is_empty() {
        return Err(Error::Data("cannot score empty series".into()));
    }
    Ok(())
}

fn sse(u: &[f64], u_hat: &[f64]) -> f64 {
    u.iter().zip(u_hat).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn rmse(u: &[f64], u_hat: &[f64]) -> Result<f64> {
    check_pair(u, u_hat)?;
    Ok((sse(u, u_hat) / u.len() as f64).sqrt())
}

/// RMSE normalized by the deviation of `u` around its own mean.
pub fn nrmse(u: &[f64], u_hat: &[f64]) -> Result<f64> {
    check_pair(u, u_hat)?;
    if u.len() < 2 {
        return Err(Error::Data("nrmse needs at least two samples".into()));
    }
    let mean = u.iter().sum::<f64>() / u.len() as f64;
    let denom: f64 = u.iter().map(|a| (a - mean) * (a - mean)).sum();
    if denom == 0.0 {
        return Err(Error::Degenerate("nrmse undefined for a constant target".into()));
    }
    Ok((sse(u, u_hat) / denom).sqrt())
}

/// Mean absolute percentage error, in percent. The divisor is the signed
/// target value.
pub fn mape(u: &[f64], u_hat: &[f64]) -> Result<f64> {
    check_pair(u, u_hat)?;
    if u.contains(&0.0) {
        return Err(Error::Data("mape undefined for zero targets".into()));
    }
    if u.iter().any(|&a| a < 0.0) {
        log::warn!("mape over negative targets is sign-ambiguous");
    }
    let total: f64 = u.iter().zip(u_hat).map(|(a, b)| (a - b).abs() / a).sum();
    Ok(total / u.len() as f64 * 100.0)
}

/// Metrics for a single evaluation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub rmse: f64,
    pub nrmse: f64,
    pub mape: f64,
}

impl RunMetrics {
    pub fn compute(u: &[f64], u_hat: &[f64]) -> Result<Self> {
        Ok(Self {
            rmse: rmse(u, u_hat)?,
            nrmse: nrmse(u, u_hat)?,
            mape: mape(u, u_hat)?,
        })
    }
}

/// Metrics averaged over runs, with the per-run values kept alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rmse: f64,
    pub nrmse: f64,
    pub mape: f64,
    pub n_steps: usize,
    pub runs: usize,
    pub per_run: Vec<RunMetrics>,
}

impl EvalReport {
    pub fn from_runs(per_run: Vec<RunMetrics>, n_steps: usize) -> Result<Self> {
        if per_run.is_empty() {
            return Err(Error::Data("no runs to average".into()));
        }
        let n = per_run.len() as f64;
        let mean = |f: fn(&RunMetrics) -> f64| per_run.iter().map(f).sum::<f64>() / n;
        Ok(Self {
            rmse: mean(|m| m.rmse),
            nrmse: mean(|m| m.nrmse),
            mape: mean(|m| m.mape),
            n_steps,
            runs: per_run.len(),
            per_run,
        })
    }
}
