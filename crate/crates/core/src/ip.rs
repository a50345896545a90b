//! Intrinsic plasticity: unsupervised adaptation of per-neuron gain and bias
//! so that tanh activations approach a target Gaussian.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::init::EsnModel;
use crate::numerics::Matrix;
use crate::reservoir::{integrate, net_input};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IpConfig {
    pub eta: f64,
    pub mu: f64,
    pub sigma: f64,
    pub epochs: usize,
}

impl Default for IpConfig {
    fn default() -> Self {
        Self {
            eta: 1e-4,
            mu: 0.0,
            sigma: 0.2,
            epochs: 10,
        }
    }
}

impl IpConfig {
    /// `eta = 0` is accepted and leaves the model unchanged.
    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::Parameter(format!("ip.eta must be >= 0, got {}", self.eta)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Parameter(format!("ip.sigma must be > 0, got {}", self.sigma)));
        }
        if !self.mu.is_finite() {
            return Err(Error::Parameter(format!("ip.mu must be finite, got {}", self.mu)));
        }
        if self.epochs == 0 {
            return Err(Error::Parameter("ip.epochs must be >= 1".into()));
        }
        Ok(())
    }
}

/// Returns `(Δb, Δg)` for a neuron with net input `x`, gain `g` and bias `b`.
pub fn ip_update(x: f64, g: f64, b: f64, cfg: &IpConfig) -> (f64, f64) {
    let y = (g * x + b).tanh();
    let var = cfg.sigma * cfg.sigma;
    let db = -cfg.eta * (-cfg.mu / var + (y / var) * (2.0 * var + 1.0 - y * y + cfg.mu * y));
    let dg = cfg.eta / g + db * x;
    (db, dg)
}

/// Runs `cfg.epochs` passes of online gain/bias updates over `inputs`
/// (`N_U x N_t`), restarting from the zero state each pass. Weights are left
/// untouched.
pub fn pretrain(model: &EsnModel, inputs: &Matrix, cfg: &IpConfig) -> Result<EsnModel> {
    cfg.validate()?;
    if model.readout().is_some() {
        return Err(Error::Parameter("intrinsic plasticity must run before readout training".into()));
    }
    if inputs.ncols() == 0 {
        return Err(Error::Data("empty pre-training input".into()));
    }
    if inputs.nrows() != model.n_u() {
        return Err(Error::Dimension(format!(
            "input has {} rows, model expects {}",
            inputs.nrows(),
            model.n_u()
        )));
    }
    let mut model = model.clone();
    if cfg.eta == 0.0 {
        return Ok(model);
    }
    let (n_r, n_l) = (model.n_r(), model.n_l());
    let mut net = DVector::zeros(n_r);
    let mut act = DVector::zeros(n_r);
    for epoch in 0..cfg.epochs {
        let mut states = vec![DVector::<f64>::zeros(n_r); n_l];
        for t in 0..inputs.ncols() {
            let u_t = inputs.column(t);
            for l in 0..n_l {
                net_input(&model.reservoirs()[l], u_t, &states, &states[l], &mut net);
                act.copy_from(&net);
                integrate(&model.reservoirs()[l], &mut act, &mut states[l]);

                let res = &mut model.reservoirs_mut()[l];
                for i in 0..n_r {
                    let (db, dg) = ip_update(net[i], res.gain[i], res.bias[i], cfg);
                    res.bias[i] += db;
                    res.gain[i] += dg;
                    if !(res.gain[i] > 0.0 && res.gain[i].is_finite() && res.bias[i].is_finite()) {
                        return Err(Error::Divergence(format!(
                            "gain of neuron {i} in reservoir {l} reached {} at epoch {epoch}, step {t}; \
                             reduce ip.eta",
                            res.gain[i]
                        )));
                    }
                }
            }
        }
    }
    Ok(model)
}

/// Mean and standard deviation of every tanh activation produced while
/// running `inputs` through the model from the zero state.
pub fn activation_moments(model: &EsnModel, inputs: &Matrix) -> Result<(f64, f64, usize)> {
    if inputs.nrows() != model.n_u() {
        return Err(Error::Dimension(format!(
            "input has {} rows, model expects {}",
            inputs.nrows(),
            model.n_u()
        )));
    }
    let (n_r, n_l) = (model.n_r(), model.n_l());
    let mut states = vec![DVector::<f64>::zeros(n_r); n_l];
    let mut net = DVector::zeros(n_r);
    // Welford
    let (mut n, mut mean, mut m2) = (0usize, 0.0f64, 0.0f64);
    for t in 0..inputs.ncols() {
        let u_t = inputs.column(t);
        for l in 0..n_l {
            let res = &model.reservoirs()[l];
            net_input(res, u_t, &states, &states[l], &mut net);
            integrate(res, &mut net, &mut states[l]);
            for &y in net.iter() {
                n += 1;
                let d = y - mean;
                mean += d / n as f64;
                m2 += d * (y - mean);
            }
        }
    }
    if n < 2 {
        return Err(Error::Data("need at least two activations".into()));
    }
    Ok((mean, (m2 / n as f64).sqrt(), n))
}

/// KL divergence from a Gaussian with moments `(mean, std)` to `N(mu, sigma^2)`.
pub fn kl_from_moments(mean: f64, std: f64, mu: f64, sigma: f64) -> Result<f64> {
    if !(std > 0.0 && std.is_finite()) {
        return Err(Error::Data(format!("degenerate sample: standard deviation {std}")));
    }
    if !(sigma > 0.0) {
        return Err(Error::Parameter(format!("target sigma must be > 0, got {sigma}")));
    }
    let kl = (sigma / std).ln() + (std * std + (mean - mu).powi(2)) / (2.0 * sigma * sigma) - 0.5;
    Ok(kl.max(0.0))
}

/// KL(empirical || N(mu, sigma^2)) using a Gaussian fit to the sample moments.
pub fn kl_estimate(activations: &[f64], mu: f64, sigma: f64) -> Result<f64> {
    if activations.len() < 2 {
        return Err(Error::Data("need at least two samples".into()));
    }
    let n = activations.len() as f64;
    let mean = activations.iter().sum::<f64>() / n;
    let var = activations.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    kl_from_moments(mean, var.sqrt(), mu, sigma)
}

/// KL of the model's pooled activations on `inputs` against the IP target.
pub fn activation_kl(model: &EsnModel, inputs: &Matrix, cfg: &IpConfig) -> Result<f64> {
    let (mean, std, _) = activation_moments(model, inputs)?;
    kl_from_moments(mean, std, cfg.mu, cfg.sigma)
}
