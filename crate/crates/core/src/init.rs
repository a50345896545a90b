//! Weight construction for a modular deep ESN.
//!
//! Every weight class is built the same way: sample a base matrix, nullify
//! entries with the class sparsity, then rescale (spectral scaling for the
//! recurrent matrices, 2-norm scaling for input and inter-reservoir
//! matrices). Xavier classes skip the rescale.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, Dist, Matrix, RngStream};
use crate::readout::ReadoutWeights;
use crate::topology::{Connectivity, Source};

/// A scale hyperparameter that is either numeric or replaced by Xavier
/// sampling (written `X`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Scale {
    Xavier,
    Value(f64),
}

impl Scale {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Scale::Xavier => None,
            Scale::Value(v) => Some(v),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scale::Xavier => write!(f, "X"),
            Scale::Value(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("x") {
            return Ok(Scale::Xavier);
        }
        s.parse::<f64>()
            .map(Scale::Value)
            .map_err(|_| Error::Config(format!("expected a number or X, got {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitSpec {
    /// Target effective spectral radius of every recurrent matrix.
    pub rho_hat: Scale,
    /// 2-norm of each input block.
    pub sigma_in: Scale,
    /// 2-norm of each inter-reservoir matrix.
    pub sigma_l: Scale,
    /// Sparsity of input blocks.
    pub s_in: f64,
    /// Sparsity of recurrent matrices.
    pub s_hat_l: f64,
    /// Sparsity of inter-reservoir matrices.
    pub s_l: f64,
    /// Leak rate shared by every reservoir.
    pub alpha: f64,
}

impl Default for InitSpec {
    fn default() -> Self {
        Self {
            rho_hat: Scale::Xavier,
            sigma_in: Scale::Value(0.1),
            sigma_l: Scale::Xavier,
            s_in: 0.1,
            s_hat_l: 0.1,
            s_l: 0.7,
            alpha: 0.6,
        }
    }
}

impl InitSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, s) in [("s_in", self.s_in), ("s_hat_l", self.s_hat_l), ("s_l", self.s_l)] {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::Parameter(format!("{name} must lie in [0, 1], got {s}")));
            }
        }
        if let Scale::Value(r) = self.rho_hat {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::Parameter(format!("rho_hat must lie in (0, 1), got {r}")));
            }
        }
        for (name, s) in [("sigma_in", self.sigma_in), ("sigma_l", self.sigma_l)] {
            if let Scale::Value(v) = s {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Parameter(format!("{name} must be > 0, got {v}")));
                }
            }
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Parameter(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Standard deviation used by Xavier sampling.
pub fn xavier_std(n_in: usize, n_out: usize) -> Result<f64> {
    if n_in + n_out == 0 {
        return Err(Error::Parameter("xavier fan-in plus fan-out must be > 0".into()));
    }
    Ok((2.0 / (n_in + n_out) as f64).sqrt())
}

pub fn xavier_matrix(
    n_in: usize,
    n_out: usize,
    rows: usize,
    cols: usize,
    stream: &RngStream,
) -> Result<Matrix> {
    let sigma = xavier_std(n_in, n_out)?;
    stream.matrix(Dist::Normal { mu: 0.0, sigma }, rows, cols)
}

/// Radius of the leaky update matrix `(1 - a) I + a m`.
pub fn effective_radius(m: &Matrix, a: f64) -> Result<f64> {
    let n = m.nrows();
    let eff = Matrix::identity(n, n) * (1.0 - a) + m * a;
    numerics::spectral_radius(&eff)
}

/// Returns `c * m` with `c >= 0` chosen so that the effective radius of the
/// result equals `rho_hat`.
///
/// The eigenvalues of `(1 - a) I + a c m` are `(1 - a) + a c λ` for the
/// eigenvalues `λ` of `m`, so the radius as a function of `c` is a maximum of
/// convex functions that starts at `1 - a < rho_hat`. It crosses `rho_hat`
/// exactly once, which bisection finds.
pub fn scale_to_effective_radius(m: &Matrix, a: f64, rho_hat: f64) -> Result<Matrix> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "recurrent matrix must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::Parameter(format!("leak must lie in (0, 1], got {a}")));
    }
    if !(rho_hat < 1.0) {
        return Err(Error::Parameter(format!("rho_hat must be < 1, got {rho_hat}")));
    }
    if rho_hat <= 1.0 - a {
        return Err(Error::Infeasible(format!(
            "rho_hat {rho_hat} <= 1 - a = {}: the identity term alone reaches the target",
            1.0 - a
        )));
    }
    if m.iter().all(|&v| v == 0.0) {
        return Err(Error::Degenerate("cannot rescale an all-zero recurrent matrix".into()));
    }

    let eig = numerics::eigenvalues(m)?;
    let radius_at = |c: f64| {
        eig.iter()
            .map(|&(re, im)| ((1.0 - a) + a * c * re).hypot(a * c * im))
            .fold(0.0, f64::max)
    };

    let mut hi = 1.0;
    let mut doublings = 0;
    while radius_at(hi) <= rho_hat {
        hi *= 2.0;
        doublings += 1;
        if doublings > 1000 || !hi.is_finite() {
            return Err(Error::Degenerate(
                "effective radius never reaches rho_hat (nilpotent recurrent matrix)".into(),
            ));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if radius_at(mid) <= rho_hat {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(m * lo)
}

/// Rescales `m` so its largest singular value equals `sigma`.
pub fn normalize_l2(m: &Matrix, sigma: f64) -> Result<Matrix> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Parameter(format!("sigma must be > 0, got {sigma}")));
    }
    let norm = numerics::norm2(m);
    if norm == 0.0 {
        return Err(Error::Degenerate("cannot normalize an all-zero matrix".into()));
    }
    Ok(m * (sigma / norm))
}

/// Zeroes each entry independently with probability `s`.
pub fn apply_sparsity(m: &Matrix, s: f64, stream: &RngStream) -> Result<Matrix> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Parameter(format!("sparsity must lie in [0, 1], got {s}")));
    }
    let draws = stream.draw(Dist::Uniform { lo: 0.0, hi: 1.0 }, m.len())?;
    let mut out = m.clone();
    // row-major walk so the mask does not depend on storage order
    let cols = m.ncols();
    for (k, u) in draws.into_iter().enumerate() {
        if u < s {
            out[(k / cols, k % cols)] = 0.0;
        }
    }
    Ok(out)
}

/// Per-reservoir weights and state parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Reservoir {
    pub leak: f64,
    /// Recurrent matrix, `N_R x N_R`.
    pub recurrent: Matrix,
    /// Input block, `N_R x N_U`, present for input-connected reservoirs.
    pub input: Option<Matrix>,
    /// Feedforward matrices from lower-indexed reservoirs, `N_R x N_R` each.
    pub feeds: Vec<(usize, Matrix)>,
    pub gain: DVector<f64>,
    pub bias: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EsnModel {
    connectivity: Connectivity,
    n_u: usize,
    n_r: usize,
    reservoirs: Vec<Reservoir>,
    readout: Option<ReadoutWeights>,
}

impl EsnModel {
    /// Assembles a model from explicit weights. Used by tests and by callers
    /// that load weights from elsewhere.
    pub fn from_parts(
        connectivity: Connectivity,
        n_u: usize,
        n_r: usize,
        reservoirs: Vec<Reservoir>,
    ) -> Result<Self> {
        if reservoirs.len() != connectivity.n_reservoirs() {
            return Err(Error::Dimension(format!(
                "{} reservoirs given for a topology with {}",
                reservoirs.len(),
                connectivity.n_reservoirs()
            )));
        }
        for (l, r) in reservoirs.iter().enumerate() {
            let sq = (n_r, n_r);
            if r.recurrent.shape() != sq || r.gain.len() != n_r || r.bias.len() != n_r {
                return Err(Error::Dimension(format!("reservoir {l} has wrong shapes")));
            }
            if r.input.is_some() != connectivity.has_edge(Source::Input, l) {
                return Err(Error::Dimension(format!("reservoir {l} input block disagrees with topology")));
            }
            if let Some(w) = &r.input {
                if w.shape() != (n_r, n_u) {
                    return Err(Error::Dimension(format!("reservoir {l} input block is not {n_r}x{n_u}")));
                }
            }
            let preds: Vec<usize> = connectivity
                .predecessors(l)?
                .into_iter()
                .filter_map(|s| match s {
                    Source::Reservoir(s) => Some(s),
                    Source::Input => None,
                })
                .collect();
            let fed: Vec<usize> = r.feeds.iter().map(|(s, _)| *s).collect();
            if preds != fed || r.feeds.iter().any(|(_, w)| w.shape() != sq) {
                return Err(Error::Dimension(format!("reservoir {l} feeds disagree with topology")));
            }
            if !(r.leak >= 0.0 && r.leak <= 1.0) {
                return Err(Error::Parameter(format!("reservoir {l} leak {} outside [0, 1]", r.leak)));
            }
        }
        Ok(Self {
            connectivity,
            n_u,
            n_r,
            reservoirs,
            readout: None,
        })
    }

    pub fn connectivity(&self) -> &Connectivity {
        &self.connectivity
    }

    pub fn n_u(&self) -> usize {
        self.n_u
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_l(&self) -> usize {
        self.reservoirs.len()
    }

    /// Rows of the concatenated state `(u, x_1, .., x_{N_L})`.
    pub fn state_dim(&self) -> usize {
        self.n_u + self.n_l() * self.n_r
    }

    pub fn reservoirs(&self) -> &[Reservoir] {
        &self.reservoirs
    }

    pub(crate) fn reservoirs_mut(&mut self) -> &mut [Reservoir] {
        &mut self.reservoirs
    }

    pub fn readout(&self) -> Option<&ReadoutWeights> {
        self.readout.as_ref()
    }

    pub fn with_readout(mut self, readout: ReadoutWeights) -> Result<Self> {
        if readout.w_out.ncols() != self.state_dim() {
            return Err(Error::Dimension(format!(
                "readout expects {} state rows, model has {}",
                readout.w_out.ncols(),
                self.state_dim()
            )));
        }
        self.readout = Some(readout);
        Ok(self)
    }

    /// Largest effective radius over all reservoirs.
    pub fn max_effective_radius(&self) -> Result<f64> {
        self.reservoirs
            .iter()
            .map(|r| effective_radius(&r.recurrent, r.leak))
            .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r)))
    }
}

fn sample_class(
    scale: Scale,
    n_in: usize,
    n_out: usize,
    rows: usize,
    cols: usize,
    stream: &RngStream,
) -> Result<Matrix> {
    match scale {
        Scale::Xavier => xavier_matrix(n_in, n_out, rows, cols, stream),
        Scale::Value(_) => stream.matrix(Dist::Uniform { lo: -1.0, hi: 1.0 }, rows, cols),
    }
}

fn scaled_block(
    scale: Scale,
    sparsity: f64,
    n_in: usize,
    n_out: usize,
    stream: &RngStream,
) -> Result<Matrix> {
    let base = sample_class(scale, n_in, n_out, n_out, n_in, &stream.child("base"))?;
    let sparse = apply_sparsity(&base, sparsity, &stream.child("mask"))?;
    match scale {
        Scale::Xavier => Ok(sparse),
        Scale::Value(sigma) => normalize_l2(&sparse, sigma),
    }
}

/// Builds every fixed weight of a model. Gains start at 1 and biases at 0.
pub fn build_model(
    connectivity: &Connectivity,
    n_u: usize,
    n_r: usize,
    spec: &InitSpec,
    stream: &RngStream,
) -> Result<EsnModel> {
    spec.validate()?;
    if n_u == 0 || n_r == 0 {
        return Err(Error::Parameter(format!("N_U and N_R must be >= 1, got {n_u} and {n_r}")));
    }
    let mut reservoirs = Vec::with_capacity(connectivity.n_reservoirs());
    for l in 0..connectivity.n_reservoirs() {
        let res_stream = stream.child("res").child(l);

        let rec_stream = res_stream.child("recurrent");
        let base = sample_class(spec.rho_hat, n_r, n_r, n_r, n_r, &rec_stream.child("base"))?;
        let sparse = apply_sparsity(&base, spec.s_hat_l, &rec_stream.child("mask"))?;
        let recurrent = match spec.rho_hat {
            Scale::Xavier => sparse,
            Scale::Value(rho) => {
                let scaled = scale_to_effective_radius(&sparse, spec.alpha, rho)?;
                let check = effective_radius(&scaled, spec.alpha)?;
                if (check - rho).abs() > 1e-6 {
                    return Err(Error::Numerical(format!(
                        "reservoir {l}: effective radius {check} misses target {rho}"
                    )));
                }
                scaled
            }
        };

        let input = if connectivity.has_edge(Source::Input, l) {
            Some(scaled_block(spec.sigma_in, spec.s_in, n_u, n_r, &res_stream.child("input"))?)
        } else {
            None
        };

        let mut feeds = Vec::new();
        for src in connectivity.predecessors(l)? {
            if let Source::Reservoir(s) = src {
                let w = scaled_block(spec.sigma_l, spec.s_l, n_r, n_r, &stream.child("edge").child(format!("{s}-{l}")))?;
                feeds.push((s, w));
            }
        }

        reservoirs.push(Reservoir {
            leak: spec.alpha,
            recurrent,
            input,
            feeds,
            gain: DVector::from_element(n_r, 1.0),
            bias: DVector::zeros(n_r),
        });
    }
    EsnModel::from_parts(connectivity.clone(), n_u, n_r, reservoirs)
}
