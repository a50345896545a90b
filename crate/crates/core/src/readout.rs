//! Ridge-regression readout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, Matrix};
use crate::reservoir::StateMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutWeights {
    /// `N_Y x state_dim`.
    pub w_out: Matrix,
    pub beta: f64,
}

/// Ridge solution `W = Y X^T (X X^T + beta I)^-1` for states `X`
/// (`dim x N_t`) and targets `Y` (`N_Y x N_t`).
pub fn ridge(states: &Matrix, targets: &Matrix, beta: f64) -> Result<ReadoutWeights> {
    if states.ncols() != targets.ncols() {
        return Err(Error::Data(format!(
            "states cover {} steps but targets cover {}",
            states.ncols(),
            targets.ncols()
        )));
    }
    if states.ncols() == 0 {
        return Err(Error::Data("cannot train a readout on zero time steps".into()));
    }
    let xt = states.transpose();
    let gram = states * &xt;
    let cross = targets * &xt;
    let w_out = numerics::solve_regularized(&gram, beta, &cross)?;
    Ok(ReadoutWeights { w_out, beta })
}

pub fn train_readout(states: &StateMatrix, targets: &Matrix, beta: f64) -> Result<ReadoutWeights> {
    ridge(&states.states, targets, beta)
}

pub fn predict(w: &ReadoutWeights, states: &StateMatrix) -> Result<Matrix> {
    if w.w_out.ncols() != states.dim() {
        return Err(Error::Dimension(format!(
            "readout expects {} state rows, got {}",
            w.w_out.ncols(),
            states.dim()
        )));
    }
    Ok(&w.w_out * &states.states)
}
