//! Leaky-integrator state transition and state harvesting.

use nalgebra::{DVector, DVectorView};

use crate::data::TimeSeries;
use crate::error::{Error, Result};
use crate::init::{EsnModel, Reservoir};
use crate::numerics::Matrix;

/// Concatenated network states, one column per retained time step.
///
/// Rows `0..N_U` hold the input, rows `N_U + l*N_R .. N_U + (l+1)*N_R` hold
/// reservoir `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMatrix {
    pub states: Matrix,
    pub washout: usize,
    pub n_u: usize,
    pub n_r: usize,
}

impl StateMatrix {
    pub fn n_steps(&self) -> usize {
        self.states.ncols()
    }

    pub fn dim(&self) -> usize {
        self.states.nrows()
    }

    pub fn n_l(&self) -> usize {
        (self.dim() - self.n_u) / self.n_r
    }

    pub fn reservoir_rows(&self, l: usize) -> std::ops::Range<usize> {
        let start = self.n_u + l * self.n_r;
        start..start + self.n_r
    }
}

/// Pre-gain net input of reservoir `res`: the summed feedforward drive plus
/// the recurrent term. `states[s]` must already hold time `t` for every
/// predecessor `s`, and `x_prev` holds time `t - 1` for this reservoir.
pub(crate) fn net_input(
    res: &Reservoir,
    u_t: DVectorView<'_, f64>,
    states: &[DVector<f64>],
    x_prev: &DVector<f64>,
    out: &mut DVector<f64>,
) {
    out.gemv(1.0, &res.recurrent, x_prev, 0.0);
    if let Some(w_in) = &res.input {
        out.gemv(1.0, w_in, &u_t, 1.0);
    }
    for (s, w) in &res.feeds {
        out.gemv(1.0, w, &states[*s], 1.0);
    }
}

/// Leaky update applied in place: `x = (1-a) x + a tanh(g*net + b)`.
/// Leaves the activation `tanh(g*net + b)` in `net`.
pub(crate) fn integrate(res: &Reservoir, net: &mut DVector<f64>, x: &mut DVector<f64>) {
    let a = res.leak;
    for i in 0..x.len() {
        let act = (res.gain[i] * net[i] + res.bias[i]).tanh();
        net[i] = act;
        x[i] = (1.0 - a) * x[i] + a * act;
    }
}

/// One state update of reservoir `l` given its summed feedforward drive.
pub fn step(
    model: &EsnModel,
    l: usize,
    x_prev: &DVector<f64>,
    drive: &DVector<f64>,
) -> Result<DVector<f64>> {
    let res = model
        .reservoirs()
        .get(l)
        .ok_or_else(|| Error::Dimension(format!("reservoir index {l} out of range")))?;
    let n_r = model.n_r();
    if x_prev.len() != n_r || drive.len() != n_r {
        return Err(Error::Dimension(format!(
            "state and drive must have length {n_r}, got {} and {}",
            x_prev.len(),
            drive.len()
        )));
    }
    let mut net = drive.clone();
    net.gemv(1.0, &res.recurrent, x_prev, 1.0);
    let mut x = x_prev.clone();
    integrate(res, &mut net, &mut x);
    Ok(x)
}

fn check_inputs(model: &EsnModel, inputs: &Matrix, washout: usize) -> Result<()> {
    if inputs.nrows() != model.n_u() {
        return Err(Error::Dimension(format!(
            "input has {} rows, model expects {}",
            inputs.nrows(),
            model.n_u()
        )));
    }
    if inputs.ncols() <= washout {
        return Err(Error::Data(format!(
            "input length {} must exceed washout {washout}",
            inputs.ncols()
        )));
    }
    if inputs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("input contains non-finite values".into()));
    }
    Ok(())
}

/// Runs the network from the zero state and drops the first `washout`
/// columns. `inputs` is `N_U x N_t`.
pub fn run(model: &EsnModel, inputs: &Matrix, washout: usize) -> Result<StateMatrix> {
    run_from(model, inputs, None, washout)
}

pub fn run_series(model: &EsnModel, input: &TimeSeries, washout: usize) -> Result<StateMatrix> {
    run(model, &input.as_row(), washout)
}

/// Like [`run`], starting from explicit per-reservoir states.
pub fn run_from(
    model: &EsnModel,
    inputs: &Matrix,
    initial: Option<&[DVector<f64>]>,
    washout: usize,
) -> Result<StateMatrix> {
    check_inputs(model, inputs, washout)?;
    let (n_u, n_r, n_l) = (model.n_u(), model.n_r(), model.n_l());
    let mut states: Vec<DVector<f64>> = match initial {
        Some(init) => {
            if init.len() != n_l || init.iter().any(|x| x.len() != n_r) {
                return Err(Error::Dimension(format!(
                    "initial state must be {n_l} vectors of length {n_r}"
                )));
            }
            init.to_vec()
        }
        None => vec![DVector::zeros(n_r); n_l],
    };
    let n_t = inputs.ncols();
    let mut out = Matrix::zeros(model.state_dim(), n_t - washout);
    let mut net = DVector::zeros(n_r);
    for t in 0..n_t {
        let u_t = inputs.column(t);
        for l in 0..n_l {
            let res = &model.reservoirs()[l];
            net_input(res, u_t, &states, &states[l], &mut net);
            integrate(res, &mut net, &mut states[l]);
        }
        if t >= washout {
            let mut col = out.column_mut(t - washout);
            col.rows_mut(0, n_u).copy_from(&u_t);
            for (l, x) in states.iter().enumerate() {
                col.rows_mut(n_u + l * n_r, n_r).copy_from(x);
            }
        }
    }
    Ok(StateMatrix {
        states: out,
        washout,
        n_u,
        n_r,
    })
}
