//! Modular deep echo state networks.
//!
//! A network is a set of leaky-tanh reservoirs wired by one of four
//! feedforward topologies (`topology`), with fixed weights built by `init`,
//! optional intrinsic-plasticity pre-training (`ip`) and a ridge-regression
//! readout (`readout`) over the concatenation of the input and every
//! reservoir state. `experiment` drives the forecasting benchmarks and
//! `evolve` searches hyperparameters with a genetic algorithm.

// Range checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod data;
pub mod error;
pub mod evolve;
pub mod experiment;
pub mod init;
pub mod ip;
pub mod metrics;
pub mod numerics;
pub mod readout;
pub mod report;
pub mod reservoir;
pub mod topology;

pub use error::{Error, ErrorKind, Result};
