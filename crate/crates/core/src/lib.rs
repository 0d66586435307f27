//! Differentiable quantum architecture search for asynchronous
//! actor-critic agents.
//!
//! The layers, bottom up:
//!
//! * [`qsim`]: statevector simulator, Pauli-Z readout, circuit gradients.
//! * [`ansatz`]: the 36 candidate encoding/variational circuits and the six
//!   hand-designed baselines.
//! * [`ensemble`]: weighted candidate ensembles with structural weights.
//! * [`model`]: the hybrid actor-critic (linear map, quantum body, heads).
//! * [`env`]: seeded gridworld tasks with egocentric 7x7x3 observations.
//! * [`a3c`]: asynchronous advantage actor-critic training.
//! * [`cli`]: configuration, metrics files, checkpoints and reports.

pub mod a3c;
pub mod ansatz;
pub mod cli;
pub mod ensemble;
pub mod env;
mod error;
pub mod model;
pub mod qsim;

pub use error::{Error, Result};
