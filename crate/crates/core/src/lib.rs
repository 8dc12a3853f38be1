//! Simulation and reconstruction toolkit for photonic polarization
//! entanglement distillation through a polarization-dependent lossy filter.
//!
//! The filter is modelled as a partial polarizer with a single Kraus operator
//! `diag(√T_H, √T_V)`. Around it sit the state families it acts on
//! ([`states`]), the channel algebra ([`channels`]), figures of merit
//! ([`metrics`]), coincidence-count simulation with state and process
//! tomography ([`tomography`]), Poisson Monte Carlo error bars
//! ([`uncertainty`]) and end-to-end experiment runs ([`pipelines`]).
//!
//! The crate is `no_std` and needs only `alloc`. File formats and the command
//! line live in the companion `distill-cli` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod channels;
pub mod error;
pub mod matcore;
pub mod metrics;
mod optim;
pub mod pipelines;
pub mod rng;
pub mod states;
pub mod tomography;
pub mod uncertainty;

pub use error::{Error, Result};
pub use matcore::{CMatrix, C64};
