//! Sequential weak measurement of a spin-1/2 target through a spin-1/2 sensor.
//!
//! The crate computes second- and fourth-order correlations of the sensor's
//! ±1 outputs, either exactly by propagating Pauli transfer matrices or by
//! Monte Carlo quantum trajectories, and turns them into spectra, SNR figures
//! and acquisition-time plans.

pub mod checks;
pub mod correlators;
pub mod dynamics;
pub mod error;
pub mod noise;
pub mod params;
pub mod pauli;
pub mod planner;
pub mod spectra;

pub use error::{Error, Result};
pub use params::SimParams;
