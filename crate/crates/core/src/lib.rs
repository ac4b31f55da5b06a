//! Pulse-level simulation and calibration toolkit for flux-pulsed
//! controlled-phase gates between two coupled transmon qutrits.
//!
//! The crate is organised around the workflow used to bring up a sudden
//! net-zero (SNZ) CZ gate:
//!
//! * [`device`] and [`model`]: device parameters, the reduced
//!   `{|11>, |02>}` model and the full two-qutrit model with their
//!   time-ordered propagators.
//! * [`pulse`]: waveform generation on the AWG grid, linear-dynamical
//!   distortion and its inverse filter.
//! * [`gate`]: phase / leakage extraction, the interference conditions,
//!   fidelity and leakage of channels, residual ZZ.
//! * [`landscape`]: adaptive 2-D sampling, contouring, chevron fitting and
//!   valley-crossing calibration.
//! * [`noise`]: open-system simulation and the stacked error budget.
//! * [`rb`]: leakage-aware interleaved randomized-benchmarking analysis.

pub mod channel;
pub mod config;
pub mod device;
pub mod error;
pub mod fit;
pub mod gate;
pub mod landscape;
pub mod linalg;
pub mod model;
pub mod noise;
pub mod pulse;
pub mod rb;

pub use error::{Error, Result};

/// AWG sample period of the flux-control electronics, 1/2.4 ns.
pub const DEFAULT_TS: f64 = 1.0 / 2.4e9;

/// `2π · f` for a frequency in hertz.
#[inline]
pub fn angular(hz: f64) -> f64 {
    std::f64::consts::TAU * hz
}
