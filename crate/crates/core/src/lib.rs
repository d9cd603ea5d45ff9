//! Optical pumping of a Λ system in an optically thick medium, where
//! reabsorbed spontaneous photons feed back a population-dependent
//! collective decay and repump rate.
//!
//! * [`model`]: parameters, populations and the rate equations.
//! * [`trapping`]: the collective rate in the Doppler and radiative regimes,
//!   plus spectral distributions.
//! * [`dynamics`]: time evolution and effective pump rates.
//! * [`steadystate`]: stationary states and parameter sweeps.
//! * [`oracle`]: stochastic Bloch-equation ensemble with a broad-band pump.
//! * [`cli`]: scenario files, presets and CSV/manifest output.

pub mod cli;
pub mod dynamics;
pub mod steadystate;
pub mod error;
pub mod integrate;
pub mod model;
pub mod oracle;
pub mod trapping;

pub use error::{Error, Result};
pub use model::{gamma_ab, k_tilde, rate_rhs, PopulationState, Regime, SystemParams};
