//! Collective decay/repump rate Γ produced by reabsorbed spontaneous photons.
//!
//! Doppler regime: Γ follows in closed form from the populations, after a
//! velocity average. Radiative regime: Γ broadens the very line that traps
//! it and has to be found self-consistently.

mod quadrature;
mod radiative;
mod spectrum;

use std::sync::atomic::{AtomicBool, Ordering};

use crate::error::Result;
use crate::model::{PopulationState, Regime, SystemParams, GAMMA};

pub use quadrature::{
    doppler_average, gauss_hermite_average, saturation_ratio, HERMITE_MAX_DEPTH, HERMITE_NODES, SERIES_THRESHOLD,
};
pub use radiative::{gamma_selfconsistent_rad, gamma_spectral_rad, self_consistency_rhs, MAX_ITERATIONS};
pub use spectrum::{
    absorption_spectrum, doppler_profile, spectral_distribution, DetuningUnit, Normalization, Spectrum,
};

fn warn_inversion(state: &PopulationState) {
    static WARNED: AtomicBool = AtomicBool::new(false);
    if state.rho_aa > state.rho_bb && !WARNED.swap(true, Ordering::Relaxed) {
        log::warn!(
            "rho_aa = {} exceeds rho_bb = {}: trapping rate evaluated outside its validity range",
            state.rho_aa,
            state.rho_bb
        );
    }
}

/// Spectral collective rate Γ(Δ) of a Doppler-broadened medium at
/// `delta_over_dw = Δ/Δ_D`.
pub fn gamma_spectral_inhom(state: &PopulationState, k: f64, delta_over_dw: f64) -> f64 {
    warn_inversion(state);
    let doppler = (-0.5 * delta_over_dw * delta_over_dw).exp();
    GAMMA * state.rho_aa.max(0.0) * saturation_ratio(k, state.difference(), doppler)
}

/// Velocity-averaged collective rate of a Doppler-broadened medium.
pub fn gamma_avg_inhom(state: &PopulationState, k: f64) -> f64 {
    warn_inversion(state);
    let excited = state.rho_aa.max(0.0);
    if excited == 0.0 || k == 0.0 {
        return 0.0;
    }
    GAMMA * excited * doppler_average(k, state.difference())
}

/// Collective rate for the regime and density parameter in `params`.
pub fn collective_rate(state: &PopulationState, params: &SystemParams) -> Result<f64> {
    match params.regime {
        Regime::Inhomogeneous { density_param, .. } => Ok(gamma_avg_inhom(state, density_param)),
        Regime::Radiative { density_param_k0 } => gamma_selfconsistent_rad(state, params, density_param_k0),
    }
}
