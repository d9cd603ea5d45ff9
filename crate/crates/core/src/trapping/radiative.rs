//! Radiatively broadened medium: the collective rate enters its own
//! linewidth `Γ_ab = γ_ab + Γ`, so Γ is the root of a scalar fixed-point
//! equation.

use crate::error::{Error, Result};
use crate::model::{gamma_ab, PopulationState, SystemParams, GAMMA, POPULATION_TOLERANCE};

use super::quadrature::saturation_ratio;

/// Iteration cap of the fixed-point solver.
pub const MAX_ITERATIONS: usize = 200;

const STEP_TOLERANCE: f64 = 1e-12;

/// Right-hand side `g(Γ) = γ ρ_aa [1 - exp(-K̃ x γ_ab/(γ_ab+Γ))] / x` of the
/// self-consistency condition `Γ = g(Γ)`, with `x = ρ_bb - ρ_aa`.
///
/// `K̃ x γ_ab/(γ_ab+Γ)` equals `K0 x / (γ_ab+Γ)` because `K̃ = K0 γ/γ_ab`.
pub fn self_consistency_rhs(state: &PopulationState, params: &SystemParams, k0: f64, collective: f64) -> f64 {
    let excited = state.rho_aa.max(0.0);
    let line = gamma_ab(params) + collective;
    GAMMA * excited * saturation_ratio(k0 * params.gamma, state.difference(), 1.0 / line)
}

/// Self-consistent collective rate Γ* at line centre.
///
/// The right-hand side is non-increasing in Γ, so the root is unique and
/// bracketed by `[0, g(0)]`. Newton steps are taken inside the bracket and
/// replaced by bisection whenever they leave it.
pub fn gamma_selfconsistent_rad(state: &PopulationState, params: &SystemParams, k0: f64) -> Result<f64> {
    if state.rho_aa > state.rho_bb + POPULATION_TOLERANCE {
        return Err(Error::Inversion {
            rho_aa: state.rho_aa,
            rho_bb: state.rho_bb,
        });
    }
    let excited = state.rho_aa.max(0.0);
    if excited == 0.0 || k0 == 0.0 {
        return Ok(0.0);
    }

    let x = state.difference();
    let k = k0 * params.gamma;
    let base = gamma_ab(params);

    let mut lo = 0.0;
    let mut hi = self_consistency_rhs(state, params, k0, 0.0);
    if hi == 0.0 {
        return Ok(0.0);
    }
    let mut current = hi;
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let s = 1.0 / (base + current);
        let value = current - self_consistency_rhs(state, params, k0, current);
        residual = value.abs();
        if value == 0.0 {
            return Ok(current);
        }
        if value > 0.0 {
            hi = current;
        } else {
            lo = current;
        }
        // d/dΓ of Γ - g(Γ); the 1/x factor cancels in the derivative.
        let slope = 1.0 + GAMMA * excited * k * (-k * x * s).exp() * s * s;
        let mut next = current - value / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - current).abs() < STEP_TOLERANCE * (1.0 + current) {
            return Ok(next);
        }
        current = next;
    }
    Err(Error::NoConvergence {
        solver: "radiative fixed point",
        iterations: MAX_ITERATIONS,
        residual,
    })
}

/// Spectral collective rate `Γ(Δ)` in the radiative regime, given the
/// self-consistent line-centre value `gamma_star`. `delta` is in units of γ.
pub fn gamma_spectral_rad(
    state: &PopulationState,
    params: &SystemParams,
    k0: f64,
    gamma_star: f64,
    delta: f64,
) -> f64 {
    let excited = state.rho_aa.max(0.0);
    let line = gamma_ab(params) + gamma_star;
    let profile = line / (line * line + delta * delta);
    GAMMA * excited * saturation_ratio(k0 * params.gamma, state.difference(), profile)
}
