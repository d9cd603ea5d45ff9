//! Level populations, system parameters and the broad-band pumping rate
//! equations of the Λ system.
//!
//! Levels: `a` is the excited state, `c` the pumped ground state and `b` the
//! target state. The pump drives `c ↔ a`; `a` decays into `b` (rate γ) and
//! `c` (rate γ′); `b` and `c` exchange population at rate γ0. Trapped
//! photons add a repump/decay rate Γ on `a ↔ b`.
//!
//! Every rate is expressed in units of the free-space decay rate γ, which is
//! fixed to 1. Times are in units of 1/γ.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// The free-space decay rate `a → b`. All other rates are ratios to it.
pub const GAMMA: f64 = 1.0;

/// Tolerance used when checking population invariants.
pub const POPULATION_TOLERANCE: f64 = 1e-9;

/// Broadening regime of the `a ↔ b` transition, with its density parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Regime {
    /// Doppler broadened, `doppler_width = Δ_D/γ`. `density_param` is
    /// `K = g N λ² d_eff` with `g = γ / (√(2π) Δ_D)`.
    Inhomogeneous { doppler_width: f64, density_param: f64 },
    /// Purely radiative broadening. `density_param_k0` is
    /// `K0 = N λ² d_eff / 2π`.
    Radiative { density_param_k0: f64 },
}

impl Regime {
    pub fn inhomogeneous(doppler_width: f64, k: f64) -> Self {
        Regime::Inhomogeneous {
            doppler_width,
            density_param: k,
        }
    }

    pub fn radiative(k0: f64) -> Self {
        Regime::Radiative { density_param_k0: k0 }
    }

    /// Doppler regime for a given optical-depth product `N λ² d_eff`.
    pub fn inhomogeneous_from_optical_depth(n_lambda2_deff: f64, doppler_width: f64) -> Self {
        let g = GAMMA / ((2.0 * PI).sqrt() * doppler_width);
        Self::inhomogeneous(doppler_width, g * n_lambda2_deff)
    }

    /// Radiative regime for a given optical-depth product `N λ² d_eff`.
    pub fn radiative_from_optical_depth(n_lambda2_deff: f64) -> Self {
        Self::radiative(n_lambda2_deff / (2.0 * PI))
    }

    /// `K` in the Doppler regime, `K0` in the radiative regime.
    pub fn density_param(&self) -> f64 {
        match *self {
            Regime::Inhomogeneous { density_param, .. } => density_param,
            Regime::Radiative { density_param_k0 } => density_param_k0,
        }
    }

    /// Same regime with a different density parameter.
    pub fn with_density_param(self, value: f64) -> Self {
        match self {
            Regime::Inhomogeneous { doppler_width, .. } => Self::inhomogeneous(doppler_width, value),
            Regime::Radiative { .. } => Self::radiative(value),
        }
    }

    /// Column label used for the density parameter in tabular output.
    pub fn density_label(&self) -> &'static str {
        match self {
            Regime::Inhomogeneous { .. } => "K",
            Regime::Radiative { .. } => "K0",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Regime::Inhomogeneous {
                doppler_width,
                density_param,
            } => {
                if !(doppler_width.is_finite() && doppler_width > 0.0) {
                    return Err(invalid("doppler_width", format!("must be finite and > 0, got {doppler_width}")));
                }
                check_rate("density_param", density_param)
            }
            Regime::Radiative { density_param_k0 } => check_rate("density_param_k0", density_param_k0),
        }
    }
}

fn check_rate(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and non-negative, got {value}")))
    }
}

fn unit_gamma() -> f64 {
    GAMMA
}

/// Rates of the pumped Λ system in units of γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Always 1.
    #[serde(default = "unit_gamma")]
    pub gamma: f64,
    /// γ′/γ, decay `a → c`.
    pub gamma_prime: f64,
    /// γ0/γ, population exchange `b ↔ c`.
    pub gamma0: f64,
    /// R/γ, broad-band pump rate on `c ↔ a`.
    pub pump_rate: f64,
    pub regime: Regime,
}

impl SystemParams {
    pub fn new(gamma_prime: f64, gamma0: f64, pump_rate: f64, regime: Regime) -> Result<Self> {
        let params = SystemParams {
            gamma: GAMMA,
            gamma_prime,
            gamma0,
            pump_rate,
            regime,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma != GAMMA {
            return Err(invalid("gamma", format!("rates are normalized to gamma = 1, got {}", self.gamma)));
        }
        check_rate("gamma_prime", self.gamma_prime)?;
        check_rate("gamma0", self.gamma0)?;
        check_rate("pump_rate", self.pump_rate)?;
        self.regime.validate()
    }

    pub fn with_gamma0(mut self, gamma0: f64) -> Self {
        self.gamma0 = gamma0;
        self
    }

    pub fn with_regime(mut self, regime: Regime) -> Self {
        self.regime = regime;
        self
    }

    pub fn with_density_param(mut self, value: f64) -> Self {
        self.regime = self.regime.with_density_param(value);
        self
    }
}

/// Coherence decay rate of the `a ↔ b` transition without trapping,
/// `γ_ab = (γ + γ′ + R + γ0) / 2`.
pub fn gamma_ab(params: &SystemParams) -> f64 {
    0.5 * (params.gamma + params.gamma_prime + params.pump_rate + params.gamma0)
}

/// Effective radiative density parameter `K̃ = K0 γ / γ_ab`.
pub fn k_tilde(params: &SystemParams, k0: f64) -> f64 {
    k0 * params.gamma / gamma_ab(params)
}

/// Diagonal of the single-atom density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationState {
    pub rho_aa: f64,
    pub rho_bb: f64,
    pub rho_cc: f64,
}

impl PopulationState {
    pub fn new(rho_aa: f64, rho_bb: f64, rho_cc: f64) -> Result<Self> {
        let state = PopulationState { rho_aa, rho_bb, rho_cc };
        state.validate()?;
        Ok(state)
    }

    /// Equal populations in `b` and `c`, nothing excited.
    pub fn equal_ground() -> Self {
        PopulationState {
            rho_aa: 0.0,
            rho_bb: 0.5,
            rho_cc: 0.5,
        }
    }

    /// Everything in the target state.
    pub fn target() -> Self {
        PopulationState {
            rho_aa: 0.0,
            rho_bb: 1.0,
            rho_cc: 0.0,
        }
    }

    pub fn from_array(values: [f64; 3]) -> Self {
        PopulationState {
            rho_aa: values[0],
            rho_bb: values[1],
            rho_cc: values[2],
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.rho_aa, self.rho_bb, self.rho_cc]
    }

    pub fn trace(&self) -> f64 {
        self.rho_aa + self.rho_bb + self.rho_cc
    }

    /// Population still outside the target state, `ρ_aa + ρ_cc`.
    pub fn pumped(&self) -> f64 {
        self.rho_aa + self.rho_cc
    }

    /// `ρ_bb − ρ_aa`, the population difference on the trapped transition.
    pub fn difference(&self) -> f64 {
        self.rho_bb - self.rho_aa
    }

    pub fn validate(&self) -> Result<()> {
        let tol = POPULATION_TOLERANCE;
        for (name, value) in [("rho_aa", self.rho_aa), ("rho_bb", self.rho_bb), ("rho_cc", self.rho_cc)] {
            if !value.is_finite() || value < -tol || value > 1.0 + tol {
                return Err(invalid(name, format!("population must lie in [0, 1], got {value}")));
            }
        }
        let trace = self.trace();
        if (trace - 1.0).abs() > tol {
            return Err(invalid("trace", format!("populations must sum to 1, got {trace}")));
        }
        Ok(())
    }

    pub fn max_abs_difference(&self, other: &PopulationState) -> f64 {
        (self.rho_aa - other.rho_aa)
            .abs()
            .max((self.rho_bb - other.rho_bb).abs())
            .max((self.rho_cc - other.rho_cc).abs())
    }
}

/// Population derivatives `(ρ̇_aa, ρ̇_bb, ρ̇_cc)` for a given collective rate Γ.
///
/// `ρ̇_bb` is computed by closure so the three components sum to zero.
pub fn rate_rhs(state: &PopulationState, params: &SystemParams, collective: f64) -> [f64; 3] {
    let PopulationState { rho_aa, rho_bb, rho_cc } = *state;
    let pump = params.pump_rate * (rho_aa - rho_cc);
    let d_aa = -(params.gamma + params.gamma_prime + collective) * rho_aa + collective * rho_bb - pump;
    let d_cc = params.gamma_prime * rho_aa + params.gamma0 * rho_bb - params.gamma0 * rho_cc + pump;
    let d_bb = -(d_aa + d_cc);
    [d_aa, d_bb, d_cc]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(gamma_prime: f64, gamma0: f64, pump: f64) -> SystemParams {
        SystemParams::new(gamma_prime, gamma0, pump, Regime::radiative(0.0)).unwrap()
    }

    #[test]
    fn gamma_ab_examples() {
        assert_eq!(gamma_ab(&params(1.0, 0.0, 10.0)), 6.0);
        assert_eq!(gamma_ab(&params(0.0, 0.0, 0.0)), 0.5);
        assert_abs_diff_eq!(gamma_ab(&params(1.0, 0.01, 10.0)), 6.005, epsilon = 1e-15);
    }

    #[test]
    fn target_state_is_fixed_point() {
        let d = rate_rhs(&PopulationState::target(), &params(1.0, 0.0, 10.0), 0.0);
        assert_eq!(d, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn equal_ground_start() {
        let state = PopulationState::equal_ground();
        let d = rate_rhs(&state, &params(1.0, 0.0, 10.0), 0.0);
        assert_abs_diff_eq!(d[0], 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[2], -5.0, epsilon = 1e-15);
    }

    #[test]
    fn mixed_state_substitution() {
        // By hand: ȧ = -(1+1+2)·0.2 + 2·0.5 - 10·(0.2-0.3) = 1.2
        //          ċ = 0.2 + 0.1·0.5 - 0.1·0.3 + 10·(-0.1) = -0.78
        //          ḃ = (1+2)·0.2 - 2·0.5 - 0.1·0.5 + 0.1·0.3 = -0.42
        let state = PopulationState::new(0.2, 0.5, 0.3).unwrap();
        let d = rate_rhs(&state, &params(1.0, 0.1, 10.0), 2.0);
        assert_abs_diff_eq!(d[0], 1.2, epsilon = 1e-14);
        assert_abs_diff_eq!(d[1], -0.42, epsilon = 1e-14);
        assert_abs_diff_eq!(d[2], -0.78, epsilon = 1e-14);
        assert!(d.iter().sum::<f64>().abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(SystemParams::new(-1.0, 0.0, 1.0, Regime::radiative(1.0)).is_err());
        assert!(SystemParams::new(1.0, f64::NAN, 1.0, Regime::radiative(1.0)).is_err());
        assert!(SystemParams::new(1.0, 0.0, 1.0, Regime::inhomogeneous(0.0, 1.0)).is_err());
        assert!(SystemParams::new(1.0, 0.0, 1.0, Regime::radiative(-2.0)).is_err());
        let mut p = params(1.0, 0.0, 1.0);
        p.gamma = 2.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn rejects_bad_states() {
        assert!(PopulationState::new(0.5, 0.6, 0.0).is_err());
        assert!(PopulationState::new(-0.1, 0.6, 0.5).is_err());
        assert!(PopulationState::new(0.2, 0.3, 0.5).is_ok());
    }

    #[test]
    fn optical_depth_conversion() {
        let k0 = Regime::radiative_from_optical_depth(2.0 * PI).density_param();
        assert_abs_diff_eq!(k0, 1.0, epsilon = 1e-15);
        let k = Regime::inhomogeneous_from_optical_depth((2.0 * PI).sqrt() * 100.0, 100.0).density_param();
        assert_abs_diff_eq!(k, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn params_json_defaults_gamma() {
        let p: SystemParams = serde_json::from_str(
            r#"{"gamma_prime":1,"gamma0":0,"pump_rate":10,"regime":{"type":"radiative","density_param_k0":3}}"#,
        )
        .unwrap();
        assert_eq!(p.gamma, 1.0);
        assert_eq!(p.regime.density_param(), 3.0);
    }
}
