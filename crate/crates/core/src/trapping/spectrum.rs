use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{gamma_ab, PopulationState, Regime, SystemParams};

use super::{gamma_selfconsistent_rad, gamma_spectral_inhom, gamma_spectral_rad};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Maximum sample scaled to 1.
    Peak,
    /// Unit trapezoidal area over the grid.
    Area,
    None,
}

/// Units of the detuning axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetuningUnit {
    /// Δ/γ
    Gamma,
    /// Δ/Δ_D
    DopplerWidth,
}

/// Samples of a spectral density on a strictly increasing detuning grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub detunings: Vec<f64>,
    pub values: Vec<f64>,
    pub normalization: Normalization,
    pub unit: DetuningUnit,
}

pub(crate) fn check_grid(deltas: &[f64]) -> Result<()> {
    if deltas.is_empty() {
        return Err(Error::DegenerateGrid("empty detuning grid".into()));
    }
    if deltas.iter().any(|d| !d.is_finite()) || deltas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::DegenerateGrid("detunings must be finite and strictly increasing".into()));
    }
    Ok(())
}

impl Spectrum {
    pub fn new(detunings: Vec<f64>, values: Vec<f64>, unit: DetuningUnit) -> Result<Self> {
        check_grid(&detunings)?;
        if detunings.len() != values.len() {
            return Err(Error::DegenerateGrid(format!(
                "{} detunings but {} values",
                detunings.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Domain("spectral samples must be finite and non-negative".into()));
        }
        Ok(Spectrum {
            detunings,
            values,
            normalization: Normalization::None,
            unit,
        })
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Trapezoidal area under the samples.
    pub fn area(&self) -> f64 {
        self.detunings
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(d, v)| 0.5 * (d[1] - d[0]) * (v[0] + v[1]))
            .sum()
    }

    /// Rescales the samples. A spectrum that is identically zero cannot be
    /// normalized and is returned unchanged.
    pub fn normalized(mut self, normalization: Normalization) -> Self {
        let scale = match normalization {
            Normalization::Peak => self.peak(),
            Normalization::Area => self.area(),
            Normalization::None => return self,
        };
        if scale > 0.0 {
            self.values.iter_mut().for_each(|v| *v /= scale);
            self.normalization = normalization;
        }
        self
    }

    /// Full width at half maximum of the peak, by linear interpolation
    /// between samples. `None` if the spectrum does not fall below half its
    /// maximum on both sides of the peak.
    pub fn fwhm(&self) -> Option<f64> {
        let (peak_idx, peak) = self
            .values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::MIN), |best, (i, v)| if v > best.1 { (i, v) } else { best });
        if peak <= 0.0 {
            return None;
        }
        let half = 0.5 * peak;
        let crossing = |i: usize, j: usize| {
            let (d0, d1) = (self.detunings[i], self.detunings[j]);
            let (v0, v1) = (self.values[i], self.values[j]);
            d0 + (half - v0) * (d1 - d0) / (v1 - v0)
        };
        let left = (0..peak_idx).rev().find(|&i| self.values[i] < half).map(|i| crossing(i, i + 1))?;
        let right = (peak_idx + 1..self.values.len())
            .find(|&i| self.values[i] < half)
            .map(|i| crossing(i - 1, i))?;
        Some(right - left)
    }
}

/// Absorption line of the `a ↔ b` transition: the real part of the
/// Lorentzian response `(ρ_bb - ρ_aa) Γ_ab / (Γ_ab² + Δ²)` with
/// `Γ_ab = γ_ab + Γ*`, peak normalized. Detunings in units of γ.
pub fn absorption_spectrum(
    state: &PopulationState,
    params: &SystemParams,
    gamma_star: f64,
    deltas: &[f64],
) -> Result<Spectrum> {
    check_grid(deltas)?;
    let line = gamma_ab(params) + gamma_star;
    let x = state.difference().max(0.0);
    let values = deltas.iter().map(|d| x * line / (line * line + d * d)).collect();
    Ok(Spectrum::new(deltas.to_vec(), values, DetuningUnit::Gamma)?.normalized(Normalization::Peak))
}

/// Gaussian Doppler profile `exp(-δ²/2)`, δ = Δ/Δ_D.
pub fn doppler_profile(deltas: &[f64]) -> Result<Spectrum> {
    check_grid(deltas)?;
    let values = deltas.iter().map(|d| (-0.5 * d * d).exp()).collect();
    Ok(Spectrum::new(deltas.to_vec(), values, DetuningUnit::DopplerWidth)?.normalized(Normalization::Peak))
}

/// Peak-normalized spectral distribution `Γ(Δ)/Γ(0)` of the trapped
/// radiation at the given (stationary) state.
///
/// In the Doppler regime `deltas` are Δ/Δ_D, in the radiative regime Δ/γ.
pub fn spectral_distribution(state: &PopulationState, params: &SystemParams, deltas: &[f64]) -> Result<Spectrum> {
    check_grid(deltas)?;
    let (values, unit) = match params.regime {
        Regime::Inhomogeneous { density_param, .. } => (
            deltas
                .iter()
                .map(|&d| gamma_spectral_inhom(state, density_param, d))
                .collect(),
            DetuningUnit::DopplerWidth,
        ),
        Regime::Radiative { density_param_k0 } => {
            let star = gamma_selfconsistent_rad(state, params, density_param_k0)?;
            (
                deltas
                    .iter()
                    .map(|&d| gamma_spectral_rad(state, params, density_param_k0, star, d))
                    .collect(),
                DetuningUnit::Gamma,
            )
        }
    };
    Ok(Spectrum::new(deltas.to_vec(), values, unit)?.normalized(Normalization::Peak))
}
