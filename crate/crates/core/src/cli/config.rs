//! Scenario files: JSON documents with optional per-mode sections, dotted
//! `--set` overrides, and the named presets.

use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::dynamics::EvolveOptions;
use crate::model::{PopulationState, Regime, SystemParams};
use crate::oracle::StochasticConfig;
use crate::steadystate::log_grid;
use crate::trapping::Normalization;

use super::{CliError, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Population transfer for K ∈ {0, 1, 10, 100}, Doppler broadened.
    Fig2,
    /// Doppler stationary sweep over K and γ0.
    Fig3,
    /// Radiative stationary sweep over K0 and γ0.
    Fig4,
    /// Trapped-radiation spectra for K0 ∈ {1, 10, 100}.
    Fig5,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpacing {
    #[default]
    Linear,
    Log,
}

fn default_evolve_points() -> usize {
    400
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSettings {
    /// Window length; `None` selects the per-density default `10/Γ_p`.
    #[serde(default)]
    pub t_end: Option<f64>,
    /// Output intervals.
    #[serde(default = "default_evolve_points")]
    pub n_out: usize,
    #[serde(default)]
    pub spacing: GridSpacing,
    /// First non-zero output time of a log grid, as a fraction of `t_end`.
    #[serde(default = "default_log_start")]
    pub log_start: f64,
    #[serde(default)]
    pub options: EvolveOptions,
}

fn default_log_start() -> f64 {
    1e-6
}

impl Default for EvolveSettings {
    fn default() -> Self {
        EvolveSettings {
            t_end: None,
            n_out: default_evolve_points(),
            spacing: GridSpacing::Linear,
            log_start: default_log_start(),
            options: EvolveOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    /// Log-spaced density grid, used when `density_params` is absent.
    pub density_min: f64,
    pub density_max: f64,
    pub n_points: usize,
    pub cross_check: bool,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            density_min: 1.0,
            density_max: 1e6,
            n_points: 25,
            cross_check: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSettings {
    /// Half-width of the symmetric detuning grid (γ radiative, Δ_D Doppler);
    /// `None` selects 50 and 4 respectively.
    #[serde(default)]
    pub delta_max: Option<f64>,
    #[serde(default = "default_spectrum_points")]
    pub n_points: usize,
    #[serde(default = "default_normalization")]
    pub normalization: Normalization,
}

fn default_spectrum_points() -> usize {
    2001
}

fn default_normalization() -> Normalization {
    Normalization::Peak
}

impl Default for SpectrumSettings {
    fn default() -> Self {
        SpectrumSettings {
            delta_max: None,
            n_points: default_spectrum_points(),
            normalization: default_normalization(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoteSettings {
    /// Window length in units of the closed-form `1/Γ_p`.
    #[serde(default = "default_window")]
    pub window_rates: f64,
    #[serde(default = "default_asymptote_points")]
    pub n_out: usize,
}

fn default_window() -> f64 {
    crate::dynamics::DEFAULT_WINDOW_RATES
}

fn default_asymptote_points() -> usize {
    2000
}

impl Default for AsymptoteSettings {
    fn default() -> Self {
        AsymptoteSettings {
            window_rates: default_window(),
            n_out: default_asymptote_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSettings {
    #[serde(default = "default_ensemble")]
    pub ensemble: StochasticConfig,
    #[serde(default = "default_oracle_t_end")]
    pub t_end: f64,
}

fn default_oracle_t_end() -> f64 {
    2.0
}

fn default_ensemble() -> StochasticConfig {
    StochasticConfig::new(200.0, 10_000, 1)
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            ensemble: default_ensemble(),
            t_end: default_oracle_t_end(),
        }
    }
}

/// A complete run description. Every optional field is filled in by
/// [`Scenario::resolved`] before a run, and the resolved form is what the
/// manifest records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub mode: Option<Mode>,
    pub params: SystemParams,
    /// `K` or `K0` values; defaults to the one in `params.regime`.
    #[serde(default)]
    pub density_params: Option<Vec<f64>>,
    /// γ0 series of a sweep (default {0, 1e-4, 1e-3, 1e-2}).
    #[serde(default)]
    pub gamma0_list: Option<Vec<f64>>,
    /// Initial populations (default ρ_bb = ρ_cc = 1/2).
    #[serde(default)]
    pub initial: Option<PopulationState>,
    #[serde(default)]
    pub evolve: EvolveSettings,
    #[serde(default)]
    pub sweep: SweepSettings,
    #[serde(default)]
    pub spectrum: SpectrumSettings,
    #[serde(default)]
    pub asymptote: AsymptoteSettings,
    #[serde(default)]
    pub oracle: OracleSettings,
}

pub const DEFAULT_GAMMA0_LIST: [f64; 4] = [0.0, 1e-4, 1e-3, 1e-2];

impl Scenario {
    pub fn new(params: SystemParams) -> Self {
        Scenario {
            mode: None,
            params,
            density_params: None,
            gamma0_list: None,
            initial: None,
            evolve: EvolveSettings::default(),
            sweep: SweepSettings::default(),
            spectrum: SpectrumSettings::default(),
            asymptote: AsymptoteSettings::default(),
            oracle: OracleSettings::default(),
        }
    }

    /// Density values to run, in order.
    pub fn densities(&self, mode: Mode) -> Vec<f64> {
        match (&self.density_params, mode) {
            (Some(list), _) => list.clone(),
            (None, Mode::Sweep) => log_grid(self.sweep.density_min, self.sweep.density_max, self.sweep.n_points),
            (None, _) => vec![self.params.regime.density_param()],
        }
    }

    /// Fills in every default that depends on the mode.
    pub fn resolved(mut self, mode: Mode) -> Self {
        self.mode = Some(mode);
        self.density_params = Some(self.densities(mode));
        self.gamma0_list
            .get_or_insert_with(|| if mode == Mode::Sweep { DEFAULT_GAMMA0_LIST.to_vec() } else { vec![self.params.gamma0] });
        self.initial.get_or_insert_with(PopulationState::equal_ground);
        if self.spectrum.delta_max.is_none() {
            self.spectrum.delta_max = Some(match self.params.regime {
                Regime::Inhomogeneous { .. } => 4.0,
                Regime::Radiative { .. } => 50.0,
            });
        }
        self
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |m: String| Err(CliError::Config(m));
        self.params.validate().map_err(CliError::from_core)?;
        if let Some(init) = &self.initial {
            init.validate().map_err(CliError::from_core)?;
        }
        if let Some(list) = &self.density_params {
            if list.is_empty() {
                return cfg("density_params must not be empty".into());
            }
            if let Some(k) = list.iter().find(|k| !(k.is_finite() && **k >= 0.0)) {
                return cfg(format!("density_params: values must be finite and >= 0, got {k}"));
            }
        }
        if let Some(list) = &self.gamma0_list {
            if list.is_empty() {
                return cfg("gamma0_list must not be empty".into());
            }
            if let Some(g) = list.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
                return cfg(format!("gamma0_list: values must be finite and >= 0, got {g}"));
            }
        }
        if let Some(t) = self.evolve.t_end {
            if !(t.is_finite() && t > 0.0) {
                return cfg(format!("evolve.t_end must be positive, got {t}"));
            }
        }
        if self.evolve.n_out < 2 {
            return cfg("evolve.n_out must be at least 2".into());
        }
        if !(self.evolve.log_start > 0.0 && self.evolve.log_start < 1.0) {
            return cfg(format!("evolve.log_start must lie in (0, 1), got {}", self.evolve.log_start));
        }
        let s = &self.sweep;
        if !(s.density_min > 0.0 && s.density_max >= s.density_min && s.n_points > 0) {
            return cfg("sweep: need 0 < density_min <= density_max and n_points > 0".into());
        }
        if let Some(d) = self.spectrum.delta_max {
            if !(d.is_finite() && d > 0.0) {
                return cfg(format!("spectrum.delta_max must be positive, got {d}"));
            }
        }
        if self.spectrum.n_points < 3 {
            return cfg("spectrum.n_points must be at least 3".into());
        }
        if !(self.asymptote.window_rates > 0.0) || self.asymptote.n_out < 10 {
            return cfg("asymptote: need window_rates > 0 and n_out >= 10".into());
        }
        if !(self.oracle.t_end.is_finite() && self.oracle.t_end > 0.0) {
            return cfg(format!("oracle.t_end must be positive, got {}", self.oracle.t_end));
        }
        Ok(())
    }

    pub fn preset(preset: Preset) -> Self {
        let doppler = |k| SystemParams::new(1.0, 0.0, 10.0, Regime::inhomogeneous(100.0, k)).expect("valid preset");
        let radiative = |k0, g0| SystemParams::new(1.0, g0, 10.0, Regime::radiative(k0)).expect("valid preset");
        match preset {
            Preset::Fig2 => {
                let mut s = Scenario::new(doppler(0.0));
                s.mode = Some(Mode::Evolve);
                s.density_params = Some(vec![0.0, 1.0, 10.0, 100.0]);
                s.evolve.t_end = Some(1e4);
                s.evolve.spacing = GridSpacing::Log;
                s.evolve.log_start = 1e-6;
                s
            }
            Preset::Fig3 => {
                let mut s = Scenario::new(doppler(1.0));
                s.mode = Some(Mode::Sweep);
                s.gamma0_list = Some(DEFAULT_GAMMA0_LIST.to_vec());
                s
            }
            Preset::Fig4 => {
                let mut s = Scenario::new(radiative(1.0, 0.0));
                s.mode = Some(Mode::Sweep);
                s.gamma0_list = Some(DEFAULT_GAMMA0_LIST[1..].to_vec());
                s
            }
            Preset::Fig5 => {
                let mut s = Scenario::new(radiative(1.0, 1e-4));
                s.mode = Some(Mode::Spectrum);
                s.density_params = Some(vec![1.0, 10.0, 100.0]);
                s.spectrum.delta_max = Some(50.0);
                s
            }
        }
    }
}

/// Sets `path` (dot separated) in `root` to `value`, creating objects on the way.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{assignment}`")))?;
    let path = path.trim();
    if path.is_empty() || path.split('.').any(str::is_empty) {
        return Err(CliError::Config(format!("--set: malformed key `{path}`")));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    let mut node = root;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        if !node.is_object() {
            if node.is_null() {
                *node = Value::Object(Map::new());
            } else {
                return Err(CliError::Config(format!(
                    "--set {path}: `{}` is not an object",
                    keys[..i].join(".")
                )));
            }
        }
        let map = node.as_object_mut().expect("object ensured above");
        if i + 1 == keys.len() {
            map.insert((*key).to_string(), value);
            return Ok(());
        }
        node = map.entry((*key).to_string()).or_insert(Value::Null);
    }
    Ok(())
}

/// Reads a scenario or a manifest (whose `config` entry is used). An empty
/// file is read as `{}`.
pub fn read_document(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Ok(Value::Object(Map::new()));
    }
    let doc: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: invalid JSON: {e}", path.display())))?;
    match doc {
        Value::Object(mut map) if map.contains_key("config") && map.contains_key("tool") => {
            Ok(map.remove("config").expect("checked above"))
        }
        other => Ok(other),
    }
}

pub fn parse_scenario(doc: Value) -> Result<Scenario, CliError> {
    serde_json::from_value(doc).map_err(|e| CliError::Config(format!("invalid scenario: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn overrides_create_nested_fields() {
        let mut doc = json!({"params": {"pump_rate": 10}});
        apply_override(&mut doc, "params.pump_rate=20").unwrap();
        apply_override(&mut doc, "evolve.options.method=rosenbrock").unwrap();
        apply_override(&mut doc, "density_params=[1, 2]").unwrap();
        assert_eq!(doc["params"]["pump_rate"], json!(20));
        assert_eq!(doc["evolve"]["options"]["method"], json!("rosenbrock"));
        assert_eq!(doc["density_params"], json!([1, 2]));
        assert!(apply_override(&mut doc, "no_equals").is_err());
        assert!(apply_override(&mut doc, "params.pump_rate.x=1").is_err());
        assert!(apply_override(&mut doc, "a..b=1").is_err());
    }

    #[test]
    fn presets_round_trip_through_json() {
        for p in [Preset::Fig2, Preset::Fig3, Preset::Fig4, Preset::Fig5] {
            let s = Scenario::preset(p);
            let mode = s.mode.unwrap();
            let resolved = s.resolved(mode);
            resolved.validate().unwrap();
            let back = parse_scenario(serde_json::to_value(&resolved).unwrap()).unwrap();
            assert_eq!(back, resolved);
        }
    }

    #[test]
    fn missing_params_is_named() {
        let err = parse_scenario(json!({})).unwrap_err();
        assert!(err.to_string().contains("params"), "{err}");
    }

    #[test]
    fn unknown_fields_rejected() {
        let doc = json!({"params": {"gamma_prime": 1, "gamma0": 0, "pump_rate": 10,
            "regime": {"type": "radiative", "density_param_k0": 1}}, "bogus": 1});
        assert!(parse_scenario(doc).is_err());
    }
}
