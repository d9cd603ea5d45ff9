//! Time evolution of the populations with the collective rate re-evaluated
//! at every right-hand-side call, and the effective pump rate
//! `Γ_p = -d/dt ln(ρ_aa + ρ_cc)` derived from it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{dormand_prince, rosenbrock, Solution, Tolerances};
use crate::model::{k_tilde, rate_rhs, PopulationState, Regime, SystemParams, GAMMA};
use crate::trapping::{collective_rate, doppler_average};

/// Default window length in units of the expected `1/Γ_p`.
pub const DEFAULT_WINDOW_RATES: f64 = 10.0;
/// Upper bound on default integration windows, in units of 1/γ.
pub const MAX_WINDOW: f64 = 1e7;
/// Fraction of the window used for plateau extraction.
pub const PLATEAU_FRACTION: f64 = 0.2;
/// Largest relative plateau spread accepted by [`estimate_asymptote`].
pub const PLATEAU_SPREAD_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Explicit Dormand-Prince 5(4).
    #[default]
    DormandPrince,
    /// Linearly implicit Rosenbrock 2(3), for long stiff relaxation runs.
    Rosenbrock,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveOptions {
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub method: Method,
}

impl EvolveOptions {
    pub fn tolerances(&self) -> Tolerances {
        let base = Tolerances::default();
        Tolerances {
            rtol: self.rtol.unwrap_or(base.rtol),
            atol: self.atol.unwrap_or(base.atol),
        }
    }

    pub fn rosenbrock() -> Self {
        EvolveOptions {
            method: Method::Rosenbrock,
            ..Default::default()
        }
    }
}

/// Sampled solution of the coupled population/trapping system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PopulationState>,
    /// Collective rate Γ at each sample.
    pub gammas: Vec<f64>,
    /// Effective pump rate Γ_p at each sample (empty for fewer than 3 samples).
    pub pump_rates: Vec<f64>,
}

impl Trajectory {
    /// Builds a trajectory from samples and fills in the pump-rate series.
    pub fn from_samples(times: Vec<f64>, states: Vec<PopulationState>, gammas: Vec<f64>) -> Result<Self> {
        if times.len() != states.len() || times.len() != gammas.len() {
            return Err(Error::DegenerateGrid("times, states and gammas differ in length".into()));
        }
        let mut traj = Trajectory {
            times,
            states,
            gammas,
            pump_rates: Vec::new(),
        };
        if traj.times.len() >= 3 {
            // Samples with an empty pumped population get NaN rates.
            let pumped: Vec<f64> = traj.states.iter().map(PopulationState::pumped).collect();
            traj.pump_rates = log_derivative_unchecked(&traj.times, &pumped);
        }
        Ok(traj)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> Option<&PopulationState> {
        self.states.last()
    }

    /// Largest deviation of the trace from 1 over the samples.
    pub fn max_trace_error(&self) -> f64 {
        self.states.iter().map(|s| (s.trace() - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// `n + 1` equally spaced times on `[0, t_end]`.
pub fn uniform_grid(t_end: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n).map(|i| t_end * i as f64 / n as f64).collect()
}

fn right_hand_side(params: &SystemParams, fixed: Option<f64>) -> impl FnMut(f64, &[f64; 3]) -> Result<[f64; 3]> + '_ {
    move |_t, y| {
        let state = PopulationState::from_array(*y);
        let collective = match fixed {
            Some(g) => g,
            None => collective_rate(&state, params)?,
        };
        Ok(rate_rhs(&state, params, collective))
    }
}

fn run(
    params: &SystemParams,
    initial: PopulationState,
    t_end: f64,
    grid: &[f64],
    options: &EvolveOptions,
    fixed: Option<f64>,
) -> Result<Trajectory> {
    params.validate()?;
    initial.validate()?;
    if !(t_end > 0.0) {
        return Err(Error::Domain(format!("t_end must be positive, got {t_end}")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::DegenerateGrid("output times must be strictly increasing".into()));
    }
    let tol = options.tolerances();
    let rhs = right_hand_side(params, fixed);
    let Solution { times, states, .. } = match options.method {
        Method::DormandPrince => dormand_prince(rhs, initial.to_array(), 0.0, t_end, grid, tol)?,
        Method::Rosenbrock => rosenbrock(rhs, initial.to_array(), 0.0, t_end, grid, tol)?,
    };
    let states: Vec<PopulationState> = states.into_iter().map(PopulationState::from_array).collect();
    let gammas = states
        .iter()
        .map(|s| match fixed {
            Some(g) => Ok(g),
            None => collective_rate(s, params),
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::from_samples(times, states, gammas)
}

/// Integrates the rate equations with Γ recomputed from the populations at
/// every stage, using the default Dormand-Prince settings.
pub fn evolve(params: &SystemParams, initial: PopulationState, t_end: f64, grid: &[f64]) -> Result<Trajectory> {
    run(params, initial, t_end, grid, &EvolveOptions::default(), None)
}

pub fn evolve_with(
    params: &SystemParams,
    initial: PopulationState,
    t_end: f64,
    grid: &[f64],
    options: &EvolveOptions,
) -> Result<Trajectory> {
    run(params, initial, t_end, grid, options, None)
}

/// Integrates the rate equations with a constant collective rate.
pub fn evolve_fixed_rate(
    params: &SystemParams,
    initial: PopulationState,
    t_end: f64,
    grid: &[f64],
    collective: f64,
) -> Result<Trajectory> {
    if !(collective.is_finite() && collective >= 0.0) {
        return Err(Error::Domain(format!("collective rate must be non-negative, got {collective}")));
    }
    run(params, initial, t_end, grid, &EvolveOptions::default(), Some(collective))
}

/// `-d/dt ln(values)` on a (possibly non-uniform) grid: three-point centred
/// differences inside, three-point one-sided formulas at the ends.
pub fn log_derivative(times: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    let n = times.len();
    if n < 3 || values.len() != n {
        return Err(Error::DegenerateGrid(format!("need at least 3 matching samples, got {n}")));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 1e-300)) {
        return Err(Error::Domain(format!("ln of non-positive population {v}")));
    }
    Ok(log_derivative_unchecked(times, values))
}

fn log_derivative_unchecked(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = times.len();
    let logs: Vec<f64> = values
        .iter()
        .map(|&v| if v > 1e-300 { v.ln() } else { f64::NAN })
        .collect();
    // Derivative of the quadratic through three points, evaluated at `at`.
    let quad = |i: usize, at: f64| {
        let (t0, t1, t2) = (times[i], times[i + 1], times[i + 2]);
        let (y0, y1, y2) = (logs[i], logs[i + 1], logs[i + 2]);
        y0 * (2.0 * at - t1 - t2) / ((t0 - t1) * (t0 - t2))
            + y1 * (2.0 * at - t0 - t2) / ((t1 - t0) * (t1 - t2))
            + y2 * (2.0 * at - t0 - t1) / ((t2 - t0) * (t2 - t1))
    };
    let mut out = Vec::with_capacity(n);
    out.push(-quad(0, times[0]));
    for i in 1..n - 1 {
        out.push(-quad(i - 1, times[i]));
    }
    out.push(-quad(n - 3, times[n - 1]));
    out
}

/// Effective pump rate `Γ_p(t) = -d/dt ln(ρ_aa + ρ_cc)` on the trajectory grid.
pub fn effective_pump_rate(traj: &Trajectory) -> Result<Vec<f64>> {
    let pumped: Vec<f64> = traj.states.iter().map(PopulationState::pumped).collect();
    log_derivative(&traj.times, &pumped)
}

/// Large-K asymptote of the Doppler-broadened pump rate,
/// `γ / (2K √(π ln K))`.
pub fn asymptotic_pump_rate_inhom(k: f64) -> Result<f64> {
    if !(k > 1.0) || !k.is_finite() {
        return Err(Error::Domain(format!("asymptote requires K > 1, got {k}")));
    }
    Ok(GAMMA / (2.0 * k * (std::f64::consts::PI * k.ln()).sqrt()))
}

/// Asymptotic pump rate of the radiatively broadened medium, `(γ/2) e^{-K̃}`.
pub fn asymptotic_pump_rate_rad(k_tilde: f64) -> f64 {
    0.5 * GAMMA * (-k_tilde).exp()
}

/// Exact late-time decay rate of `ρ_aa + ρ_cc` with γ0 = 0.
///
/// Near the target state `ρ_bb → 1`, so Γ(ρ_bb - ρ_aa) → G ρ_aa with
/// `G = K ⟨1 - e^{-K f}⟩/K` (Doppler) or `1 - e^{-K̃}` (radiative), and the
/// pumped pair obeys a linear 2×2 system whose slow eigenvalue is returned.
pub fn linearized_pump_rate(params: &SystemParams) -> f64 {
    let gain = match params.regime {
        Regime::Inhomogeneous { density_param, .. } => doppler_average(density_param, 1.0),
        Regime::Radiative { density_param_k0 } => -(-k_tilde(params, density_param_k0)).exp_m1(),
    };
    let r = params.pump_rate;
    let a11 = -(GAMMA + params.gamma_prime) + gain - r;
    let a22 = -r - params.gamma0;
    let (a12, a21) = (r, params.gamma_prime + r);
    let half_trace = 0.5 * (a11 + a22);
    let det = a11 * a22 - a12 * a21;
    let disc = (half_trace * half_trace - det).max(0.0).sqrt();
    // Slow eigenvalue: the root closest to zero, computed without cancellation.
    let fast = half_trace - disc;
    -(det / fast)
}

/// Rough pump-rate scale used to size default integration windows.
pub fn pump_rate_estimate(params: &SystemParams) -> f64 {
    let thin = 0.5 * GAMMA;
    match params.regime {
        Regime::Inhomogeneous { density_param, .. } => asymptotic_pump_rate_inhom(density_param)
            .map(|r| r.min(thin))
            .unwrap_or(thin),
        Regime::Radiative { density_param_k0 } => asymptotic_pump_rate_rad(k_tilde(params, density_param_k0)),
    }
}

/// Default window `10/Γ_p` (with the closed-form estimate of Γ_p), capped at 1e7/γ.
pub fn default_t_end(params: &SystemParams) -> f64 {
    (DEFAULT_WINDOW_RATES / pump_rate_estimate(params)).min(MAX_WINDOW)
}

/// Plateau value of the effective pump rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    /// Median of Γ_p over the final window.
    pub rate: f64,
    /// `(max - min) / median` over the same window.
    pub spread: f64,
}

/// Median of the pump rate over the final 20% of the time window.
///
/// Requires `ρ_aa + ρ_cc` to have dropped below a tenth of its initial value;
/// fails with [`Error::NotConverged`] if the plateau spread exceeds 10%.
pub fn estimate_asymptote(traj: &Trajectory) -> Result<Plateau> {
    if traj.len() < 3 {
        return Err(Error::DegenerateGrid(format!("need at least 3 samples, got {}", traj.len())));
    }
    let (first, last) = (traj.states[0].pumped(), traj.states[traj.len() - 1].pumped());
    if !(last < 0.1 * first) {
        return Err(Error::Domain(format!(
            "window too short: pumped population fell only from {first:.4e} to {last:.4e}"
        )));
    }
    let rates = if traj.pump_rates.len() == traj.len() {
        traj.pump_rates.clone()
    } else {
        effective_pump_rate(traj)?
    };
    let t0 = traj.times[0];
    let t1 = traj.times[traj.len() - 1];
    let cut = t1 - PLATEAU_FRACTION * (t1 - t0);
    let mut window: Vec<f64> = traj
        .times
        .iter()
        .zip(&rates)
        .filter(|(t, _)| **t >= cut)
        .map(|(_, r)| *r)
        .collect();
    if window.is_empty() {
        return Err(Error::DegenerateGrid("no samples in the plateau window".into()));
    }
    window.sort_by(f64::total_cmp);
    let mid = window.len() / 2;
    let median = if window.len() % 2 == 1 {
        window[mid]
    } else {
        0.5 * (window[mid - 1] + window[mid])
    };
    let spread = (window[window.len() - 1] - window[0]) / median.abs();
    if !(spread <= PLATEAU_SPREAD_LIMIT) {
        return Err(Error::NotConverged {
            spread,
            limit: PLATEAU_SPREAD_LIMIT,
        });
    }
    Ok(Plateau { rate: median, spread })
}
