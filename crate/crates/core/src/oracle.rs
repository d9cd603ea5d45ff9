//! Monte-Carlo ensemble of single-atom density matrices driven by a
//! broad-band stochastic pump field, used to check that the population rate
//! equations are the right reduction of the coherent dynamics.
//!
//! Each trajectory carries `(ρ_aa, ρ_cc, Re ρ_ac, Im ρ_ac)` with `ρ_bb` by
//! closure. The pump Rabi frequency Ω(t) is a complex Ornstein-Uhlenbeck
//! process with correlation rate B and `⟨|Ω|²⟩ = R B / 2`, so that
//! `∫ ⟨Ω*(t) Ω(t+τ)⟩ dτ = R`. Over one time step Ω is held at the mean of its
//! end-point values and the deterministic equations advance by classical RK4.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_fixed_rate, uniform_grid, Trajectory};
use crate::error::{invalid, Result};
use crate::model::{PopulationState, SystemParams, GAMMA};

/// Smallest accepted ensemble.
pub const MIN_TRAJECTORIES: usize = 100;

fn default_n_out() -> usize {
    20
}

/// Ensemble settings. The pump rate R comes from [`SystemParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochasticConfig {
    /// B/γ, correlation rate of the pump field.
    pub bandwidth: f64,
    pub n_trajectories: usize,
    /// Step in 1/γ; `None` selects `0.1/B`.
    #[serde(default)]
    pub dt: Option<f64>,
    pub seed: u64,
    /// Δ_ac/γ, detuning of the pumped transition.
    #[serde(default)]
    pub delta_ac: f64,
    /// Γ_ac/γ; `None` selects `(γ + γ′ + Γ)/2 + γ0/2`.
    #[serde(default)]
    pub gamma_ac: Option<f64>,
    /// Constant collective rate Γ/γ (0 for an optically thin medium).
    #[serde(default)]
    pub collective_rate: f64,
    /// Output intervals on `[0, t_end]`.
    #[serde(default = "default_n_out")]
    pub n_out: usize,
}

impl StochasticConfig {
    pub fn new(bandwidth: f64, n_trajectories: usize, seed: u64) -> Self {
        StochasticConfig {
            bandwidth,
            n_trajectories,
            dt: None,
            seed,
            delta_ac: 0.0,
            gamma_ac: None,
            collective_rate: 0.0,
            n_out: default_n_out(),
        }
    }

    pub fn step(&self) -> f64 {
        self.dt.unwrap_or(0.1 / self.bandwidth)
    }

    pub fn coherence_decay(&self, params: &SystemParams) -> f64 {
        self.gamma_ac
            .unwrap_or(0.5 * (GAMMA + params.gamma_prime + self.collective_rate) + 0.5 * params.gamma0)
    }

    pub fn validate(&self, params: &SystemParams) -> Result<()> {
        params.validate()?;
        let fastest = GAMMA
            .max(params.gamma_prime)
            .max(params.pump_rate)
            .max(self.collective_rate);
        if !(self.bandwidth.is_finite() && self.bandwidth >= 10.0 * fastest) {
            return Err(invalid(
                "bandwidth",
                format!("must be at least 10x the fastest rate ({fastest}), got {}", self.bandwidth),
            ));
        }
        let dt = self.step();
        if !(dt > 0.0 && dt <= 0.1 / self.bandwidth * (1.0 + 1e-12)) {
            return Err(invalid("dt", format!("must lie in (0, 0.1/B = {}], got {dt}", 0.1 / self.bandwidth)));
        }
        if self.n_trajectories < MIN_TRAJECTORIES {
            return Err(invalid(
                "n_trajectories",
                format!("need at least {MIN_TRAJECTORIES}, got {}", self.n_trajectories),
            ));
        }
        if !(self.collective_rate.is_finite() && self.collective_rate >= 0.0) {
            return Err(invalid("collective_rate", "must be finite and non-negative"));
        }
        if let Some(g) = self.gamma_ac {
            if !(g.is_finite() && g >= 0.0) {
                return Err(invalid("gamma_ac", "must be finite and non-negative"));
            }
        }
        if !self.delta_ac.is_finite() {
            return Err(invalid("delta_ac", "must be finite"));
        }
        if self.n_out == 0 {
            return Err(invalid("n_out", "need at least one output interval"));
        }
        Ok(())
    }
}

/// Statistics of the realized pump field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseDiagnostics {
    /// Ensemble mean of the time-averaged Ω (real, imaginary).
    pub mean: [f64; 2],
    /// Standard errors of `mean`.
    pub mean_se: [f64; 2],
    /// Estimated `∫ ⟨Ω*(t) Ω(t+τ)⟩ dτ`; should equal R.
    pub correlation_integral: f64,
}

impl NoiseDiagnostics {
    pub fn zero_mean_within(&self, n_se: f64) -> bool {
        (0..2).all(|i| self.mean[i].abs() <= n_se * self.mean_se[i] || self.mean[i] == 0.0)
    }
}

/// Ensemble means and standard errors on a uniform output grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub times: Vec<f64>,
    /// `(ρ_aa, ρ_bb, ρ_cc)` averaged over trajectories.
    pub mean: Vec<[f64; 3]>,
    pub std_error: Vec<[f64; 3]>,
    pub noise: NoiseDiagnostics,
    pub n_trajectories: usize,
    /// Step actually used (the requested step shortened to fit the window).
    pub dt: f64,
}

struct Sample {
    populations: Vec<[f64; 3]>,
    omega_mean: [f64; 2],
    correlation: f64,
}

#[derive(Clone, Copy)]
struct Coefficients {
    decay: f64,
    gamma_prime: f64,
    gamma0: f64,
    collective: f64,
    gamma_ac: f64,
    delta: f64,
}

#[inline]
fn derivative(k: &Coefficients, y: [f64; 4], omega: [f64; 2]) -> [f64; 4] {
    let [a, c, re, im] = y;
    let b = 1.0 - a - c;
    let transfer = 2.0 * (omega[0] * im - omega[1] * re);
    let diff = a - c;
    [
        -(k.decay + k.collective) * a + k.collective * b - transfer,
        k.gamma_prime * a + k.gamma0 * (b - c) + transfer,
        -k.gamma_ac * re + k.delta * im - omega[1] * diff,
        -k.gamma_ac * im - k.delta * re + omega[0] * diff,
    ]
}

#[inline]
fn rk4(k: &Coefficients, y: [f64; 4], omega: [f64; 2], h: f64) -> [f64; 4] {
    let add = |y: [f64; 4], d: [f64; 4], s: f64| std::array::from_fn::<f64, 4, _>(|i| y[i] + s * d[i]);
    let k1 = derivative(k, y, omega);
    let k2 = derivative(k, add(y, k1, 0.5 * h), omega);
    let k3 = derivative(k, add(y, k2, 0.5 * h), omega);
    let k4 = derivative(k, add(y, k3, h), omega);
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Step layout shared by all trajectories.
#[derive(Clone, Copy)]
struct Plan {
    steps: usize,
    /// Steps between output samples.
    stride: usize,
    h: f64,
    /// `⟨|Ω|²⟩`.
    variance: f64,
}

fn trajectory(index: usize, cfg: &StochasticConfig, coeffs: &Coefficients, initial: &PopulationState, plan: Plan) -> Sample {
    let Plan {
        steps,
        stride,
        h,
        variance,
    } = plan;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };

    // Exact OU transition over one step.
    let decay = (-cfg.bandwidth * h).exp();
    let kick = (0.5 * variance * (1.0 - decay * decay)).sqrt();
    let stationary = (0.5 * variance).sqrt();
    let mut omegas = Vec::with_capacity(steps + 1);
    omegas.push([stationary * normal(), stationary * normal()]);
    for n in 0..steps {
        let prev = omegas[n];
        omegas.push([decay * prev[0] + kick * normal(), decay * prev[1] + kick * normal()]);
    }

    let mut y = [initial.rho_aa, initial.rho_cc, 0.0, 0.0];
    let mut populations = Vec::with_capacity(steps / stride + 1);
    populations.push([y[0], 1.0 - y[0] - y[1], y[1]]);
    for n in 0..steps {
        let (o0, o1) = (omegas[n], omegas[n + 1]);
        y = rk4(coeffs, y, [0.5 * (o0[0] + o1[0]), 0.5 * (o0[1] + o1[1])], h);
        if (n + 1) % stride == 0 {
            populations.push([y[0], 1.0 - y[0] - y[1], y[1]]);
        }
    }

    let count = omegas.len() as f64;
    let omega_mean = [
        omegas.iter().map(|o| o[0]).sum::<f64>() / count,
        omegas.iter().map(|o| o[1]).sum::<f64>() / count,
    ];

    // Σ_{k=-L..L} Re⟨Ω*(t) Ω(t+k h)⟩ h via running window sums, lags up to 12/B.
    let lags = ((12.0 / (cfg.bandwidth * h)).ceil() as usize).min(steps / 2).max(1);
    let mut window = [0.0, 0.0];
    for o in &omegas[..=lags] {
        window[0] += o[0];
        window[1] += o[1];
    }
    let origins = omegas.len() - lags;
    let mut acc = 0.0;
    for t in 0..origins {
        let o = omegas[t];
        // Σ_{k=0..L} Re(Ω_t* Ω_{t+k}), counted twice minus the k = 0 term.
        let one_sided = o[0] * window[0] + o[1] * window[1];
        acc += 2.0 * one_sided - (o[0] * o[0] + o[1] * o[1]);
        if t + lags + 1 < omegas.len() {
            let (out, inn) = (omegas[t], omegas[t + lags + 1]);
            window[0] += inn[0] - out[0];
            window[1] += inn[1] - out[1];
        }
    }
    Sample {
        populations,
        omega_mean,
        correlation: h * acc / origins as f64,
    }
}

/// Runs the ensemble from `initial` to `t_end`. Results depend only on the
/// configuration (including the seed), not on the number of threads.
pub fn simulate_stochastic(
    params: &SystemParams,
    cfg: &StochasticConfig,
    initial: PopulationState,
    t_end: f64,
) -> Result<Ensemble> {
    cfg.validate(params)?;
    initial.validate()?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(invalid("t_end", format!("must be positive, got {t_end}")));
    }
    let stride = (t_end / (cfg.n_out as f64 * cfg.step())).ceil().max(1.0) as usize;
    let steps = stride * cfg.n_out;
    let h = t_end / steps as f64;
    let coeffs = Coefficients {
        decay: GAMMA + params.gamma_prime,
        gamma_prime: params.gamma_prime,
        gamma0: params.gamma0,
        collective: cfg.collective_rate,
        gamma_ac: cfg.coherence_decay(params),
        delta: cfg.delta_ac,
    };
    let plan = Plan {
        steps,
        stride,
        h,
        variance: 0.5 * params.pump_rate * cfg.bandwidth,
    };

    let samples: Vec<Sample> = (0..cfg.n_trajectories)
        .into_par_iter()
        .map(|j| trajectory(j, cfg, &coeffs, &initial, plan))
        .collect();

    // Ordered two-pass reduction.
    let n = samples.len() as f64;
    let points = cfg.n_out + 1;
    let mut mean = vec![[0.0; 3]; points];
    let mut om = [0.0; 2];
    let mut corr = 0.0;
    for s in &samples {
        for (m, pop) in mean.iter_mut().zip(&s.populations) {
            for i in 0..3 {
                m[i] += pop[i];
            }
        }
        for i in 0..2 {
            om[i] += s.omega_mean[i];
        }
        corr += s.correlation;
    }
    mean.iter_mut().for_each(|m| *m = m.map(|v| v / n));
    om = om.map(|v| v / n);
    corr /= n;
    let mut var = vec![[0.0; 3]; points];
    let mut om_var = [0.0; 2];
    for s in &samples {
        for ((v, m), pop) in var.iter_mut().zip(&mean).zip(&s.populations) {
            for i in 0..3 {
                v[i] += (pop[i] - m[i]).powi(2);
            }
        }
        for i in 0..2 {
            om_var[i] += (s.omega_mean[i] - om[i]).powi(2);
        }
    }
    // Standard error of the mean from the unbiased sample variance.
    let se = |sum_sq: f64| (sum_sq / (n - 1.0) / n).sqrt();
    let std_error = var.iter().map(|v| v.map(se)).collect();
    Ok(Ensemble {
        times: uniform_grid(t_end, cfg.n_out),
        mean,
        std_error,
        noise: NoiseDiagnostics {
            mean: om,
            mean_se: om_var.map(se),
            correlation_integral: corr,
        },
        n_trajectories: cfg.n_trajectories,
        dt: h,
    })
}

/// Ensemble against the rate equations with the same constant Γ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub reference: Trajectory,
    /// `(mean ρ_bb − reference ρ_bb) / SE` per output time; 0 where the two
    /// agree to 1e-12.
    pub z_scores: Vec<f64>,
    /// Signed `mean ρ_bb − reference ρ_bb` per output time.
    pub differences: Vec<f64>,
}

impl Comparison {
    pub fn max_abs_z(&self) -> f64 {
        self.z_scores.iter().fold(0.0, |m, z| m.max(z.abs()))
    }

    pub fn max_abs_difference(&self) -> f64 {
        self.differences.iter().fold(0.0, |m, d| m.max(d.abs()))
    }
}

pub fn compare_with_rate_equations(
    params: &SystemParams,
    cfg: &StochasticConfig,
    initial: PopulationState,
    ensemble: &Ensemble,
) -> Result<Comparison> {
    let t_end = *ensemble.times.last().expect("ensemble has output times");
    let reference = evolve_fixed_rate(params, initial, t_end, &ensemble.times, cfg.collective_rate)?;
    let differences: Vec<f64> = ensemble
        .mean
        .iter()
        .zip(&reference.states)
        .map(|(m, r)| m[1] - r.rho_bb)
        .collect();
    let z_scores = differences
        .iter()
        .zip(&ensemble.std_error)
        .map(|(d, se)| if d.abs() <= 1e-12 { 0.0 } else { d / se[1] })
        .collect();
    Ok(Comparison {
        reference,
        z_scores,
        differences,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Regime;

    fn thin(pump: f64) -> SystemParams {
        SystemParams::new(1.0, 0.0, pump, Regime::radiative(0.0)).unwrap()
    }

    #[test]
    fn pump_off_is_deterministic_decay() {
        let params = thin(0.0);
        let mut cfg = StochasticConfig::new(20.0, 100, 1);
        cfg.n_out = 10;
        let init = PopulationState::new(0.4, 0.3, 0.3).unwrap();
        let ens = simulate_stochastic(&params, &cfg, init, 2.0).unwrap();
        for (t, m) in ens.times.iter().zip(&ens.mean) {
            assert!((m[0] - 0.4 * (-2.0 * t).exp()).abs() < 1e-8);
        }
        assert!(ens.std_error.iter().all(|s| s[0] < 1e-12));
    }

    #[test]
    fn rejects_bad_configs() {
        let params = thin(10.0);
        let init = PopulationState::equal_ground();
        assert!(simulate_stochastic(&params, &StochasticConfig::new(50.0, 200, 0), init, 1.0).is_err());
        assert!(simulate_stochastic(&params, &StochasticConfig::new(200.0, 99, 0), init, 1.0).is_err());
        let mut cfg = StochasticConfig::new(200.0, 200, 0);
        cfg.dt = Some(1e-3);
        assert!(simulate_stochastic(&params, &cfg, init, 1.0).is_err());
    }

    #[test]
    fn same_seed_same_means() {
        let params = thin(10.0);
        let mut cfg = StochasticConfig::new(100.0, 100, 42);
        cfg.n_out = 4;
        let a = simulate_stochastic(&params, &cfg, PopulationState::equal_ground(), 0.5).unwrap();
        let b = simulate_stochastic(&params, &cfg, PopulationState::equal_ground(), 0.5).unwrap();
        assert_eq!(a, b);
        cfg.seed = 43;
        let c = simulate_stochastic(&params, &cfg, PopulationState::equal_ground(), 0.5).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn noise_statistics() {
        let params = thin(10.0);
        let mut cfg = StochasticConfig::new(100.0, 400, 7);
        cfg.n_out = 2;
        let ens = simulate_stochastic(&params, &cfg, PopulationState::equal_ground(), 4.0).unwrap();
        assert!(ens.noise.zero_mean_within(5.0), "{:?}", ens.noise);
        let rel = (ens.noise.correlation_integral - 10.0).abs() / 10.0;
        assert!(rel < 0.05, "{:?}", ens.noise);
    }
}
