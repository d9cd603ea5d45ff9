//! Stationary populations with a self-consistent collective rate, and sweeps
//! over the density parameter and the ground-state exchange rate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_with, pump_rate_estimate, EvolveOptions};
use crate::error::{Error, Result};
use crate::model::{rate_rhs, PopulationState, SystemParams, GAMMA};
use crate::trapping::collective_rate;

/// Newton iterations per start.
pub const MAX_NEWTON_ITERATIONS: usize = 500;
/// Random restarts after the seeded start fails.
pub const RESTARTS: usize = 10;
/// Target `max |ρ̇|`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Largest accepted population difference between Newton and relaxation.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-6;

/// Upper bound on the relaxation window, in 1/γ.
pub const RELAX_WINDOW_CAP: f64 = 1e15;

const RESTART_SEED: u64 = 0x005e_ed0f_5eed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stationary {
    pub state: PopulationState,
    /// Collective rate at the stationary state.
    pub gamma: f64,
    /// `max |ρ̇|` at the returned state.
    pub residual: f64,
    /// Newton iterations of the successful start.
    pub iterations: usize,
    /// Largest population difference to the long-time integration, when run.
    pub cross_check: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StationaryOptions {
    /// Compare with a long-time stiff integration from equal ground populations.
    pub cross_check: bool,
    /// Start of the Newton iteration (default: equal ground populations).
    pub seed: Option<PopulationState>,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        StationaryOptions {
            cross_check: true,
            seed: None,
        }
    }
}

/// `(ρ̇_aa, ρ̇_cc)` with `ρ_bb = 1 - ρ_aa - ρ_cc`, plus the full residual and Γ.
fn reduced(params: &SystemParams, a: f64, c: f64) -> Result<([f64; 2], f64, f64)> {
    let state = PopulationState::from_array([a, 1.0 - a - c, c]);
    let gamma = collective_rate(&state, params)?;
    let d = rate_rhs(&state, params, gamma);
    let residual = d.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(([d[0], d[2]], residual, gamma))
}

/// Stationary residual `max |ρ̇|` of a state under its own collective rate.
pub fn residual(state: &PopulationState, params: &SystemParams) -> Result<f64> {
    let gamma = collective_rate(state, params)?;
    Ok(rate_rhs(state, params, gamma).iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

fn project(a: f64, c: f64) -> (f64, f64) {
    let a = a.clamp(0.0, 1.0);
    let c = c.clamp(0.0, 1.0 - a);
    (a, c)
}

/// Damped, projected Newton iteration on the reduced system from `(a, c)`.
fn newton(params: &SystemParams, mut a: f64, mut c: f64) -> std::result::Result<(f64, f64, usize), f64> {
    let (gp, g0, r) = (params.gamma_prime, params.gamma0, params.pump_rate);
    let Ok((mut f, mut res, mut gamma)) = reduced(params, a, c) else {
        return Err(f64::INFINITY);
    };
    for iteration in 0..MAX_NEWTON_ITERATIONS {
        if res < RESIDUAL_TOLERANCE {
            return Ok((a, c, iteration));
        }
        let b = 1.0 - a - c;
        // Finite-difference sensitivity of Γ; falls back to a backward step
        // where the forward point leaves the valid domain.
        let dgamma = |da: f64, dc: f64| -> Option<f64> {
            let h = 1e-7 * (a.abs() + c.abs()).max(1e-6);
            [1.0, -1.0].into_iter().find_map(|sign| {
                let (ta, tc) = (a + sign * h * da, c + sign * h * dc);
                if ta < 0.0 || tc < 0.0 || ta + tc > 1.0 {
                    return None;
                }
                let s = PopulationState::from_array([ta, 1.0 - ta - tc, tc]);
                collective_rate(&s, params).ok().map(|g| (g - gamma) / (sign * h))
            })
        };
        let (Some(ga), Some(gc)) = (dgamma(1.0, 0.0), dgamma(0.0, 1.0)) else {
            return Err(res);
        };
        let x = b - a;
        let j11 = -(GAMMA + gp + 2.0 * gamma + r) + x * ga;
        let j12 = r - gamma + x * gc;
        let j21 = gp - g0 + r;
        let j22 = -2.0 * g0 - r;
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            return Err(res);
        }
        let da = -(j22 * f[0] - j12 * f[1]) / det;
        let dc = -(-j21 * f[0] + j11 * f[1]) / det;

        let norm = |v: &[f64; 2]| v[0].abs().max(v[1].abs());
        let current = norm(&f);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let (ta, tc) = project(a + step * da, c + step * dc);
            if let Ok((tf, tres, tg)) = reduced(params, ta, tc) {
                if norm(&tf) < (1.0 - 1e-4 * step) * current || tres < RESIDUAL_TOLERANCE {
                    (a, c, f, res, gamma) = (ta, tc, tf, tres, tg);
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(res);
        }
    }
    if res < RESIDUAL_TOLERANCE {
        Ok((a, c, MAX_NEWTON_ITERATIONS))
    } else {
        Err(res)
    }
}

/// Long-time relaxation from equal ground populations with the stiff
/// integrator, to `t = 1e3 / max(γ0, Γ_p estimate)`.
pub fn relax(params: &SystemParams) -> Result<PopulationState> {
    let rate = params.gamma0.max(pump_rate_estimate(params));
    let t_end = (1e3 / rate).min(RELAX_WINDOW_CAP);
    let options = EvolveOptions {
        rtol: Some(1e-9),
        atol: Some(1e-13),
        ..EvolveOptions::rosenbrock()
    };
    let traj = evolve_with(params, PopulationState::equal_ground(), t_end, &[t_end], &options)?;
    traj.last_state()
        .copied()
        .ok_or_else(|| Error::DegenerateGrid("relaxation produced no samples".into()))
}

/// Stationary state by damped Newton (with restarts), optionally
/// cross-validated against [`relax`].
pub fn stationary_with(params: &SystemParams, options: &StationaryOptions) -> Result<Stationary> {
    params.validate()?;
    let seed = options.seed.unwrap_or_else(PopulationState::equal_ground);
    seed.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(RESTART_SEED);
    let mut best = f64::INFINITY;
    let mut found = None;
    for attempt in 0..=RESTARTS {
        let (a0, c0) = if attempt == 0 {
            (seed.rho_aa, seed.rho_cc)
        } else {
            let a = rng.random_range(0.0..0.3);
            (a, rng.random_range(0.0..1.0 - a))
        };
        match newton(params, a0, c0) {
            Ok(hit) => {
                found = Some(hit);
                break;
            }
            Err(res) => best = best.min(res),
        }
    }
    let Some((a, c, iterations)) = found else {
        return Err(Error::NoConvergence {
            solver: "stationary Newton",
            iterations: MAX_NEWTON_ITERATIONS,
            residual: best,
        });
    };
    let state = PopulationState::from_array([a, 1.0 - a - c, c]);
    let (_, res, gamma) = reduced(params, a, c)?;

    let cross_check = if options.cross_check {
        let relaxed = relax(params)?;
        let difference = relaxed.max_abs_difference(&state);
        if difference > CROSS_CHECK_TOLERANCE {
            return Err(Error::CrossValidation { difference });
        }
        Some(difference)
    } else {
        None
    };
    Ok(Stationary {
        state,
        gamma,
        residual: res,
        iterations,
        cross_check,
    })
}

/// [`stationary_with`] with default options (cross-check enabled).
pub fn stationary(params: &SystemParams) -> Result<Stationary> {
    stationary_with(params, &StationaryOptions::default())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// `K` or `K0`, depending on the regime.
    pub density_param: f64,
    pub gamma0: f64,
    pub outcome: std::result::Result<Stationary, Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    /// Regime and rates shared by every row.
    pub base: SystemParams,
    /// Rows ordered by γ0 series, then by the density grid.
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn failures(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.outcome.is_err())
    }

    /// Successful rows of one γ0 series, in grid order.
    pub fn series(&self, gamma0: f64) -> Vec<(f64, Stationary)> {
        self.rows
            .iter()
            .filter(|r| r.gamma0 == gamma0)
            .filter_map(|r| r.outcome.as_ref().ok().map(|s| (r.density_param, *s)))
            .collect()
    }
}

/// Log-spaced grid of `n` points from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    let (l0, l1) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(l0 + (l1 - l0) * i as f64 / (n - 1) as f64))
        .collect()
}

/// One stationary solve per `(density, γ0)` pair. Each γ0 series is solved in
/// grid order, seeding Newton with the previous row; series run in parallel.
/// Failed rows are recorded and the series continues from the last success.
pub fn sweep(
    base: &SystemParams,
    density_grid: &[f64],
    gamma0_list: &[f64],
    options: &StationaryOptions,
) -> Result<SweepTable> {
    if density_grid.is_empty() || gamma0_list.is_empty() {
        return Err(Error::DegenerateGrid("sweep grids must be non-empty".into()));
    }
    if let Some(k) = density_grid.iter().find(|k| !(k.is_finite() && **k >= 0.0)) {
        return Err(Error::DegenerateGrid(format!("density parameters must be >= 0, got {k}")));
    }
    base.validate()?;
    for &g0 in gamma0_list {
        base.with_gamma0(g0).validate()?;
    }

    let series: Vec<Vec<SweepRow>> = gamma0_list
        .par_iter()
        .map(|&g0| {
            let mut seed = options.seed;
            density_grid
                .iter()
                .map(|&k| {
                    let params = base.with_gamma0(g0).with_density_param(k);
                    let opts = StationaryOptions { seed, ..*options };
                    let outcome = stationary_with(&params, &opts);
                    match &outcome {
                        Ok(s) => seed = Some(s.state),
                        Err(e) => log::warn!("sweep row density = {k}, gamma0 = {g0} failed: {e}"),
                    }
                    SweepRow {
                        density_param: k,
                        gamma0: g0,
                        outcome,
                    }
                })
                .collect()
        })
        .collect();
    Ok(SweepTable {
        base: *base,
        rows: series.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Regime;
    use nalgebra::{Matrix3, Vector3};

    fn fig3(k: f64, g0: f64) -> SystemParams {
        SystemParams::new(1.0, g0, 10.0, Regime::inhomogeneous(100.0, k)).unwrap()
    }

    #[test]
    fn stable_target_without_exchange() {
        for k in [0.0, 1.0, 100.0] {
            let s = stationary(&fig3(k, 0.0)).unwrap();
            assert!((s.state.rho_bb - 1.0).abs() < 1e-10, "{:?}", s.state);
            assert!(s.residual < RESIDUAL_TOLERANCE);
        }
    }

    #[test]
    fn thin_medium_matches_linear_solve() {
        let params = fig3(0.0, 1e-2);
        let s = stationary(&params).unwrap();
        // Rows: ȧ = 0, ċ = 0, trace = 1.
        let m = Matrix3::new(
            -(1.0 + 1.0 + 10.0), 0.0, 10.0,
            1.0 + 10.0, 1e-2, -1e-2 - 10.0,
            1.0, 1.0, 1.0,
        );
        let exact = m.lu().solve(&Vector3::new(0.0, 0.0, 1.0)).unwrap();
        assert!((s.state.rho_aa - exact[0]).abs() < 1e-12);
        assert!((s.state.rho_bb - exact[1]).abs() < 1e-12);
        assert!((s.state.rho_cc - exact[2]).abs() < 1e-12);
    }

    #[test]
    fn dense_medium_lowers_target_population() {
        let thin = stationary(&fig3(0.0, 1e-2)).unwrap();
        let thick = stationary(&fig3(1e4, 1e-2)).unwrap();
        assert!(thick.state.rho_bb < thin.state.rho_bb);
        assert!(thick.residual < RESIDUAL_TOLERANCE);
    }

    #[test]
    fn sweep_single_point_matches_stationary() {
        let base = fig3(0.0, 0.0);
        let table = sweep(&base, &[30.0], &[1e-3], &StationaryOptions::default()).unwrap();
        let direct = stationary(&fig3(30.0, 1e-3)).unwrap();
        assert_eq!(table.rows.len(), 1);
        let row = table.rows[0].outcome.as_ref().unwrap();
        assert!(row.state.max_abs_difference(&direct.state) < 1e-12);
    }

    #[test]
    fn sweep_rejects_empty_grids() {
        let base = fig3(0.0, 0.0);
        assert!(sweep(&base, &[], &[0.0], &StationaryOptions::default()).is_err());
        assert!(sweep(&base, &[1.0], &[], &StationaryOptions::default()).is_err());
        assert!(sweep(&base, &[-1.0], &[0.0], &StationaryOptions::default()).is_err());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1.0, 1e3, 4);
        assert!((g[0] - 1.0).abs() < 1e-15 && (g[3] - 1e3).abs() < 1e-9 && (g[1] - 10.0).abs() < 1e-12);
    }
}
