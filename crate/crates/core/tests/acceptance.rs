//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test --release --test acceptance` for realistic timings.

mod common;

use std::time::{Duration, Instant};

use radtrap::dynamics::{
    asymptotic_pump_rate_inhom, asymptotic_pump_rate_rad, default_t_end, estimate_asymptote, evolve, uniform_grid,
};
use radtrap::oracle::{compare_with_rate_equations, simulate_stochastic, StochasticConfig};
use radtrap::steadystate::{log_grid, relax, stationary, sweep, StationaryOptions};
use radtrap::trapping::{
    absorption_spectrum, doppler_average, gamma_selfconsistent_rad, gauss_hermite_average, saturation_ratio,
    self_consistency_rhs, spectral_distribution, HERMITE_MAX_DEPTH, HERMITE_NODES, SERIES_THRESHOLD,
};
use radtrap::{k_tilde, PopulationState, SystemParams};

use common::{doppler, doppler_average_reference, radiative, state};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Check = fn() -> Result<Outcome, String>;

fn plateau_ratio(params: &SystemParams, closed: f64) -> Result<f64, String> {
    let t_end = default_t_end(params);
    let traj = evolve(params, PopulationState::equal_ground(), t_end, &uniform_grid(t_end, 2000))
        .map_err(|e| e.to_string())?;
    let plateau = estimate_asymptote(&traj).map_err(|e| e.to_string())?;
    Ok(plateau.rate / closed)
}

fn thin_medium() -> Result<Outcome, String> {
    let params = radiative(0.0, 0.0);
    let rate = plateau_ratio(&params, 1.0)?;
    let rel = (rate - 0.5).abs() / 0.5;
    Ok(outcome(
        rel <= 0.02,
        format!("plateau {rate:.6} vs 0.5 (relative deviation {:.2}%, limit 2%)", 100.0 * rel),
    ))
}

fn inhomogeneous_asymptote() -> Result<Outcome, String> {
    let mut ratios = Vec::new();
    for k in [100.0, 1000.0] {
        let closed = asymptotic_pump_rate_inhom(k).map_err(|e| e.to_string())?;
        ratios.push(plateau_ratio(&doppler(k, 0.0), closed)?);
    }
    let within = (ratios[0] - 1.0).abs() <= 0.25;
    let trend = (ratios[1] - 1.0).abs() < (ratios[0] - 1.0).abs();
    Ok(outcome(
        within && trend,
        format!("ratio K=100: {:.4}, K=1000: {:.4} (within 25%: {within}, toward 1: {trend})", ratios[0], ratios[1]),
    ))
}

fn radiative_asymptote() -> Result<Outcome, String> {
    let mut ratios = Vec::new();
    for kt in [2.0, 5.0] {
        let base = radiative(0.0, 0.0);
        let k0 = kt * radtrap::gamma_ab(&base);
        let params = base.with_density_param(k0);
        debug_assert!((k_tilde(&params, k0) - kt).abs() < 1e-12);
        ratios.push(plateau_ratio(&params, asymptotic_pump_rate_rad(kt))?);
    }
    let within = ratios.iter().all(|r| (r - 1.0).abs() <= 0.25);
    let trend = (ratios[1] - 1.0).abs() < (ratios[0] - 1.0).abs();
    Ok(outcome(
        within && trend,
        format!(
            "ratio K~=2: {:.4}, K~=5: {:.4} (within 25%: {within}, toward 1: {trend})",
            ratios[0], ratios[1]
        ),
    ))
}

fn stable_target() -> Result<Outcome, String> {
    let mut worst_newton = 0.0_f64;
    let mut worst_relax = 0.0_f64;
    let mut worst_residual = 0.0_f64;
    for k in [0.0, 1.0, 1e2, 1e4] {
        let params = doppler(k, 0.0);
        let stat = stationary(&params).map_err(|e| format!("K={k}: {e}"))?;
        let relaxed = relax(&params).map_err(|e| format!("K={k}: {e}"))?;
        worst_newton = worst_newton.max((stat.state.rho_bb - 1.0).abs());
        worst_relax = worst_relax.max((relaxed.rho_bb - 1.0).abs());
        worst_residual = worst_residual.max(stat.residual);
    }
    Ok(outcome(
        worst_newton < 1e-8 && worst_relax < 1e-6 && worst_residual < 1e-10,
        format!(
            "max |rho_bb-1|: Newton {worst_newton:.2e}, integration {worst_relax:.2e}; max residual {worst_residual:.2e}"
        ),
    ))
}

fn equalization() -> Result<Outcome, String> {
    let grid = log_grid(1.0, 1e3, 13);
    let table = sweep(&radiative(0.0, 1e-2), &grid, &[1e-2], &StationaryOptions::default()).map_err(|e| e.to_string())?;
    if let Some(row) = table.failures().next() {
        return Err(format!("K0={}: {:?}", row.density_param, row.outcome));
    }
    let values: Vec<f64> = table.series(1e-2).iter().map(|(_, s)| s.state.rho_bb).collect();
    let monotone = values.windows(2).all(|w| w[1] < w[0]);
    let last = *values.last().unwrap();
    Ok(outcome(
        monotone && last < 0.5,
        format!("rho_bb {:.4} -> {last:.4} over K0 = 1..1e3 (monotone: {monotone})", values[0]),
    ))
}

fn severity_ordering() -> Result<Outcome, String> {
    let gamma0s = [1e-4, 1e-3, 1e-2];
    let k0s = log_grid(1.0, 1e4, 17);
    // Matched optical depth N λ² d_eff: K = √(2π) K0 / (Δ_D/γ) with Δ_D = 100γ.
    let ks: Vec<f64> = k0s.iter().map(|k0| (2.0 * std::f64::consts::PI).sqrt() * k0 / 100.0).collect();
    let opts = StationaryOptions::default();
    let rad = sweep(&radiative(0.0, 0.0), &k0s, &gamma0s, &opts).map_err(|e| e.to_string())?;
    let inh = sweep(&doppler(0.0, 0.0), &ks, &gamma0s, &opts).map_err(|e| e.to_string())?;
    if rad.failures().count() + inh.failures().count() > 0 {
        return Err("sweep rows failed".into());
    }
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for g0 in gamma0s {
        for ((_, r), (_, d)) in rad.series(g0).iter().zip(inh.series(g0).iter()) {
            let excess = r.state.rho_bb - d.state.rho_bb;
            worst = worst.max(excess);
            if excess > 1e-9 {
                violations += 1;
            }
        }
    }
    Ok(outcome(
        violations == 0,
        format!(
            "{} pairs, {violations} violations; max (radiative - Doppler) rho_bb = {worst:.3e}",
            gamma0s.len() * k0s.len()
        ),
    ))
}

fn oracle_equivalence() -> Result<Outcome, String> {
    let params = radiative(0.0, 0.0);
    let run = |bandwidth: f64| -> Result<(f64, f64), String> {
        let cfg = StochasticConfig::new(bandwidth, 10_000, 1);
        let init = PopulationState::equal_ground();
        let ens = simulate_stochastic(&params, &cfg, init, 2.0).map_err(|e| e.to_string())?;
        let cmp = compare_with_rate_equations(&params, &cfg, init, &ens).map_err(|e| e.to_string())?;
        Ok((cmp.max_abs_z(), cmp.max_abs_difference()))
    };
    let (z200, d200) = run(200.0)?;
    let (z400, d400) = run(400.0)?;
    let within = z200 <= 3.0;
    let halves = d400 <= 0.5 * d200;
    Ok(outcome(
        within && halves,
        format!(
            "B=200: max|z| {z200:.2}, max|diff| {d200:.2e}; B=400: max|z| {z400:.2}, max|diff| {d400:.2e} \
             (within 3 SE: {within}, halves: {halves})"
        ),
    ))
}

fn quadrature_suite() -> Result<Outcome, String> {
    // Gauss-Hermite on its domain of use.
    let mut gh_err = 0.0_f64;
    for x in [-0.3_f64, 0.0, 0.1, 0.5, 1.0] {
        for k in [1e-3_f64, 0.1, 1.0, 2.0, 3.0] {
            if (k * x).abs() > HERMITE_MAX_DEPTH {
                continue;
            }
            let reference = doppler_average_reference(k, x);
            gh_err = gh_err.max(((gauss_hermite_average(k, x, HERMITE_NODES) - reference) / reference).abs());
        }
    }
    // Production rule over the whole density range.
    let mut prod_err = 0.0_f64;
    for &x in &[0.05, 0.5, 1.0] {
        for k in log_grid(1e-2, 1e4, 25) {
            let reference = doppler_average_reference(k, x);
            prod_err = prod_err.max(((doppler_average(k, x) - reference) / reference).abs());
        }
    }
    // Fixed-point residual of the radiative collective rate.
    let mut fp = 0.0_f64;
    for k0 in [1.0, 10.0, 100.0, 1e4] {
        let params = radiative(k0, 1e-3);
        for s in [state(0.05, 0.6), state(0.2, 0.4), state(0.01, 0.98)] {
            let g = gamma_selfconsistent_rad(&s, &params, k0).map_err(|e| e.to_string())?;
            fp = fp.max((g - self_consistency_rhs(&s, &params, k0, g)).abs());
        }
    }
    // Continuity across the series seam at |K x f| = threshold.
    let mut seam = 0.0_f64;
    for &(k, f) in &[(1.0, 1.0), (1e3, 0.3), (2.5e-2, 0.9), (1e4, 1e-3)] {
        let x = SERIES_THRESHOLD / (k * f);
        for sign in [1.0, -1.0] {
            let below = saturation_ratio(k, sign * x * (1.0 - 1e-12), f);
            let above = saturation_ratio(k, sign * x * (1.0 + 1e-12), f);
            seam = seam.max(((below - above) / above).abs());
        }
    }
    Ok(outcome(
        gh_err < 1e-9 && prod_err < 1e-9 && fp < 1e-10 && seam < 1e-12,
        format!(
            "Gauss-Hermite {gh_err:.1e}, production rule {prod_err:.1e} (relative); \
             fixed-point residual {fp:.1e}; seam jump {seam:.1e}"
        ),
    ))
}

fn spectral_broadening() -> Result<Outcome, String> {
    let deltas: Vec<f64> = (0..2001).map(|i| -50.0 + 0.05 * i as f64).collect();
    let widths = |k0: f64| -> Result<(f64, f64), String> {
        let params = radiative(k0, 1e-4);
        let stat = stationary(&params).map_err(|e| e.to_string())?;
        let trapped = spectral_distribution(&stat.state, &params, &deltas).map_err(|e| e.to_string())?;
        let absorbed = absorption_spectrum(&stat.state, &params, stat.gamma, &deltas).map_err(|e| e.to_string())?;
        match (trapped.fwhm(), absorbed.fwhm()) {
            (Some(t), Some(a)) => Ok((t, a)),
            _ => Err(format!("K0={k0}: width not resolved on the grid")),
        }
    };
    let (t100, a100) = widths(100.0)?;
    let (t1, a1) = widths(1.0)?;
    let broader = t100 > a100;
    let close = (t1 - a1).abs() / a1 < 0.5;
    Ok(outcome(
        broader && close,
        format!("K0=100: trapped {t100:.3} vs absorption {a100:.3}; K0=1: {t1:.3} vs {a1:.3}"),
    ))
}

fn main() {
    let criteria: [(&str, Check, Duration); 9] = [
        ("thin-medium pump rate", thin_medium, Duration::from_secs(1)),
        ("inhomogeneous asymptote", inhomogeneous_asymptote, Duration::from_secs(60)),
        ("radiative asymptote", radiative_asymptote, Duration::from_secs(60)),
        ("stable-target completeness", stable_target, Duration::from_secs(10)),
        ("equalization trend", equalization, Duration::from_secs(10)),
        ("severity ordering", severity_ordering, Duration::from_secs(30)),
        ("oracle equivalence", oracle_equivalence, Duration::from_secs(300)),
        ("quadrature/fixed-point suite", quadrature_suite, Duration::from_secs(5)),
        ("spectral broadening", spectral_broadening, Duration::from_secs(5)),
    ];
    let optimized = !cfg!(debug_assertions);
    let mut failures = 0;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        // Time budgets apply to optimized builds only.
        let in_time = !optimized || elapsed <= budget;
        let (pass, detail) = match result {
            Ok(o) => (o.pass && in_time, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        let timing = if in_time {
            format!("{:.2}s", elapsed.as_secs_f64())
        } else {
            format!("{:.2}s, over {}s budget", elapsed.as_secs_f64(), budget.as_secs())
        };
        println!("{} {name}: {detail} [{timing}]", if pass { "PASS" } else { "FAIL" });
    }
    println!("{} of 9 criteria passed", 9 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
