use crate::dynamics::{
    asymptotic_pump_rate_inhom, asymptotic_pump_rate_rad, default_t_end, estimate_asymptote, evolve_with,
    linearized_pump_rate, pump_rate_estimate, uniform_grid, MAX_WINDOW,
};
use crate::model::{k_tilde, PopulationState, Regime, SystemParams};
use crate::oracle::{compare_with_rate_equations, simulate_stochastic};
use crate::steadystate::{log_grid, stationary_with, sweep, StationaryOptions};
use crate::trapping::{absorption_spectrum, doppler_profile, spectral_distribution, Normalization, Spectrum};

use super::config::{GridSpacing, Scenario};
use super::output::{fmt, schema, Table};
use super::{CliError, Mode};

type Outcome = (Vec<Table>, Option<CliError>);

pub(super) fn run(mode: Mode, scn: &Scenario) -> Outcome {
    match mode {
        Mode::Evolve => evolve(scn),
        Mode::Sweep => run_sweep(scn),
        Mode::Spectrum => spectrum(scn),
        Mode::Asymptote => asymptote(scn),
        Mode::Oracle => oracle(scn),
    }
}

fn densities(scn: &Scenario) -> Vec<f64> {
    scn.density_params.clone().unwrap_or_else(|| vec![scn.params.regime.density_param()])
}

fn tag(params: &SystemParams, value: f64) -> String {
    format!("{}_{}", params.regime.density_label(), value)
}

fn describe(params: &SystemParams) -> String {
    let regime = match params.regime {
        Regime::Inhomogeneous {
            doppler_width,
            density_param,
        } => format!("inhomogeneous doppler_width={doppler_width} K={density_param}"),
        Regime::Radiative { density_param_k0 } => {
            format!("radiative K0={density_param_k0} K_tilde={}", k_tilde(params, density_param_k0))
        }
    };
    format!(
        "params: gamma_prime={} gamma0={} pump_rate={} regime={regime}",
        params.gamma_prime, params.gamma0, params.pump_rate
    )
}

fn header(table: &mut Table, mode: Mode, params: &SystemParams) {
    table
        .comment(format!("radtrap {} {}", env!("CARGO_PKG_VERSION"), mode.name()))
        .comment("units: times in 1/gamma, rates in gamma, populations dimensionless")
        .comment(describe(params));
}

fn failure(errors: Vec<String>) -> Option<CliError> {
    (!errors.is_empty()).then(|| CliError::Numerical(errors.join("; ")))
}

fn evolve(scn: &Scenario) -> Outcome {
    let settings = &scn.evolve;
    let initial = scn.initial.unwrap_or_else(PopulationState::equal_ground);
    let floor = 1e3 * settings.options.tolerances().atol;
    let mut tables = Vec::new();
    for k in densities(scn) {
        let params = scn.params.with_density_param(k);
        let t_end = settings.t_end.unwrap_or_else(|| default_t_end(&params));
        let grid = match settings.spacing {
            GridSpacing::Linear => uniform_grid(t_end, settings.n_out),
            GridSpacing::Log => {
                let mut g = vec![0.0];
                g.extend(log_grid(settings.log_start * t_end, t_end, settings.n_out));
                g
            }
        };
        let traj = match evolve_with(&params, initial, t_end, &grid, &settings.options) {
            Ok(t) => t,
            Err(e) => return (tables, Some(CliError::at(tag(&params, k), e))),
        };
        let mut table = Table::new(format!("evolve_{}.csv", tag(&params, k)), &schema::EVOLVE);
        header(&mut table, Mode::Evolve, &params);
        table
            .comment(format!(
                "initial: rho_aa={} rho_bb={} rho_cc={} t_end={t_end}",
                initial.rho_aa, initial.rho_bb, initial.rho_cc
            ))
            .comment("t [1/gamma], rho_* populations, Gamma collective rate [gamma]")
            .comment(format!(
                "Gamma_p = -d/dt ln(rho_aa+rho_cc) [gamma]; nan where rho_aa+rho_cc < 1000*atol, atol = {}",
                fmt(settings.options.tolerances().atol)
            ));
        for i in 0..traj.len() {
            let s = &traj.states[i];
            let rate = if s.pumped() >= floor { traj.pump_rates[i] } else { f64::NAN };
            table.push(vec![
                fmt(traj.times[i]),
                fmt(s.rho_aa),
                fmt(s.rho_bb),
                fmt(s.rho_cc),
                fmt(traj.gammas[i]),
                fmt(rate),
            ]);
        }
        tables.push(table);
    }
    (tables, None)
}

fn run_sweep(scn: &Scenario) -> Outcome {
    let grid = densities(scn);
    let gamma0s = scn.gamma0_list.clone().unwrap_or_else(|| vec![scn.params.gamma0]);
    let options = StationaryOptions {
        cross_check: scn.sweep.cross_check,
        seed: None,
    };
    let table_result = match sweep(&scn.params, &grid, &gamma0s, &options) {
        Ok(t) => t,
        Err(e) => return (Vec::new(), Some(CliError::from_core(e))),
    };
    let label = scn.params.regime.density_label();
    let mut table = Table::new("sweep.csv", &schema::sweep(label));
    header(&mut table, Mode::Sweep, &scn.params);
    table
        .comment(format!(
            "{label} density parameter, gamma0 exchange rate [gamma], *_stat stationary populations, Gamma_stat [gamma]"
        ))
        .comment("residual = max |d rho/dt| at the stationary state [gamma]; status is ok or the failure")
        .comment(format!("cross_check against long-time integration: {}", scn.sweep.cross_check));
    let mut errors = Vec::new();
    for row in &table_result.rows {
        let mut cells = vec![fmt(row.density_param), fmt(row.gamma0)];
        match &row.outcome {
            Ok(s) => cells.extend([
                fmt(s.state.rho_bb),
                fmt(s.residual),
                fmt(s.state.rho_aa),
                fmt(s.state.rho_cc),
                fmt(s.gamma),
                "ok".into(),
            ]),
            Err(e) => {
                errors.push(format!("{label}={} gamma0={}: {e}", row.density_param, row.gamma0));
                cells.extend(std::iter::repeat_n(fmt(f64::NAN), 5));
                cells.push(e.to_string());
            }
        }
        table.push(cells);
    }
    (vec![table], failure(errors))
}

fn spectrum(scn: &Scenario) -> Outcome {
    let settings = &scn.spectrum;
    let half = settings.delta_max.expect("resolved scenario");
    let n = settings.n_points;
    let deltas: Vec<f64> = (0..n)
        .map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64)
        .collect();
    let mut tables = Vec::new();
    for k in densities(scn) {
        let params = scn.params.with_density_param(k);
        let name = tag(&params, k);
        let computed = (|| {
            let stat = stationary_with(&params, &StationaryOptions::default())?;
            let trapped = spectral_distribution(&stat.state, &params, &deltas)?;
            let absorbed = match params.regime {
                Regime::Radiative { .. } => absorption_spectrum(&stat.state, &params, stat.gamma, &deltas)?,
                Regime::Inhomogeneous { .. } => doppler_profile(&deltas)?,
            };
            Ok::<_, crate::Error>((stat, trapped, absorbed))
        })();
        let (stat, trapped, absorbed) = match computed {
            Ok(v) => v,
            Err(e) => return (tables, Some(CliError::at(&name, e))),
        };
        let renorm = |s: Spectrum| match settings.normalization {
            Normalization::Peak => s,
            other => s.normalized(other),
        };
        let (trapped, absorbed) = (renorm(trapped), renorm(absorbed));
        let width = |s: &Spectrum| s.fwhm().map_or(f64::NAN, |w| w);
        let unit = match params.regime {
            Regime::Radiative { .. } => "gamma",
            Regime::Inhomogeneous { .. } => "doppler_width",
        };
        let mut table = Table::new(format!("spectrum_{name}.csv"), &schema::SPECTRUM);
        header(&mut table, Mode::Spectrum, &params);
        table
            .comment(format!(
                "stationary: rho_aa={} rho_bb={} rho_cc={} Gamma={}",
                stat.state.rho_aa, stat.state.rho_bb, stat.state.rho_cc, stat.gamma
            ))
            .comment(format!(
                "delta detuning [{unit}]; trapped and absorption spectra, normalization={:?}",
                settings.normalization
            ))
            .comment(format!(
                "fwhm_trapped={} fwhm_absorption={}",
                fmt(width(&trapped)),
                fmt(width(&absorbed))
            ));
        for i in 0..n {
            table.push(vec![fmt(deltas[i]), fmt(trapped.values[i]), fmt(absorbed.values[i])]);
        }
        tables.push(table);
    }
    (tables, None)
}

fn asymptote(scn: &Scenario) -> Outcome {
    let settings = &scn.asymptote;
    let initial = scn.initial.unwrap_or_else(PopulationState::equal_ground);
    let mut table = Table::new("asymptote.csv", &schema::ASYMPTOTE);
    header(&mut table, Mode::Asymptote, &scn.params);
    table
        .comment("density_param K or K0; K_eff = K (Doppler) or K_tilde (radiative)")
        .comment("closed_form asymptotic pump rate [gamma] (nan for K <= 1); simulated = plateau median [gamma]")
        .comment("spread = (max-min)/median over the final 20% of the window; late_time_exact = slow eigenvalue [gamma]");
    let mut errors = Vec::new();
    for k in densities(scn) {
        let params = scn.params.with_density_param(k);
        let (k_eff, closed) = match params.regime {
            Regime::Inhomogeneous { .. } => (k, asymptotic_pump_rate_inhom(k).unwrap_or(f64::NAN)),
            Regime::Radiative { .. } => {
                let kt = k_tilde(&params, k);
                (kt, asymptotic_pump_rate_rad(kt))
            }
        };
        let t_end = (settings.window_rates / pump_rate_estimate(&params)).min(MAX_WINDOW);
        let grid = uniform_grid(t_end, settings.n_out);
        let plateau = evolve_with(&params, initial, t_end, &grid, &scn.evolve.options)
            .and_then(|traj| estimate_asymptote(&traj));
        let (simulated, spread, status) = match plateau {
            Ok(p) => (p.rate, p.spread, "ok".to_string()),
            Err(e) => {
                errors.push(format!("{}: {e}", tag(&params, k)));
                (f64::NAN, f64::NAN, e.to_string())
            }
        };
        table.push(vec![
            fmt(k),
            fmt(k_eff),
            fmt(closed),
            fmt(simulated),
            fmt(simulated / closed),
            fmt(spread),
            fmt(linearized_pump_rate(&params)),
            fmt(t_end),
            status,
        ]);
    }
    (vec![table], failure(errors))
}

fn oracle(scn: &Scenario) -> Outcome {
    let settings = &scn.oracle;
    let cfg = &settings.ensemble;
    let initial = scn.initial.unwrap_or_else(PopulationState::equal_ground);
    let params = scn.params;
    let result = simulate_stochastic(&params, cfg, initial, settings.t_end)
        .and_then(|ens| compare_with_rate_equations(&params, cfg, initial, &ens).map(|cmp| (ens, cmp)));
    let (ens, cmp) = match result {
        Ok(v) => v,
        Err(e) => return (Vec::new(), Some(CliError::from_core(e))),
    };
    let mut table = Table::new("oracle.csv", &schema::ORACLE);
    header(&mut table, Mode::Oracle, &params);
    table
        .comment(format!(
            "ensemble: bandwidth={} n_trajectories={} dt={} seed={} delta_ac={} gamma_ac={} collective_rate={}",
            cfg.bandwidth,
            cfg.n_trajectories,
            ens.dt,
            cfg.seed,
            cfg.delta_ac,
            cfg.coherence_decay(&params),
            cfg.collective_rate
        ))
        .comment("rho_* ensemble means with standard errors *_se; rho_bb_rate_eq from the rate equations")
        .comment("z_score = (rho_bb - rho_bb_rate_eq) / rho_bb_se")
        .comment(format!(
            "noise: mean Omega = ({}, {}) +- ({}, {}); correlation integral = {} (pump_rate = {})",
            fmt(ens.noise.mean[0]),
            fmt(ens.noise.mean[1]),
            fmt(ens.noise.mean_se[0]),
            fmt(ens.noise.mean_se[1]),
            fmt(ens.noise.correlation_integral),
            params.pump_rate
        ));
    for i in 0..ens.times.len() {
        let (m, se) = (ens.mean[i], ens.std_error[i]);
        table.push(vec![
            fmt(ens.times[i]),
            fmt(m[0]),
            fmt(se[0]),
            fmt(m[1]),
            fmt(se[1]),
            fmt(m[2]),
            fmt(se[2]),
            fmt(cmp.reference.states[i].rho_bb),
            fmt(cmp.z_scores[i]),
        ]);
    }
    (vec![table], None)
}
