//! Late-time pump-rate plateaus against the large-density closed forms and
//! the exact slow eigenvalue of the linearized equations.
//!
//! `cargo run --release --example asymptotic_rates`

use radtrap::dynamics::{
    asymptotic_pump_rate_inhom, asymptotic_pump_rate_rad, default_t_end, estimate_asymptote, evolve,
    linearized_pump_rate, uniform_grid,
};
use radtrap::{gamma_ab, PopulationState, Regime, SystemParams};

fn plateau(params: &SystemParams) -> radtrap::Result<f64> {
    let t_end = default_t_end(params);
    let traj = evolve(params, PopulationState::equal_ground(), t_end, &uniform_grid(t_end, 2000))?;
    Ok(estimate_asymptote(&traj)?.rate)
}

fn main() -> radtrap::Result<()> {
    println!("{:>12} {:>8} {:>12} {:>12} {:>12} {:>8}", "regime", "K", "closed", "simulated", "eigenvalue", "ratio");
    for k in [10.0, 100.0, 1000.0] {
        let params = SystemParams::new(1.0, 0.0, 10.0, Regime::inhomogeneous(100.0, k))?;
        let closed = asymptotic_pump_rate_inhom(k)?;
        let sim = plateau(&params)?;
        let exact = linearized_pump_rate(&params);
        println!("{:>12} {k:>8} {closed:>12.4e} {sim:>12.4e} {exact:>12.4e} {:>8.4}", "doppler", sim / closed);
    }
    let base = SystemParams::new(1.0, 0.0, 10.0, Regime::radiative(0.0))?;
    for kt in [0.0, 1.0, 2.0, 5.0] {
        let params = base.with_density_param(kt * gamma_ab(&base));
        let closed = asymptotic_pump_rate_rad(kt);
        let sim = plateau(&params)?;
        let exact = linearized_pump_rate(&params);
        println!("{:>12} {kt:>8} {closed:>12.4e} {sim:>12.4e} {exact:>12.4e} {:>8.4}", "radiative", sim / closed);
    }
    Ok(())
}
