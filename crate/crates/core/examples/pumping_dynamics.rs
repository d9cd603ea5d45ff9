//! Population transfer into the target level for increasing optical depth
//! (Doppler broadened), with the effective pump rate Γ_p = -d ln(ρ_aa+ρ_cc)/dt.
//!
//! `cargo run --release --example pumping_dynamics`

use radtrap::dynamics::{evolve, uniform_grid};
use radtrap::{PopulationState, Regime, SystemParams};

fn main() -> radtrap::Result<()> {
    let t_end = 1000.0;
    let grid = uniform_grid(t_end, 10);
    for k in [0.0, 1.0, 10.0, 100.0] {
        let params = SystemParams::new(1.0, 0.0, 10.0, Regime::inhomogeneous(100.0, k))?;
        let traj = evolve(&params, PopulationState::equal_ground(), t_end, &grid)?;
        println!("K = {k}");
        println!("  {:>8} {:>12} {:>12} {:>12} {:>12}", "t", "rho_bb", "rho_aa", "Gamma", "Gamma_p");
        for i in (0..traj.len()).step_by(2) {
            let s = traj.states[i];
            println!(
                "  {:>8.1} {:>12.8} {:>12.4e} {:>12.4e} {:>12.4e}",
                traj.times[i], s.rho_bb, s.rho_aa, traj.gammas[i], traj.pump_rates[i]
            );
        }
        println!("  trace drift {:.1e}", traj.max_trace_error());
    }
    Ok(())
}
