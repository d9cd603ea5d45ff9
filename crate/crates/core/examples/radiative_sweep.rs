//! Stationary populations of a radiatively broadened medium versus K0. With
//! γ0 > 0 the three levels approach equal populations at large density.
//!
//! `cargo run --release --example radiative_sweep`

use radtrap::steadystate::{log_grid, sweep, StationaryOptions};
use radtrap::{Regime, SystemParams};

fn main() -> radtrap::Result<()> {
    let base = SystemParams::new(1.0, 1e-2, 10.0, Regime::radiative(1.0))?;
    let grid = log_grid(1.0, 1e4, 9);
    let table = sweep(&base, &grid, &[1e-2], &StationaryOptions::default())?;
    println!("gamma0 = 1e-2");
    println!("{:>10} {:>10} {:>10} {:>10} {:>12} {:>10}", "K0", "rho_aa", "rho_bb", "rho_cc", "Gamma", "residual");
    for (k0, s) in table.series(1e-2) {
        println!(
            "{k0:>10.2e} {:>10.6} {:>10.6} {:>10.6} {:>12.5e} {:>10.1e}",
            s.state.rho_aa, s.state.rho_bb, s.state.rho_cc, s.gamma, s.residual
        );
    }
    Ok(())
}
