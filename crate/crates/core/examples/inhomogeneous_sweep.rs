//! Stationary target population of a Doppler-broadened medium versus K for
//! several exchange rates γ0.
//!
//! `cargo run --release --example inhomogeneous_sweep`

use radtrap::steadystate::{log_grid, sweep, StationaryOptions};
use radtrap::{Regime, SystemParams};

fn main() -> radtrap::Result<()> {
    let base = SystemParams::new(1.0, 0.0, 10.0, Regime::inhomogeneous(100.0, 1.0))?;
    let grid = log_grid(1.0, 1e6, 13);
    let gamma0s = [0.0, 1e-4, 1e-3, 1e-2];
    let table = sweep(&base, &grid, &gamma0s, &StationaryOptions::default())?;

    print!("{:>10}", "K");
    for g in gamma0s {
        print!(" {:>12}", format!("g0={g:e}"));
    }
    println!();
    for (i, k) in grid.iter().enumerate() {
        print!("{k:>10.2e}");
        for g in gamma0s {
            match table.series(g).get(i) {
                Some((_, s)) => print!(" {:>12.6}", s.state.rho_bb),
                None => print!(" {:>12}", "failed"),
            }
        }
        println!();
    }
    for row in table.failures() {
        println!("failed: K = {}, gamma0 = {}: {:?}", row.density_param, row.gamma0, row.outcome);
    }
    Ok(())
}
