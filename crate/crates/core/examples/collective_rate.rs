//! Collective decay rate Γ for both broadening regimes over a range of
//! densities, at a fixed partially pumped state.
//!
//! `cargo run --example collective_rate`

use radtrap::trapping::{collective_rate, doppler_average, gauss_hermite_average, HERMITE_NODES};
use radtrap::{k_tilde, PopulationState, Regime, SystemParams};

fn main() -> radtrap::Result<()> {
    let state = PopulationState::new(0.05, 0.75, 0.20)?;
    let doppler = SystemParams::new(1.0, 0.0, 10.0, Regime::inhomogeneous(100.0, 0.0))?;
    let radiative = SystemParams::new(1.0, 0.0, 10.0, Regime::radiative(0.0))?;

    println!("state: {state:?}");
    println!("{:>10} {:>14} {:>14} {:>10}", "density", "Gamma_doppler", "Gamma_rad", "K_tilde");
    for density in [0.0, 0.1, 1.0, 10.0, 100.0, 1e3, 1e4, 1e5] {
        let gd = collective_rate(&state, &doppler.with_density_param(density))?;
        let rp = radiative.with_density_param(density);
        let gr = collective_rate(&state, &rp)?;
        println!("{density:>10.1e} {gd:>14.6e} {gr:>14.6e} {:>10.3}", k_tilde(&rp, density));
    }

    // Plain Gauss-Hermite loses accuracy once the line centre saturates.
    let x = state.difference();
    println!("\nvelocity average at x = {x}: production rule vs {HERMITE_NODES}-node Gauss-Hermite");
    for k in [1.0, 4.0, 30.0, 300.0] {
        let good = doppler_average(k, x);
        let gh = gauss_hermite_average(k, x, HERMITE_NODES);
        println!("  K = {k:>6}: {good:.12} vs {gh:.12} (relative {:.1e})", ((gh - good) / good).abs());
    }
    Ok(())
}
