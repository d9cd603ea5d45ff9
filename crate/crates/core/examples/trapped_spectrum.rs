//! Spectrum of the trapped radiation at the stationary state, compared with
//! the absorption line, for a radiatively broadened medium.
//!
//! `cargo run --release --example trapped_spectrum`

use radtrap::steadystate::stationary;
use radtrap::trapping::{absorption_spectrum, spectral_distribution};
use radtrap::{Regime, SystemParams};

fn main() -> radtrap::Result<()> {
    let deltas: Vec<f64> = (0..=2000).map(|i| -50.0 + 0.05 * i as f64).collect();
    for k0 in [1.0, 10.0, 100.0] {
        let params = SystemParams::new(1.0, 1e-4, 10.0, Regime::radiative(k0))?;
        let stat = stationary(&params)?;
        let trapped = spectral_distribution(&stat.state, &params, &deltas)?;
        let absorbed = absorption_spectrum(&stat.state, &params, stat.gamma, &deltas)?;
        let fwhm = |w: Option<f64>| w.map_or("unresolved".to_string(), |w| format!("{w:.3}"));
        println!(
            "K0 = {k0:>5}: rho_bb = {:.4}, Gamma* = {:.4}, FWHM trapped {} vs absorption {}",
            stat.state.rho_bb,
            stat.gamma,
            fwhm(trapped.fwhm()),
            fwhm(absorbed.fwhm())
        );
        for d in [0.0, 5.0, 10.0, 20.0, 40.0] {
            let i = deltas.iter().position(|x| (x - d).abs() < 1e-9).unwrap();
            println!("    delta = {d:>4}: trapped {:.4}  absorption {:.4}", trapped.values[i], absorbed.values[i]);
        }
    }
    Ok(())
}
