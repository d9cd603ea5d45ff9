//! Stochastic Bloch ensemble versus the rate equations, at two pump
//! bandwidths. The ensemble mean of ρ_bb should sit within a few standard
//! errors of the rate-equation curve, with a bias that shrinks like 1/B.

use radtrap::oracle::{compare_with_rate_equations, simulate_stochastic, StochasticConfig};
use radtrap::{PopulationState, Regime, SystemParams};

fn main() -> radtrap::Result<()> {
    let params = SystemParams::new(1.0, 0.0, 10.0, Regime::radiative(0.0))?;
    let initial = PopulationState::equal_ground();
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10_000);

    for bandwidth in [200.0, 400.0] {
        let cfg = StochasticConfig::new(bandwidth, n, 2024);
        let ensemble = simulate_stochastic(&params, &cfg, initial, 2.0)?;
        let cmp = compare_with_rate_equations(&params, &cfg, initial, &ensemble)?;
        println!("B = {bandwidth}, {n} trajectories, dt = {:.2e}", ensemble.dt);
        println!("{:>6} {:>10} {:>10} {:>10} {:>7}", "t", "rho_bb", "rate eq", "se", "z");
        for (i, t) in ensemble.times.iter().enumerate().step_by(4) {
            println!(
                "{t:6.2} {:10.6} {:10.6} {:10.2e} {:7.2}",
                ensemble.mean[i][1], cmp.reference.states[i].rho_bb, ensemble.std_error[i][1], cmp.z_scores[i]
            );
        }
        println!(
            "max |z| = {:.2}, bias at t = 2: {:+.3e}, noise: <Omega> = ({:+.2e}, {:+.2e}), correlation integral = {:.3} (R = 10)\n",
            cmp.max_abs_z(),
            cmp.differences.last().unwrap(),
            ensemble.noise.mean[0],
            ensemble.noise.mean[1],
            ensemble.noise.correlation_integral
        );
    }
    Ok(())
}
