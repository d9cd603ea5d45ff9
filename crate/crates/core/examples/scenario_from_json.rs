//! Drives the batch front end from code: builds a scenario, applies an
//! override, runs it into a temporary directory and prints the resulting
//! table. Equivalent to `radtrap sweep --config scenario.json --set ...`.
//!
//! `cargo run --release --example scenario_from_json`

use radtrap::cli::{apply_override, execute, parse_scenario, read_table, Mode};
use serde_json::json;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut doc = json!({
        "params": {
            "gamma_prime": 1.0, "gamma0": 0.0, "pump_rate": 10.0,
            "regime": {"type": "radiative", "density_param_k0": 1.0}
        },
        "gamma0_list": [1e-3],
        "sweep": {"density_min": 1, "density_max": 1000, "n_points": 4}
    });
    apply_override(&mut doc, "params.pump_rate=20")?;
    let scenario = parse_scenario(doc)?.resolved(Mode::Sweep);
    scenario.validate()?;

    let out = std::env::temp_dir().join("radtrap_example");
    let manifest = execute(Mode::Sweep, &scenario, &out)?;
    println!("wrote {:?} to {}", manifest.outputs, out.display());
    let (comments, header, rows) = read_table(&out.join(&manifest.outputs[0]))?;
    for c in comments {
        println!("# {c}");
    }
    println!("{}", header.join(","));
    for r in rows {
        println!("{}", r.join(","));
    }
    Ok(())
}
