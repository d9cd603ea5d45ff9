//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use radtrap::trapping::saturation_ratio;
use radtrap::{PopulationState, Regime, SystemParams};

pub fn doppler(k: f64, gamma0: f64) -> SystemParams {
    SystemParams::new(1.0, gamma0, 10.0, Regime::inhomogeneous(100.0, k)).unwrap()
}

pub fn radiative(k0: f64, gamma0: f64) -> SystemParams {
    SystemParams::new(1.0, gamma0, 10.0, Regime::radiative(k0)).unwrap()
}

pub fn state(a: f64, b: f64) -> PopulationState {
    PopulationState::new(a, b, 1.0 - a - b).unwrap()
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    // Split first so that narrow features are not skipped by the initial estimate.
    let pieces = 64;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            simpson(&f, lo, hi, fa, fm, fb, whole, tol / pieces as f64, 40)
        })
        .sum()
}

/// Reference value of the Doppler average by adaptive quadrature.
pub fn doppler_average_reference(k: f64, x: f64) -> f64 {
    let y_max = ((k * x).abs().max(1.0).ln() + 45.0).sqrt();
    let scale = saturation_ratio(k, x, 1.0).abs().max(1e-300);
    let integrand = |y: f64| {
        let f = (-y * y).exp();
        2.0 / std::f64::consts::PI.sqrt() * f * saturation_ratio(k, x, f)
    };
    adaptive(integrand, 0.0, y_max, 1e-14 * scale)
}
