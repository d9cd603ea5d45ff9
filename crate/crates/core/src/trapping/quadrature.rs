//! Saturation kernel of the trapped-photon rate and its average over a
//! Gaussian velocity distribution.
//!
//! The Doppler average is `(1/√π) ∫ dy e^{-y²} φ(K, x, e^{-y²})` with
//! `φ(K, x, f) = [1 - exp(-K x f)] / x`. For optical depths `|K x| ≤ 3` a
//! 64-node Gauss-Hermite rule resolves the integrand to better than 1e-11.
//! Beyond that the integrand develops a saturation edge at `y ≈ √ln(K x)`
//! which Gauss-Hermite nodes cannot follow, so a composite Gauss-Legendre
//! rule on the half line is used instead.

use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::{GaussHermite, GaussLegendre};

/// Below this `|K x f|` the kernel is evaluated from its series expansion.
pub const SERIES_THRESHOLD: f64 = 1e-6;

/// Number of Gauss-Hermite nodes of the production rule.
pub const HERMITE_NODES: usize = 64;

/// Largest `|K x|` handled by the Gauss-Hermite rule.
pub const HERMITE_MAX_DEPTH: f64 = 3.0;

const PANEL_NODES: usize = 12;
const FIXED_PANELS: usize = 8;
const WIDE_PANELS: usize = 12;
/// Up to this depth the fixed Legendre table covers the integrand tail.
const FIXED_TABLE_DEPTH: f64 = 1e10;
/// `ln` of the tail cut-off: the integrand beyond `y_max` is below e^{-39}·|K x|.
const TAIL_LOG: f64 = 39.0;

/// `[1 - exp(-k x f)] / x`, continued analytically through `x = 0`.
///
/// Near the removable singularity the two-term series `k f (1 - k x f / 2)`
/// is used; it agrees with the closed form to O((k x f)²/6).
#[inline]
pub fn saturation_ratio(k: f64, x: f64, f: f64) -> f64 {
    let depth = k * x * f;
    if depth.abs() < SERIES_THRESHOLD {
        k * f * (1.0 - 0.5 * depth)
    } else {
        -(-depth).exp_m1() / x
    }
}

/// Nodes `e^{-y²}` and weights of a quadrature for `(1/√π) ∫ e^{-y²} g(y²) dy`.
struct EvenRule {
    gaussian: Vec<f64>,
    weights: Vec<f64>,
}

impl EvenRule {
    #[inline]
    fn average(&self, k: f64, x: f64) -> f64 {
        self.gaussian
            .iter()
            .zip(&self.weights)
            .map(|(&f, &w)| w * saturation_ratio(k, x, f))
            .sum()
    }

    /// Folds a symmetric Gauss-Hermite rule onto `y ≥ 0`.
    fn hermite(nodes: usize) -> Self {
        let rule = GaussHermite::new(NonZeroUsize::new(nodes).expect("at least one node"));
        let mut gaussian = Vec::with_capacity(nodes / 2 + 1);
        let mut weights = Vec::with_capacity(nodes / 2 + 1);
        for &(y, w) in rule.as_node_weight_pairs() {
            if y < -1e-14 {
                continue;
            }
            let fold = if y.abs() <= 1e-14 { 1.0 } else { 2.0 };
            gaussian.push((-y * y).exp());
            weights.push(fold * w / PI.sqrt());
        }
        EvenRule { gaussian, weights }
    }

    /// Composite Gauss-Legendre on `[0, y_max]`, with the Gaussian weight
    /// folded into the quadrature weights.
    fn legendre(panels: usize, y_max: f64) -> Self {
        let rule = GaussLegendre::new(NonZeroUsize::new(PANEL_NODES).unwrap());
        let width = y_max / panels as f64;
        let mut gaussian = Vec::with_capacity(panels * PANEL_NODES);
        let mut weights = Vec::with_capacity(panels * PANEL_NODES);
        for panel in 0..panels {
            let mid = (panel as f64 + 0.5) * width;
            for &(t, w) in rule.as_node_weight_pairs() {
                let y = mid + 0.5 * width * t;
                let f = (-y * y).exp();
                gaussian.push(f);
                // Factor 2 for the mirrored half line.
                weights.push(2.0 * 0.5 * width * w * f / PI.sqrt());
            }
        }
        EvenRule { gaussian, weights }
    }
}

fn tail_cutoff(depth: f64) -> f64 {
    ((depth.max(1.0).ln() + TAIL_LOG) / 2.0).sqrt()
}

fn hermite_rule() -> &'static EvenRule {
    static RULE: OnceLock<EvenRule> = OnceLock::new();
    RULE.get_or_init(|| EvenRule::hermite(HERMITE_NODES))
}

fn legendre_table() -> &'static EvenRule {
    static RULE: OnceLock<EvenRule> = OnceLock::new();
    RULE.get_or_init(|| EvenRule::legendre(FIXED_PANELS, tail_cutoff(FIXED_TABLE_DEPTH)))
}

/// Velocity average `(1/√π) ∫ e^{-y²} φ(k, x, e^{-y²}) dy`.
///
/// Multiplied by `ρ_aa γ` this is the Doppler-averaged collective rate.
pub fn doppler_average(k: f64, x: f64) -> f64 {
    let depth = (k * x).abs();
    if depth <= HERMITE_MAX_DEPTH {
        hermite_rule().average(k, x)
    } else if depth <= FIXED_TABLE_DEPTH {
        legendre_table().average(k, x)
    } else {
        EvenRule::legendre(WIDE_PANELS, tail_cutoff(depth)).average(k, x)
    }
}

/// Plain `n`-node Gauss-Hermite evaluation of the same average, for any depth.
pub fn gauss_hermite_average(k: f64, x: f64, nodes: usize) -> f64 {
    if nodes == HERMITE_NODES {
        hermite_rule().average(k, x)
    } else {
        EvenRule::hermite(nodes).average(k, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_vanishes_without_depth() {
        assert_eq!(saturation_ratio(0.0, 0.4, 1.0), 0.0);
        assert_eq!(doppler_average(0.0, 0.4), 0.0);
    }

    #[test]
    fn kernel_is_finite_at_equal_populations() {
        assert_eq!(saturation_ratio(10.0, 0.0, 0.5), 5.0);
        assert!((doppler_average(10.0, 0.0) - 10.0 / 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn seam_continuity() {
        // Approach |k x f| = 1e-6 from both sides.
        for &(k, f) in &[(1.0, 1.0), (1e3, 0.3), (2.5e-2, 0.9)] {
            let x = SERIES_THRESHOLD / (k * f);
            let below = saturation_ratio(k, x * (1.0 - 1e-12), f);
            let above = saturation_ratio(k, x * (1.0 + 1e-12), f);
            assert!(((below - above) / above).abs() < 1e-12, "{below} vs {above}");
        }
    }

    #[test]
    fn hermite_rule_is_normalized() {
        let total: f64 = hermite_rule().weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-13);
        let total: f64 = legendre_table().weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn branches_agree_at_switch() {
        let x = 0.5;
        let k = 2.0 * HERMITE_MAX_DEPTH;
        let gh = hermite_rule().average(k / 2.0, x);
        let gl = legendre_table().average(k / 2.0, x);
        assert!(((gh - gl) / gl).abs() < 1e-11);
    }
}
