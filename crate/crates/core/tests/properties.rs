mod common;

use proptest::prelude::*;
use radtrap::trapping::{
    collective_rate, doppler_average, gamma_selfconsistent_rad, saturation_ratio, self_consistency_rhs,
    SERIES_THRESHOLD,
};
use radtrap::{rate_rhs, PopulationState};

use common::{doppler, doppler_average_reference, radiative};

/// States with ρ_aa ≤ ρ_bb, the domain of the trapping model.
fn uninverted() -> impl Strategy<Value = PopulationState> {
    (0.0..1.0f64, 0.0..1.0f64).prop_map(|(u, v)| {
        let b = 0.5 * (1.0 + u);
        let a = v * (1.0 - b).min(b);
        PopulationState::new(a, b, 1.0 - a - b).unwrap()
    })
}

fn rates() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.0..5.0f64, 0.0..0.1f64, 0.0..50.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rhs_conserves_trace((gp, g0, r) in rates(), s in uninverted(), gamma in 0.0..100.0f64) {
        let mut params = doppler(1.0, g0);
        params.gamma_prime = gp;
        params.pump_rate = r;
        let d = rate_rhs(&s, &params, gamma);
        prop_assert!(d.iter().sum::<f64>().abs() <= 1e-12 * (1.0 + gamma + r));
    }

    #[test]
    fn rhs_keeps_empty_levels_non_negative((gp, g0, r) in rates(), s in uninverted(), gamma in 0.0..100.0f64) {
        let mut params = doppler(1.0, g0);
        params.gamma_prime = gp;
        params.pump_rate = r;
        for empty in [0usize, 2] {
            let mut v = s.to_array();
            let spill = v[empty];
            v[empty] = 0.0;
            v[1] += spill;
            let d = rate_rhs(&PopulationState::from_array(v), &params, gamma);
            prop_assert!(d[empty] >= -1e-15, "level {empty}: {d:?}");
        }
    }

    #[test]
    fn rhs_is_affine_in_the_collective_rate(s in uninverted(), g1 in 0.0..50.0f64, g2 in 0.0..50.0f64) {
        let params = radiative(1.0, 1e-3);
        let at = |g: f64| rate_rhs(&s, &params, g);
        let (d0, d1, d2) = (at(0.0), at(g1), at(g1 + g2));
        for i in 0..3 {
            let slope = d1[i] - d0[i];
            let expected = d0[i] + slope * (g1 + g2) / g1.max(1e-300);
            if g1 > 1e-6 {
                prop_assert!((d2[i] - expected).abs() <= 1e-9 * (1.0 + expected.abs()));
            }
        }
    }

    #[test]
    fn seam_is_continuous(k in 1e-3..1e4f64, f in 1e-3..1.0f64, side in prop::bool::ANY) {
        let x = if side { 1.0 } else { -1.0 } * SERIES_THRESHOLD / (k * f);
        let below = saturation_ratio(k, x * (1.0 - 1e-12), f);
        let above = saturation_ratio(k, x * (1.0 + 1e-12), f);
        prop_assert!(((below - above) / above).abs() < 1e-12);
    }

    #[test]
    fn collective_rate_grows_with_density_and_is_bounded(s in uninverted(), k in 0.0..1e4f64, dk in 0.0..1e3f64) {
        let lo = collective_rate(&s, &doppler(k, 0.0)).unwrap();
        let hi = collective_rate(&s, &doppler(k + dk, 0.0)).unwrap();
        prop_assert!(hi >= lo * (1.0 - 1e-12));
        // Every excited atom is reabsorbed at most once per decay.
        let x = s.difference();
        if x > 1e-6 {
            prop_assert!(hi <= s.rho_aa / x * (1.0 + 1e-12) + 1e-300);
        }
        prop_assert!(hi <= s.rho_aa * (k + dk) * (1.0 + 1e-12));

        let rad_lo = collective_rate(&s, &radiative(k, 0.0)).unwrap();
        let rad_hi = collective_rate(&s, &radiative(k + dk, 0.0)).unwrap();
        prop_assert!(rad_hi >= rad_lo * (1.0 - 1e-12));
    }

    #[test]
    fn fixed_point_is_self_consistent(s in uninverted(), k0 in 0.0..1e5f64, g0 in 0.0..0.1f64) {
        let params = radiative(k0, g0);
        let g = gamma_selfconsistent_rad(&s, &params, k0).unwrap();
        let residual = (g - self_consistency_rhs(&s, &params, k0, g)).abs();
        prop_assert!(residual < 1e-10, "residual {residual:e} at Gamma = {g}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn quadrature_matches_adaptive_reference(log_k in -2.0..4.0f64, x in 0.0..1.0f64) {
        let k = 10f64.powf(log_k);
        let reference = doppler_average_reference(k, x);
        let value = doppler_average(k, x);
        prop_assert!(((value - reference) / reference).abs() < 1e-9, "K = {k}, x = {x}: {value} vs {reference}");
    }
}
