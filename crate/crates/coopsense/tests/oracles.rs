//! Cross-validation of the special functions against independent oracles.
//!
//! The oracles (in the dev-only `coopsense-oracles` crate) share no code
//! with the implementations under test: the regularized lower gamma oracle
//! integrates the defining integral by adaptive quadrature, and the Marcum Q
//! oracle sums the defining Poisson mixture upward from index zero with
//! closed-form Erlang tails. Agreement is asserted in relative terms at
//! 1e-10, an order tighter than anything downstream consumes.

use coopsense::detector::{SuProfile, pd_for_threshold};
use coopsense::specfun::{
    Tolerance, inv_marcum_q_b, inv_reg_lower_gamma, marcum_q, reg_lower_gamma,
};
use coopsense_oracles::{marcum_q_series, noncentral_chi2_sf, reg_lower_gamma_quadrature};

fn assert_close_rel(actual: f64, expected: f64, rel: f64, context: &str) {
    let scale = expected.abs().max(1e-290);
    assert!(
        (actual - expected).abs() <= rel * scale,
        "{context}: got {actual:e}, oracle says {expected:e} (rel err {:.3e})",
        (actual - expected).abs() / scale
    );
}

#[test]
fn marcum_q_matches_the_poisson_mixture_oracle() {
    let orders = [1u32, 2, 4, 8, 16, 32];
    let a_values = [0.0, 0.5, 1.0, 2.0, 5.0, 8.0];
    let b_values = [0.25, 0.5, 1.0, 2.0, 4.0, 6.0, 9.0, 12.0];
    for &m in &orders {
        for &a in &a_values {
            for &b in &b_values {
                let ours = marcum_q(m, a, b).unwrap();
                let oracle = marcum_q_series(m, a, b);
                assert_close_rel(ours, oracle, 1e-10, &format!("Q_{m}({a}, {b})"));
            }
        }
    }
}

#[test]
fn reg_lower_gamma_matches_the_quadrature_oracle() {
    // Half-integer shapes (the oracle's exact log-gamma needs them), with
    // abscissas spread across each distribution's body so the quadrature
    // oracle's absolute tolerance translates into relative agreement.
    let shapes = [0.5, 1.0, 1.5, 2.0, 2.5, 5.0, 8.0, 16.0, 32.0, 64.0];
    for &a in &shapes {
        let multipliers: &[f64] =
            if a <= 8.0 { &[0.5, 1.0, 2.0, 4.0] } else { &[0.75, 1.0, 1.3, 1.8] };
        for &mult in multipliers {
            let x = a * mult;
            let ours = reg_lower_gamma(a, x).unwrap();
            let oracle = reg_lower_gamma_quadrature(a, x);
            assert_close_rel(ours, oracle, 1e-10, &format!("P({a}, {x})"));
        }
    }
}

#[test]
fn detector_pd_matches_the_noncentral_chi_square_oracle() {
    // The detection probability is by definition the noncentral chi-square
    // survival function with 2m degrees of freedom and noncentrality 2m snr.
    let windows = [1u32, 5, 20];
    let snrs = [0.316_227_766_016_837_94, 1.0, 3.162_277_660_168_379_5];
    for &m in &windows {
        for &snr in &snrs {
            let profile = SuProfile::new(snr, m).unwrap();
            let mean = 2.0 * f64::from(m) * (1.0 + snr);
            for lambda_frac in [0.25, 0.5, 1.0, 1.5, 2.0] {
                let lambda = mean * lambda_frac;
                let ours = pd_for_threshold(&profile, lambda).unwrap();
                let oracle = noncentral_chi2_sf(2 * m, 2.0 * f64::from(m) * snr, lambda);
                assert_close_rel(
                    ours,
                    oracle,
                    1e-10,
                    &format!("pd(m={m}, snr={snr}, lambda={lambda})"),
                );
            }
        }
    }
}

#[test]
fn marcum_inverse_round_trips_through_both_routes() {
    let orders = [1u32, 2, 4, 8, 16, 32];
    let a_values = [0.0, 0.5, 1.0, 2.0, 5.0];
    let p_values = [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99];
    for &m in &orders {
        for &a in &a_values {
            for &p in &p_values {
                let b = inv_marcum_q_b(m, a, p, Tolerance::default()).unwrap();
                let forward = marcum_q(m, a, b).unwrap();
                assert!((forward - p).abs() <= 1e-8, "Q_{m}({a}, {b}) = {forward}, wanted {p}");
                let oracle = marcum_q_series(m, a, b);
                assert!(
                    (oracle - p).abs() <= 2e-8,
                    "oracle disagrees on the round trip: Q_{m}({a}, {b}) = {oracle}, wanted {p}"
                );
            }
        }
    }
}

#[test]
fn gamma_inverse_round_trips_through_the_quadrature_oracle() {
    let shapes = [0.5, 1.0, 2.0, 5.0, 8.0];
    let p_values = [0.01, 0.1, 0.5, 0.9, 0.99];
    for &a in &shapes {
        for &p in &p_values {
            let x = inv_reg_lower_gamma(a, p, Tolerance::default()).unwrap();
            let forward = reg_lower_gamma(a, x).unwrap();
            assert!((forward - p).abs() <= 1e-8, "P({a}, {x}) = {forward}, wanted {p}");
            let oracle = reg_lower_gamma_quadrature(a, x);
            assert!(
                (oracle - p).abs() <= 2e-8,
                "oracle disagrees on the round trip: P({a}, {x}) = {oracle}, wanted {p}"
            );
        }
    }
}
