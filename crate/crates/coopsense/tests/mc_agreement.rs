//! Monte Carlo cross-checks of planner and detector outputs.
//!
//! Every probability the planner reports analytically is re-estimated here by
//! simulating the detector itself: complex-Gaussian samples are squared,
//! summed, and compared against the planner's own thresholds. Agreement is
//! asserted within three-sigma binomial half-widths at one million trials.

use coopsense::db_to_linear;
use coopsense::detector::{SuProfile, threshold_for_pd};
use coopsense::fusion::FusionRule;
use coopsense::mcsim::{Hypothesis, McConfig, estimate_fused_probs, estimate_su_probs};
use coopsense::planner::{ScenarioConfig, evaluate_cluster, evaluate_cluster_heterogeneous};

const TRIALS: u64 = 1_000_000;

fn scenario() -> ScenarioConfig {
    ScenarioConfig {
        sensing_period: 100,
        sensing_symbols: 5,
        total_pd_target: 0.9,
        mean_snr: db_to_linear(5.0),
        rule: FusionRule::Or,
        max_cluster: 95,
    }
}

#[test]
fn single_su_plan_is_reproduced_by_simulation() {
    let config = scenario();
    let row = evaluate_cluster(&config, 1).unwrap();
    let profile = SuProfile::new(config.mean_snr, config.sensing_symbols).unwrap();

    // False-alarm probability under the quiet channel.
    let mc_pf = estimate_su_probs(
        &profile,
        row.threshold(),
        &McConfig { trials: TRIALS, seed: 101, hypothesis: Hypothesis::H0 },
    )
    .unwrap();
    assert!(
        (row.fused_pf - mc_pf.estimate).abs() <= mc_pf.half_width_3sigma,
        "analytic pf {} vs simulated {} +/- {}",
        row.fused_pf,
        mc_pf.estimate,
        mc_pf.half_width_3sigma
    );

    // Detection probability under the occupied channel.
    let mc_pd = estimate_su_probs(
        &profile,
        row.threshold(),
        &McConfig { trials: TRIALS, seed: 103, hypothesis: Hypothesis::H1 },
    )
    .unwrap();
    assert!(
        (row.fused_pd - mc_pd.estimate).abs() <= mc_pd.half_width_3sigma,
        "analytic pd {} vs simulated {} +/- {}",
        row.fused_pd,
        mc_pd.estimate,
        mc_pd.half_width_3sigma
    );

    // The throughput identity: airtime fraction times the simulated
    // probability that the quiet channel is actually offered to the SUs.
    let simulated_throughput = row.overhead_factor * (1.0 - mc_pf.estimate);
    assert!(
        (row.throughput - simulated_throughput).abs()
            <= row.overhead_factor * mc_pf.half_width_3sigma,
        "analytic throughput {} vs simulated {simulated_throughput}",
        row.throughput
    );
}

#[test]
fn fused_cluster_plan_is_reproduced_by_simulation() {
    let config = scenario();
    let n = 4;
    let row = evaluate_cluster(&config, n).unwrap();
    let profiles =
        vec![SuProfile::new(config.mean_snr, config.sensing_symbols).unwrap(); n as usize];
    let lambdas: Vec<f64> = row.operating_points.iter().map(|op| op.threshold).collect();

    let mc_pf = estimate_fused_probs(
        &profiles,
        &lambdas,
        config.rule,
        &McConfig { trials: TRIALS, seed: 107, hypothesis: Hypothesis::H0 },
    )
    .unwrap();
    assert!(
        (row.fused_pf - mc_pf.estimate).abs() <= mc_pf.half_width_3sigma,
        "analytic fused pf {} vs simulated {} +/- {}",
        row.fused_pf,
        mc_pf.estimate,
        mc_pf.half_width_3sigma
    );

    let mc_pd = estimate_fused_probs(
        &profiles,
        &lambdas,
        config.rule,
        &McConfig { trials: TRIALS, seed: 109, hypothesis: Hypothesis::H1 },
    )
    .unwrap();
    assert!(
        (row.fused_pd - mc_pd.estimate).abs() <= mc_pd.half_width_3sigma,
        "analytic fused pd {} vs simulated {} +/- {}",
        row.fused_pd,
        mc_pd.estimate,
        mc_pd.half_width_3sigma
    );
    // The plan promised at least the total detection target; the simulation
    // must land within a half-width of that promise as well.
    assert!(mc_pd.estimate >= config.total_pd_target - mc_pd.half_width_3sigma);
}

#[test]
fn heterogeneous_cluster_false_alarms_are_reproduced_per_su() {
    let config = scenario();
    let snrs = [db_to_linear(5.0), db_to_linear(-5.0)];
    let row = evaluate_cluster_heterogeneous(&config, &snrs).unwrap();

    // Each SU's false-alarm probability individually, then the fused product
    // form that combines them.
    let mut survival = 1.0;
    for (i, (&snr, op)) in snrs.iter().zip(&row.operating_points).enumerate() {
        let profile = SuProfile::new(snr, config.sensing_symbols).unwrap();
        let mc = estimate_su_probs(
            &profile,
            op.threshold,
            &McConfig { trials: TRIALS, seed: 113 + i as u64, hypothesis: Hypothesis::H0 },
        )
        .unwrap();
        assert!(
            (op.p_false_alarm - mc.estimate).abs() <= mc.half_width_3sigma,
            "SU {i}: analytic pf {} vs simulated {} +/- {}",
            op.p_false_alarm,
            mc.estimate,
            mc.half_width_3sigma
        );
        survival *= 1.0 - mc.estimate;
    }
    let simulated_fused_pf = 1.0 - survival;
    assert!(
        (row.fused_pf - simulated_fused_pf).abs() <= 2e-3,
        "analytic fused pf {} vs product of simulated per-SU rates {simulated_fused_pf}",
        row.fused_pf
    );
}

#[test]
fn detector_operating_point_is_reproduced_by_simulation() {
    // A single detector with unit mean SNR: solve for the threshold that
    // meets a 0.9 detection target, then simulate both error rates at it.
    let profile = SuProfile::new(1.0, 5).unwrap();
    let op = threshold_for_pd(&profile, 0.9).unwrap();

    let mc_pd = estimate_su_probs(
        &profile,
        op.threshold,
        &McConfig { trials: TRIALS, seed: 127, hypothesis: Hypothesis::H1 },
    )
    .unwrap();
    assert!((0.9 - mc_pd.estimate).abs() <= mc_pd.half_width_3sigma);

    let mc_pf = estimate_su_probs(
        &profile,
        op.threshold,
        &McConfig { trials: TRIALS, seed: 131, hypothesis: Hypothesis::H0 },
    )
    .unwrap();
    assert!(
        (op.p_false_alarm - mc_pf.estimate).abs() <= mc_pf.half_width_3sigma,
        "analytic pf {} vs simulated {} +/- {}",
        op.p_false_alarm,
        mc_pf.estimate,
        mc_pf.half_width_3sigma
    );
}
