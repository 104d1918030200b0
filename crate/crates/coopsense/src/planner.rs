//! Cluster-size planning: throughput evaluation and exhaustive optimization.
//!
//! A cluster of `N` secondary users spends `m` symbols sensing and `N`
//! symbols reporting out of every `T_s`-symbol operational period, so the
//! fraction of the period left for payload is `1 - (m + N) / T_s`. Sensing
//! quality enters through the fused false-alarm probability: a false alarm
//! wastes the whole period. The planner evaluates the resulting normalized
//! throughput
//!
//! ```text
//! R(N) = (1 - (m + N) / T_s) * (1 - Pf_total(N))
//! ```
//!
//! for each cluster size, holding the total detection probability pinned at
//! the configured target (the interference constraint binds with equality at
//! every `N`), and returns the full sweep along with the maximizing row.
//!
//! Growing the cluster pulls in two directions: more users relax the per-user
//! detection target, which lets every user raise its threshold and cut its
//! false-alarm rate, but each extra user also burns one more reporting symbol
//! of overhead. The optimum balances the two, and where it lands depends on
//! the fusion rule, the mean SNR, and the sensing load `m / T_s`.

use crate::detector::{DetectorOperatingPoint, SuProfile, threshold_for_pd};
use crate::error::{Error, Result};
use crate::fusion::{FusionRule, fuse, per_su_pd_target};
use rayon::prelude::*;

/// Scenario under which clusters are evaluated: the frame geometry, the
/// detection constraint, the SU population's mean SNR, and the fusion rule.
///
/// # Examples
///
/// ```
/// use coopsense::planner::ScenarioConfig;
/// use coopsense::fusion::FusionRule;
///
/// let scenario = ScenarioConfig {
///     sensing_period: 100,
///     sensing_symbols: 5,
///     total_pd_target: 0.9,
///     mean_snr: 1.0,
///     rule: FusionRule::Or,
///     max_cluster: 95,
/// };
/// assert!(scenario.validate().is_ok());
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    /// Operational period `T_s` in symbols; sensing, reporting, and payload
    /// all fit inside it.
    pub sensing_period: u32,
    /// Symbols `m` each SU spends accumulating energy.
    pub sensing_symbols: u32,
    /// Total (fused) detection probability the cluster must achieve. Equals
    /// `1 - epsilon` where `epsilon` is the primary user's tolerable missed
    /// detection rate.
    pub total_pd_target: f64,
    /// Mean SNR of the SU population, linear scale.
    pub mean_snr: f64,
    /// Decision fusion rule applied at the cluster head.
    pub rule: FusionRule,
    /// Largest cluster size the sweep considers.
    pub max_cluster: u32,
}

impl ScenarioConfig {
    /// Checks the scenario invariants.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidScenario`] if `m = 0`, `m >= T_s`, `max_cluster` is 0
    /// or exceeds `T_s - m` (beyond which the overhead factor is negative),
    /// the detection target is outside `(0, 1]`, or the mean SNR is not a
    /// positive finite number.
    pub fn validate(&self) -> Result<()> {
        if self.sensing_symbols == 0 {
            return Err(Error::InvalidScenario("sensing_symbols must be at least 1".into()));
        }
        if self.sensing_symbols >= self.sensing_period {
            return Err(Error::InvalidScenario(format!(
                "sensing_symbols ({}) must be smaller than sensing_period ({}) \
                 to leave room for reporting and payload",
                self.sensing_symbols, self.sensing_period
            )));
        }
        let room = self.sensing_period - self.sensing_symbols;
        if self.max_cluster == 0 || self.max_cluster > room {
            return Err(Error::InvalidScenario(format!(
                "max_cluster ({}) must lie in 1..={} for sensing_period {} and \
                 sensing_symbols {}",
                self.max_cluster, room, self.sensing_period, self.sensing_symbols
            )));
        }
        if !(self.total_pd_target > 0.0 && self.total_pd_target <= 1.0) {
            return Err(Error::InvalidScenario(format!(
                "total_pd_target must lie in (0, 1], got {}",
                self.total_pd_target
            )));
        }
        if !(self.mean_snr.is_finite() && self.mean_snr > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "mean_snr must be a positive finite linear ratio, got {}",
                self.mean_snr
            )));
        }
        Ok(())
    }
}

/// One row of a cluster-size sweep: the operating point of every SU plus the
/// fused probabilities and the resulting throughput.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterEvaluation {
    /// Number of cooperating SUs, `N`.
    pub cluster_size: u32,
    /// Per-SU detection probability target that makes the fused detection
    /// probability meet the scenario's total target.
    pub per_su_pd: f64,
    /// Each SU's detection threshold and achieved probabilities, in SU
    /// order. Homogeneous evaluations repeat one shared operating point.
    pub operating_points: Vec<DetectorOperatingPoint>,
    /// Fused detection probability, recomputed forward from the achieved
    /// per-SU operating points (meets the target to solver tolerance rather
    /// than by assumption).
    pub fused_pd: f64,
    /// Fused false-alarm probability.
    pub fused_pf: f64,
    /// Fraction of the period left for payload, `1 - (m + N) / T_s`,
    /// computed in exact integer arithmetic before the final division.
    pub overhead_factor: f64,
    /// Normalized throughput `overhead_factor * (1 - fused_pf)`.
    pub throughput: f64,
}

impl ClusterEvaluation {
    /// Detection threshold of the first SU; in homogeneous evaluations every
    /// SU shares this value.
    #[must_use]
    pub fn threshold(&self) -> f64 {
        self.operating_points[0].threshold
    }

    /// False-alarm probability of the first SU; in homogeneous evaluations
    /// every SU shares this value.
    #[must_use]
    pub fn per_su_pf(&self) -> f64 {
        self.operating_points[0].p_false_alarm
    }
}

/// Full sweep over cluster sizes `1..=max_cluster` plus the maximizing row.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    /// One evaluation per cluster size, in increasing `N` order.
    pub rows: Vec<ClusterEvaluation>,
    /// Index into `rows` of the throughput-maximizing cluster size; ties
    /// within `1e-12` break toward the smaller size.
    pub optimal: usize,
}

impl SweepTable {
    /// The throughput-maximizing row.
    #[must_use]
    pub fn optimal_row(&self) -> &ClusterEvaluation {
        &self.rows[self.optimal]
    }
}

/// Throughput differences at or below this are treated as ties, which break
/// toward the smaller cluster size.
const TIE_TOLERANCE: f64 = 1e-12;

/// Evaluates a homogeneous cluster of `n` SUs, all at the scenario's mean
/// SNR.
///
/// The pipeline: split the total detection target into a per-SU target under
/// the scenario's fusion rule, solve each SU's threshold for that target,
/// read off the per-SU false-alarm probability, fuse both probability lists,
/// and apply the overhead factor. Capacity is normalized to 1, so throughput
/// is the payload fraction times the probability of not wasting the period
/// on a false alarm.
///
/// # Errors
///
/// [`Error::InvalidScenario`] if the scenario is invalid or `n` is 0,
/// exceeds `max_cluster`, or leaves no room in the period
/// (`m + n > T_s`). Detector and fusion errors propagate unchanged.
///
/// # Examples
///
/// ```
/// use coopsense::planner::{evaluate_cluster, ScenarioConfig};
/// use coopsense::fusion::FusionRule;
///
/// let scenario = ScenarioConfig {
///     sensing_period: 100,
///     sensing_symbols: 5,
///     total_pd_target: 0.9,
///     mean_snr: 10f64.powf(0.5), // 5 dB
///     rule: FusionRule::Or,
///     max_cluster: 95,
/// };
/// let row = evaluate_cluster(&scenario, 1).unwrap();
/// // A single SU must meet the total target by itself.
/// assert!((row.per_su_pd - 0.9).abs() < 1e-12);
/// assert_eq!(row.overhead_factor, 0.94); // (100 - 5 - 1) / 100, exact
/// ```
pub fn evaluate_cluster(config: &ScenarioConfig, n: u32) -> Result<ClusterEvaluation> {
    config.validate()?;
    if n == 0 || n > config.max_cluster {
        return Err(Error::InvalidScenario(format!(
            "cluster size {n} outside 1..={}",
            config.max_cluster
        )));
    }
    let snrs = vec![config.mean_snr; n as usize];
    evaluate_cluster_heterogeneous(config, &snrs)
}

/// Evaluates a cluster in which each SU has its own SNR.
///
/// Every SU receives the same per-SU detection target (the equal-allocation
/// split of the total target), but solves its own threshold at its own SNR,
/// so the per-SU false-alarm probabilities differ. With all SNRs equal this
/// reduces bitwise to [`evaluate_cluster`]; in fact [`evaluate_cluster`]
/// delegates here.
///
/// The scenario's `mean_snr` and `max_cluster` fields are not consulted: the
/// SU list itself fixes both the SNRs and the cluster size.
///
/// # Errors
///
/// [`Error::InvalidScenario`] if the scenario is invalid, the list is empty,
/// any SNR is not positive and finite, or `m + snrs.len() > T_s`.
pub fn evaluate_cluster_heterogeneous(
    config: &ScenarioConfig,
    snrs: &[f64],
) -> Result<ClusterEvaluation> {
    config.validate()?;
    if snrs.is_empty() {
        return Err(Error::InvalidScenario("cluster must contain at least one SU".into()));
    }
    let n = u32::try_from(snrs.len()).map_err(|_| {
        Error::InvalidScenario(format!("cluster size {} is out of range", snrs.len()))
    })?;
    let budget = u64::from(config.sensing_symbols) + u64::from(n);
    if budget > u64::from(config.sensing_period) {
        return Err(Error::InvalidScenario(format!(
            "sensing_symbols ({}) plus cluster size ({}) exceed the period ({})",
            config.sensing_symbols, n, config.sensing_period
        )));
    }
    for (i, &snr) in snrs.iter().enumerate() {
        if !(snr.is_finite() && snr > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "SU {i} SNR must be a positive finite linear ratio, got {snr}"
            )));
        }
    }

    let per_su_pd = per_su_pd_target(config.rule, config.total_pd_target, n)?;
    let operating_points: Vec<DetectorOperatingPoint> = snrs
        .iter()
        .map(|&snr| {
            let profile = SuProfile::new(snr, config.sensing_symbols)?;
            threshold_for_pd(&profile, per_su_pd)
        })
        .collect::<Result<_>>()?;

    let pds: Vec<f64> = operating_points.iter().map(|op| op.p_detect).collect();
    let pfs: Vec<f64> = operating_points.iter().map(|op| op.p_false_alarm).collect();
    let fused_pd = fuse(config.rule, &pds)?;
    let fused_pf = fuse(config.rule, &pfs)?;

    // Integer subtraction first so the boundary m + N = T_s yields exactly 0.
    let payload_symbols = u64::from(config.sensing_period) - budget;
    let overhead_factor = payload_symbols as f64 / f64::from(config.sensing_period);
    let throughput = overhead_factor * (1.0 - fused_pf);

    Ok(ClusterEvaluation {
        cluster_size: n,
        per_su_pd,
        operating_points,
        fused_pd,
        fused_pf,
        overhead_factor,
        throughput,
    })
}

/// Sweeps cluster sizes `1..=max_cluster` and returns every row plus the
/// throughput-maximizing index.
///
/// The sweep is exhaustive, so the reported optimum is exact for the
/// scenario (no search heuristics). Rows are evaluated in parallel and
/// assembled in increasing `N` order; the argmax scan is sequential and
/// deterministic, breaking ties within `1e-12` toward the smaller cluster.
///
/// # Errors
///
/// Propagates any row's evaluation error; a valid scenario cannot produce an
/// empty sweep.
///
/// # Examples
///
/// ```
/// use coopsense::planner::{optimize_cluster_size, ScenarioConfig};
/// use coopsense::fusion::FusionRule;
///
/// let scenario = ScenarioConfig {
///     sensing_period: 100,
///     sensing_symbols: 5,
///     total_pd_target: 1.0, // forces fused_pf = 1, so every row is 0
///     mean_snr: 1.0,
///     rule: FusionRule::Or,
///     max_cluster: 10,
/// };
/// let table = optimize_cluster_size(&scenario).unwrap();
/// assert_eq!(table.optimal_row().cluster_size, 1); // all tied; smallest wins
/// assert!(table.rows.iter().all(|row| row.throughput == 0.0));
/// ```
pub fn optimize_cluster_size(config: &ScenarioConfig) -> Result<SweepTable> {
    config.validate()?;
    let rows: Vec<ClusterEvaluation> = (1..=config.max_cluster)
        .into_par_iter()
        .map(|n| evaluate_cluster(config, n))
        .collect::<Result<_>>()?;
    let max = rows.iter().map(|row| row.throughput).fold(f64::NEG_INFINITY, f64::max);
    let optimal = rows
        .iter()
        .position(|row| row.throughput >= max - TIE_TOLERANCE)
        .expect("sweep is nonempty by validation");
    Ok(SweepTable { rows, optimal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::FusionRule;

    fn scenario(
        sensing_period: u32,
        sensing_symbols: u32,
        total_pd_target: f64,
        mean_snr: f64,
        rule: FusionRule,
    ) -> ScenarioConfig {
        ScenarioConfig {
            sensing_period,
            sensing_symbols,
            total_pd_target,
            mean_snr,
            rule,
            max_cluster: sensing_period - sensing_symbols,
        }
    }

    const SNR_5DB: f64 = 3.162_277_660_168_379_5; // 10^0.5
    const SNR_M5DB: f64 = 0.316_227_766_016_837_94; // 10^-0.5

    // Frozen from an independent reference route (noncentral chi-square
    // inverse survival function for thresholds, central survival function
    // for false alarms, closed-form fusion).
    const REF_A_LAMBDA: f64 = 26.830_845_002_875_204;
    const REF_A_PF: f64 = 2.769_680_978_991_303_4e-3;
    const REF_A_THROUGHPUT: f64 = 0.937_396_499_879_748;
    const REF_B_PSU: f64 = 0.683_772_233_983_162_1;
    const REF_B_FUSED_PF: f64 = 2.366_941_290_353_086_4e-4;
    const REF_B_THROUGHPUT: f64 = 0.929_779_874_459_997_2;
    const REF_C_PSU: f64 = 0.948_683_298_050_513_8;
    const REF_C_FUSED_PF: f64 = 7.697_330_282_111_715e-5;
    const REF_C_THROUGHPUT: f64 = 0.929_928_414_828_376_4;
    const REF_D_PF0: f64 = 1.183_540_683_604_030_4e-4;
    const REF_D_PF1: f64 = 0.449_146_050_015_175_5;
    const REF_D_FUSED_PF: f64 = 0.449_211_245_821_228_6;
    const REF_E_OR_N: u32 = 3;
    const REF_E_OR_THROUGHPUT: f64 = 0.940_747_817_546_694_1;
    const REF_E_AND_N: u32 = 4;
    const REF_E_AND_THROUGHPUT: f64 = 0.939_966_967_200_593_3;

    #[test]
    fn validation_rejects_bad_scenarios() {
        let good = scenario(100, 5, 0.9, 1.0, FusionRule::Or);
        assert!(good.validate().is_ok());

        let mut s = good.clone();
        s.sensing_symbols = 0;
        assert!(matches!(s.validate(), Err(Error::InvalidScenario(_))));

        let mut s = good.clone();
        s.sensing_symbols = 100;
        assert!(matches!(s.validate(), Err(Error::InvalidScenario(_))));

        let mut s = good.clone();
        s.max_cluster = 0;
        assert!(matches!(s.validate(), Err(Error::InvalidScenario(_))));

        let mut s = good.clone();
        s.max_cluster = 96; // > T_s - m = 95
        assert!(matches!(s.validate(), Err(Error::InvalidScenario(_))));

        for bad_target in [0.0, -0.1, 1.0000000001, f64::NAN] {
            let mut s = good.clone();
            s.total_pd_target = bad_target;
            assert!(matches!(s.validate(), Err(Error::InvalidScenario(_))));
        }

        for bad_snr in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            let mut s = good.clone();
            s.mean_snr = bad_snr;
            assert!(matches!(s.validate(), Err(Error::InvalidScenario(_))));
        }
    }

    #[test]
    fn cluster_size_bounds_are_enforced() {
        let s = scenario(100, 5, 0.9, 1.0, FusionRule::Or);
        assert!(matches!(evaluate_cluster(&s, 0), Err(Error::InvalidScenario(_))));
        assert!(matches!(evaluate_cluster(&s, 96), Err(Error::InvalidScenario(_))));
        assert!(evaluate_cluster(&s, 95).is_ok());

        assert!(matches!(evaluate_cluster_heterogeneous(&s, &[]), Err(Error::InvalidScenario(_))));
        assert!(matches!(
            evaluate_cluster_heterogeneous(&s, &vec![1.0; 96]),
            Err(Error::InvalidScenario(_))
        ));
        assert!(matches!(
            evaluate_cluster_heterogeneous(&s, &[1.0, -2.0]),
            Err(Error::InvalidScenario(_))
        ));
    }

    #[test]
    fn overhead_boundary_gives_exactly_zero_throughput() {
        let s = scenario(100, 5, 0.9, SNR_5DB, FusionRule::Or);
        for rule in FusionRule::ALL {
            let mut s = s.clone();
            s.rule = rule;
            let row = evaluate_cluster(&s, 95).unwrap();
            assert_eq!(row.overhead_factor, 0.0);
            assert_eq!(row.throughput, 0.0);
        }
    }

    #[test]
    fn certain_detection_target_gives_exactly_zero_throughput() {
        for rule in FusionRule::ALL {
            let s = scenario(100, 5, 1.0, SNR_5DB, rule);
            for n in [1, 4, 16] {
                let row = evaluate_cluster(&s, n).unwrap();
                assert_eq!(row.per_su_pd, 1.0);
                assert_eq!(row.threshold(), 0.0);
                assert_eq!(row.per_su_pf(), 1.0);
                assert_eq!(row.fused_pf, 1.0);
                assert_eq!(row.throughput, 0.0);
            }
        }
    }

    #[test]
    fn single_su_or_evaluation_matches_independent_reference() {
        // Frozen from an independent noncentral-chi-square route
        // (isf for the threshold, central sf for the false alarm).
        let s = scenario(100, 5, 0.9, SNR_5DB, FusionRule::Or);
        let row = evaluate_cluster(&s, 1).unwrap();
        assert_eq!(row.overhead_factor, 0.94);
        assert!((row.per_su_pd - 0.9).abs() < 1e-12);
        let tol = 1e-9;
        assert!((row.threshold() - REF_A_LAMBDA).abs() < REF_A_LAMBDA * 1e-8);
        assert!((row.per_su_pf() - REF_A_PF).abs() < tol);
        assert!((row.fused_pd - 0.9).abs() < tol);
        assert!((row.throughput - REF_A_THROUGHPUT).abs() < tol);
    }

    #[test]
    fn two_su_evaluations_match_independent_reference() {
        let s_or = scenario(100, 5, 0.9, SNR_5DB, FusionRule::Or);
        let row = evaluate_cluster(&s_or, 2).unwrap();
        assert!((row.per_su_pd - REF_B_PSU).abs() < 1e-12);
        assert!((row.fused_pf - REF_B_FUSED_PF).abs() < 1e-9);
        assert!((row.fused_pd - 0.9).abs() < 1e-9);
        assert!((row.throughput - REF_B_THROUGHPUT).abs() < 1e-9);

        let s_and = scenario(100, 5, 0.9, SNR_5DB, FusionRule::And);
        let row = evaluate_cluster(&s_and, 2).unwrap();
        assert!((row.per_su_pd - REF_C_PSU).abs() < 1e-12);
        assert!((row.fused_pf - REF_C_FUSED_PF).abs() < 1e-9);
        assert!((row.fused_pd - 0.9).abs() < 1e-9);
        assert!((row.throughput - REF_C_THROUGHPUT).abs() < 1e-9);
    }

    #[test]
    fn heterogeneous_pair_matches_independent_reference() {
        let s = scenario(100, 5, 0.9, 1.0, FusionRule::Or);
        let row = evaluate_cluster_heterogeneous(&s, &[SNR_5DB, SNR_M5DB]).unwrap();
        assert!((row.operating_points[0].p_false_alarm - REF_D_PF0).abs() < 1e-9);
        assert!((row.operating_points[1].p_false_alarm - REF_D_PF1).abs() < 1e-9);
        assert!((row.fused_pf - REF_D_FUSED_PF).abs() < 1e-9);
        // OR fusion of two members is the complement product.
        let direct = 1.0
            - (1.0 - row.operating_points[0].p_false_alarm)
                * (1.0 - row.operating_points[1].p_false_alarm);
        assert!((row.fused_pf - direct).abs() < 1e-14);
        // The stronger SU tolerates a higher threshold at the same pd target.
        assert!(row.operating_points[0].threshold > row.operating_points[1].threshold);
    }

    #[test]
    fn homogeneous_and_heterogeneous_agree_bitwise() {
        for rule in FusionRule::ALL {
            let s = scenario(100, 5, 0.9, SNR_5DB, rule);
            let homo = evaluate_cluster(&s, 3).unwrap();
            let hetero = evaluate_cluster_heterogeneous(&s, &[SNR_5DB; 3]).unwrap();
            assert_eq!(homo, hetero);
        }
    }

    #[test]
    fn fused_pd_meets_target_across_sizes() {
        for rule in FusionRule::ALL {
            for &target in &[0.5, 0.9, 0.99] {
                let s = scenario(100, 5, target, 1.0, rule);
                for n in [1, 2, 5, 20] {
                    let row = evaluate_cluster(&s, n).unwrap();
                    assert!(
                        (row.fused_pd - target).abs() < 1e-9,
                        "rule {rule} target {target} n {n}: fused_pd {}",
                        row.fused_pd
                    );
                }
            }
        }
    }

    #[test]
    fn optimizer_matches_brute_force_rescan() {
        let s = scenario(100, 20, 0.9, 1.0, FusionRule::Or);
        let table = optimize_cluster_size(&s).unwrap();
        assert_eq!(table.rows.len(), 80);
        for (i, row) in table.rows.iter().enumerate() {
            assert_eq!(row.cluster_size as usize, i + 1);
            let again = evaluate_cluster(&s, row.cluster_size).unwrap();
            assert_eq!(*row, again);
        }
        let best = table.rows.iter().map(|r| r.throughput).fold(f64::NEG_INFINITY, f64::max);
        assert!(table.optimal_row().throughput >= best - 1e-12);
        // No earlier row may beat the chosen one beyond the tie window.
        for row in &table.rows[..table.optimal] {
            assert!(row.throughput < best - 1e-12);
        }
    }

    #[test]
    fn certain_target_ties_break_to_smallest_cluster() {
        let s = ScenarioConfig { max_cluster: 10, ..scenario(100, 5, 1.0, 1.0, FusionRule::And) };
        let table = optimize_cluster_size(&s).unwrap();
        assert_eq!(table.optimal, 0);
        assert_eq!(table.optimal_row().cluster_size, 1);
    }

    #[test]
    fn strong_snr_makes_single_su_optimal() {
        // With per-SU false alarm already negligible at N = 1, extra SUs only
        // add overhead, so throughput decreases monotonically.
        for rule in FusionRule::ALL {
            let s = ScenarioConfig { max_cluster: 20, ..scenario(100, 20, 0.9, 10.0, rule) };
            let table = optimize_cluster_size(&s).unwrap();
            assert_eq!(table.optimal_row().cluster_size, 1);
            for pair in table.rows.windows(2) {
                assert!(pair[0].throughput > pair[1].throughput);
            }
        }
    }

    #[test]
    fn optimized_or_beats_and_and_uses_smaller_clusters() {
        // Long-period, strict-target regime where the rule comparison is
        // clean: the OR optimum never needs a larger cluster than the AND
        // optimum and achieves at least the AND throughput.
        for &m in &[25u32, 100] {
            for &db in &[-5.0f64, 0.0, 5.0] {
                let snr = 10f64.powf(db / 10.0);
                let or = optimize_cluster_size(&ScenarioConfig {
                    max_cluster: 500 - m,
                    ..scenario(500, m, 0.99, snr, FusionRule::Or)
                })
                .unwrap();
                let and = optimize_cluster_size(&ScenarioConfig {
                    max_cluster: 500 - m,
                    ..scenario(500, m, 0.99, snr, FusionRule::And)
                })
                .unwrap();
                let (n_or, n_and) = (or.optimal_row().cluster_size, and.optimal_row().cluster_size);
                assert!(n_or <= n_and, "m {m} {db} dB: OR optimum {n_or} > AND optimum {n_and}");
                if n_or > 1 && n_and > 1 {
                    assert!(n_or < n_and, "m {m} {db} dB: expected strict ordering");
                }
                assert!(
                    or.optimal_row().throughput >= and.optimal_row().throughput,
                    "m {m} {db} dB: OR max {} < AND max {}",
                    or.optimal_row().throughput,
                    and.optimal_row().throughput
                );
            }
        }
    }

    #[test]
    fn optimum_cluster_size_shrinks_with_snr() {
        for rule in FusionRule::ALL {
            for &m in &[25u32, 100] {
                let mut last = u32::MAX;
                for &db in &[-5.0f64, 0.0, 5.0, 10.0] {
                    let snr = 10f64.powf(db / 10.0);
                    let table = optimize_cluster_size(&ScenarioConfig {
                        max_cluster: 500 - m,
                        ..scenario(500, m, 0.99, snr, rule)
                    })
                    .unwrap();
                    let n_opt = table.optimal_row().cluster_size;
                    assert!(
                        n_opt <= last,
                        "rule {rule} m {m}: optimum grew from {last} to {n_opt} at {db} dB"
                    );
                    last = n_opt;
                }
            }
        }
    }

    #[test]
    fn optimize_freezes_reference_regime() {
        let or = optimize_cluster_size(&ScenarioConfig {
            max_cluster: 475,
            ..scenario(500, 25, 0.99, 1.0, FusionRule::Or)
        })
        .unwrap();
        assert_eq!(or.optimal_row().cluster_size, REF_E_OR_N);
        assert!((or.optimal_row().throughput - REF_E_OR_THROUGHPUT).abs() < 1e-9);

        let and = optimize_cluster_size(&ScenarioConfig {
            max_cluster: 475,
            ..scenario(500, 25, 0.99, 1.0, FusionRule::And)
        })
        .unwrap();
        assert_eq!(and.optimal_row().cluster_size, REF_E_AND_N);
        assert!((and.optimal_row().throughput - REF_E_AND_THROUGHPUT).abs() < 1e-9);
    }
}
