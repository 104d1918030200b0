//! Seeded Monte Carlo simulation of the energy detector and decision fusion.
//!
//! Every analytic probability in this crate has a simulation counterpart
//! here: draw the energy statistic per SU, compare against the threshold,
//! fuse the binary decisions, and count. Estimates carry a binomial
//! three-sigma half-width so agreement with the closed forms can be asserted
//! quantitatively (see the `validation` module for the full grid driver).
//!
//! # Determinism
//!
//! Reproducibility is part of the contract: identical `(seed, scenario)`
//! inputs give bit-identical estimates, regardless of thread count. Each
//! `(SU, hypothesis, trial)` triple gets its own ChaCha stream — the seed and
//! SU index are packed into the cipher key, the trial index selects the
//! stream — so trials can be partitioned across workers in any order without
//! changing what any single trial draws, and counting is associative.

use crate::detector::SuProfile;
use crate::error::{Error, Result};
use crate::fusion::FusionRule;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Channel occupancy hypothesis under which statistics are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    /// Primary user absent: the received samples are pure noise.
    H0,
    /// Primary user present: samples carry the deterministic signal offset.
    H1,
}

impl Hypothesis {
    /// Stable byte tag used in stream derivation; part of the determinism
    /// contract.
    fn tag(self) -> u8 {
        match self {
            Hypothesis::H0 => 0,
            Hypothesis::H1 => 1,
        }
    }
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Hypothesis::H0 => "h0",
            Hypothesis::H1 => "h1",
        })
    }
}

/// Monte Carlo run parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McConfig {
    /// Number of independent trials; at least 1.
    pub trials: u64,
    /// Master seed; all per-trial streams derive from it deterministically.
    pub seed: u64,
    /// Hypothesis under which every statistic is drawn.
    pub hypothesis: Hypothesis,
}

impl McConfig {
    /// Checks the configuration invariants.
    ///
    /// # Errors
    ///
    /// [`Error::Domain`] if `trials` is zero.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Domain("trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// A binomial probability estimate with its uncertainty.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    /// Fraction of trials in which the event occurred.
    pub estimate: f64,
    /// Number of trials behind the estimate.
    pub trials: u64,
    /// Three-sigma half-width under the binomial normal approximation,
    /// `3 * sqrt(p (1 - p) / trials)`; zero at the degenerate boundaries.
    pub half_width_3sigma: f64,
    /// The master seed that produced the estimate, for reproducibility.
    pub seed: u64,
}

impl McEstimate {
    fn from_counts(hits: u64, trials: u64, seed: u64) -> Self {
        debug_assert!(trials >= 1 && hits <= trials);
        let estimate = hits as f64 / trials as f64;
        let half_width_3sigma = 3.0 * (estimate * (1.0 - estimate) / trials as f64).sqrt();
        McEstimate { estimate, trials, half_width_3sigma, seed }
    }
}

/// Dedicated random stream for one `(seed, SU, hypothesis, trial)`
/// coordinate. The first thirteen key bytes carry the coordinates (seed and
/// SU index little-endian, then the hypothesis tag); the trial index selects
/// the cipher stream, so no two coordinates ever share output.
pub(crate) fn stream_rng(
    seed: u64,
    su_index: u32,
    hypothesis: Hypothesis,
    trial: u64,
) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..12].copy_from_slice(&su_index.to_le_bytes());
    key[12] = hypothesis.tag();
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}

/// Draws one energy statistic; the profile must already be validated.
pub(crate) fn draw_statistic<R: Rng>(
    profile: &SuProfile,
    hypothesis: Hypothesis,
    rng: &mut R,
) -> f64 {
    // The statistic's distribution depends on the signal only through its
    // total energy, so a constant real per-sample offset of sqrt(2 snr)
    // stands in for any signal shape (circular noise is rotation-invariant).
    let offset = match hypothesis {
        Hypothesis::H0 => 0.0,
        Hypothesis::H1 => (2.0 * profile.snr).sqrt(),
    };
    let mut energy = 0.0;
    for _ in 0..profile.sensing_symbols {
        let re: f64 = offset + rng.sample::<f64, _>(StandardNormal);
        let im: f64 = rng.sample::<f64, _>(StandardNormal);
        energy += re * re + im * im;
    }
    energy
}

/// Draws one energy-detection statistic `S = sum |r_k|^2` over the profile's
/// sensing window from the supplied random stream.
///
/// Noise real and imaginary parts are i.i.d. standard normal per sample, so
/// `S` is chi-square with `2 m` degrees of freedom under [`Hypothesis::H0`]
/// and noncentral chi-square with noncentrality `2 m snr` under
/// [`Hypothesis::H1`] — exactly the distributions the analytic detector
/// evaluates.
///
/// # Errors
///
/// [`Error::Domain`] if the profile is invalid.
///
/// # Examples
///
/// ```
/// use coopsense::detector::SuProfile;
/// use coopsense::mcsim::{simulate_statistic, Hypothesis};
/// use rand::SeedableRng;
///
/// let profile = SuProfile::new(1.0, 5).unwrap();
/// let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
/// let s = simulate_statistic(&profile, Hypothesis::H0, &mut rng).unwrap();
/// assert!(s >= 0.0);
/// ```
pub fn simulate_statistic<R: Rng>(
    profile: &SuProfile,
    hypothesis: Hypothesis,
    rng: &mut R,
) -> Result<f64> {
    profile.validate()?;
    Ok(draw_statistic(profile, hypothesis, rng))
}

fn check_threshold(lambda: f64) -> Result<()> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::Domain(format!(
            "threshold must be finite and nonnegative, got {lambda}"
        )));
    }
    Ok(())
}

/// Estimates a single SU's detection probability (under [`Hypothesis::H1`])
/// or false-alarm probability (under [`Hypothesis::H0`]) at threshold
/// `lambda`.
///
/// This is the simulation counterpart of the analytic
/// [`pd_for_threshold`](crate::detector::pd_for_threshold) /
/// [`pf_for_threshold`](crate::detector::pf_for_threshold) pair; the two
/// routes agree within [`McEstimate::half_width_3sigma`] across the
/// validation grid.
///
/// # Errors
///
/// [`Error::Domain`] on an invalid profile, a negative or non-finite
/// threshold, or zero trials.
///
/// # Examples
///
/// ```
/// use coopsense::detector::SuProfile;
/// use coopsense::mcsim::{estimate_su_probs, Hypothesis, McConfig};
///
/// let profile = SuProfile::new(1.0, 5).unwrap();
/// let mc = McConfig { trials: 10_000, seed: 42, hypothesis: Hypothesis::H0 };
/// // Threshold zero: every statistic exceeds it, so the estimate is exact.
/// let est = estimate_su_probs(&profile, 0.0, &mc).unwrap();
/// assert_eq!(est.estimate, 1.0);
/// assert_eq!(est.half_width_3sigma, 0.0);
/// ```
pub fn estimate_su_probs(profile: &SuProfile, lambda: f64, mc: &McConfig) -> Result<McEstimate> {
    profile.validate()?;
    check_threshold(lambda)?;
    mc.validate()?;
    let hits: u64 = (0..mc.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream_rng(mc.seed, 0, mc.hypothesis, trial);
            u64::from(draw_statistic(profile, mc.hypothesis, &mut rng) > lambda)
        })
        .sum();
    Ok(McEstimate::from_counts(hits, mc.trials, mc.seed))
}

/// Estimates a cluster's fused detection probability (under
/// [`Hypothesis::H1`]) or fused false-alarm probability (under
/// [`Hypothesis::H0`]).
///
/// Per trial, each SU draws its own statistic from its own stream, makes a
/// binary decision against its own threshold, and the decisions are fused
/// under `rule`; the estimate counts fused positives. Because every SU draws
/// independently, agreement with the product-form analytic fusion validates
/// the independence assumption those forms are built on.
///
/// SU `i` here uses the same stream family as [`estimate_su_probs`] uses for
/// its single SU when `i = 0`, so a one-SU cluster reproduces the single-SU
/// estimate bit for bit.
///
/// # Errors
///
/// [`Error::Domain`] if the lists are empty or of different lengths, or on
/// any invalid profile, threshold, or config.
///
/// # Examples
///
/// ```
/// use coopsense::detector::SuProfile;
/// use coopsense::fusion::FusionRule;
/// use coopsense::mcsim::{estimate_fused_probs, Hypothesis, McConfig};
///
/// let su = SuProfile::new(1.0, 5).unwrap();
/// let mc = McConfig { trials: 10_000, seed: 42, hypothesis: Hypothesis::H1 };
/// let est = estimate_fused_probs(&[su, su], &[15.0, 15.0], FusionRule::Or, &mc).unwrap();
/// assert!(est.estimate > 0.0 && est.estimate <= 1.0);
/// ```
pub fn estimate_fused_probs(
    profiles: &[SuProfile],
    lambdas: &[f64],
    rule: FusionRule,
    mc: &McConfig,
) -> Result<McEstimate> {
    if profiles.is_empty() {
        return Err(Error::Domain("cluster must contain at least one SU".into()));
    }
    if profiles.len() != lambdas.len() {
        return Err(Error::Domain(format!(
            "got {} profiles but {} thresholds",
            profiles.len(),
            lambdas.len()
        )));
    }
    u32::try_from(profiles.len())
        .map_err(|_| Error::Domain(format!("cluster size {} is out of range", profiles.len())))?;
    for profile in profiles {
        profile.validate()?;
    }
    for &lambda in lambdas {
        check_threshold(lambda)?;
    }
    mc.validate()?;

    let hits: u64 = (0..mc.trials)
        .into_par_iter()
        .map(|trial| {
            let mut fused = matches!(rule, FusionRule::And);
            for (i, (profile, &lambda)) in profiles.iter().zip(lambdas).enumerate() {
                let mut rng = stream_rng(mc.seed, i as u32, mc.hypothesis, trial);
                let vote = draw_statistic(profile, mc.hypothesis, &mut rng) > lambda;
                // Every SU draws regardless of the running outcome: the
                // decision logic must not change how many variates any
                // stream consumes.
                fused = match rule {
                    FusionRule::Or => fused || vote,
                    FusionRule::And => fused && vote,
                };
            }
            u64::from(fused)
        })
        .sum();
    Ok(McEstimate::from_counts(hits, mc.trials, mc.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::{pd_for_threshold, pf_for_threshold, threshold_for_pd};
    use crate::fusion::fuse;

    const TRIALS: u64 = 1_000_000;

    fn mc(seed: u64, hypothesis: Hypothesis) -> McConfig {
        McConfig { trials: TRIALS, seed, hypothesis }
    }

    /// Sample mean of the statistic over the dedicated stream family.
    fn statistic_mean(profile: &SuProfile, hypothesis: Hypothesis, seed: u64) -> f64 {
        let total: f64 = (0..TRIALS)
            .into_par_iter()
            .map(|trial| {
                let mut rng = stream_rng(seed, 0, hypothesis, trial);
                draw_statistic(profile, hypothesis, &mut rng)
            })
            .sum();
        total / TRIALS as f64
    }

    #[test]
    fn config_rejects_zero_trials() {
        let bad = McConfig { trials: 0, seed: 1, hypothesis: Hypothesis::H0 };
        assert!(matches!(bad.validate(), Err(Error::Domain(_))));
        let profile = SuProfile::new(1.0, 5).unwrap();
        assert!(estimate_su_probs(&profile, 1.0, &bad).is_err());
    }

    #[test]
    fn noise_only_statistic_has_chi_square_mean() {
        let profile = SuProfile::new(1.0, 5).unwrap();
        let mean = statistic_mean(&profile, Hypothesis::H0, 11);
        assert!((mean - 10.0).abs() < 0.04, "H0 mean {mean}");
    }

    #[test]
    fn signal_statistic_has_noncentral_mean() {
        let profile = SuProfile::new(1.0, 5).unwrap();
        let mean = statistic_mean(&profile, Hypothesis::H1, 11);
        assert!((mean - 20.0).abs() < 0.06, "H1 mean {mean}");
    }

    #[test]
    fn single_sample_median_sits_at_two_ln_two() {
        // For m = 1 the statistic is exponential with mean 2, so its median
        // is 2 ln 2 and the exceedance probability there is exactly 1/2.
        let profile = SuProfile::new(1.0, 1).unwrap();
        let est =
            estimate_su_probs(&profile, 2.0 * std::f64::consts::LN_2, &mc(13, Hypothesis::H0))
                .unwrap();
        assert!((est.estimate - 0.5).abs() < 0.0015, "got {}", est.estimate);
    }

    #[test]
    fn zero_threshold_estimate_is_exactly_one() {
        let profile = SuProfile::new(1.0, 5).unwrap();
        for hypothesis in [Hypothesis::H0, Hypothesis::H1] {
            let est =
                estimate_su_probs(&profile, 0.0, &McConfig { trials: 1000, seed: 3, hypothesis })
                    .unwrap();
            assert_eq!(est.estimate, 1.0);
            assert_eq!(est.half_width_3sigma, 0.0);
        }
    }

    #[test]
    fn estimates_are_deterministic_in_the_seed() {
        let profile = SuProfile::new(1.0, 5).unwrap();
        let a = estimate_su_probs(&profile, 12.0, &mc(99, Hypothesis::H1)).unwrap();
        let b = estimate_su_probs(&profile, 12.0, &mc(99, Hypothesis::H1)).unwrap();
        assert_eq!(a, b);
        let c = estimate_su_probs(&profile, 12.0, &mc(100, Hypothesis::H1)).unwrap();
        assert_ne!(a.estimate, c.estimate);
    }

    #[test]
    fn detection_round_trip_hits_the_target() {
        let profile = SuProfile::new(1.0, 5).unwrap();
        let op = threshold_for_pd(&profile, 0.9).unwrap();
        let est = estimate_su_probs(&profile, op.threshold, &mc(21, Hypothesis::H1)).unwrap();
        assert!(
            (est.estimate - 0.9).abs() <= est.half_width_3sigma,
            "estimate {} +/- {}",
            est.estimate,
            est.half_width_3sigma
        );
    }

    #[test]
    fn false_alarm_matches_analytic_tail() {
        let profile = SuProfile::new(1.0, 5).unwrap();
        let analytic = pf_for_threshold(&profile, 15.0).unwrap();
        let est = estimate_su_probs(&profile, 15.0, &mc(23, Hypothesis::H0)).unwrap();
        assert!(
            (est.estimate - analytic).abs() <= est.half_width_3sigma,
            "estimate {} vs analytic {analytic}",
            est.estimate
        );
    }

    #[test]
    fn half_width_formula_is_binomial() {
        let est = McEstimate::from_counts(250_000, 1_000_000, 5);
        assert_eq!(est.estimate, 0.25);
        let expected = 3.0 * (0.25f64 * 0.75 / 1e6).sqrt();
        assert!((est.half_width_3sigma - expected).abs() < 1e-18);
    }

    #[test]
    fn one_su_cluster_reproduces_single_su_estimate() {
        let profile = SuProfile::new(1.0, 5).unwrap();
        for hypothesis in [Hypothesis::H0, Hypothesis::H1] {
            let config = mc(31, hypothesis);
            let single = estimate_su_probs(&profile, 11.0, &config).unwrap();
            for rule in FusionRule::ALL {
                let fusedest = estimate_fused_probs(&[profile], &[11.0], rule, &config).unwrap();
                assert_eq!(single, fusedest);
            }
        }
    }

    #[test]
    fn fused_or_matches_product_form() {
        let profile = SuProfile::new(1.0, 5).unwrap();
        let pf = pf_for_threshold(&profile, 14.0).unwrap();
        let analytic = fuse(FusionRule::Or, &[pf; 3]).unwrap();
        let est = estimate_fused_probs(
            &[profile; 3],
            &[14.0; 3],
            FusionRule::Or,
            &mc(37, Hypothesis::H0),
        )
        .unwrap();
        assert!(
            (est.estimate - analytic).abs() <= est.half_width_3sigma,
            "estimate {} vs analytic {analytic}",
            est.estimate
        );
    }

    #[test]
    fn heterogeneous_and_fusion_matches_product_form() {
        let strong = SuProfile::new(3.162_277_660_168_379_5, 5).unwrap(); // 5 dB
        let weak = SuProfile::new(0.316_227_766_016_837_94, 5).unwrap(); // -5 dB
        let lambdas = [16.0, 9.0];
        let pd_strong = pd_for_threshold(&strong, lambdas[0]).unwrap();
        let pd_weak = pd_for_threshold(&weak, lambdas[1]).unwrap();
        let analytic = pd_strong * pd_weak;
        let est = estimate_fused_probs(
            &[strong, weak],
            &lambdas,
            FusionRule::And,
            &mc(41, Hypothesis::H1),
        )
        .unwrap();
        assert!(
            (est.estimate - analytic).abs() <= est.half_width_3sigma,
            "estimate {} vs analytic {analytic}",
            est.estimate
        );
    }

    #[test]
    fn fused_input_validation() {
        let profile = SuProfile::new(1.0, 5).unwrap();
        let config = mc(1, Hypothesis::H0);
        assert!(matches!(
            estimate_fused_probs(&[], &[], FusionRule::Or, &config),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            estimate_fused_probs(&[profile], &[1.0, 2.0], FusionRule::Or, &config),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            estimate_fused_probs(&[profile], &[-1.0], FusionRule::Or, &config),
            Err(Error::Domain(_))
        ));
        assert!(matches!(estimate_su_probs(&profile, f64::NAN, &config), Err(Error::Domain(_))));
    }
}
