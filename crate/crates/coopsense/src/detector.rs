//! Per-SU energy detection: mapping a sensing configuration and a decision
//! threshold to detection / false-alarm probabilities, and solving for the
//! threshold that meets a detection target.
//!
//! The detector integrates `m` complex samples and compares the accumulated
//! energy `S = sum |r_k|^2` against a threshold `lambda`. Under the crate's
//! normalization — noise with unit variance per real dimension and a signal
//! whose total energy is `2 m gamma` — the statistic is exactly chi-square
//! with `2m` degrees of freedom when the band is free, and noncentral
//! chi-square with noncentrality `2 m gamma` when it is occupied:
//!
//! ```text
//! P_d(lambda) = Q_m(sqrt(2 m gamma), sqrt(lambda))
//! P_f(lambda) = Q(m, lambda / 2)            (upper regularized gamma)
//! ```
//!
//! SNR values here are linear power ratios; decibel conversion belongs to
//! the configuration boundary, not the math core.

use crate::error::{Error, Result};
use crate::specfun::{Tolerance, inv_marcum_q_b, marcum_q, reg_upper_gamma};

/// Sensing configuration of one secondary user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuProfile {
    /// Received SNR as a linear power ratio (not dB); must be positive.
    pub snr: f64,
    /// Number of symbols spent sensing (`m`); identical for every member of
    /// a cluster, as unequal sensing times only worsen the slowest member.
    pub sensing_symbols: u32,
}

impl SuProfile {
    /// Builds a profile, rejecting non-positive SNR or zero sensing time.
    ///
    /// # Errors
    ///
    /// [`Error::Domain`] when a field is out of range.
    pub fn new(snr: f64, sensing_symbols: u32) -> Result<Self> {
        let profile = SuProfile { snr, sensing_symbols };
        profile.validate()?;
        Ok(profile)
    }

    /// Checks the field invariants (`snr > 0` finite, `sensing_symbols >= 1`).
    ///
    /// # Errors
    ///
    /// [`Error::Domain`] when a field is out of range.
    pub fn validate(&self) -> Result<()> {
        if !(self.snr.is_finite() && self.snr > 0.0) {
            return Err(Error::Domain(format!(
                "SuProfile.snr must be a positive finite linear ratio, got {}",
                self.snr
            )));
        }
        if self.sensing_symbols < 1 {
            return Err(Error::Domain("SuProfile.sensing_symbols must be at least 1".into()));
        }
        Ok(())
    }

    /// Noncentrality amplitude `sqrt(2 m gamma)` of the occupied-band
    /// statistic; the first Marcum argument in the detection probability.
    fn noncentral_amplitude(&self) -> f64 {
        (2.0 * f64::from(self.sensing_symbols) * self.snr).sqrt()
    }
}

/// One point on a detector's receiver operating characteristic: the
/// threshold together with the probabilities it induces.
///
/// For any positive SNR, `p_false_alarm <= p_detect`, and the zero threshold
/// is the degenerate corner where both probabilities are one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorOperatingPoint {
    /// Decision threshold `lambda` in units of the energy statistic.
    pub threshold: f64,
    /// Probability of detection at this threshold.
    pub p_detect: f64,
    /// Probability of false alarm at this threshold.
    pub p_false_alarm: f64,
}

/// Probability of detection at threshold `lambda`:
/// `Q_m(sqrt(2 m gamma), sqrt(lambda))`. Strictly decreasing in `lambda`.
///
/// # Errors
///
/// [`Error::Domain`] on an invalid profile or negative/non-finite `lambda`.
///
/// # Examples
///
/// ```
/// use coopsense::detector::{SuProfile, pd_for_threshold};
///
/// let su = SuProfile::new(1.0, 5).unwrap();
/// // A zero threshold always trips the detector.
/// assert_eq!(pd_for_threshold(&su, 0.0).unwrap(), 1.0);
/// ```
pub fn pd_for_threshold(profile: &SuProfile, lambda: f64) -> Result<f64> {
    profile.validate()?;
    check_threshold(lambda)?;
    marcum_q(profile.sensing_symbols, profile.noncentral_amplitude(), lambda.sqrt())
}

/// Probability of false alarm at threshold `lambda`: the central chi-square
/// tail `Q(m, lambda / 2)`, i.e. `1 - P(m, lambda / 2)`. Strictly decreasing
/// in `lambda` and independent of the SNR.
///
/// # Errors
///
/// [`Error::Domain`] on an invalid profile or negative/non-finite `lambda`.
///
/// # Examples
///
/// ```
/// use coopsense::detector::{SuProfile, pf_for_threshold};
///
/// let su = SuProfile::new(1.0, 1).unwrap();
/// // With m = 1 the false-alarm probability is exp(-lambda / 2).
/// let pf = pf_for_threshold(&su, 2.0 * std::f64::consts::LN_2).unwrap();
/// assert!((pf - 0.5).abs() < 1e-12);
/// ```
pub fn pf_for_threshold(profile: &SuProfile, lambda: f64) -> Result<f64> {
    profile.validate()?;
    check_threshold(lambda)?;
    reg_upper_gamma(f64::from(profile.sensing_symbols), 0.5 * lambda)
}

/// Solves for the operating point that meets a per-SU detection target:
/// the threshold `lambda` with `pd_for_threshold(lambda) = target_pd`,
/// packaged with the false-alarm probability it induces.
///
/// The target `1` is the exact boundary `lambda = 0` (and therefore
/// `p_false_alarm = 1`); it is returned directly instead of degrading the
/// root finder at the edge of the support.
///
/// # Errors
///
/// [`Error::Domain`] on an invalid profile or `target_pd` outside `(0, 1]`;
/// [`Error::Convergence`] propagated from the inverse solve.
///
/// # Examples
///
/// ```
/// use coopsense::detector::{SuProfile, pd_for_threshold, threshold_for_pd};
///
/// let su = SuProfile::new(1.0, 5).unwrap();
/// let op = threshold_for_pd(&su, 0.9).unwrap();
/// let pd = pd_for_threshold(&su, op.threshold).unwrap();
/// assert!((pd - 0.9).abs() < 1e-8);
/// assert!(op.p_false_alarm < 0.9);
/// ```
pub fn threshold_for_pd(profile: &SuProfile, target_pd: f64) -> Result<DetectorOperatingPoint> {
    profile.validate()?;
    if !(target_pd > 0.0 && target_pd <= 1.0) {
        return Err(Error::Domain(format!(
            "threshold_for_pd requires 0 < target_pd <= 1, got {target_pd}"
        )));
    }
    if target_pd == 1.0 {
        return Ok(DetectorOperatingPoint { threshold: 0.0, p_detect: 1.0, p_false_alarm: 1.0 });
    }
    let b = inv_marcum_q_b(
        profile.sensing_symbols,
        profile.noncentral_amplitude(),
        target_pd,
        Tolerance::default(),
    )?;
    let lambda = b * b;
    Ok(DetectorOperatingPoint {
        threshold: lambda,
        p_detect: target_pd,
        p_false_alarm: pf_for_threshold(profile, lambda)?,
    })
}

fn check_threshold(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::Domain(format!(
            "threshold must be finite and nonnegative, got {lambda}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY_SNR: f64 = 1e-12;

    #[test]
    fn profile_validation() {
        assert!(SuProfile::new(1.0, 5).is_ok());
        assert!(matches!(SuProfile::new(0.0, 5), Err(Error::Domain(_))));
        assert!(matches!(SuProfile::new(-1.0, 5), Err(Error::Domain(_))));
        assert!(matches!(SuProfile::new(f64::NAN, 5), Err(Error::Domain(_))));
        assert!(matches!(SuProfile::new(1.0, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_threshold_is_the_all_one_corner() {
        let su = SuProfile::new(3.0, 1).unwrap();
        assert_eq!(pd_for_threshold(&su, 0.0).unwrap(), 1.0);
        assert_eq!(pf_for_threshold(&su, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn vanishing_snr_makes_detection_meet_false_alarm() {
        // As gamma -> 0 the occupied and free distributions coincide, so at
        // lambda = 2 ln 2 (m = 1) both probabilities approach one half.
        let su = SuProfile::new(TINY_SNR, 1).unwrap();
        let lambda = 2.0 * std::f64::consts::LN_2;
        let pd = pd_for_threshold(&su, lambda).unwrap();
        let pf = pf_for_threshold(&su, lambda).unwrap();
        assert!((pd - 0.5).abs() < 1e-9);
        assert!((pf - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pd_matches_frozen_noncentral_reference() {
        // 40-digit reference: the noncentral chi-square survival function
        // with df = 10 and noncentrality 10 at 15 is 0.7187268531350914436...
        let su = SuProfile::new(1.0, 5).unwrap();
        let pd = pd_for_threshold(&su, 15.0).unwrap();
        assert!((pd / 0.718_726_853_135_091_4 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pf_matches_frozen_gamma_reference() {
        // 40-digit reference: 1 - P(5, 7.5) = 0.1320618562877206078281...
        let su = SuProfile::new(1.0, 5).unwrap();
        let pf = pf_for_threshold(&su, 15.0).unwrap();
        assert!((pf / 0.132_061_856_287_720_6 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn threshold_for_pd_round_trips() {
        let su = SuProfile::new(1.0, 5).unwrap();
        let op = threshold_for_pd(&su, 0.9).unwrap();
        assert_eq!(op.p_detect, 0.9);
        let pd = pd_for_threshold(&su, op.threshold).unwrap();
        assert!((pd - 0.9).abs() < 1e-8);
        let pf = pf_for_threshold(&su, op.threshold).unwrap();
        assert_eq!(op.p_false_alarm, pf);
    }

    #[test]
    fn threshold_for_pd_boundary_and_domains() {
        let su = SuProfile::new(2.0, 4).unwrap();
        let op = threshold_for_pd(&su, 1.0).unwrap();
        assert_eq!(op.threshold, 0.0);
        assert_eq!(op.p_detect, 1.0);
        assert_eq!(op.p_false_alarm, 1.0);
        assert!(matches!(threshold_for_pd(&su, 0.0), Err(Error::Domain(_))));
        assert!(matches!(threshold_for_pd(&su, 1.1), Err(Error::Domain(_))));
        assert!(matches!(threshold_for_pd(&su, f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(pd_for_threshold(&su, -1.0), Err(Error::Domain(_))));
        assert!(matches!(pf_for_threshold(&su, f64::INFINITY), Err(Error::Domain(_))));
    }

    #[test]
    fn central_limit_threshold() {
        // m = 1, gamma -> 0+: the 0.5-detection threshold approaches the
        // central value 2 ln 2.
        let su = SuProfile::new(TINY_SNR, 1).unwrap();
        let op = threshold_for_pd(&su, 0.5).unwrap();
        assert!((op.threshold - 2.0 * std::f64::consts::LN_2).abs() < 1e-8);
    }

    #[test]
    fn roc_dominance_and_monotone_sweep() {
        let su = SuProfile::new(10f64.powf(0.5), 8).unwrap();
        let mut prev = (1.0, 1.0);
        for lambda in [0.5, 2.0, 5.0, 10.0, 20.0, 40.0, 80.0] {
            let pd = pd_for_threshold(&su, lambda).unwrap();
            let pf = pf_for_threshold(&su, lambda).unwrap();
            // Detection dominates false alarm at any shared threshold.
            assert!(pd >= pf);
            // Raising lambda moves monotonically toward (0, 0).
            assert!(pd <= prev.0 && pf <= prev.1);
            prev = (pd, pf);
        }
    }

    #[test]
    fn pd_nondecreasing_in_snr() {
        let lambda = 12.0;
        let mut prev = 0.0;
        for snr_db in [-10.0, -5.0, 0.0, 5.0, 10.0] {
            let su = SuProfile::new(10f64.powf(snr_db / 10.0), 4).unwrap();
            let pd = pd_for_threshold(&su, lambda).unwrap();
            assert!(pd >= prev);
            prev = pd;
        }
    }

    #[test]
    fn more_sensing_time_never_hurts_false_alarm() {
        // At a fixed detection target and SNR, the induced false-alarm
        // probability is nonincreasing in the sensing time.
        for target in [0.9, 0.99] {
            for snr in [0.316227766016838, 1.0, 3.16227766016838] {
                let mut prev = 1.0;
                for m in [1u32, 2, 5, 10, 20, 50, 100, 200] {
                    let su = SuProfile::new(snr, m).unwrap();
                    let pf = threshold_for_pd(&su, target).unwrap().p_false_alarm;
                    assert!(
                        pf <= prev + 1e-12,
                        "P_f increased with m at target {target}, snr {snr}, m {m}"
                    );
                    prev = pf;
                }
            }
        }
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn roc_dominance(snr in 0.01f64..20.0, m in 1u32..=64, lambda in 0.0f64..200.0) {
            let su = SuProfile::new(snr, m).unwrap();
            let pd = pd_for_threshold(&su, lambda).unwrap();
            let pf = pf_for_threshold(&su, lambda).unwrap();
            prop_assert!(pd >= pf - 1e-14);
        }

        #[test]
        fn threshold_solve_round_trips(snr in 0.05f64..15.0, m in 1u32..=32, target in 0.01f64..0.999) {
            let su = SuProfile::new(snr, m).unwrap();
            let op = threshold_for_pd(&su, target).unwrap();
            let pd = pd_for_threshold(&su, op.threshold).unwrap();
            prop_assert!((pd - target).abs() < 1e-8);
        }
    }
}
