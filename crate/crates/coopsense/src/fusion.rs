//! Hard-decision fusion: combining per-SU binary sensing decisions under the
//! OR and AND rules, and the inverse map from a cluster-wide detection
//! target to the equal per-SU target that meets it.
//!
//! With independent decisions the fused probabilities are products:
//!
//! ```text
//! OR :  P_tot = 1 - prod(1 - p_i)     (any member trips the cluster)
//! AND:  P_tot = prod(p_i)             (all members must trip)
//! ```
//!
//! The same algebra applies to detection and false-alarm probabilities. The
//! OR form is evaluated through `log1p`/`expm1` so that fusing many tiny
//! probabilities keeps full relative accuracy.

use crate::error::{Error, Result};

/// Decision-combining rule used by the cluster head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FusionRule {
    /// The cluster declares the band occupied if *any* member does.
    Or,
    /// The cluster declares the band occupied only if *all* members do.
    And,
}

impl FusionRule {
    /// Both rules, in the fixed order used for reports and CSV output.
    pub const ALL: [FusionRule; 2] = [FusionRule::And, FusionRule::Or];

    /// Lowercase name used in CSV columns and config values.
    pub fn name(self) -> &'static str {
        match self {
            FusionRule::Or => "or",
            FusionRule::And => "and",
        }
    }
}

impl std::fmt::Display for FusionRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FusionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "or" => Ok(FusionRule::Or),
            "and" => Ok(FusionRule::And),
            other => Err(Error::Domain(format!(
                "unknown fusion rule `{other}` (expected `or` or `and`)"
            ))),
        }
    }
}

/// Cluster-level probabilities after fusing `cluster_size` per-SU decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusedProbabilities {
    /// Total probability of detection `P_d_tot`.
    pub p_detect_total: f64,
    /// Total probability of false alarm `P_f_tot`.
    pub p_false_alarm_total: f64,
    /// Number of fused decisions `N`.
    pub cluster_size: u32,
}

impl FusedProbabilities {
    /// Fuses matched per-SU detection and false-alarm lists under one rule.
    ///
    /// # Errors
    ///
    /// [`Error::Domain`] if the lists are empty, of different lengths, or
    /// contain values outside `[0, 1]`.
    pub fn from_per_su(rule: FusionRule, per_su_pd: &[f64], per_su_pf: &[f64]) -> Result<Self> {
        if per_su_pd.len() != per_su_pf.len() {
            return Err(Error::Domain(format!(
                "per-SU probability lists must have equal length, got {} and {}",
                per_su_pd.len(),
                per_su_pf.len()
            )));
        }
        Ok(FusedProbabilities {
            p_detect_total: fuse(rule, per_su_pd)?,
            p_false_alarm_total: fuse(rule, per_su_pf)?,
            cluster_size: per_su_pd.len() as u32,
        })
    }
}

/// Fuses a list of per-SU probabilities under the given rule.
///
/// Applies identically to detection and false-alarm lists; heterogeneous
/// values are allowed.
///
/// # Errors
///
/// [`Error::Domain`] on an empty list or an element outside `[0, 1]`.
///
/// # Examples
///
/// ```
/// use coopsense::fusion::{FusionRule, fuse};
///
/// let or = fuse(FusionRule::Or, &[0.1, 0.2]).unwrap();
/// assert!((or - 0.28).abs() < 1e-15); // 1 - 0.9 * 0.8
///
/// let and = fuse(FusionRule::And, &[0.9, 0.9]).unwrap();
/// assert!((and - 0.81).abs() < 1e-15);
/// ```
pub fn fuse(rule: FusionRule, per_su_probs: &[f64]) -> Result<f64> {
    if per_su_probs.is_empty() {
        return Err(Error::Domain("fuse requires at least one per-SU probability".into()));
    }
    for &p in per_su_probs {
        if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
            return Err(Error::Domain(format!("per-SU probability out of range [0, 1]: {p}")));
        }
    }
    let fused = match rule {
        // 1 - prod(1 - p_i), accumulated in log space: exact for p_i = 1
        // (log1p(-1) = -inf) and fully accurate for tiny p_i.
        FusionRule::Or => -per_su_probs.iter().map(|&p| (-p).ln_1p()).sum::<f64>().exp_m1(),
        FusionRule::And => per_su_probs.iter().product(),
    };
    Ok(fused.clamp(0.0, 1.0))
}

/// The equal per-SU detection target that makes `n` fused decisions meet a
/// cluster-wide target: `1 - (1 - p)^(1/n)` under OR, `p^(1/n)` under AND.
///
/// Fusing `n` copies of the result reproduces the total within 1e-12; the
/// boundary target `1` maps to a per-SU target of `1` under both rules.
///
/// # Errors
///
/// [`Error::Domain`] on `n = 0` or a target outside `(0, 1]`.
///
/// # Examples
///
/// ```
/// use coopsense::fusion::{FusionRule, per_su_pd_target};
///
/// let or = per_su_pd_target(FusionRule::Or, 0.99, 2).unwrap();
/// assert!((or - 0.9).abs() < 1e-12); // 1 - sqrt(0.01)
///
/// let and = per_su_pd_target(FusionRule::And, 0.81, 2).unwrap();
/// assert!((and - 0.9).abs() < 1e-12);
/// ```
pub fn per_su_pd_target(rule: FusionRule, total_pd_target: f64, n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("per_su_pd_target requires cluster size n >= 1".into()));
    }
    if !(total_pd_target > 0.0 && total_pd_target <= 1.0) {
        return Err(Error::Domain(format!(
            "per_su_pd_target requires 0 < total_pd_target <= 1, got {total_pd_target}"
        )));
    }
    let inv_n = 1.0 / f64::from(n);
    let per_su = match rule {
        FusionRule::Or => -((-total_pd_target).ln_1p() * inv_n).exp_m1(),
        FusionRule::And => total_pd_target.powf(inv_n),
    };
    Ok(per_su.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_parsing_and_display() {
        assert_eq!("or".parse::<FusionRule>().unwrap(), FusionRule::Or);
        assert_eq!("AND".parse::<FusionRule>().unwrap(), FusionRule::And);
        assert!("xor".parse::<FusionRule>().is_err());
        assert_eq!(FusionRule::Or.to_string(), "or");
        assert_eq!(FusionRule::And.to_string(), "and");
    }

    #[test]
    fn single_member_is_the_identity() {
        for rule in FusionRule::ALL {
            for p in [0.0, 0.25, 0.9, 1.0] {
                assert!((fuse(rule, &[p]).unwrap() - p).abs() < 1e-15);
                assert!(
                    (per_su_pd_target(rule, p.max(0.01), 1).unwrap() - p.max(0.01)).abs() < 1e-15
                );
            }
        }
    }

    #[test]
    fn known_fusion_values() {
        assert!((fuse(FusionRule::Or, &[0.1, 0.2]).unwrap() - 0.28).abs() < 1e-15);
        assert!((fuse(FusionRule::And, &[0.9, 0.9]).unwrap() - 0.81).abs() < 1e-15);
        // A certain member makes OR certain; an impossible one kills AND.
        assert_eq!(fuse(FusionRule::Or, &[0.3, 1.0, 0.2]).unwrap(), 1.0);
        assert_eq!(fuse(FusionRule::And, &[0.3, 0.0, 0.2]).unwrap(), 0.0);
    }

    #[test]
    fn fuse_rejects_bad_inputs() {
        assert!(matches!(fuse(FusionRule::Or, &[]), Err(Error::Domain(_))));
        assert!(matches!(fuse(FusionRule::Or, &[0.5, 1.2]), Err(Error::Domain(_))));
        assert!(matches!(fuse(FusionRule::And, &[-0.1]), Err(Error::Domain(_))));
        assert!(matches!(fuse(FusionRule::And, &[f64::NAN]), Err(Error::Domain(_))));
    }

    #[test]
    fn per_su_target_known_values() {
        assert!((per_su_pd_target(FusionRule::Or, 0.99, 2).unwrap() - 0.9).abs() < 1e-12);
        assert!((per_su_pd_target(FusionRule::And, 0.81, 2).unwrap() - 0.9).abs() < 1e-12);
        // Boundary: a total target of one needs per-SU certainty under both rules.
        assert_eq!(per_su_pd_target(FusionRule::Or, 1.0, 8).unwrap(), 1.0);
        assert_eq!(per_su_pd_target(FusionRule::And, 1.0, 8).unwrap(), 1.0);
    }

    #[test]
    fn per_su_target_rejects_bad_inputs() {
        assert!(matches!(per_su_pd_target(FusionRule::Or, 0.9, 0), Err(Error::Domain(_))));
        assert!(matches!(per_su_pd_target(FusionRule::Or, 0.0, 2), Err(Error::Domain(_))));
        assert!(matches!(per_su_pd_target(FusionRule::And, 1.5, 2), Err(Error::Domain(_))));
        assert!(matches!(per_su_pd_target(FusionRule::And, f64::NAN, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn round_trip_on_documented_grid() {
        for rule in FusionRule::ALL {
            for p in [0.5, 0.9, 0.95, 0.99, 0.999] {
                for n in 1..=64u32 {
                    let per_su = per_su_pd_target(rule, p, n).unwrap();
                    let fused = fuse(rule, &vec![per_su; n as usize]).unwrap();
                    assert!(
                        (fused - p).abs() < 1e-12,
                        "round trip failed: rule {rule}, p {p}, n {n} -> {fused}"
                    );
                }
            }
        }
    }

    #[test]
    fn or_targets_shrink_and_targets_grow_with_n() {
        for p in [0.5, 0.9, 0.99] {
            for n in 1..=63u32 {
                let or_n = per_su_pd_target(FusionRule::Or, p, n).unwrap();
                let or_next = per_su_pd_target(FusionRule::Or, p, n + 1).unwrap();
                assert!(or_next < or_n);
                let and_n = per_su_pd_target(FusionRule::And, p, n).unwrap();
                let and_next = per_su_pd_target(FusionRule::And, p, n + 1).unwrap();
                assert!(and_next > and_n);
            }
        }
    }

    #[test]
    fn false_alarm_growth_with_cluster_size() {
        for pf in [0.001, 0.05, 0.3] {
            for n in 1..=31usize {
                let or_n = fuse(FusionRule::Or, &vec![pf; n]).unwrap();
                let or_next = fuse(FusionRule::Or, &vec![pf; n + 1]).unwrap();
                assert!(or_next > or_n, "OR false alarm not growing at pf {pf}, n {n}");
                let and_n = fuse(FusionRule::And, &vec![pf; n]).unwrap();
                let and_next = fuse(FusionRule::And, &vec![pf; n + 1]).unwrap();
                assert!(and_next < and_n, "AND false alarm not shrinking at pf {pf}, n {n}");
            }
        }
    }

    #[test]
    fn fused_probabilities_bundle() {
        let fp = FusedProbabilities::from_per_su(FusionRule::Or, &[0.9, 0.8], &[0.1, 0.2]).unwrap();
        assert_eq!(fp.cluster_size, 2);
        assert!((fp.p_detect_total - 0.98).abs() < 1e-15);
        assert!((fp.p_false_alarm_total - 0.28).abs() < 1e-15);
        assert!(matches!(
            FusedProbabilities::from_per_su(FusionRule::Or, &[0.9], &[0.1, 0.2]),
            Err(Error::Domain(_))
        ));
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn fused_or_dominates_and(probs in proptest::collection::vec(0.001f64..0.999, 1..12)) {
            let or = fuse(FusionRule::Or, &probs).unwrap();
            let and = fuse(FusionRule::And, &probs).unwrap();
            let max = probs.iter().cloned().fold(f64::MIN, f64::max);
            let min = probs.iter().cloned().fold(f64::MAX, f64::min);
            prop_assert!(or >= max - 1e-14);
            prop_assert!(and <= min + 1e-14);
        }

        #[test]
        fn target_round_trip(rule_or in any::<bool>(), p in 0.01f64..0.9999, n in 1u32..=64) {
            let rule = if rule_or { FusionRule::Or } else { FusionRule::And };
            let per_su = per_su_pd_target(rule, p, n).unwrap();
            let fused = fuse(rule, &vec![per_su; n as usize]).unwrap();
            prop_assert!((fused - p).abs() < 1e-12);
        }
    }
}
