//! Cluster-size planning for cooperative spectrum sensing.
//!
//! A cluster of secondary users (SUs) takes turns sensing a primary user's
//! channel with energy detectors, shares one-bit decisions, and fuses them at
//! a cluster head. Cooperation relaxes each SU's detection burden — so each
//! SU can raise its threshold and cut its false-alarm rate — but every extra
//! SU burns one more reporting symbol per operational period. This crate
//! answers the resulting design question: **how many SUs should cooperate?**
//!
//! The pipeline, module by module:
//!
//! - [`specfun`]: the special functions everything rests on — regularized
//!   incomplete gamma, generalized Marcum Q, and their inverses.
//! - [`detector`]: per-SU energy detection over `m` symbols; maps thresholds
//!   to detection/false-alarm probabilities and back.
//! - [`fusion`]: OR/AND decision fusion and the per-SU detection target that
//!   meets a total cluster target.
//! - [`planner`]: normalized throughput of an `N`-SU cluster and the
//!   exhaustive sweep that finds the optimal `N`.
//! - [`mcsim`]: a seeded Monte Carlo simulator for every probability above.
//! - [`validation`]: the agreement grid that pins the simulator against the
//!   closed forms with three-sigma tolerances.
//!
//! # Example
//!
//! Find the best cluster size for a 100-symbol period with a 5-symbol
//! sensing window at 0 dB mean SNR, requiring 90% total detection:
//!
//! ```
//! use coopsense::fusion::FusionRule;
//! use coopsense::planner::{optimize_cluster_size, ScenarioConfig};
//!
//! let scenario = ScenarioConfig {
//!     sensing_period: 100,
//!     sensing_symbols: 5,
//!     total_pd_target: 0.9,
//!     mean_snr: coopsense::db_to_linear(0.0),
//!     rule: FusionRule::Or,
//!     max_cluster: 95,
//! };
//! let table = optimize_cluster_size(&scenario).unwrap();
//! let best = table.optimal_row();
//! assert!(best.cluster_size >= 1);
//! assert!(best.throughput > 0.0 && best.throughput < 1.0);
//! // The fused detection probability meets the target at the optimum.
//! assert!((best.fused_pd - 0.9).abs() < 1e-9);
//! ```

pub mod detector;
pub mod error;
pub mod fusion;
pub mod mcsim;
pub mod planner;
pub mod specfun;
pub mod validation;

pub use error::{Error, Result};

/// Converts a decibel value to a linear power ratio, `10^(db/10)`.
///
/// # Examples
///
/// ```
/// assert_eq!(coopsense::db_to_linear(0.0), 1.0);
/// assert_eq!(coopsense::db_to_linear(10.0), 10.0);
/// assert!((coopsense::db_to_linear(3.0) - 1.9952623149688795).abs() < 1e-15);
/// ```
#[must_use]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to decibels, `10 log10(x)`.
///
/// Round-trips with [`db_to_linear`] to within `1e-12` over the SNR ranges
/// this crate works in.
#[must_use]
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

// The guide's code listings compile and run as doc-tests, so the book can
// never drift from the library. Each chapter becomes one module here; a
// failing snippet reports the chapter it came from.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/energy-detection.md")]
    mod energy_detection {}
    #[doc = include_str!("../../../book/src/decision-fusion.md")]
    mod decision_fusion {}
    #[doc = include_str!("../../../book/src/cluster-planning.md")]
    mod cluster_planning {}
    #[doc = include_str!("../../../book/src/monte-carlo.md")]
    mod monte_carlo {}
    #[doc = include_str!("../../../book/src/special-functions.md")]
    mod special_functions {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_conversions_round_trip() {
        for db in [-30.0, -5.0, -0.1, 0.0, 0.1, 3.0, 5.0, 10.0, 30.0] {
            let linear = db_to_linear(db);
            assert!((linear_to_db(linear) - db).abs() < 1e-12, "{db} dB");
        }
        for linear in [1e-3, 0.5, 1.0, 3.1622776601683795, 1e3] {
            let db = linear_to_db(linear);
            let back = db_to_linear(db);
            assert!((back - linear).abs() < 1e-12 * linear.max(1.0), "{linear}");
        }
    }
}
