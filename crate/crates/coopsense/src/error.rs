//! Crate-wide error type.
//!
//! Every fallible operation in this crate returns [`Result`]. The variants
//! separate the three ways a call can go wrong: an argument outside the
//! mathematical domain of a function, an iterative scheme giving up, and a
//! scenario whose parameters are structurally inconsistent.

use std::fmt;

/// Errors produced by the coopsense library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside an operation's mathematical domain
    /// (negative threshold, probability outside its valid range, ...).
    Domain(String),
    /// An iterative scheme failed to reach its tolerance within the
    /// configured iteration cap. Usually means the tolerance is tighter
    /// than double precision supports for the given arguments.
    Convergence {
        /// Which computation gave up.
        context: &'static str,
        /// The iteration cap that was exhausted.
        max_iter: u32,
    },
    /// A scenario configuration violates a structural invariant, such as
    /// the sensing time not fitting inside the sensing period.
    InvalidScenario(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Convergence { context, max_iter } => {
                write!(f, "{context} failed to converge within {max_iter} iterations")
            }
            Error::InvalidScenario(msg) => write!(f, "invalid scenario: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_is_informative() {
        let e = Error::Domain("x must be nonnegative, got -1".into());
        assert!(e.to_string().contains("domain error"));
        assert!(e.to_string().contains("-1"));

        let e = Error::Convergence { context: "marcum_q inverse", max_iter: 200 };
        assert!(e.to_string().contains("200"));
        assert!(e.to_string().contains("marcum_q inverse"));

        let e = Error::InvalidScenario("sensing time exceeds period".into());
        assert!(e.to_string().contains("invalid scenario"));
    }
}
