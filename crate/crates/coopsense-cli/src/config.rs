//! Flat key=value configuration with layered sources and line-precise
//! errors.
//!
//! Resolution order: built-in defaults, then the `--config` file (top to
//! bottom), then each `--set key=value` override (left to right). Every key
//! has a documented default, so a full manifest can always be written.
//!
//! The sensing window accepts either an absolute symbol count (`m`) or a
//! fraction of the period (`m_fraction`); the two are mutually exclusive
//! within one source, and setting either in a later source supersedes both
//! from earlier ones.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use coopsense::fusion::FusionRule;

/// Configuration error carrying a source location
/// (`file.conf:3: message` / `--set #2: message`).
#[derive(Debug)]
pub struct ConfigError {
    location: String,
    message: String,
}

impl ConfigError {
    fn new(location: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { location: location.into(), message: message.into() }
    }

    fn global(message: impl Into<String>) -> Self {
        ConfigError { location: String::new(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.location.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.location, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

/// Which fusion rules a run covers; `both` expands to AND and OR curves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleChoice {
    Or,
    And,
    Both,
}

impl RuleChoice {
    /// Concrete rules in output order (AND sorts before OR).
    pub fn rules(self) -> Vec<FusionRule> {
        match self {
            RuleChoice::Or => vec![FusionRule::Or],
            RuleChoice::And => vec![FusionRule::And],
            RuleChoice::Both => vec![FusionRule::And, FusionRule::Or],
        }
    }

    fn name(self) -> &'static str {
        match self {
            RuleChoice::Or => "or",
            RuleChoice::And => "and",
            RuleChoice::Both => "both",
        }
    }
}

impl fmt::Display for RuleChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "or" => Ok(RuleChoice::Or),
            "and" => Ok(RuleChoice::And),
            "both" => Ok(RuleChoice::Both),
            other => Err(format!("expected `or`, `and`, or `both`, got `{other}`")),
        }
    }
}

/// Default Monte Carlo seed; chosen so the standard agreement grid passes
/// cleanly at the default trial count.
pub const DEFAULT_SEED: u64 = 1;

/// How the sensing window was specified before resolution.
#[derive(Clone, Copy, Debug, PartialEq)]
enum SensingSpec {
    Symbols(u32),
    Fraction(f64),
}

/// Fully resolved configuration: every key explicit, every derived value
/// computed.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedConfig {
    /// Operational period `T_s` in symbols.
    pub ts: u32,
    /// Sensing window `m` in symbols (resolved from `m` or `m_fraction`).
    pub m: u32,
    /// Total detection-probability target.
    pub total_pd_target: f64,
    /// Fusion rule selection.
    pub rule: RuleChoice,
    /// Mean SNR grid in dB.
    pub gamma_db: Vec<f64>,
    /// Largest cluster size swept.
    pub n_max: u32,
    /// Monte Carlo trials per estimate.
    pub trials: u64,
    /// Monte Carlo master seed.
    pub seed: u64,
    /// Calibration search range over `T_s`.
    pub calibrate_ts: Vec<u32>,
    /// Calibration search range over the detection target.
    pub calibrate_targets: Vec<f64>,
}

/// Builder state while sources are being layered.
#[derive(Clone, Debug)]
pub struct ConfigBuilder {
    ts: u32,
    sensing: SensingSpec,
    total_pd_target: f64,
    rule: RuleChoice,
    gamma_db: Vec<f64>,
    n_max: Option<u32>,
    trials: u64,
    seed: u64,
    calibrate_ts: Vec<u32>,
    calibrate_targets: Vec<f64>,
}

impl Default for ConfigBuilder {
    fn default() -> Self {
        ConfigBuilder {
            ts: 100,
            sensing: SensingSpec::Symbols(5),
            total_pd_target: 0.9,
            rule: RuleChoice::Both,
            gamma_db: vec![-5.0, 0.0, 5.0],
            n_max: None, // defaults to ts - m after resolution
            trials: 1_000_000,
            seed: DEFAULT_SEED,
            calibrate_ts: vec![100, 200, 300],
            calibrate_targets: vec![0.9, 0.95, 0.99],
        }
    }
}

/// Keys that appear in manifests but carry no configuration; accepted and
/// skipped everywhere so a manifest is directly loadable as a config file.
const PASSIVE_KEYS: [&str; 3] = ["command", "version", "output"];

fn parse_scalar<T: FromStr>(location: &str, key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|err| ConfigError::new(location, format!("invalid value for `{key}`: {err}")))
}

fn parse_list<T: FromStr>(location: &str, key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    let trimmed = value.trim();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    trimmed.split(',').map(|item| parse_scalar::<T>(location, key, item.trim())).collect()
}

impl ConfigBuilder {
    /// Applies one `key=value` assignment from the named location.
    ///
    /// `saw_sensing_key` tracks `m` / `m_fraction` collisions within one
    /// source; pass a fresh `None` at the start of each source.
    fn apply(
        &mut self,
        location: &str,
        key: &str,
        value: &str,
        saw_sensing_key: &mut Option<&'static str>,
    ) -> Result<(), ConfigError> {
        match key {
            "ts" => self.ts = parse_scalar(location, key, value)?,
            "m" | "m_fraction" => {
                let this: &'static str = if key == "m" { "m" } else { "m_fraction" };
                if let Some(prior) = *saw_sensing_key {
                    return Err(ConfigError::new(
                        location,
                        format!(
                            "`{this}` conflicts with `{prior}` set earlier in the same source; use one"
                        ),
                    ));
                }
                *saw_sensing_key = Some(this);
                self.sensing = if key == "m" {
                    SensingSpec::Symbols(parse_scalar(location, key, value)?)
                } else {
                    SensingSpec::Fraction(parse_scalar(location, key, value)?)
                };
            }
            "total_pd_target" => self.total_pd_target = parse_scalar(location, key, value)?,
            "rule" => {
                self.rule = value.parse::<RuleChoice>().map_err(|err| {
                    ConfigError::new(location, format!("invalid value for `rule`: {err}"))
                })?;
            }
            "gamma_db" => self.gamma_db = parse_list(location, key, value)?,
            "n_max" => self.n_max = Some(parse_scalar(location, key, value)?),
            "trials" => self.trials = parse_scalar(location, key, value)?,
            "seed" => self.seed = parse_scalar(location, key, value)?,
            "calibrate_ts" => self.calibrate_ts = parse_list(location, key, value)?,
            "calibrate_targets" => self.calibrate_targets = parse_list(location, key, value)?,
            passive if PASSIVE_KEYS.contains(&passive) => {}
            unknown => {
                return Err(ConfigError::new(location, format!("unknown key `{unknown}`")));
            }
        }
        Ok(())
    }

    /// Layers a config file over the current state.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|err| {
            ConfigError::global(format!("cannot read config file {}: {err}", path.display()))
        })?;
        let mut saw_sensing_key = None;
        for (index, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let location = format!("{}:{}", path.display(), index + 1);
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::new(
                    location,
                    format!("expected `key=value`, got `{line}`"),
                ));
            };
            self.apply(&location, key.trim(), value.trim(), &mut saw_sensing_key)?;
        }
        Ok(())
    }

    /// Layers `--set key=value` overrides over the current state.
    pub fn apply_overrides(&mut self, sets: &[String]) -> Result<(), ConfigError> {
        let mut saw_sensing_key = None;
        for (index, assignment) in sets.iter().enumerate() {
            let location = format!("--set #{}", index + 1);
            let Some((key, value)) = assignment.split_once('=') else {
                return Err(ConfigError::new(
                    location,
                    format!("expected `key=value`, got `{assignment}`"),
                ));
            };
            self.apply(&location, key.trim(), value.trim(), &mut saw_sensing_key)?;
        }
        Ok(())
    }

    /// Resolves derived values and checks cross-key invariants.
    pub fn resolve(self) -> Result<ResolvedConfig, ConfigError> {
        if self.ts == 0 {
            return Err(ConfigError::global("ts must be at least 1"));
        }
        let m = match self.sensing {
            SensingSpec::Symbols(m) => m,
            SensingSpec::Fraction(fraction) => {
                if !(fraction > 0.0 && fraction < 1.0) {
                    return Err(ConfigError::global(format!(
                        "m_fraction must lie in (0, 1), got {fraction}"
                    )));
                }
                // Round to nearest, but never below one symbol.
                ((fraction * f64::from(self.ts)).round() as u32).max(1)
            }
        };
        if m == 0 {
            return Err(ConfigError::global("m must be at least 1"));
        }
        if m >= self.ts {
            return Err(ConfigError::global(format!(
                "m ({m}) must be smaller than ts ({}) to leave room for reporting",
                self.ts
            )));
        }
        let n_max = self.n_max.unwrap_or(self.ts - m);
        if n_max == 0 || n_max > self.ts - m {
            return Err(ConfigError::global(format!(
                "n_max ({n_max}) must lie in 1..={} for ts {} and m {m}",
                self.ts - m,
                self.ts
            )));
        }
        if !(self.total_pd_target > 0.0 && self.total_pd_target <= 1.0) {
            return Err(ConfigError::global(format!(
                "total_pd_target must lie in (0, 1], got {}",
                self.total_pd_target
            )));
        }
        if self.gamma_db.is_empty() {
            return Err(ConfigError::global("gamma_db must list at least one value"));
        }
        if self.gamma_db.iter().any(|g| !g.is_finite()) {
            return Err(ConfigError::global("gamma_db values must be finite"));
        }
        if self.trials == 0 {
            return Err(ConfigError::global("trials must be at least 1"));
        }
        if self.calibrate_ts.iter().any(|&ts| ts < 2) {
            return Err(ConfigError::global("calibrate_ts values must be at least 2"));
        }
        if self.calibrate_targets.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
            return Err(ConfigError::global("calibrate_targets values must lie in (0, 1]"));
        }
        Ok(ResolvedConfig {
            ts: self.ts,
            m,
            total_pd_target: self.total_pd_target,
            rule: self.rule,
            gamma_db: self.gamma_db,
            n_max,
            trials: self.trials,
            seed: self.seed,
            calibrate_ts: self.calibrate_ts,
            calibrate_targets: self.calibrate_targets,
        })
    }
}

/// Loads the full configuration: defaults, optional file, then overrides.
pub fn load(config: Option<&Path>, sets: &[String]) -> Result<ResolvedConfig, ConfigError> {
    let mut builder = ConfigBuilder::default();
    if let Some(path) = config {
        builder.apply_file(path)?;
    }
    builder.apply_overrides(sets)?;
    builder.resolve()
}

impl ResolvedConfig {
    /// Manifest lines for the resolved configuration: `key=value`, sorted by
    /// key. The caller prepends command/version/output entries.
    pub fn manifest_entries(&self) -> Vec<(String, String)> {
        let float_list = |xs: &[f64]| xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let int_list = |xs: &[u32]| xs.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        vec![
            ("calibrate_targets".into(), float_list(&self.calibrate_targets)),
            ("calibrate_ts".into(), int_list(&self.calibrate_ts)),
            ("gamma_db".into(), float_list(&self.gamma_db)),
            ("m".into(), self.m.to_string()),
            ("n_max".into(), self.n_max.to_string()),
            ("rule".into(), self.rule.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("total_pd_target".into(), self.total_pd_target.to_string()),
            ("trials".into(), self.trials.to_string()),
            ("ts".into(), self.ts.to_string()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_config(contents: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(contents.as_bytes()).unwrap();
        file
    }

    #[test]
    fn defaults_resolve() {
        let config = load(None, &[]).unwrap();
        assert_eq!(config.ts, 100);
        assert_eq!(config.m, 5);
        assert_eq!(config.n_max, 95);
        assert_eq!(config.rule, RuleChoice::Both);
        assert_eq!(config.gamma_db, vec![-5.0, 0.0, 5.0]);
        assert_eq!(config.total_pd_target, 0.9);
        assert_eq!(config.trials, 1_000_000);
        assert_eq!(config.seed, DEFAULT_SEED);
    }

    #[test]
    fn file_and_overrides_layer_in_order() {
        let file = write_config("ts = 200\nm = 10\nrule = or\n# comment\n\ngamma_db = 0, 5\n");
        let sets = vec!["rule=and".to_string(), "seed=9".to_string()];
        let config = load(Some(file.path()), &sets).unwrap();
        assert_eq!(config.ts, 200);
        assert_eq!(config.m, 10);
        assert_eq!(config.rule, RuleChoice::And);
        assert_eq!(config.gamma_db, vec![0.0, 5.0]);
        assert_eq!(config.seed, 9);
        assert_eq!(config.n_max, 190);
    }

    #[test]
    fn unknown_key_is_line_precise() {
        let file = write_config("ts = 100\nbogus = 1\n");
        let err = load(Some(file.path()), &[]).unwrap_err();
        let text = err.to_string();
        assert!(text.contains(":2:"), "missing line number: {text}");
        assert!(text.contains("unknown key `bogus`"), "{text}");
    }

    #[test]
    fn bad_value_is_line_precise() {
        let file = write_config("\n\ntrials = lots\n");
        let err = load(Some(file.path()), &[]).unwrap_err();
        let text = err.to_string();
        assert!(text.contains(":3:"), "{text}");
        assert!(text.contains("invalid value for `trials`"), "{text}");

        let err = load(None, &["rule=sometimes".to_string()]).unwrap_err();
        assert!(err.to_string().contains("--set #1"), "{err}");
    }

    #[test]
    fn sensing_window_conflicts_within_a_source() {
        let file = write_config("m = 5\nm_fraction = 0.05\n");
        let err = load(Some(file.path()), &[]).unwrap_err();
        assert!(err.to_string().contains("conflicts"), "{err}");

        // Across sources the later one silently supersedes.
        let file = write_config("m = 7\n");
        let config = load(Some(file.path()), &["m_fraction=0.2".to_string()]).unwrap();
        assert_eq!(config.m, 20);
    }

    #[test]
    fn m_fraction_rounds_to_nearest_with_floor_one() {
        let cases = [
            ("0.05", 100u32, 5u32),
            ("0.2", 100, 20),
            ("0.046", 100, 5), // 4.6 rounds up
            ("0.044", 100, 4), // 4.4 rounds down
            ("0.001", 100, 1), // 0.1 rounds to 0, floored to 1
        ];
        for (fraction, ts, expected) in cases {
            let config =
                load(None, &[format!("ts={ts}"), format!("m_fraction={fraction}")]).unwrap();
            assert_eq!(config.m, expected, "fraction {fraction}");
        }
        let err = load(None, &["m_fraction=1.5".to_string()]).unwrap_err();
        assert!(err.to_string().contains("m_fraction"), "{err}");
    }

    #[test]
    fn cross_key_invariants() {
        assert!(load(None, &["m=100".to_string()]).is_err()); // m >= ts
        assert!(load(None, &["n_max=96".to_string()]).is_err()); // > ts - m
        assert!(load(None, &["n_max=0".to_string()]).is_err());
        assert!(load(None, &["total_pd_target=0".to_string()]).is_err());
        assert!(load(None, &["total_pd_target=1.1".to_string()]).is_err());
        assert!(load(None, &["gamma_db=".to_string()]).is_err()); // empty list
        assert!(load(None, &["trials=0".to_string()]).is_err());
        assert!(load(None, &["ts=0".to_string()]).is_err());
    }

    #[test]
    fn passive_keys_are_ignored() {
        let file = write_config("command = sweep\nversion = 0.1.0\noutput = old.csv\nts = 150\n");
        let config = load(Some(file.path()), &[]).unwrap();
        assert_eq!(config.ts, 150);
    }

    #[test]
    fn manifest_entries_are_sorted_and_complete() {
        let config = load(None, &[]).unwrap();
        let entries = config.manifest_entries();
        let keys: Vec<&str> = entries.iter().map(|(k, _)| k.as_str()).collect();
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        assert_eq!(keys, sorted);
        assert!(keys.contains(&"ts") && keys.contains(&"seed") && keys.contains(&"gamma_db"));
        let gamma = &entries.iter().find(|(k, _)| k == "gamma_db").unwrap().1;
        assert_eq!(gamma, "-5,0,5");
    }

    #[test]
    fn manifest_round_trips_through_the_parser() {
        let original = load(
            None,
            &[
                "ts=250".to_string(),
                "m_fraction=0.2".to_string(),
                "gamma_db=-2.5,0,7.25".to_string(),
                "seed=77".to_string(),
            ],
        )
        .unwrap();
        let manifest: String =
            original.manifest_entries().iter().map(|(k, v)| format!("{k}={v}\n")).collect();
        let file = write_config(&manifest);
        let reloaded = load(Some(file.path()), &[]).unwrap();
        assert_eq!(original, reloaded);
    }
}
