//! Experiment configuration: a plain-text file of `[section]` headers and
//! `key = value` lines, plus `section.key=value` overrides.
//!
//! Operator units (km, knots, degrees) are converted to SI here; everything
//! past this module works in metres, seconds and radians.
//!
//! ```text
//! # comment
//! [scenario]
//! scans = 30
//! observer_speed_kn = 4.86
//!
//! [experiment]
//! nus = 3, 5, 8, inf
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::bench::{build_canonical_scenario, FilterKind, NoiseModel, Scenario, ScenarioConfig};
use crate::tma::InitCovariance;

const KNOT: f64 = 1852.0 / 3600.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// Line in the config file, if the problem came from one.
    pub line: Option<usize>,
    /// `section.key`, if the problem concerns a single key.
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn new(line: Option<usize>, key: Option<String>, message: impl Into<String>) -> Self {
        Self {
            line,
            key,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.key, self.line) {
            (Some(k), Some(l)) => write!(f, "line {l}: key `{k}`: {}", self.message),
            (Some(k), None) => write!(f, "key `{k}`: {}", self.message),
            (None, Some(l)) => write!(f, "line {l}: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    // None for command-line overrides
    line: Option<usize>,
}

/// Parsed but not yet interpreted key-value pairs, keyed by `section.key`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split(['#', ';']).next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| {
                        ConfigError::new(Some(line), None, "unterminated section header")
                    })?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(ConfigError::new(
                        Some(line),
                        None,
                        format!("unknown section `[{name}]`"),
                    ));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                ConfigError::new(
                    Some(line),
                    None,
                    format!("expected `key = value`, got `{content}`"),
                )
            })?;
            let key = key.trim();
            let section = section.as_deref().ok_or_else(|| {
                ConfigError::new(
                    Some(line),
                    Some(key.to_string()),
                    "key appears before any [section] header",
                )
            })?;
            let full = format!("{section}.{key}");
            if let Some(prev) = entries.get(&full) {
                return Err(ConfigError::new(
                    Some(line),
                    Some(full),
                    format!(
                        "duplicate key (first set on line {})",
                        prev.line.unwrap_or(0)
                    ),
                ));
            }
            entries.insert(
                full,
                Entry {
                    value: value.trim().to_string(),
                    line: Some(line),
                },
            );
        }
        Ok(Self { entries })
    }

    /// Applies a `section.key=value` override, replacing any file value.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| {
            ConfigError::new(
                None,
                None,
                format!("override `{assignment}` is not of the form section.key=value"),
            )
        })?;
        let key = key.trim();
        if !key.contains('.') {
            return Err(ConfigError::new(
                None,
                Some(key.to_string()),
                "override key must be section.key",
            ));
        }
        self.entries.insert(
            key.to_string(),
            Entry {
                value: value.trim().to_string(),
                line: None,
            },
        );
        Ok(())
    }
}

const SECTIONS: [&str; 5] = ["scenario", "noise", "filter", "experiment", "output"];

/// Settings of the Monte Carlo experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub runs: usize,
    pub base_seed: u64,
    pub parallelism: usize,
    pub particle_counts: Vec<usize>,
    pub nus: Vec<f64>,
    pub filters: Vec<FilterKind>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            runs: 500,
            base_seed: 1,
            parallelism: 1,
            particle_counts: vec![2000, 5000],
            nus: vec![3.0, 5.0, 8.0, f64::INFINITY],
            filters: vec![FilterKind::Standard, FilterKind::Possibility],
        }
    }
}

/// Fully interpreted configuration in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub scenario: ScenarioConfig,
    pub filter: FilterKind,
    pub particles: usize,
    pub experiment: ExperimentConfig,
    pub output_dir: PathBuf,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            filter: FilterKind::Possibility,
            particles: 2000,
            experiment: ExperimentConfig::default(),
            output_dir: PathBuf::from("."),
        }
    }
}

struct Cursor<'a> {
    key: &'a str,
    entry: &'a Entry,
}

impl Cursor<'_> {
    fn err(&self, message: impl Into<String>) -> ConfigError {
        ConfigError::new(self.entry.line, Some(self.key.to_string()), message)
    }

    fn text(&self) -> &str {
        &self.entry.value
    }

    fn number(&self) -> Result<f64, ConfigError> {
        let v = parse_number(self.text())
            .ok_or_else(|| self.err(format!("`{}` is not a number", self.text())))?;
        if v.is_nan() {
            return Err(self.err("NaN is not allowed"));
        }
        Ok(v)
    }

    fn finite(&self) -> Result<f64, ConfigError> {
        let v = self.number()?;
        if !v.is_finite() {
            return Err(self.err("value must be finite"));
        }
        Ok(v)
    }

    fn positive(&self) -> Result<f64, ConfigError> {
        let v = self.finite()?;
        if v <= 0.0 {
            return Err(self.err(format!("value must be positive, got {v}")));
        }
        Ok(v)
    }

    fn positive_or_inf(&self) -> Result<f64, ConfigError> {
        let v = self.number()?;
        if v <= 0.0 {
            return Err(self.err(format!("value must be positive, got {v}")));
        }
        Ok(v)
    }

    fn non_negative(&self) -> Result<f64, ConfigError> {
        let v = self.finite()?;
        if v < 0.0 {
            return Err(self.err(format!("value must be non-negative, got {v}")));
        }
        Ok(v)
    }

    fn count(&self, min: usize) -> Result<usize, ConfigError> {
        let v: usize = self
            .text()
            .parse()
            .map_err(|_| self.err(format!("`{}` is not a whole number", self.text())))?;
        if v < min {
            return Err(self.err(format!("value must be at least {min}, got {v}")));
        }
        Ok(v)
    }

    fn flag(&self) -> Result<bool, ConfigError> {
        match self.text().to_ascii_lowercase().as_str() {
            "true" | "yes" | "on" | "1" => Ok(true),
            "false" | "no" | "off" | "0" => Ok(false),
            other => Err(self.err(format!("`{other}` is not a boolean"))),
        }
    }

    fn list(&self) -> Vec<&str> {
        self.text()
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect()
    }
}

fn parse_number(s: &str) -> Option<f64> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => Some(f64::INFINITY),
        other => other.parse().ok(),
    }
}

impl Config {
    /// Interprets raw entries on top of the defaults and checks that the
    /// scenario they describe can be built.
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let s = &mut cfg.scenario;
        let mut noise_kind: Option<String> = None;
        let mut noise_sigma = s.true_noise.sigma();
        let mut noise_nu: Option<(f64, Option<usize>)> = None;

        for (key, entry) in &raw.entries {
            let c = Cursor { key, entry };
            match key.as_str() {
                "scenario.scans" => s.scans = c.count(2)?,
                "scenario.interval_s" => s.interval = c.positive()?,
                "scenario.target_range_km" => s.target_range = 1000.0 * c.positive()?,
                "scenario.target_bearing_deg" => s.target_bearing = c.finite()?.to_radians(),
                "scenario.target_speed_kn" => s.target_speed = KNOT * c.non_negative()?,
                "scenario.target_course_deg" => s.target_course = c.finite()?.to_radians(),
                "scenario.observer_speed_kn" => s.observer_speed = KNOT * c.non_negative()?,
                "scenario.observer_course_leg1_deg" => {
                    s.observer_course_leg1 = c.finite()?.to_radians()
                }
                "scenario.observer_course_leg2_deg" => {
                    s.observer_course_leg2 = c.finite()?.to_radians()
                }
                "scenario.leg1_scans" => s.leg1_scans = Some(c.count(1)?),
                "scenario.q" => s.q = c.positive()?,
                "scenario.truth_process_noise" => s.truth_process_noise = c.flag()?,
                "noise.kind" => match c.text().to_ascii_lowercase().as_str() {
                    k @ ("gaussian" | "student-t") => noise_kind = Some(k.to_string()),
                    other => {
                        return Err(c.err(format!(
                            "unknown noise kind `{other}` (expected `gaussian` or `student-t`)"
                        )))
                    }
                },
                "noise.sigma_deg" => noise_sigma = c.non_negative()?.to_radians(),
                "noise.nu" => noise_nu = Some((c.positive_or_inf()?, entry.line)),
                "filter.kind" => cfg.filter = c.text().parse().map_err(|e| c.err(format!("{e}")))?,
                "filter.particles" => cfg.particles = c.count(1)?,
                "filter.sigma_deg" => {
                    let sigma = c.positive()?.to_radians();
                    s.filter_sigma = sigma;
                    s.prior.bearing_sigma = sigma;
                }
                "filter.prior_range_km" => s.prior.range = 1000.0 * c.positive()?,
                "filter.prior_range_sigma_km" => s.prior.range_sigma = 1000.0 * c.positive()?,
                "filter.prior_velocity_sigma_kn" => {
                    let v = KNOT * c.positive()?;
                    s.prior.velocity_sigma = (v, v);
                }
                "filter.prior_covariance" => {
                    s.prior.covariance = match c.text().to_ascii_lowercase().as_str() {
                        "consistent" => InitCovariance::Consistent,
                        "swapped" => InitCovariance::Swapped,
                        other => {
                            return Err(c.err(format!(
                                "unknown covariance form `{other}` (expected `consistent` or `swapped`)"
                            )))
                        }
                    }
                }
                "experiment.runs" => cfg.experiment.runs = c.count(1)?,
                "experiment.seed" => {
                    cfg.experiment.base_seed = c
                        .text()
                        .parse()
                        .map_err(|_| c.err(format!("`{}` is not a valid seed", c.text())))?
                }
                "experiment.parallelism" => cfg.experiment.parallelism = c.count(1)?,
                "experiment.particle_counts" => {
                    cfg.experiment.particle_counts = c
                        .list()
                        .iter()
                        .map(|v| match v.parse::<usize>() {
                            Ok(n) if n >= 1 => Ok(n),
                            _ => Err(c.err(format!("`{v}` is not a positive particle count"))),
                        })
                        .collect::<Result<_, _>>()?;
                    if cfg.experiment.particle_counts.is_empty() {
                        return Err(c.err("list is empty"));
                    }
                }
                "experiment.nus" => {
                    cfg.experiment.nus = c
                        .list()
                        .iter()
                        .map(|v| match parse_number(v) {
                            Some(nu) if nu > 0.0 => Ok(nu),
                            _ => Err(c.err(format!("`{v}` is not a positive degree of freedom"))),
                        })
                        .collect::<Result<_, _>>()?;
                    if cfg.experiment.nus.is_empty() {
                        return Err(c.err("list is empty"));
                    }
                }
                "experiment.filters" => {
                    cfg.experiment.filters = c
                        .list()
                        .iter()
                        .map(|v| v.parse::<FilterKind>().map_err(|e| c.err(format!("{e}"))))
                        .collect::<Result<_, _>>()?;
                    if cfg.experiment.filters.is_empty() {
                        return Err(c.err("list is empty"));
                    }
                }
                "output.dir" => cfg.output_dir = PathBuf::from(c.text()),
                _ => return Err(c.err("unknown key")),
            }
        }

        s.true_noise = match (noise_kind.as_deref(), noise_nu) {
            (Some("student-t"), Some((nu, _))) => NoiseModel::StudentT {
                sigma: noise_sigma,
                nu,
            },
            (Some("student-t"), None) => {
                return Err(ConfigError::new(
                    None,
                    Some("noise.nu".into()),
                    "student-t noise needs a degrees-of-freedom value",
                ))
            }
            (_, Some((_, line))) if noise_kind.is_some() => {
                return Err(ConfigError::new(
                    line,
                    Some("noise.nu".into()),
                    "only meaningful for student-t noise",
                ))
            }
            // a bare nu selects Student-t
            (None, Some((nu, _))) => NoiseModel::StudentT {
                sigma: noise_sigma,
                nu,
            },
            _ => NoiseModel::Gaussian { sigma: noise_sigma },
        };

        cfg.scenario()?;
        Ok(cfg)
    }

    /// Builds the scenario, reporting problems as configuration errors.
    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        build_canonical_scenario(&self.scenario)
            .map_err(|e| ConfigError::new(None, Some("scenario".into()), e.to_string()))
    }

    /// SHA-256 of the interpreted configuration, in hex.
    ///
    /// Two files that differ only in comments, ordering or spelled-out
    /// defaults hash the same. The output directory is not part of it.
    pub fn hash(&self) -> String {
        let key = format!(
            "{:?}|{:?}|{:?}|{:?}",
            self.scenario, self.filter, self.particles, self.experiment
        );
        let digest = Sha256::digest(key.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Reads a config file and applies the overrides in order.
pub fn load(path: Option<&std::path::Path>, overrides: &[String]) -> Result<Config, LoadError> {
    let mut raw = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| LoadError::Io {
                path: p.to_path_buf(),
                source: e,
            })?;
            RawConfig::parse(&text).map_err(LoadError::Config)?
        }
        None => RawConfig::default(),
    };
    for o in overrides {
        raw.set(o).map_err(LoadError::Config)?;
    }
    Config::from_raw(&raw).map_err(LoadError::Config)
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read config file {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config error: {0}")]
    Config(ConfigError),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> Result<Config, ConfigError> {
        Config::from_raw(&RawConfig::parse(text)?)
    }

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(cfg("").unwrap(), Config::default());
        assert_eq!(cfg("# only a comment\n\n").unwrap(), Config::default());
    }

    #[test]
    fn units_are_converted() {
        let c = cfg(
            "[scenario]\ntarget_range_km = 12\nobserver_speed_kn = 10\ntarget_course_deg = 90\n\
             [noise]\nsigma_deg = 2\n[filter]\nsigma_deg = 0.5\n",
        )
        .unwrap();
        assert_eq!(c.scenario.target_range, 12_000.0);
        assert!((c.scenario.observer_speed - 10.0 * 1852.0 / 3600.0).abs() < 1e-12);
        assert!((c.scenario.target_course - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((c.scenario.true_noise.sigma() - 2f64.to_radians()).abs() < 1e-15);
        assert!((c.scenario.filter_sigma - 0.5f64.to_radians()).abs() < 1e-15);
        assert_eq!(c.scenario.prior.bearing_sigma, c.scenario.filter_sigma);
    }

    #[test]
    fn errors_name_key_and_line() {
        let e = cfg("[scenario]\n\nscans = many\n").unwrap_err();
        assert_eq!(e.line, Some(3));
        assert_eq!(e.key.as_deref(), Some("scenario.scans"));
        assert!(e.to_string().contains("line 3") && e.to_string().contains("scenario.scans"));

        let e = cfg("[filter]\nparticles = 10\nbogus = 1\n").unwrap_err();
        assert_eq!((e.line, e.key.as_deref()), (Some(3), Some("filter.bogus")));

        let e = cfg("[nowhere]\n").unwrap_err();
        assert_eq!(e.line, Some(1));

        let e = cfg("scans = 3\n").unwrap_err();
        assert_eq!(e.line, Some(1));

        let e = cfg("[scenario]\nscans = 3\nscans = 4\n").unwrap_err();
        assert_eq!(e.line, Some(3));
    }

    #[test]
    fn scenario_problems_are_config_errors() {
        let e = cfg("[scenario]\nscans = 10\nleg1_scans = 10\n").unwrap_err();
        assert!(e.message.contains("leg"), "{e}");
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut raw = RawConfig::parse("[filter]\nparticles = 10\n").unwrap();
        raw.set("filter.particles=20").unwrap();
        raw.set("experiment.nus = 3, inf").unwrap();
        let c = Config::from_raw(&raw).unwrap();
        assert_eq!(c.particles, 20);
        assert_eq!(c.experiment.nus, vec![3.0, f64::INFINITY]);
        assert!(raw.set("particles").is_err());
        assert!(raw.set("particles=3").is_err());
        raw.set("filter.particles=0").unwrap();
        let e = Config::from_raw(&raw).unwrap_err();
        assert_eq!((e.line, e.key.as_deref()), (None, Some("filter.particles")));
    }

    #[test]
    fn noise_selection() {
        let c = cfg("[noise]\nkind = student-t\nnu = 3\n").unwrap();
        assert_eq!(
            c.scenario.true_noise,
            NoiseModel::StudentT {
                sigma: 1f64.to_radians(),
                nu: 3.0
            }
        );
        assert!(cfg("[noise]\nkind = student-t\n").is_err());
        assert!(cfg("[noise]\nkind = gaussian\nnu = 3\n").is_err());
        assert!(cfg("[noise]\nkind = cauchy\n").is_err());
        let c = cfg("[noise]\nnu = inf\n").unwrap();
        assert_eq!(c.scenario.true_noise.nu(), f64::INFINITY);
    }

    #[test]
    fn hash_ignores_layout() {
        let a = cfg("[filter]\nparticles = 300\n[experiment]\nruns = 4\n").unwrap();
        let b = cfg("# x\n[experiment]\nruns=4\n\n[filter]\n particles = 300 \n").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        assert_ne!(a.hash(), Config::default().hash());
        let c =
            cfg("[filter]\nparticles = 300\n[experiment]\nruns = 4\n[output]\ndir = elsewhere\n")
                .unwrap();
        assert_eq!(a.hash(), c.hash());
    }
}
