//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # scenario (c)
//! experiment = kicked
//! measurement_mode = all
//! measurement_period = 200
//! ```
//!
//! Blank lines and anything after `#` are ignored. Every key may appear at
//! most once; unknown keys are rejected.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

/// Configuration problem, located by line and key where possible.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "line {l}: `{k}`: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "`{k}`: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Zeno,
    Kicked,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumChoice {
    Rotator,
    Linear,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeChoice {
    None,
    /// The initial level `m₀` only.
    Initial,
    Subset,
    All,
}

impl fmt::Display for ModeChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeChoice::None => "none",
            ModeChoice::Initial => "initial",
            ModeChoice::Subset => "subset",
            ModeChoice::All => "all",
        })
    }
}

/// A fully validated experiment description.
///
/// For `zeno` runs `n_kicks` is the number of segments of the π-pulse and
/// `realizations` the number of Monte-Carlo trials; for `classical` runs
/// `n_kicks` is the number of map steps and `realizations` the ensemble size.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub spectrum: SpectrumChoice,
    /// Level spacing of the linear spectrum.
    pub omega: f64,
    pub m0: i64,
    pub k: f64,
    pub tau: f64,
    pub n_kicks: u64,
    pub window_halfwidth: u64,
    pub measurement_mode: ModeChoice,
    pub measurement_period: u64,
    pub subset: Vec<i64>,
    pub seed: u64,
    pub realizations: u64,
    pub output_path: PathBuf,
    pub emit_svg: bool,
}

impl ExperimentConfig {
    /// Defaults for the kicked rotator at `m₀ = 500, τ = 1, k = 10`.
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            spectrum: SpectrumChoice::Rotator,
            omega: 1.0,
            m0: 500,
            k: 10.0,
            tau: 1.0,
            n_kicks: 1000,
            window_halfwidth: 2000,
            measurement_mode: ModeChoice::None,
            measurement_period: 1,
            subset: Vec::new(),
            seed: 0,
            realizations: 1,
            output_path: PathBuf::from("dispersion.csv"),
            emit_svg: false,
        }
    }

    /// Checks cross-field constraints.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |key: &str, msg: String| {
            Err(ConfigError {
                line: None,
                key: Some(key.to_string()),
                message: msg,
            })
        };
        if !(self.k >= 0.0) || !self.k.is_finite() {
            return err("k", format!("must be a finite number >= 0, got {}", self.k));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return err("tau", format!("must be a finite number > 0, got {}", self.tau));
        }
        if !self.omega.is_finite() {
            return err("omega", "must be finite".into());
        }
        if self.n_kicks == 0 {
            return err("n_kicks", "must be at least 1".into());
        }
        if self.window_halfwidth < 8 {
            return err("window_halfwidth", "must be at least 8 (16 basis states)".into());
        }
        if self.measurement_period == 0 {
            return err("measurement_period", "must be at least 1".into());
        }
        if self.realizations == 0 {
            return err("realizations", "must be at least 1".into());
        }
        match (self.measurement_mode, self.subset.is_empty()) {
            (ModeChoice::Subset, true) => return err("subset", "required when measurement_mode = subset".into()),
            (ModeChoice::Subset, false) => {
                let hw = self.window_halfwidth as i128;
                if let Some(m) = self.subset.iter().find(|&&m| (m as i128 - self.m0 as i128).abs() > hw) {
                    return err("subset", format!("level {m} lies outside the basis window"));
                }
            }
            (_, false) => return err("subset", "only allowed when measurement_mode = subset".into()),
            _ => {}
        }
        if (self.m0 as i128 - self.window_halfwidth as i128) < i64::MIN as i128
            || (self.m0 as i128 + self.window_halfwidth as i128) > i64::MAX as i128
        {
            return err("window_halfwidth", "window exceeds the integer range".into());
        }
        Ok(())
    }
}

fn parse_value<V: FromStr>(line: usize, key: &str, raw: &str, what: &str) -> Result<V, ConfigError> {
    raw.parse().map_err(|_| ConfigError {
        line: Some(line),
        key: Some(key.to_string()),
        message: format!("expected {what}, got `{raw}`"),
    })
}

fn parse_bool(line: usize, key: &str, raw: &str) -> Result<bool, ConfigError> {
    match raw {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(ConfigError {
            line: Some(line),
            key: Some(key.into()),
            message: format!("expected true or false, got `{raw}`"),
        }),
    }
}

fn parse_choice<V: Copy>(line: usize, key: &str, raw: &str, options: &[(&str, V)]) -> Result<V, ConfigError> {
    options
        .iter()
        .find(|(name, _)| *name == raw)
        .map(|&(_, v)| v)
        .ok_or_else(|| ConfigError {
            line: Some(line),
            key: Some(key.into()),
            message: format!(
                "expected one of {}, got `{raw}`",
                options.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(" | ")
            ),
        })
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut pairs: Vec<(usize, &str, &str)> = Vec::new();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError {
            line: Some(line),
            key: None,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if let Some(prev) = seen.insert(key, line) {
            return Err(ConfigError {
                line: Some(line),
                key: Some(key.into()),
                message: format!("duplicate key (first set on line {prev})"),
            });
        }
        pairs.push((line, key, value));
    }

    let (exp_line, exp_value) = pairs
        .iter()
        .find(|(_, k, _)| *k == "experiment")
        .map(|&(l, _, v)| (l, v))
        .ok_or_else(|| ConfigError {
            line: None,
            key: Some("experiment".into()),
            message: "missing required key".into(),
        })?;
    let experiment = parse_choice(
        exp_line,
        "experiment",
        exp_value,
        &[
            ("zeno", ExperimentKind::Zeno),
            ("kicked", ExperimentKind::Kicked),
            ("classical", ExperimentKind::Classical),
        ],
    )?;
    let mut cfg = ExperimentConfig::new(experiment);

    for &(line, key, value) in &pairs {
        match key {
            "experiment" => {}
            "spectrum" => {
                cfg.spectrum = parse_choice(
                    line,
                    key,
                    value,
                    &[
                        ("rotator", SpectrumChoice::Rotator),
                        ("linear", SpectrumChoice::Linear),
                        ("random", SpectrumChoice::Random),
                    ],
                )?
            }
            "omega" => cfg.omega = parse_value(line, key, value, "a number")?,
            "m0" => cfg.m0 = parse_value(line, key, value, "an integer")?,
            "k" => cfg.k = parse_value(line, key, value, "a number")?,
            "tau" => cfg.tau = parse_value(line, key, value, "a number")?,
            "n_kicks" => cfg.n_kicks = parse_value(line, key, value, "a non-negative integer")?,
            "window_halfwidth" => cfg.window_halfwidth = parse_value(line, key, value, "a non-negative integer")?,
            "measurement_mode" => {
                cfg.measurement_mode = parse_choice(
                    line,
                    key,
                    value,
                    &[
                        ("none", ModeChoice::None),
                        ("initial", ModeChoice::Initial),
                        ("subset", ModeChoice::Subset),
                        ("all", ModeChoice::All),
                    ],
                )?
            }
            "measurement_period" => cfg.measurement_period = parse_value(line, key, value, "a non-negative integer")?,
            "subset" => {
                cfg.subset = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_value(line, key, s, "a comma-separated list of integers"))
                    .collect::<Result<_, _>>()?;
                if cfg.subset.is_empty() {
                    return Err(ConfigError {
                        line: Some(line),
                        key: Some(key.into()),
                        message: "empty level list".into(),
                    });
                }
            }
            "seed" => cfg.seed = parse_value(line, key, value, "a non-negative integer")?,
            "realizations" => cfg.realizations = parse_value(line, key, value, "a non-negative integer")?,
            "output_path" => {
                if value.is_empty() {
                    return Err(ConfigError {
                        line: Some(line),
                        key: Some(key.into()),
                        message: "empty path".into(),
                    });
                }
                cfg.output_path = PathBuf::from(value)
            }
            "emit_svg" => cfg.emit_svg = parse_bool(line, key, value)?,
            _ => {
                return Err(ConfigError {
                    line: Some(line),
                    key: Some(key.into()),
                    message: "unknown key".into(),
                })
            }
        }
    }

    cfg.validate().map_err(|mut e| {
        if let Some(k) = &e.key {
            e.line = seen.get(k.as_str()).copied();
        }
        e
    })?;
    Ok(cfg)
}
