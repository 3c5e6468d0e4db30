// SPDX-License-Identifier: Apache-2.0

//! Sweep configuration: a flat `key = value` file with command-line
//! overrides applied on top.
//!
//! ```text
//! # reference parameter set
//! eps = 6, 8, 10
//! beta_h = 0.5
//! beta_c = 1.0
//! v_points = 501
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::model::{DqdParams, ModelError};
use crate::reservoir::{BathSetup, ReservoirError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{}unknown key `{key}`", line_prefix(*.line))]
    UnknownKey { line: Option<usize>, key: String },
    #[error("{}{field}: cannot use `{value}`: {reason}", line_prefix(*.line))]
    Value {
        line: Option<usize>,
        field: String,
        value: String,
        reason: String,
    },
    #[error("{field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("cannot read config {}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

fn line_prefix(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

/// Evenly spaced inclusive grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points }
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.max
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.points - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.value(i)).collect()
    }

    fn validate(&self, field: &'static str) -> Result<(), ConfigError> {
        if self.points < 2 {
            return Err(ConfigError::Invalid {
                field,
                reason: format!("needs at least 2 points, got {}", self.points),
            });
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(ConfigError::Invalid {
                field,
                reason: format!("needs finite min < max, got [{}, {}]", self.min, self.max),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("expected csv or json, got `{other}`")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Model, reservoir and grid settings for a sweep.
///
/// Defaults reproduce the reference parameter set: `Delta = 0`,
/// `T = U = 0.1 meV`, `beta_H = 0.5 /meV`, `beta_C = 1 /meV`,
/// `mu_H = 1 meV`, equal couplings, `V` in `[0, 5] mV` over 501 points,
/// 1-D levels `eps = 6, 8, 10 meV` and a 2-D level grid `[2, 12] x 201`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Mean levels for 1-D voltage sweeps.
    pub eps_values: Vec<f64>,
    pub delta: f64,
    pub tunnel: f64,
    pub coulomb: f64,
    pub beta_hot: f64,
    pub beta_cold: f64,
    pub mu_hot: f64,
    pub gamma_hot: f64,
    pub gamma_cold: f64,
    pub voltage: Grid,
    /// Level grid for 2-D maps.
    pub eps_grid: Grid,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            eps_values: vec![6.0, 8.0, 10.0],
            delta: 0.0,
            tunnel: 0.1,
            coulomb: 0.1,
            beta_hot: 0.5,
            beta_cold: 1.0,
            mu_hot: 1.0,
            gamma_hot: 1.0,
            gamma_cold: 1.0,
            voltage: Grid::new(0.0, 5.0, 501),
            eps_grid: Grid::new(2.0, 12.0, 201),
            format: Format::Csv,
            out: None,
        }
    }
}

fn parse_num<T: FromStr>(line: Option<usize>, field: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::Value {
        line,
        field: field.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

impl SweepConfig {
    /// Parses a config file body on top of the defaults. Validation is left
    /// to [`SweepConfig::validate`] so that overrides can be applied first.
    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            cfg.apply(Some(line), key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_str(&text)
    }

    /// Sets one field by its config-file key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        self.apply(None, key, value)
    }

    fn apply(&mut self, line: Option<usize>, key: &str, value: &str) -> Result<(), ConfigError> {
        let key_norm = key.to_ascii_lowercase().replace('-', "_");
        let num = |v: &str| parse_num::<f64>(line, &key_norm, v);
        match key_norm.as_str() {
            "eps" => {
                self.eps_values = value
                    .split(',')
                    .map(|v| num(v.trim()))
                    .collect::<Result<Vec<_>, _>>()?;
            }
            "delta" => self.delta = num(value)?,
            "tunnel" => self.tunnel = num(value)?,
            "coulomb" => self.coulomb = num(value)?,
            "beta_h" => self.beta_hot = num(value)?,
            "beta_c" => self.beta_cold = num(value)?,
            "mu_h" => self.mu_hot = num(value)?,
            "gamma_h" => self.gamma_hot = num(value)?,
            "gamma_c" => self.gamma_cold = num(value)?,
            "v_min" => self.voltage.min = num(value)?,
            "v_max" => self.voltage.max = num(value)?,
            "v_points" => self.voltage.points = parse_num(line, &key_norm, value)?,
            "eps_min" => self.eps_grid.min = num(value)?,
            "eps_max" => self.eps_grid.max = num(value)?,
            "eps_points" => self.eps_grid.points = parse_num(line, &key_norm, value)?,
            "format" => {
                self.format = value.parse().map_err(|reason| ConfigError::Value {
                    line,
                    field: key_norm.clone(),
                    value: value.to_string(),
                    reason,
                })?
            }
            "out" => self.out = Some(PathBuf::from(value)),
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Checks every downstream precondition so that sweeps cannot fail on
    /// parameter validation half way through.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.voltage.validate("voltage grid")?;
        self.eps_grid.validate("eps grid")?;
        if self.eps_values.is_empty() {
            return Err(ConfigError::Invalid {
                field: "eps",
                reason: "needs at least one level".into(),
            });
        }
        let levels = self
            .eps_values
            .iter()
            .copied()
            .chain([self.eps_grid.min, self.eps_grid.max]);
        for eps in levels {
            self.model(eps).map_err(|e| ConfigError::Invalid {
                field: "model",
                reason: e.to_string(),
            })?;
        }
        for v in [self.voltage.min, self.voltage.max] {
            self.baths(v).map_err(|e| ConfigError::Invalid {
                field: "reservoirs",
                reason: e.to_string(),
            })?;
        }
        if self.gamma_hot == 0.0 && self.gamma_cold == 0.0 {
            return Err(ConfigError::Invalid {
                field: "gamma",
                reason: "at least one reservoir must be coupled".into(),
            });
        }
        if self.tunnel == 0.0 && (self.gamma_hot == 0.0 || self.gamma_cold == 0.0) {
            return Err(ConfigError::Invalid {
                field: "gamma",
                reason: "with tunnel = 0 both reservoirs must be coupled for a unique steady state".into(),
            });
        }
        Ok(())
    }

    pub fn model(&self, eps: f64) -> Result<DqdParams, ModelError> {
        DqdParams::from_mean(eps, self.delta, self.tunnel, self.coulomb)
    }

    pub fn baths(&self, voltage: f64) -> Result<BathSetup, ReservoirError> {
        BathSetup::biased(
            self.beta_hot,
            self.beta_cold,
            self.mu_hot,
            voltage,
            self.gamma_hot,
            self.gamma_cold,
        )
    }

    /// Key/value pairs in config-file syntax, for output metadata.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let eps = self.eps_values.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ");
        vec![
            ("eps", eps),
            ("delta", self.delta.to_string()),
            ("tunnel", self.tunnel.to_string()),
            ("coulomb", self.coulomb.to_string()),
            ("beta_h", self.beta_hot.to_string()),
            ("beta_c", self.beta_cold.to_string()),
            ("mu_h", self.mu_hot.to_string()),
            ("gamma_h", self.gamma_hot.to_string()),
            ("gamma_c", self.gamma_cold.to_string()),
            ("v_min", self.voltage.min.to_string()),
            ("v_max", self.voltage.max.to_string()),
            ("v_points", self.voltage.points.to_string()),
            ("eps_min", self.eps_grid.min.to_string()),
            ("eps_max", self.eps_grid.max.to_string()),
            ("eps_points", self.eps_grid.points.to_string()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_exact() {
        let g = Grid::new(0.0, 5.0, 501);
        let v = g.values();
        assert_eq!(v.len(), 501);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[500], 5.0);
        assert!((v[250] - 2.5).abs() < 1e-15);
        assert!((g.step() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn parses_file_with_comments() {
        let cfg = SweepConfig::parse_str(
            "# comment\n eps = 6, 8 \nbeta-h = 0.25 # inline\n\nv_points=11\nformat = JSON\nout = /tmp/x.json\n",
        )
        .unwrap();
        assert_eq!(cfg.eps_values, vec![6.0, 8.0]);
        assert_eq!(cfg.beta_hot, 0.25);
        assert_eq!(cfg.voltage.points, 11);
        assert_eq!(cfg.format, Format::Json);
        assert_eq!(cfg.out, Some(PathBuf::from("/tmp/x.json")));
        cfg.validate().unwrap();
    }

    #[test]
    fn reports_line_numbers() {
        let err = SweepConfig::parse_str("eps = 6\nnonsense\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 2, .. }), "{err}");
        let err = SweepConfig::parse_str("eps = 6\n\nbeta_h = hot\n").unwrap_err();
        assert!(err.to_string().starts_with("line 3: beta_h"), "{err}");
        let err = SweepConfig::parse_str("colour = red").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { line: Some(1), .. }));
    }

    #[test]
    fn rejects_unphysical_settings() {
        let bad = |key: &str, value: &str| {
            let mut cfg = SweepConfig::default();
            cfg.set(key, value).unwrap();
            cfg.validate().unwrap_err()
        };
        bad("v_points", "1");
        bad("v_max", "-1");
        bad("beta_h", "0");
        bad("gamma_c", "-0.5");
        bad("tunnel", "-0.1");
        bad("coulomb", "-1");
        // degenerate one-electron sector
        bad("tunnel", "0");
        let mut cfg = SweepConfig::default();
        cfg.set("gamma_h", "0").unwrap();
        cfg.set("gamma_c", "0").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn default_is_valid() {
        SweepConfig::default().validate().unwrap();
    }
}
