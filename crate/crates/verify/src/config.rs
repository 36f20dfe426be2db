use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Calculus,
    Riemannian,
    Symplectic,
    Lemma1,
    Lemma2,
    Momentum,
    Kobayashi,
    FlowInvariance,
    Convergence,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Calculus,
        Suite::Riemannian,
        Suite::Symplectic,
        Suite::Lemma1,
        Suite::Lemma2,
        Suite::Momentum,
        Suite::Kobayashi,
        Suite::FlowInvariance,
        Suite::Convergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Calculus => "calculus",
            Suite::Riemannian => "riemannian",
            Suite::Symplectic => "symplectic",
            Suite::Lemma1 => "lemma1",
            Suite::Lemma2 => "lemma2",
            Suite::Momentum => "momentum",
            Suite::Kobayashi => "kobayashi",
            Suite::FlowInvariance => "flow-invariance",
            Suite::Convergence => "convergence",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Suite, ConfigError> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s.trim())
            .ok_or_else(|| {
                let known: Vec<_> = Suite::ALL.iter().map(|s| s.name()).collect();
                invalid("suites", format!("unknown suite `{}` (known: {})", s.trim(), known.join(", ")))
            })
    }
}

/// Parses a comma-separated suite list.
pub fn parse_suite_list(csv: &str) -> Result<Vec<Suite>, ConfigError> {
    let suites = csv
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(Suite::from_str)
        .collect::<Result<Vec<_>, _>>()?;
    if suites.is_empty() {
        return Err(invalid("suites", "empty suite list"));
    }
    Ok(suites)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    /// Grid sizes. Property suites run at the largest; the convergence suite
    /// runs at every size.
    #[serde(default = "default_grid_sizes")]
    pub grid_sizes: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_kmax")]
    pub kmax: usize,
    /// Per-suite override of every upper-bound tolerance in that suite.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default = "default_suites")]
    pub suites: Vec<Suite>,
}

fn default_grid_sizes() -> Vec<usize> {
    vec![32, 48, 64]
}

fn default_seeds() -> Vec<u64> {
    (0..50).collect()
}

fn default_kmax() -> usize {
    4
}

fn default_suites() -> Vec<Suite> {
    Suite::ALL.to_vec()
}

impl Default for SuiteConfig {
    fn default() -> SuiteConfig {
        SuiteConfig {
            grid_sizes: default_grid_sizes(),
            seeds: default_seeds(),
            kmax: default_kmax(),
            tolerances: BTreeMap::new(),
            suites: default_suites(),
        }
    }
}

impl SuiteConfig {
    pub fn from_toml(text: &str) -> Result<SuiteConfig, ConfigError> {
        let config: SuiteConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<SuiteConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        SuiteConfig::from_toml(&text).map_err(|e| match e {
            ConfigError::Parse(msg) => ConfigError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.grid_sizes.is_empty() {
            return Err(invalid("grid_sizes", "must list at least one size"));
        }
        for &n in &self.grid_sizes {
            if n < 8 || n % 2 != 0 {
                return Err(invalid("grid_sizes", format!("{n} is not an even size >= 8")));
            }
            if 8 * self.kmax > n {
                return Err(invalid(
                    "kmax",
                    format!("kmax = {} needs every grid size >= {}, got {n}", self.kmax, 8 * self.kmax),
                ));
            }
        }
        if self.kmax == 0 {
            return Err(invalid("kmax", "must be positive"));
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "must list at least one seed"));
        }
        if self.suites.is_empty() {
            return Err(invalid("suites", "must list at least one suite"));
        }
        for (name, &tol) in &self.tolerances {
            name.parse::<Suite>()
                .map_err(|_| invalid(format!("tolerances.{name}"), "not a suite name"))?;
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(invalid(format!("tolerances.{name}"), format!("{tol} is not a positive tolerance")));
            }
        }
        Ok(())
    }

    /// The grid size used by every suite other than convergence.
    pub fn primary_size(&self) -> usize {
        *self.grid_sizes.iter().max().expect("validated non-empty")
    }

    pub fn tolerance_override(&self, suite: Suite) -> Option<f64> {
        self.tolerances.get(suite.name()).copied()
    }
}
