//! Run configuration: defaults, config-file loading, flag overrides, and
//! exact-value parsing shared by the argument grammar.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use secomp_core::bounds::OptimizerConfig;
use secomp_core::prob::parse_rational;
use secomp_core::Rat;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

/// A floor may be written as a JSON number or as a rational string.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum NumberOrText {
    Num(f64),
    Text(String),
}

/// Settings shared by the search-backed commands. Loaded from `--config`
/// JSON, then overridden by explicit flags.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub restarts: usize,
    floors: Vec<NumberOrText>,
    pub tolerance: f64,
    pub output_format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 7,
            restarts: 3,
            floors: vec![
                NumberOrText::Num(1e-2),
                NumberOrText::Num(1e-4),
                NumberOrText::Num(1e-6),
            ],
            tolerance: 5e-3,
            output_format: Format::Markdown,
        }
    }
}

impl RunConfig {
    pub fn load(path: &str) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::parse(format!("cannot read config `{path}`: {e}")))?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::parse(format!("config `{path}`: {e}")))?;
        Ok(config)
    }

    pub fn floors(&self) -> Result<Vec<f64>, CliError> {
        self.floors
            .iter()
            .map(|f| match f {
                NumberOrText::Num(v) => Ok(*v),
                NumberOrText::Text(s) => parse_float_token(s),
            })
            .collect()
    }

    pub fn set_floors(&mut self, floors: &[f64]) {
        self.floors = floors.iter().map(|f| NumberOrText::Num(*f)).collect();
    }

    /// Enforce the declared invariants before any engine runs.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.restarts == 0 {
            return Err(CliError::parse("restarts must be at least 1"));
        }
        if !(self.tolerance > 0.0) {
            return Err(CliError::parse("tolerance must be positive"));
        }
        let floors = self.floors()?;
        if floors.is_empty() {
            return Err(CliError::parse("at least one floor is required"));
        }
        for f in &floors {
            if !(*f > 0.0 && *f < 0.5) {
                return Err(CliError::parse(format!(
                    "floor {f} is outside the open interval (0, 1/2)"
                )));
            }
        }
        for w in floors.windows(2) {
            if w[1] >= w[0] {
                return Err(CliError::parse(format!(
                    "floors must be strictly decreasing, got {} before {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }

    pub fn optimizer(&self) -> Result<OptimizerConfig, CliError> {
        Ok(OptimizerConfig {
            floors: self.floors()?,
            restarts: self.restarts,
            seed: self.seed,
            ..OptimizerConfig::default()
        })
    }
}

/// Parse a numeric token that does not need to be exact: a float literal or
/// an `a/b` fraction. Used for floors and tolerances.
pub fn parse_float_token(s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    let bad = || CliError::parse(format!("`{s}` is not a number or fraction"));
    if let Some((a, b)) = s.split_once('/') {
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        if b == 0.0 {
            return Err(CliError::parse(format!("`{s}` divides by zero")));
        }
        Ok(a / b)
    } else {
        s.parse().map_err(|_| bad())
    }
}

/// Parse an exact probability value: `a/b`, an integer, or a finite decimal
/// such as `0.456` (= 456/1000). Floats with exponents are rejected — exact
/// arithmetic needs an exact source.
pub fn parse_exact(s: &str) -> Result<Rat, CliError> {
    let s = s.trim();
    let text = if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(CliError::parse(format!("`{s}` is not an exact decimal")));
        }
        let int = if int.is_empty() { "0" } else { int };
        format!("{int}{frac}/1{zeros}", zeros = "0".repeat(frac.len()))
    } else {
        s.to_string()
    };
    parse_rational(&text)
        .map_err(|e| CliError::parse(format!("`{s}` is not an exact rational: {e}")))
}

/// Split a comma-separated list of exact values.
pub fn parse_exact_list(s: &str) -> Result<Vec<Rat>, CliError> {
    s.split(',').map(parse_exact).collect()
}
