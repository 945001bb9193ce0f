//! Scenario files: versioned JSON describing a seeded batch of checks.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::checks::find_check;
use crate::InputError;

pub const SCENARIO_SCHEMA: &str = "polydisc.scenario/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Matrix,
    Hardy,
    Mixed,
}

impl Regime {
    /// Whether a check declared for `check` runs under this scenario regime.
    pub fn admits(self, check: Regime) -> bool {
        self == Regime::Mixed || self == check
    }
}

/// Parameters shared by the seeded instance generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Generator {
    pub instances: usize,
    pub max_factors: usize,
    pub max_dim: usize,
    pub min_norm: f64,
    pub norm_cap: f64,
    pub degree: usize,
    pub vars: usize,
    pub coeff_dim: usize,
}

impl Default for Generator {
    fn default() -> Self {
        Generator {
            instances: 3,
            max_factors: 2,
            max_dim: 3,
            min_norm: 0.3,
            norm_cap: 0.8,
            degree: 12,
            vars: 2,
            coeff_dim: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Replaces every registry default when set; per-check overrides still win.
    pub default: Option<f64>,
}

/// A check entry: either a bare name or `{ "name": .., "tol": .. }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CheckSpec {
    Name(String),
    Detailed {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
}

impl CheckSpec {
    pub fn name(&self) -> &str {
        match self {
            CheckSpec::Name(n) | CheckSpec::Detailed { name: n, .. } => n,
        }
    }

    pub fn tol(&self) -> Option<f64> {
        match self {
            CheckSpec::Name(_) => None,
            CheckSpec::Detailed { tol, .. } => *tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    pub name: String,
    pub seed: u64,
    pub regime: Regime,
    #[serde(default)]
    pub generator: Generator,
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, InputError> {
        let s: Scenario =
            serde_json::from_str(text).map_err(|e| InputError::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, InputError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| InputError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<(), InputError> {
        if self.schema != SCENARIO_SCHEMA {
            return Err(InputError::Parse(format!(
                "schema must be \"{SCENARIO_SCHEMA}\", found \"{}\"",
                self.schema
            )));
        }
        for c in &self.checks {
            if find_check(c.name()).is_none() {
                return Err(InputError::UnknownCheck(c.name().to_string()));
            }
            if let Some(t) = c.tol() {
                positive("tol", t)?;
            }
        }
        if let Some(t) = self.tolerances.default {
            positive("tolerances.default", t)?;
        }
        let g = &self.generator;
        for (field, v) in [
            ("instances", g.instances),
            ("max_factors", g.max_factors),
            ("max_dim", g.max_dim),
            ("vars", g.vars),
            ("coeff_dim", g.coeff_dim),
        ] {
            if v == 0 {
                return Err(InputError::Invalid(format!(
                    "generator.{field} must be positive"
                )));
            }
        }
        if !(g.norm_cap > 0.0 && g.norm_cap < 1.0) {
            return Err(InputError::Invalid(
                "generator.norm_cap must lie in (0, 1)".into(),
            ));
        }
        if !(g.min_norm > 0.0 && g.min_norm <= g.norm_cap) {
            return Err(InputError::Invalid(
                "generator.min_norm must lie in (0, norm_cap]".into(),
            ));
        }
        Ok(())
    }
}

fn positive(field: &str, v: f64) -> Result<(), InputError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(InputError::Invalid(format!(
            "{field} must be a positive number"
        )))
    }
}
