//! Scenario runner for the polydisc checks.
//!
//! A scenario names a seed, a generator configuration and an ordered list of
//! checks from [`checks::REGISTRY`]. Running it yields a [`Report`] whose
//! numeric fields depend only on the scenario file and the crate version.

pub mod checks;
pub mod scenario;

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use checks::{find_check, Context, REGISTRY};
pub use scenario::{CheckSpec, Generator, Regime, Scenario, Tolerances, SCENARIO_SCHEMA};

pub const REPORT_SCHEMA: &str = "polydisc.report/1";

/// Errors that make a scenario unusable. All map to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub enum InputError {
    Io(String),
    Parse(String),
    Invalid(String),
    UnknownCheck(String),
    SizeOverflow {
        check: String,
        size: usize,
        cap: usize,
    },
}

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InputError::Io(m) => write!(f, "cannot read scenario: {m}"),
            InputError::Parse(m) => write!(f, "invalid scenario: {m}"),
            InputError::Invalid(m) => write!(f, "invalid scenario: {m}"),
            InputError::UnknownCheck(n) => {
                write!(f, "unknown check \"{n}\" (see `polydisc list-checks`)")
            }
            InputError::SizeOverflow { check, size, cap } => {
                write!(
                    f,
                    "check \"{check}\" needs a basis of size {size}, above the cap {cap}"
                )
            }
        }
    }
}

impl std::error::Error for InputError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    pub tol: f64,
    pub residual: Option<f64>,
    pub tail_bound: Option<f64>,
    pub safe_cutoff: Option<usize>,
    pub elapsed_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub version: &'static str,
    pub scenario: Scenario,
    pub checks: Vec<CheckRecord>,
    pub overall: Status,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.overall == Status::Pass {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Fixed-width table of the check records.
    pub fn table(&self) -> String {
        let mut out = format!(
            "scenario {} (seed {})\n",
            self.scenario.name, self.scenario.seed
        );
        let _ = writeln!(
            out,
            "{:<26} {:<8} {:>11} {:>11} {:>11} {:>7} {:>9}",
            "check", "status", "residual", "tail", "tol", "cutoff", "ms"
        );
        let num = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3e}"));
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<26} {:<8} {:>11} {:>11} {:>11.1e} {:>7} {:>9}",
                c.name,
                c.status.as_str(),
                num(c.residual),
                num(c.tail_bound),
                c.tol,
                c.safe_cutoff
                    .map_or_else(|| "-".to_string(), |x| x.to_string()),
                c.elapsed_ms
            );
            if let Some(e) = &c.error {
                let _ = writeln!(out, "    error: {e}");
            }
        }
        let _ = writeln!(out, "overall: {}", self.overall.as_str());
        out
    }
}

/// Runs every check of `scenario` in declared order.
///
/// Check `i` draws from stream `i` of a ChaCha8 generator keyed by the
/// scenario seed, so adding a check never perturbs the instances of another.
pub fn run(scenario: &Scenario) -> Result<Report, InputError> {
    let mut records = Vec::with_capacity(scenario.checks.len());
    for (i, spec) in scenario.checks.iter().enumerate() {
        let check = find_check(spec.name())
            .ok_or_else(|| InputError::UnknownCheck(spec.name().to_string()))?;
        let tol = spec
            .tol()
            .or(scenario.tolerances.default)
            .unwrap_or(check.default_tol);
        let mut record = CheckRecord {
            name: check.name.to_string(),
            status: Status::Skipped,
            tol,
            residual: None,
            tail_bound: None,
            safe_cutoff: None,
            elapsed_ms: 0,
            error: None,
        };
        if scenario.regime.admits(check.regime) {
            let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
            rng.set_stream(i as u64);
            let mut cx = Context {
                gen: &scenario.generator,
                rng,
                tol,
            };
            let start = Instant::now();
            let result = (check.run)(&mut cx);
            record.elapsed_ms = start.elapsed().as_millis() as u64;
            match result {
                Ok(o) => {
                    record.status = if o.pass { Status::Pass } else { Status::Fail };
                    record.residual = Some(o.residual).filter(|r| r.is_finite());
                    record.tail_bound = Some(o.tail_bound);
                    record.safe_cutoff = Some(o.safe_cutoff).filter(|&c| c != usize::MAX);
                }
                Err(polydisc::Error::SizeOverflow { size, cap }) => {
                    return Err(InputError::SizeOverflow {
                        check: check.name.to_string(),
                        size,
                        cap,
                    });
                }
                Err(e) => {
                    record.status = Status::Fail;
                    record.error = Some(e.to_string());
                }
            }
        }
        records.push(record);
    }
    let overall = if records.iter().any(|r| r.status == Status::Fail) {
        Status::Fail
    } else {
        Status::Pass
    };
    Ok(Report {
        schema: REPORT_SCHEMA,
        version: env!("CARGO_PKG_VERSION"),
        scenario: scenario.clone(),
        checks: records,
        overall,
    })
}

pub fn run_scenario(path: &Path) -> Result<Report, InputError> {
    run(&Scenario::load(path)?)
}

/// One line per registered check: name, regime, anchor, description.
pub fn list_checks() -> Vec<String> {
    REGISTRY
        .iter()
        .map(|c| {
            let regime = match c.regime {
                Regime::Matrix => "matrix",
                Regime::Hardy => "hardy",
                Regime::Mixed => "mixed",
            };
            format!(
                "{:<26} {:<7} [{}] {}",
                c.name, regime, c.anchor, c.description
            )
        })
        .collect()
}
