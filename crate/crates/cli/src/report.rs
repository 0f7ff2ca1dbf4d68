//! Checks, reports and artifact files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::config::Common;
use crate::error::CliError;

/// JSON number for finite values, a string such as `"NaN"` otherwise.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::String(format!("{x}"))
    }
}

pub fn rows(m: &nalgebra::DMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| num(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn vector(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

/// Shortest round-trip text for CSV cells.
pub fn cell(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub max_residual: Value,
    pub tolerance: f64,
    pub pass: bool,
}

struct Candidate {
    name: String,
    residual: f64,
    default_tol: f64,
    enabled: bool,
}

/// Collects candidate checks; the config's `checks` list picks which ones run.
pub struct CheckSet {
    candidates: Vec<Candidate>,
}

impl CheckSet {
    pub fn new() -> CheckSet {
        CheckSet { candidates: Vec::new() }
    }

    /// A check that runs unless the config selects others.
    pub fn add(&mut self, name: &str, residual: f64, default_tol: f64) {
        self.push(name, residual, default_tol, true);
    }

    /// A check that runs only when the config names it.
    pub fn add_optional(&mut self, name: &str, residual: f64, default_tol: f64) {
        self.push(name, residual, default_tol, false);
    }

    fn push(&mut self, name: &str, residual: f64, default_tol: f64, enabled: bool) {
        self.candidates.push(Candidate {
            name: name.to_string(),
            residual,
            default_tol,
            enabled,
        });
    }

    /// Tolerance precedence: `--tol`, then `tolerances.<name>`, then `tol`, then the command default.
    pub fn finish(self, common: &Common) -> Result<Vec<Check>, CliError> {
        if let Some(sel) = &common.checks {
            for (k, name) in sel.iter().enumerate() {
                if !self.candidates.iter().any(|c| &c.name == name) {
                    let known: Vec<&str> = self.candidates.iter().map(|c| c.name.as_str()).collect();
                    return Err(CliError::config(
                        format!("checks[{k}]"),
                        format!("unknown check `{name}`; available: {}", known.join(", ")),
                    ));
                }
            }
        }
        for name in common.tolerances.keys() {
            if !self.candidates.iter().any(|c| &c.name == name) {
                return Err(CliError::config(format!("tolerances.{name}"), "no such check"));
            }
        }
        Ok(self
            .candidates
            .into_iter()
            .filter(|c| match &common.checks {
                Some(sel) => sel.contains(&c.name),
                None => c.enabled,
            })
            .map(|c| {
                let tol = common
                    .tol_override
                    .or_else(|| common.tolerances.get(&c.name).copied())
                    .or(common.tol)
                    .unwrap_or(c.default_tol);
                Check {
                    pass: c.residual < tol,
                    max_residual: num(c.residual),
                    tolerance: tol,
                    name: c.name,
                }
            })
            .collect())
    }
}

impl Default for CheckSet {
    fn default() -> Self {
        CheckSet::new()
    }
}

/// Plot-ready table written next to the report.
pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Csv {
        Csv {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let io = |source: std::io::Error| CliError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(|e| io(e.into()))?;
        w.write_record(&self.header).map_err(|e| io(e.into()))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| io(e.into()))?;
        }
        w.flush().map_err(io)
    }
}

/// What a command hands back to the driver.
pub struct Outcome {
    pub checks: CheckSet,
    pub results: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
    pub csv: Option<Csv>,
}

impl Outcome {
    pub fn new() -> Outcome {
        Outcome {
            checks: CheckSet::new(),
            results: BTreeMap::new(),
            warnings: Vec::new(),
            csv: None,
        }
    }

    pub fn result(&mut self, key: &str, v: Value) {
        self.results.insert(key.to_string(), v);
    }
}

impl Default for Outcome {
    fn default() -> Self {
        Outcome::new()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub warnings: Vec<String>,
    pub results: BTreeMap<String, Value>,
    pub artifacts: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

impl Report {
    pub fn new(command: &str, config: Value, checks: Vec<Check>, mut warnings: Vec<String>, results: BTreeMap<String, Value>) -> Report {
        if checks.is_empty() {
            warnings.push("no checks were run; the report passes vacuously".into());
        }
        Report {
            command: command.to_string(),
            config,
            pass: checks.iter().all(|c| c.pass),
            checks,
            warnings,
            results,
            artifacts: Vec::new(),
            wall_time_seconds: None,
        }
    }

    /// Pretty JSON with object keys in sorted order.
    pub fn to_json(&self) -> String {
        // going through Value sorts every object by key
        let v = serde_json::to_value(self).expect("report is plain data");
        let mut s = serde_json::to_string_pretty(&v).expect("report is plain data");
        s.push('\n');
        s
    }

    pub fn emit(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_json()).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}
