//! Config loading: shared keys, charts, expressions, grids and probe points.

use std::collections::BTreeMap;

use finslerforge_core::exprkit::{parse_expr, Chart, Expr};
use finslerforge_core::probes::random_point;
use finslerforge_core::solver::{Axis, Grid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::{CliError, Context};

/// Command-line overrides.
#[derive(Debug, Clone)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub grid_scale: f64,
    pub seed: Option<u64>,
}

/// Keys every config may carry next to its command-specific fields.
#[derive(Debug, Clone, Default)]
pub struct Common {
    pub seed: u64,
    pub tol: Option<f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub checks: Option<Vec<String>>,
    pub grid_scale: f64,
    pub tol_override: Option<f64>,
}

fn take<T: DeserializeOwned>(map: &mut Map<String, Value>, key: &str) -> Result<Option<T>, CliError> {
    match map.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v).map(Some).map_err(|e| CliError::config(key, e)),
    }
}

/// Splits the shared keys off a config object and decodes the rest as `T`.
pub fn load<T: DeserializeOwned>(config: &Value, command: &str, ov: &Overrides) -> Result<(Common, T), CliError> {
    let mut map = match config {
        Value::Object(m) => m.clone(),
        _ => return Err(CliError::config("<root>", "config must be a JSON object")),
    };
    if let Some(tag) = take::<String>(&mut map, "command")? {
        if tag != command {
            return Err(CliError::config("command", format!("config is for `{tag}`, not `{command}`")));
        }
    }
    let seed = take::<u64>(&mut map, "seed")?;
    let tol = take::<f64>(&mut map, "tol")?;
    let tolerances = take::<BTreeMap<String, f64>>(&mut map, "tolerances")?.unwrap_or_default();
    let checks = take::<Vec<String>>(&mut map, "checks")?;
    if let Some(t) = tol {
        positive("tol", t)?;
    }
    for (k, t) in &tolerances {
        positive(&format!("tolerances.{k}"), *t)?;
    }
    let common = Common {
        seed: ov.seed.or(seed).unwrap_or(0),
        tol,
        tolerances,
        checks,
        grid_scale: ov.grid_scale,
        tol_override: ov.tol,
    };
    let body = serde_json::from_value(Value::Object(map)).map_err(|e| CliError::config("<root>", e))?;
    Ok((common, body))
}

pub fn positive(path: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::config(path, format!("must be a positive number, got {v}")))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub base: Vec<String>,
    pub fiber: Vec<String>,
}

impl ChartSpec {
    pub fn build(spec: &Option<ChartSpec>, default: Chart) -> Result<Chart, CliError> {
        match spec {
            None => Ok(default),
            Some(s) => Chart::new(&s.base, &s.fiber).at("chart"),
        }
    }
}

pub fn expr(chart: &Chart, path: &str, text: &str) -> Result<Expr, CliError> {
    parse_expr(text, chart).at(path)
}

pub fn exprs(chart: &Chart, path: &str, texts: &[String], len: usize) -> Result<Vec<Expr>, CliError> {
    if texts.len() != len {
        return Err(CliError::config(path, format!("expected {len} expressions, got {}", texts.len())));
    }
    texts
        .iter()
        .enumerate()
        .map(|(k, t)| expr(chart, &format!("{path}[{k}]"), t))
        .collect()
}

pub fn coordinate(chart: &Chart, path: &str, name: &str) -> Result<usize, CliError> {
    chart
        .index(name)
        .ok_or_else(|| CliError::config(path, format!("undeclared coordinate `{name}`")))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub var: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// Tensor grid: coordinates without an axis keep their `base` value (default 0).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub base: BTreeMap<String, f64>,
    pub axes: Vec<AxisSpec>,
}

/// Applies `--grid-scale` to a point count.
pub fn scaled_count(count: usize, scale: f64) -> usize {
    ((count as f64 * scale).round() as usize).max(1)
}

impl GridSpec {
    pub fn build(&self, chart: &Chart, scale: f64) -> Result<Grid, CliError> {
        let mut base = vec![0.0; chart.len()];
        for (name, v) in &self.base {
            base[coordinate(chart, &format!("grid.base.{name}"), name)?] = *v;
        }
        let mut axes = Vec::with_capacity(self.axes.len());
        for (k, a) in self.axes.iter().enumerate() {
            let var = coordinate(chart, &format!("grid.axes[{k}].var"), &a.var)?;
            if a.count == 0 {
                return Err(CliError::config(format!("grid.axes[{k}].count"), "must be at least 1"));
            }
            if !(a.min.is_finite() && a.max.is_finite()) {
                return Err(CliError::config(format!("grid.axes[{k}]"), "bounds must be finite"));
            }
            axes.push(Axis {
                var,
                min: a.min,
                max: a.max,
                count: scaled_count(a.count, scale),
            });
        }
        Grid::new(base, axes).at("grid")
    }
}

/// Random probe points drawn uniformly from `[lo, hi]` in every coordinate.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub count: usize,
    #[serde(default = "default_lo")]
    pub lo: f64,
    #[serde(default = "default_hi")]
    pub hi: f64,
}

fn default_lo() -> f64 {
    -0.8
}

fn default_hi() -> f64 {
    0.8
}

pub fn points(
    explicit: &Option<Vec<Vec<f64>>>,
    probes: &Option<ProbeSpec>,
    dim: usize,
    common: &Common,
) -> Result<Vec<Vec<f64>>, CliError> {
    match (explicit, probes) {
        (Some(_), Some(_)) => Err(CliError::config("points", "give either `points` or `probes`, not both")),
        (None, None) => Err(CliError::config("points", "one of `points` or `probes` is required")),
        (Some(pts), None) => {
            for (k, p) in pts.iter().enumerate() {
                if p.len() != dim {
                    return Err(CliError::config(
                        format!("points[{k}]"),
                        format!("expected {dim} coordinates, got {}", p.len()),
                    ));
                }
            }
            Ok(pts.clone())
        }
        (None, Some(pr)) => {
            if !(pr.lo < pr.hi) {
                return Err(CliError::config("probes", "`lo` must be below `hi`"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
            let n = scaled_count(pr.count, common.grid_scale);
            Ok((0..n).map(|_| random_point(&mut rng, dim, pr.lo, pr.hi)).collect())
        }
    }
}
