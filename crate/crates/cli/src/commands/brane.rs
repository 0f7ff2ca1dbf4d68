//! `brane`: trapping profile, sources and the measured conservation residual.

use finslerforge_core::brane::{brane_profile, brane_sources_and_conservation, AMode};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::{self, scaled_count, Common, Overrides};
use crate::error::{CliError, Context};
use crate::report::{cell, num, Csv, Outcome};

const ORIGIN_TOL: f64 = 1e-15;
const WIDTH_TOL: f64 = 1e-12;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleSpec {
    count: usize,
    /// Half-width of the sampled window in units of the brane width.
    #[serde(default = "default_span")]
    span: f64,
}

fn default_span() -> f64 {
    5.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BraneConfig {
    mass: f64,
    #[serde(rename = "Lambda")]
    lambda: f64,
    m: u32,
    phi0: f64,
    a: Option<f64>,
    samples: Option<SampleSpec>,
}

pub fn run(config: &Value, ov: &Overrides) -> Result<(Common, Outcome), CliError> {
    let (common, c): (Common, BraneConfig) = config::load(config, "brane", ov)?;
    let mode = match c.a {
        Some(a) => AMode::Given(a),
        None => AMode::Solve,
    };
    let p = brane_profile(c.mass, c.lambda, c.m, c.phi0, mode).at("brane")?;
    let (count, span) = match &c.samples {
        Some(s) => (s.count, config::positive("samples.span", s.span)?),
        None => (101, default_span()),
    };
    if count == 0 {
        return Err(CliError::config("samples.count", "must be at least 1"));
    }
    let count = scaled_count(count, common.grid_scale);
    let half = span * p.eps;
    let grid: Vec<f64> = if count == 1 {
        vec![0.0]
    } else {
        (0..count).map(|k| -half + 2.0 * half * k as f64 / (count - 1) as f64).collect()
    };
    let r = brane_sources_and_conservation(&p, &grid);

    let mut out = Outcome::new();
    let width2 = 40.0 * c.mass.powi(4) / (3.0 * c.lambda);
    out.checks.add("phi2_at_origin", (p.phi2(0.0) - 1.0).abs(), ORIGIN_TOL);
    out.checks.add("warp_at_origin", (p.warp(0.0) - 1.0).abs(), ORIGIN_TOL);
    out.checks.add("width", (p.eps * p.eps - width2).abs() / width2, WIDTH_TOL);
    out.result(
        "profile",
        json!({
            "eps": num(p.eps),
            "a": num(p.a),
            "a_solved": c.a.is_none(),
            "lstar": num(p.lstar),
        }),
    );
    out.result("max_conservation_residual", num(r.max_conservation_residual));
    out.result("samples", json!(r.samples.len()));
    let mut csv = Csv::new(&["y5", "phi2", "hbar", "K1", "K2", "cons_residual"]);
    for s in &r.samples {
        csv.rows
            .push([s.y5, s.phi2, s.hbar, s.k1, s.k2, s.cons_residual].iter().map(|x| cell(*x)).collect());
    }
    out.csv = Some(csv);
    Ok((common, out))
}
