//! `mdr`: parameter sweeps of the dispersion branches.

use finslerforge_core::hl::{mdr_omega2, HlConstants, MdrBranch, MdrParams, Sign};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::{self, scaled_count, Common, Overrides};
use crate::error::{CliError, Context};
use crate::report::{cell, num, Csv, Outcome};

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn values(&self, path: &str) -> Result<Vec<f64>, CliError> {
        let v = match self {
            OneOrMany::One(x) => vec![*x],
            OneOrMany::Many(v) => v.clone(),
        };
        if v.is_empty() {
            return Err(CliError::config(path, "needs at least one value"));
        }
        Ok(v)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BranchSpec {
    branch: String,
    sign: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AxisSpec {
    min: f64,
    max: f64,
    count: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MdrConfig {
    branches: Vec<BranchSpec>,
    kappa: OneOrMany,
    mu: OneOrMany,
    varpi: OneOrMany,
    #[serde(rename = "Lambda")]
    cc: OneOrMany,
    lambda: OneOrMany,
    #[serde(default = "zero")]
    eta: OneOrMany,
    c: Option<f64>,
    p: AxisSpec,
    /// `negative` or `positive`: adds a sign check over every row.
    expect_sign: Option<String>,
}

fn zero() -> OneOrMany {
    OneOrMany::One(0.0)
}

fn sign(path: &str, s: &Option<String>) -> Result<Option<Sign>, CliError> {
    match s.as_deref() {
        None => Ok(None),
        Some("+") => Ok(Some(Sign::Plus)),
        Some("-") => Ok(Some(Sign::Minus)),
        Some(o) => Err(CliError::config(path, format!("sign must be `+` or `-`, got `{o}`"))),
    }
}

pub fn run(config: &Value, ov: &Overrides) -> Result<(Common, Outcome), CliError> {
    let (common, c): (Common, MdrConfig) = config::load(config, "mdr", ov)?;
    let mut branches = Vec::new();
    for (k, b) in c.branches.iter().enumerate() {
        let s = sign(&format!("branches[{k}].sign"), &b.sign)?;
        branches.push(MdrBranch::parse(&b.branch, s).at(&format!("branches[{k}]"))?);
    }
    if branches.is_empty() {
        return Err(CliError::config("branches", "needs at least one branch"));
    }
    let expect = match c.expect_sign.as_deref() {
        None => None,
        Some("negative") => Some(-1.0),
        Some("positive") => Some(1.0),
        Some(o) => return Err(CliError::config("expect_sign", format!("expected `negative` or `positive`, got `{o}`"))),
    };
    if c.p.count == 0 || !(c.p.min >= 0.0) || !(c.p.max >= c.p.min) {
        return Err(CliError::config("p", "needs count >= 1 and 0 <= min <= max"));
    }
    let n = scaled_count(c.p.count, common.grid_scale);
    let ps: Vec<f64> = if n == 1 {
        vec![c.p.min]
    } else {
        (0..n).map(|k| c.p.min + (c.p.max - c.p.min) * k as f64 / (n - 1) as f64).collect()
    };
    let (kappas, mus, varpis) = (c.kappa.values("kappa")?, c.mu.values("mu")?, c.varpi.values("varpi")?);
    let (ccs, lambdas, etas) = (c.cc.values("Lambda")?, c.lambda.values("lambda")?, c.eta.values("eta")?);

    let mut csv = Csv::new(&["branch", "kappa", "mu", "varpi", "Lambda", "lambda", "eta", "sign", "p", "omega2"]);
    let mut violations = 0usize;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for br in &branches {
        for &kappa in &kappas {
            for &mu in &mus {
                for &varpi in &varpis {
                    for &cc in &ccs {
                        for &lambda in &lambdas {
                            for &eta in &etas {
                                let params = MdrParams {
                                    constants: HlConstants {
                                        kappa,
                                        mu,
                                        varpi,
                                        cc,
                                        lambda,
                                        eta,
                                        ..HlConstants::default()
                                    },
                                    c: c.c,
                                };
                                for &p in &ps {
                                    let w2 = mdr_omega2(*br, &params, p).at("mdr")?;
                                    if let Some(s) = expect {
                                        if !(w2 * s > 0.0) {
                                            violations += 1;
                                        }
                                    }
                                    lo = lo.min(w2);
                                    hi = hi.max(w2);
                                    csv.rows.push(vec![
                                        br.tag().to_string(),
                                        cell(kappa),
                                        cell(mu),
                                        cell(varpi),
                                        cell(cc),
                                        cell(lambda),
                                        cell(eta),
                                        br.sign().map(Sign::symbol).unwrap_or("").to_string(),
                                        cell(p),
                                        cell(w2),
                                    ]);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let mut out = Outcome::new();
    if expect.is_some() {
        // pass iff no row has the wrong sign
        out.checks.add("omega2_sign_violations", violations as f64, 1.0);
    }
    out.result("rows", json!(csv.rows.len()));
    out.result("omega2_min", num(lo));
    out.result("omega2_max", num(hi));
    out.csv = Some(csv);
    Ok((common, out))
}
