//! `hl-action`: ADM data, curvature invariants and action densities at points.

use finslerforge_core::exprkit::Chart;
use finslerforge_core::hl::{curvature_invariants_3d, gr_limit_constants, kinetic_density, potential_density, HlConstants, HlFields};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::{self, Common, Overrides};
use crate::error::{CliError, Context};
use crate::report::{num, vector, Csv, Outcome};

const COTTON_TOL: f64 = 1e-8;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantsSpec {
    kappa: Option<f64>,
    mu: Option<f64>,
    varpi: Option<f64>,
    #[serde(rename = "Lambda")]
    cc: Option<f64>,
    lambda: Option<f64>,
    eta: Option<f64>,
    z: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HlConfig {
    chart: Option<Vec<String>>,
    lapse: String,
    shift: Option<Vec<String>>,
    g: Vec<String>,
    constants: Option<ConstantsSpec>,
    non_projectable: Option<bool>,
    points: Vec<Vec<f64>>,
}

pub fn run(config: &Value, ov: &Overrides) -> Result<(Common, Outcome), CliError> {
    let (common, c): (Common, HlConfig) = config::load(config, "hl-action", ov)?;
    let chart = match &c.chart {
        None => Chart::new(&["t", "x", "y", "z"], &[] as &[&str]).at("chart")?,
        Some(names) => Chart::new(names, &[] as &[String]).at("chart")?,
    };
    let d = HlConstants::default();
    let k = c.constants.unwrap_or(ConstantsSpec {
        kappa: None,
        mu: None,
        varpi: None,
        cc: None,
        lambda: None,
        eta: None,
        z: None,
    });
    let constants = HlConstants {
        kappa: k.kappa.unwrap_or(d.kappa),
        mu: k.mu.unwrap_or(d.mu),
        varpi: k.varpi.unwrap_or(d.varpi),
        cc: k.cc.unwrap_or(d.cc),
        lambda: k.lambda.unwrap_or(d.lambda),
        eta: k.eta.unwrap_or(d.eta),
        z: k.z.unwrap_or(d.z),
    };
    let lapse = config::expr(&chart, "lapse", &c.lapse)?;
    let shift = match &c.shift {
        Some(s) => config::exprs(&chart, "shift", s, 3)?,
        None => config::exprs(&chart, "shift", &["0".into(), "0".into(), "0".into()], 3)?,
    };
    let g = config::exprs(&chart, "g", &c.g, 9)?;
    if chart.len() != 4 {
        return Err(CliError::config("chart", "needs time plus three spatial coordinates"));
    }
    let fields = HlFields {
        chart: chart.clone(),
        lapse,
        shift: [shift[0].clone(), shift[1].clone(), shift[2].clone()],
        g: std::array::from_fn(|i| g[i].clone()),
        constants,
        non_projectable: c.non_projectable.unwrap_or(false),
    };
    fields.check_projectable().at("lapse")?;
    if c.points.is_empty() {
        return Err(CliError::config("points", "needs at least one point"));
    }

    let mut out = Outcome::new();
    let (mut sym, mut trace, mut vanish): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut pts = Vec::new();
    let mut csv = Csv::new(&["point", "kinetic", "potential", "K", "R", "sqrt_g"]);
    for (idx, p) in c.points.iter().enumerate() {
        if p.len() != 4 {
            return Err(CliError::config(format!("points[{idx}]"), format!("expected 4 coordinates, got {}", p.len())));
        }
        let inv = curvature_invariants_3d(&fields, p).at("hl_action")?;
        let kin = kinetic_density(&inv, &constants);
        let pot = potential_density(&inv, &constants).at("constants.lambda")?;
        let cot = &inv.cotton;
        sym = sym.max((cot - cot.transpose()).amax());
        trace = trace.max(inv.g.component_mul(cot).sum().abs());
        vanish = vanish.max(cot.amax());
        pts.push(json!({
            "index": idx,
            "point": vector(p),
            "kinetic": num(kin),
            "potential": num(pot),
            "extrinsic_trace": num(inv.k_trace),
            "ricci_scalar": num(inv.r),
            "sqrt_g": num(inv.sqrt_g),
        }));
        csv.rows.push(vec![
            idx.to_string(),
            crate::report::cell(kin),
            crate::report::cell(pot),
            crate::report::cell(inv.k_trace),
            crate::report::cell(inv.r),
            crate::report::cell(inv.sqrt_g),
        ]);
    }
    out.checks.add("cotton_symmetry", sym, COTTON_TOL);
    out.checks.add("cotton_traceless", trace, COTTON_TOL);
    out.checks.add_optional("cotton_vanishes", vanish, COTTON_TOL);
    out.result("points", Value::Array(pts));
    match gr_limit_constants(constants.kappa, constants.mu, constants.cc, constants.lambda) {
        Ok(gr) => out.result(
            "gr_limit",
            json!({ "c": num(gr.c), "g_newton": num(gr.g_newton), "lambda_gr": num(gr.lambda_gr) }),
        ),
        Err(e) => out.warnings.push(format!("no infrared limit: {e}")),
    }
    out.csv = Some(csv);
    Ok((common, out))
}
