//! `verify-solution` and `generate-solution` on the three-shell ansatz.

use finslerforge_core::exprkit::{Chart, Expr};
use finslerforge_core::solver::{
    coord::DIM, cross_module_check, generate_solution, lc_constraints_check, liouville_psi, shell_residuals_with,
    FieldFn, GeneratingData, Grid, OuterShellForm, ShellAnsatz, SourceSpec, COORD_NAMES, FAMILIES,
};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::config::{self, Common, GridSpec, Overrides};
use crate::error::{CliError, Context};
use crate::report::{cell, num, Csv, Outcome};

const RESIDUAL_TOL: f64 = 1e-6;
const LC_TOL: f64 = 1e-8;
const CROSS_TOL: f64 = 1e-5;
/// Excluded points listed one by one in the warnings; the rest are counted.
const LISTED_EXCLUSIONS: usize = 5;

#[derive(Debug, Default)]
struct Sources {
    upsilon2: Option<String>,
    upsilon4: Option<String>,
    upsilon6: Option<String>,
    upsilon8: Option<String>,
}

impl Sources {
    fn build(&self, chart: &Chart) -> Result<SourceSpec, CliError> {
        let one = |name: &str, v: &Option<String>| match v {
            Some(t) => config::expr(chart, name, t),
            None => Ok(Expr::Const(0.0)),
        };
        Ok(SourceSpec::new([
            one("upsilon2", &self.upsilon2)?,
            one("upsilon4", &self.upsilon4)?,
            one("upsilon6", &self.upsilon6)?,
            one("upsilon8", &self.upsilon8)?,
        ]))
    }
}

fn optional_exprs(chart: &Chart, path: &str, v: &Option<Vec<String>>, len: usize) -> Result<Vec<Expr>, CliError> {
    match v {
        Some(t) => config::exprs(chart, path, t, len),
        None => Ok(vec![Expr::Const(0.0); len]),
    }
}

fn fields<const N: usize>(chart: &Chart, path: &str, v: &Option<Vec<String>>) -> Result<[FieldFn; N], CliError> {
    let e = optional_exprs(chart, path, v, N)?;
    Ok(std::array::from_fn(|k| FieldFn::from(e[k].clone())))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyConfig {
    g1: String,
    g2: String,
    h3: String,
    h4: String,
    h5: String,
    h6: String,
    h7: String,
    h8: String,
    w_i: Option<Vec<String>>,
    n_i: Option<Vec<String>>,
    w_alpha_1: Option<Vec<String>>,
    n_alpha_1: Option<Vec<String>>,
    w_alpha_2: Option<Vec<String>>,
    n_alpha_2: Option<Vec<String>>,
    upsilon2: Option<String>,
    upsilon4: Option<String>,
    upsilon6: Option<String>,
    upsilon8: Option<String>,
    outer_form: Option<String>,
    levi_civita: Option<bool>,
    cross_check_points: Option<usize>,
    grid: GridSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenerateConfig {
    eps: Option<f64>,
    psi: Option<String>,
    phi_hat: String,
    phi_hat_1: String,
    phi_hat_2: String,
    h0: Option<Vec<String>>,
    n0_i: Option<Vec<String>>,
    n1_i: Option<Vec<String>>,
    n0_alpha_1: Option<Vec<String>>,
    n1_alpha_1: Option<Vec<String>>,
    n0_alpha_2: Option<Vec<String>>,
    n1_alpha_2: Option<Vec<String>>,
    branch_signs: Option<Vec<f64>>,
    lower: Option<Vec<f64>>,
    upsilon2: Option<String>,
    upsilon4: Option<String>,
    upsilon6: Option<String>,
    upsilon8: Option<String>,
    levi_civita: Option<bool>,
    cross_check_points: Option<usize>,
    grid: GridSpec,
}

fn outer_form(v: &Option<String>) -> Result<OuterShellForm, CliError> {
    match v.as_deref() {
        None | Some("symmetric") => Ok(OuterShellForm::Symmetric),
        Some("printed") => Ok(OuterShellForm::Printed),
        Some(other) => Err(CliError::config(
            "outer_form",
            format!("expected `symmetric` or `printed`, got `{other}`"),
        )),
    }
}

/// Every `len / k`-th grid point, at most `k` of them.
fn spread(grid: &Grid, k: usize) -> Vec<Vec<f64>> {
    let pts = grid.points();
    let step = (pts.len() / k.max(1)).max(1);
    pts.into_iter().step_by(step).take(k).collect()
}

struct Extra<'a> {
    levi_civita: bool,
    cross_points: usize,
    form: OuterShellForm,
    /// Extra CSV columns per point.
    columns: &'a [(&'a str, &'a FieldFn)],
}

fn evaluate(a: &ShellAnsatz, s: &SourceSpec, grid: &Grid, extra: Extra) -> Result<Outcome, CliError> {
    let mut out = Outcome::new();
    let r = shell_residuals_with(a, s, grid, extra.form).at("solver")?;
    let mut fams = Map::new();
    for (name, v) in &r.families {
        out.checks.add(name, *v, RESIDUAL_TOL);
        fams.insert(name.clone(), num(*v));
    }
    for e in r.excluded.iter().take(LISTED_EXCLUSIONS) {
        let p: Vec<String> = e.point.iter().map(|x| cell(*x)).collect();
        out.warnings.push(format!("excluded degenerate point ({}): {}", p.join(", "), e.reason));
    }
    if r.excluded.len() > LISTED_EXCLUSIONS {
        out.warnings.push(format!("{} further degenerate points excluded", r.excluded.len() - LISTED_EXCLUSIONS));
    }
    out.result("families", Value::Object(fams));
    out.result("points_evaluated", json!(r.points.len()));
    out.result("points_excluded", json!(r.excluded.len()));
    if extra.levi_civita {
        let lc = lc_constraints_check(a, grid).at("levi_civita")?;
        let mut m = Map::new();
        for (name, v) in &lc.constraints {
            out.checks.add(&format!("lc_{name}"), *v, LC_TOL);
            m.insert(name.clone(), num(*v));
        }
        out.result("levi_civita", Value::Object(m));
    }
    if extra.cross_points > 0 {
        let c = cross_module_check(a, s, &spread(grid, extra.cross_points)).at("cross_check_points")?;
        out.checks.add("cross_horizontal", c.horizontal, CROSS_TOL);
        out.checks.add("cross_vertical", c.vertical, CROSS_TOL);
        out.result(
            "cross_check",
            json!({ "horizontal": num(c.horizontal), "vertical": num(c.vertical), "mixed": num(c.mixed) }),
        );
    }
    let mut header: Vec<&str> = COORD_NAMES.to_vec();
    header.extend(extra.columns.iter().map(|(n, _)| *n));
    header.extend(FAMILIES);
    let mut csv = Csv::new(&header);
    for pr in &r.points {
        let mut row: Vec<String> = pr.point.iter().map(|x| cell(*x)).collect();
        for (_, f) in extra.columns {
            row.push(cell(f.value(&pr.point).at("solver")?));
        }
        row.extend(pr.values.iter().map(|x| cell(*x)));
        csv.rows.push(row);
    }
    out.csv = Some(csv);
    Ok(out)
}

pub fn verify(config: &Value, ov: &Overrides) -> Result<(Common, Outcome), CliError> {
    let (common, c): (Common, VerifyConfig) = config::load(config, "verify-solution", ov)?;
    let chart = Chart::shell();
    let one = |name: &str, t: &str| config::expr(&chart, name, t).map(FieldFn::from);
    let a = ShellAnsatz {
        g: [one("g1", &c.g1)?, one("g2", &c.g2)?],
        h: [
            one("h3", &c.h3)?,
            one("h4", &c.h4)?,
            one("h5", &c.h5)?,
            one("h6", &c.h6)?,
            one("h7", &c.h7)?,
            one("h8", &c.h8)?,
        ],
        w: fields(&chart, "w_i", &c.w_i)?,
        n: fields(&chart, "n_i", &c.n_i)?,
        w1: fields(&chart, "w_alpha_1", &c.w_alpha_1)?,
        n1: fields(&chart, "n_alpha_1", &c.n_alpha_1)?,
        w2: fields(&chart, "w_alpha_2", &c.w_alpha_2)?,
        n2: fields(&chart, "n_alpha_2", &c.n_alpha_2)?,
    };
    a.validate().at("ansatz")?;
    let s = Sources {
        upsilon2: c.upsilon2,
        upsilon4: c.upsilon4,
        upsilon6: c.upsilon6,
        upsilon8: c.upsilon8,
    }
    .build(&chart)?;
    let grid = c.grid.build(&chart, common.grid_scale)?;
    let out = evaluate(
        &a,
        &s,
        &grid,
        Extra {
            levi_civita: c.levi_civita.unwrap_or(false),
            cross_points: c.cross_check_points.unwrap_or(0),
            form: outer_form(&c.outer_form)?,
            columns: &[],
        },
    )?;
    Ok((common, out))
}

fn triple<T: Copy>(path: &str, v: &Option<Vec<T>>, default: T) -> Result<[T; 3], CliError> {
    match v {
        None => Ok([default; 3]),
        Some(x) if x.len() == 3 => Ok([x[0], x[1], x[2]]),
        Some(x) => Err(CliError::config(path, format!("expected 3 entries, got {}", x.len()))),
    }
}

pub fn generate(config: &Value, ov: &Overrides) -> Result<(Common, Outcome), CliError> {
    let (common, c): (Common, GenerateConfig) = config::load(config, "generate-solution", ov)?;
    let chart = Chart::shell();
    let s = Sources {
        upsilon2: c.upsilon2,
        upsilon4: c.upsilon4,
        upsilon6: c.upsilon6,
        upsilon8: c.upsilon8,
    }
    .build(&chart)?;
    let eps = c.eps.unwrap_or(1.0);
    let psi = match &c.psi {
        Some(t) => config::expr(&chart, "psi", t)?,
        None => {
            let lh = s.lambda_h();
            if !lh.variables().is_empty() {
                return Err(CliError::config("psi", "required when the horizontal source is not constant"));
            }
            liouville_psi(eps, lh.eval(&[0.0; DIM]).at("upsilon4")?)
        }
    };
    let phi = [
        config::expr(&chart, "phi_hat", &c.phi_hat)?,
        config::expr(&chart, "phi_hat_1", &c.phi_hat_1)?,
        config::expr(&chart, "phi_hat_2", &c.phi_hat_2)?,
    ];
    let mut gd = GeneratingData::new(eps, psi, phi);
    if let Some(h0) = &c.h0 {
        let e = config::exprs(&chart, "h0", h0, 3)?;
        gd.h0 = [e[0].clone(), e[1].clone(), e[2].clone()];
    }
    gd.n0 = [
        optional_exprs(&chart, "n0_i", &c.n0_i, 2)?,
        optional_exprs(&chart, "n0_alpha_1", &c.n0_alpha_1, 4)?,
        optional_exprs(&chart, "n0_alpha_2", &c.n0_alpha_2, 6)?,
    ];
    gd.n1 = [
        optional_exprs(&chart, "n1_i", &c.n1_i, 2)?,
        optional_exprs(&chart, "n1_alpha_1", &c.n1_alpha_1, 4)?,
        optional_exprs(&chart, "n1_alpha_2", &c.n1_alpha_2, 6)?,
    ];
    gd.signs = triple("branch_signs", &c.branch_signs, 1.0)?;
    gd.lower = triple("lower", &c.lower, 0.0)?;
    let grid = c.grid.build(&chart, common.grid_scale)?;
    let a = generate_solution(&gd, &s, &grid).at("generate")?;
    let names = ["h3", "h4", "h5", "h6", "h7", "h8"];
    let columns: Vec<(&str, &FieldFn)> = names.iter().copied().zip(a.h.iter()).collect();
    let out = evaluate(
        &a,
        &s,
        &grid,
        Extra {
            levi_civita: c.levi_civita.unwrap_or(false),
            cross_points: c.cross_check_points.unwrap_or(0),
            form: OuterShellForm::Symmetric,
            columns: &columns,
        },
    )?;
    Ok((common, out))
}
