//! `hessian`, `connection` and `curvature`: pointwise geometry of a
//! generating function or of an explicit d-metric.

use finslerforge_core::dconnection::{
    canonical_dconnection, compat_residual, curvature_and_ricci, levicivita_adapted_jets, torsion_and_distortion,
};
use finslerforge_core::exprkit::{Chart, Expr};
use finslerforge_core::finsler::{signature, DMetricField, ExprDMetric, FinslerDMetric, FinslerFunction};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::{self, ChartSpec, Common, Overrides, ProbeSpec};
use crate::error::{CliError, Context};
use crate::report::{cell, num, rows, vector, Csv, Outcome};

const HOMOGENEITY_BETAS: [f64; 3] = [0.5, 2.0, 7.0];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryConfig {
    chart: Option<ChartSpec>,
    lagrangian: Option<String>,
    g: Option<Vec<String>>,
    h: Option<Vec<String>>,
    n: Option<Vec<String>>,
    lstar: Option<f64>,
    points: Option<Vec<Vec<f64>>>,
    probes: Option<ProbeSpec>,
}

struct Loaded {
    common: Common,
    chart: Chart,
    finsler: Option<FinslerFunction>,
    dmetric: Box<dyn DMetricField>,
    points: Vec<Vec<f64>>,
}

fn load(config: &Value, command: &str, ov: &Overrides, need_lagrangian: bool) -> Result<Loaded, CliError> {
    let (common, c): (Common, GeometryConfig) = config::load(config, command, ov)?;
    let chart = ChartSpec::build(&c.chart, Chart::finsler())?;
    let lstar = config::positive("lstar", c.lstar.unwrap_or(1.0))?;
    let explicit = c.g.is_some() || c.h.is_some() || c.n.is_some();
    let (finsler, dmetric): (Option<FinslerFunction>, Box<dyn DMetricField>) = match (&c.lagrangian, explicit) {
        (Some(_), true) => {
            return Err(CliError::config("lagrangian", "give either `lagrangian` or `g`/`h`/`n`, not both"));
        }
        (Some(text), false) => {
            let f = FinslerFunction::new(chart.clone(), config::expr(&chart, "lagrangian", text)?).at("lagrangian")?;
            (Some(f.clone()), Box::new(FinslerDMetric::new(f, lstar)))
        }
        (None, true) if !need_lagrangian => {
            let (nh, nv) = (chart.n_base(), chart.n_fiber());
            let block = |name: &str, v: &Option<Vec<String>>, len: usize| -> Result<Vec<Expr>, CliError> {
                match v {
                    Some(t) => config::exprs(&chart, name, t, len),
                    None if name == "n" => Ok(vec![Expr::Const(0.0); len]),
                    None => Err(CliError::config(name, "missing d-metric block")),
                }
            };
            let g = block("g", &c.g, nh * nh)?;
            let h = block("h", &c.h, nv * nv)?;
            let n = block("n", &c.n, nv * nh)?;
            (None, Box::new(ExprDMetric::new(chart.clone(), g, h, n, lstar).at("g")?))
        }
        _ if need_lagrangian => return Err(CliError::config("lagrangian", "required for this command")),
        _ => return Err(CliError::config("lagrangian", "give a `lagrangian` or the d-metric blocks `g`, `h`, `n`")),
    };
    let points = config::points(&c.points, &c.probes, chart.len(), &common)?;
    Ok(Loaded {
        common,
        chart,
        finsler,
        dmetric,
        points,
    })
}

/// Runs `f` at every point; numeric failures exclude the point with a warning.
fn scan<T>(
    out: &mut Outcome,
    points: &[Vec<f64>],
    f: impl Fn(&[f64]) -> Result<T, CliError>,
) -> Result<Vec<(usize, T)>, CliError> {
    let mut kept = Vec::new();
    for (k, p) in points.iter().enumerate() {
        match f(p) {
            Ok(v) => kept.push((k, v)),
            Err(CliError::Numeric { message, .. }) => out.warnings.push(format!("point {k} excluded: {message}")),
            Err(e) => return Err(e),
        }
    }
    if kept.is_empty() {
        return Err(CliError::numeric("geometry", "every point was excluded"));
    }
    Ok(kept)
}

fn max_by<T>(v: &[(usize, T)], f: impl Fn(&T) -> f64) -> f64 {
    v.iter().map(|(_, t)| f(t)).fold(0.0, |m: f64, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x) })
}

pub fn hessian(config: &Value, ov: &Overrides) -> Result<(Common, Outcome), CliError> {
    let l = load(config, "hessian", ov, true)?;
    let f = l.finsler.expect("lagrangian required");
    let fiber: Vec<usize> = l.chart.fiber_indices().collect();
    let mut out = Outcome::new();
    struct Row {
        value: f64,
        hessian: nalgebra::DMatrix<f64>,
        euler: f64,
        homogeneity: f64,
    }
    let rows_ = scan(&mut out, &l.points, |p| {
        let jet = f.l.eval_jet(p, 1, &fiber).at("lagrangian")?;
        let value = jet.value();
        let euler_sum: f64 = fiber.iter().enumerate().map(|(k, &i)| p[i] * jet.d(&[k])).sum();
        let euler = (euler_sum - 2.0 * value).abs() / value.abs().max(1.0);
        let hessian = f.hessian(p).at("lagrangian")?;
        let scale = hessian.amax().max(1.0);
        let mut homogeneity: f64 = 0.0;
        for beta in HOMOGENEITY_BETAS {
            let mut q = p.to_vec();
            for &i in &fiber {
                q[i] *= beta;
            }
            let hq = f.hessian(&q).at("lagrangian")?;
            homogeneity = homogeneity.max((hq - &hessian).amax() / scale);
        }
        Ok(Row {
            value,
            hessian,
            euler,
            homogeneity,
        })
    })?;
    out.checks.add("euler_identity", max_by(&rows_, |r| r.euler), 1e-9);
    out.checks.add("hessian_homogeneity", max_by(&rows_, |r| r.homogeneity), 1e-9);
    let pts: Vec<Value> = rows_
        .iter()
        .map(|(k, r)| {
            let (pos, neg) = signature(&r.hessian);
            json!({
                "index": k,
                "point": vector(&l.points[*k]),
                "lagrangian": num(r.value),
                "hessian": rows(&r.hessian),
                "signature": [pos, neg],
            })
        })
        .collect();
    out.result("points", Value::Array(pts));
    Ok((l.common, out))
}

pub fn connection(config: &Value, ov: &Overrides) -> Result<(Common, Outcome), CliError> {
    let l = load(config, "connection", ov, false)?;
    let dm = l.dmetric.as_ref();
    let mut out = Outcome::new();
    struct Row {
        n: nalgebra::DMatrix<f64>,
        gamma: Vec<f64>,
        compat: f64,
        pure: f64,
        distortion: f64,
    }
    let rows_ = scan(&mut out, &l.points, |p| {
        let conn = canonical_dconnection(dm, p).at("connection")?;
        let compat = compat_residual(dm, &conn, p).at("connection")?;
        let (t, z) = torsion_and_distortion(dm, &conn, p).at("connection")?;
        let dj = dm.jets(p, 1).at("connection")?;
        let lc = levicivita_adapted_jets(&dj).at("connection")?.values();
        let distortion = conn
            .data
            .iter()
            .zip(&z.data)
            .zip(&lc.data)
            .map(|((g, z), l)| (g + z - l).abs())
            .fold(0.0, f64::max);
        Ok(Row {
            n: dj.n_values(),
            gamma: conn.data,
            compat,
            pure: t.max_pure(),
            distortion,
        })
    })?;
    out.checks.add("metric_compatibility", max_by(&rows_, |r| r.compat), 1e-8);
    out.checks.add("pure_torsion", max_by(&rows_, |r| r.pure), 1e-8);
    out.checks.add("distortion_identity", max_by(&rows_, |r| r.distortion), 1e-8);
    let dim = dm.nh() + dm.nv();
    let mut csv = Csv::new(&["point", "a", "b", "c", "gamma"]);
    for (k, r) in &rows_ {
        for (i, v) in r.gamma.iter().enumerate() {
            let (a, b, c) = (i / (dim * dim), (i / dim) % dim, i % dim);
            csv.rows.push(vec![k.to_string(), a.to_string(), b.to_string(), c.to_string(), cell(*v)]);
        }
    }
    out.csv = Some(csv);
    let pts: Vec<Value> = rows_
        .iter()
        .map(|(k, r)| json!({ "index": k, "point": vector(&l.points[*k]), "n_connection": rows(&r.n) }))
        .collect();
    out.result("points", Value::Array(pts));
    Ok((l.common, out))
}

pub fn curvature(config: &Value, ov: &Overrides) -> Result<(Common, Outcome), CliError> {
    let l = load(config, "curvature", ov, false)?;
    let dm = l.dmetric.as_ref();
    let mut out = Outcome::new();
    struct Row {
        ricci: nalgebra::DMatrix<f64>,
        r_h: f64,
        s_v: f64,
        scalar: f64,
        antisym: f64,
        compat: f64,
    }
    let rows_ = scan(&mut out, &l.points, |p| {
        let pack = curvature_and_ricci(dm, p).at("curvature")?;
        let n = pack.dim();
        let mut antisym: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in c..n {
                        antisym = antisym.max((pack.r(a, b, c, d) + pack.r(a, b, d, c)).abs());
                    }
                }
            }
        }
        let conn = canonical_dconnection(dm, p).at("curvature")?;
        let compat = compat_residual(dm, &conn, p).at("curvature")?;
        Ok(Row {
            ricci: pack.ricci.clone(),
            r_h: pack.r_h,
            s_v: pack.s_v,
            scalar: pack.scalar,
            antisym,
            compat,
        })
    })?;
    out.checks.add("riemann_antisymmetry", max_by(&rows_, |r| r.antisym), 1e-8);
    out.checks.add("metric_compatibility", max_by(&rows_, |r| r.compat), 1e-8);
    let mut csv = Csv::new(&["point", "a", "b", "ricci"]);
    for (k, r) in &rows_ {
        for a in 0..r.ricci.nrows() {
            for b in 0..r.ricci.ncols() {
                csv.rows.push(vec![k.to_string(), a.to_string(), b.to_string(), cell(r.ricci[(a, b)])]);
            }
        }
    }
    out.csv = Some(csv);
    let pts: Vec<Value> = rows_
        .iter()
        .map(|(k, r)| {
            json!({
                "index": k,
                "point": vector(&l.points[*k]),
                "ricci": rows(&r.ricci),
                "horizontal_scalar": num(r.r_h),
                "vertical_scalar": num(r.s_v),
                "scalar": num(r.scalar),
            })
        })
        .collect();
    out.result("points", Value::Array(pts));
    Ok((l.common, out))
}
