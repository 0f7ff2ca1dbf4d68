use rayon::prelude::*;
use serde::Serialize;

use crate::exprkit::Jet;

use super::ansatz::{coord::*, Grid, ShellAnsatz, SourceSpec};
use super::SolverError;

/// Below this magnitude a coefficient counts as vanishing.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Residual families, in report order.
pub const FAMILIES: [&str; 10] = [
    "h_ricci",
    "v_ricci",
    "w_balance",
    "n_balance",
    "v1_ricci",
    "w1_balance",
    "n1_balance",
    "v2_ricci",
    "w2_balance",
    "n2_balance",
];

/// Which form of the outermost shell equations to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OuterShellForm {
    /// Same pattern as the inner shells.
    #[default]
    Symmetric,
    /// Literal form with `h6` in the Ricci bracket and `2 h4` under `w`.
    Printed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Excluded {
    pub point: Vec<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResiduals {
    pub point: Vec<f64>,
    pub values: [f64; 10],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    /// Max absolute residual per family over the evaluated points.
    pub families: Vec<(String, f64)>,
    pub points: Vec<PointResiduals>,
    pub excluded: Vec<Excluded>,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.families.iter().map(|(_, v)| *v).fold(0.0, f64::max)
    }

    pub fn family(&self, name: &str) -> Option<f64> {
        self.families.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

struct Shell<'a> {
    ha: &'a Jet,
    hb: &'a Jet,
    /// Jet position of the shell fiber coordinate.
    d: usize,
    /// Jet positions of the lower coordinates; `None` for Killing directions.
    alphas: Vec<Option<usize>>,
    w: Vec<f64>,
    /// Jets of the `n` coefficients in the fiber coordinate alone.
    n: Vec<Jet>,
    lambda: f64,
    /// Replaces `d hb` in the mixed bracket term.
    mixed: Option<f64>,
    /// Replaces `hb` in the `w` prefactor.
    w_den: Option<f64>,
}

impl Shell<'_> {
    /// `(ricci + Lambda, max |R_A alpha|, max |R_B alpha|)`.
    fn residuals(&self) -> (f64, f64, f64) {
        let d = self.d;
        let (a, b) = (self.ha.value(), self.hb.value());
        let (da, db, ddb) = (self.ha.d(&[d]), self.hb.d(&[d]), self.hb.d(&[d, d]));
        let bracket = |mixed: f64| ddb - db * db / (2.0 * b) - da * mixed / (2.0 * a);
        let ricci = -bracket(self.mixed.unwrap_or(db)) / (2.0 * a * b);
        let plain = bracket(db);
        let mut rw: f64 = 0.0;
        let mut rn: f64 = 0.0;
        for (k, al) in self.alphas.iter().enumerate() {
            let mut r = self.w[k] / (2.0 * self.w_den.unwrap_or(b)) * plain;
            if let Some(al) = *al {
                r += db / (4.0 * b) * (self.ha.d(&[al]) / a + self.hb.d(&[al]) / b) - self.hb.d(&[al, d]) / (2.0 * b);
            }
            rw = rw.max(r.abs());
            let n = &self.n[k];
            let r = b / (2.0 * a) * n.d(&[0, 0]) + (b / a * da - 1.5 * db) * n.d(&[0]) / (2.0 * a);
            rn = rn.max(r.abs());
        }
        ((ricci + self.lambda).abs(), rw, rn)
    }
}

fn jets(fs: &[crate::solver::FieldFn], p: &[f64], order: usize, wrt: &[usize]) -> Result<Vec<Jet>, SolverError> {
    fs.iter().map(|f| f.jet(p, order, wrt)).collect()
}

fn check_nonzero(name: &str, v: f64) -> Result<(), SolverError> {
    if !(v.abs() >= DEGENERACY_TOL) {
        return Err(SolverError::Degenerate(format!("{name} = {v:e}")));
    }
    Ok(())
}

/// All residual families at one point of the 8-d shell chart.
pub fn residuals_at(a: &ShellAnsatz, s: &SourceSpec, p: &[f64], form: OuterShellForm) -> Result<[f64; 10], SolverError> {
    let l = s.lambdas();
    let lam = |k: usize| -> Result<f64, SolverError> { Ok(l[k].eval(p)?) };
    let mut out = [0.0; 10];

    let w0 = [X1, X2, V];
    let g = jets(&a.g, p, 2, &w0)?;
    check_nonzero("g1", g[0].value())?;
    check_nonzero("g2", g[1].value())?;
    let (g1, g2) = (&g[0], &g[1]);
    let (g1v, g2v) = (g1.value(), g2.value());
    let bracket = g2.d(&[0, 0]) - g1.d(&[0]) * g2.d(&[0]) / (2.0 * g1v) - g2.d(&[0]).powi(2) / (2.0 * g2v)
        + g1.d(&[1, 1])
        - g1.d(&[1]) * g2.d(&[1]) / (2.0 * g2v)
        - g1.d(&[1]).powi(2) / (2.0 * g1v);
    out[0] = (-bracket / (2.0 * g1v * g2v) + lam(0)?).abs();

    let h0 = jets(&a.h[0..2], p, 2, &w0)?;
    check_nonzero("h3", h0[0].value())?;
    check_nonzero("h4", h0[1].value())?;
    let shell0 = Shell {
        ha: &h0[0],
        hb: &h0[1],
        d: 2,
        alphas: vec![Some(0), Some(1)],
        w: a.w.iter().map(|f| f.value(p)).collect::<Result<_, _>>()?,
        n: jets(&a.n, p, 2, &[V])?,
        lambda: lam(1)?,
        mixed: None,
        w_den: None,
    };
    (out[1], out[2], out[3]) = shell0.residuals();

    // Killing directions y4, y6 carry no derivatives
    let w1 = [X1, X2, V, Y5];
    let h1 = jets(&a.h[2..4], p, 2, &w1)?;
    check_nonzero("h5", h1[0].value())?;
    check_nonzero("h6", h1[1].value())?;
    let shell1 = Shell {
        ha: &h1[0],
        hb: &h1[1],
        d: 3,
        alphas: vec![Some(0), Some(1), Some(2), None],
        w: a.w1.iter().map(|f| f.value(p)).collect::<Result<_, _>>()?,
        n: jets(&a.n1, p, 2, &[Y5])?,
        lambda: lam(2)?,
        mixed: None,
        w_den: None,
    };
    (out[4], out[5], out[6]) = shell1.residuals();

    let w2 = [X1, X2, V, Y5, Y7];
    let h2 = jets(&a.h[4..6], p, 2, &w2)?;
    check_nonzero("h7", h2[0].value())?;
    check_nonzero("h8", h2[1].value())?;
    let (mixed, w_den) = match form {
        OuterShellForm::Symmetric => (None, None),
        OuterShellForm::Printed => (
            Some(a.h[3].jet(p, 1, &[Y7])?.d(&[0])),
            Some(a.h[1].value(p)?),
        ),
    };
    let shell2 = Shell {
        ha: &h2[0],
        hb: &h2[1],
        d: 4,
        alphas: vec![Some(0), Some(1), Some(2), None, Some(3), None],
        w: a.w2.iter().map(|f| f.value(p)).collect::<Result<_, _>>()?,
        n: jets(&a.n2, p, 2, &[Y7])?,
        lambda: lam(3)?,
        mixed,
        w_den,
    };
    (out[7], out[8], out[9]) = shell2.residuals();
    Ok(out)
}

/// Residuals of the separated field equations over a grid. Points where a
/// coefficient vanishes or cannot be evaluated are excluded and listed.
pub fn shell_residuals(a: &ShellAnsatz, s: &SourceSpec, grid: &Grid) -> Result<ResidualReport, SolverError> {
    shell_residuals_with(a, s, grid, OuterShellForm::Symmetric)
}

pub fn shell_residuals_with(
    a: &ShellAnsatz,
    s: &SourceSpec,
    grid: &Grid,
    form: OuterShellForm,
) -> Result<ResidualReport, SolverError> {
    if grid.base.len() != DIM {
        return Err(SolverError::Config(format!("shell grid needs {DIM} coordinates, got {}", grid.base.len())));
    }
    a.validate()?;
    let pts = grid.points();
    let results: Vec<_> = pts.par_iter().map(|p| residuals_at(a, s, p, form)).collect();
    let mut families = [0.0f64; 10];
    let mut points = Vec::new();
    let mut excluded = Vec::new();
    for (p, r) in pts.into_iter().zip(results) {
        match r {
            Ok(values) => {
                for (m, v) in families.iter_mut().zip(values) {
                    *m = if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) };
                }
                points.push(PointResiduals { point: p, values });
            }
            Err(SolverError::Degenerate(reason)) => excluded.push(Excluded { point: p, reason }),
            Err(SolverError::Expr(e)) if matches!(e, crate::exprkit::ExprError::Domain { .. }) => {
                excluded.push(Excluded {
                    point: p,
                    reason: e.to_string(),
                })
            }
            Err(e) => return Err(e),
        }
    }
    if points.is_empty() {
        return Err(SolverError::Degenerate("every grid point is degenerate".into()));
    }
    Ok(ResidualReport {
        families: FAMILIES.iter().zip(families).map(|(n, v)| (n.to_string(), v)).collect(),
        points,
        excluded,
    })
}
