use nalgebra::DMatrix;

use crate::dconnection::curvature_and_ricci;
use crate::exprkit::Jet;
use crate::finsler::{DMetricField, DMetricJets, GeometryError};

use super::ansatz::{coord::DIM, ShellAnsatz, SourceSpec};
use super::SolverError;

/// Shell 0 of an ansatz as a 2+2 d-metric on `(x1, x2 | y3, y4)`:
/// `g = diag(g1, g2)`, `h = diag(h3, h4)`, `N^3_i = w_i`, `N^4_i = n_i`.
/// The outer coordinates are frozen at `base`.
pub struct ShellZeroMetric<'a> {
    pub ansatz: &'a ShellAnsatz,
    pub base: Vec<f64>,
}

impl DMetricField for ShellZeroMetric<'_> {
    fn nh(&self) -> usize {
        2
    }

    fn nv(&self) -> usize {
        2
    }

    fn lstar(&self) -> f64 {
        1.0
    }

    fn jets(&self, point: &[f64], order: usize) -> Result<DMetricJets, GeometryError> {
        let mut p = self.base.clone();
        p[..4].copy_from_slice(&point[..4]);
        let wrt = [0, 1, 2, 3];
        let ev = |f: &super::FieldFn| -> Result<Jet, GeometryError> {
            f.jet(&p, order, &wrt).map_err(|e| match e {
                SolverError::Expr(e) => GeometryError::Expr(e),
                other => GeometryError::Dimension(other.to_string()),
            })
        };
        let a = self.ansatz;
        let zero = ev(&super::FieldFn::constant(0.0))?;
        let g = vec![ev(&a.g[0])?, zero.clone(), zero.clone(), ev(&a.g[1])?];
        let h = vec![ev(&a.h[0])?, zero.clone(), zero, ev(&a.h[1])?];
        let n = vec![ev(&a.w[0])?, ev(&a.w[1])?, ev(&a.n[0])?, ev(&a.n[1])?];
        Ok(DMetricJets::new(2, 2, g, h, n, 1.0, false))
    }
}

/// Comparison of the curvature engine with the prescribed sources.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheck {
    /// Max `|R^1_1 + hL|` and `|R^2_2 + hL|`.
    pub horizontal: f64,
    /// Max `|R^3_3 + vL|` and `|R^4_4 + vL|`.
    pub vertical: f64,
    /// Max `|R_{a k}|` and `|R_{k a}|` of the engine (mixed blocks).
    pub mixed: f64,
    pub ricci: Vec<DMatrix<f64>>,
}

/// Runs the canonical d-connection curvature on shell 0 at the given 8-d points.
pub fn cross_module_check(a: &ShellAnsatz, s: &SourceSpec, points: &[Vec<f64>]) -> Result<CrossCheck, SolverError> {
    let (lh, lv) = (s.lambda_h(), s.lambda_v());
    let mut out = CrossCheck {
        horizontal: 0.0,
        vertical: 0.0,
        mixed: 0.0,
        ricci: Vec::new(),
    };
    for p in points {
        if p.len() != DIM {
            return Err(SolverError::Config(format!("expected {DIM} coordinates, got {}", p.len())));
        }
        let dm = ShellZeroMetric {
            ansatz: a,
            base: p.clone(),
        };
        let pack = curvature_and_ricci(&dm, &p[..4])?;
        let mixed = pack.ricci_mixed();
        let (h, v) = (lh.eval(p)?, lv.eval(p)?);
        out.horizontal = out.horizontal.max((mixed[(0, 0)] + h).abs()).max((mixed[(1, 1)] + h).abs());
        out.vertical = out.vertical.max((mixed[(2, 2)] + v).abs()).max((mixed[(3, 3)] + v).abs());
        for i in 0..2 {
            for b in 2..4 {
                out.mixed = out.mixed.max(pack.ricci[(b, i)].abs()).max(pack.ricci[(i, b)].abs());
            }
        }
        out.ricci.push(pack.ricci);
    }
    Ok(out)
}
