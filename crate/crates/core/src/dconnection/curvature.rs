use nalgebra::DMatrix;

use crate::exprkit::Jet;
use crate::finsler::{DMetricField, DMetricJets, FrameData, GeometryError};

use super::connection::{canonical_jets, Coefficients};

/// Curvature, Ricci d-tensor, scalars and Einstein d-tensor at a point.
///
/// `riemann[((a * n + b) * n + c) * n + d] = R^a_{bcd}` with
/// `R^a_{bcd} = [R(e_d, e_c) e_b]^a`, so that `R_{ab} = R^t_{abt}` is the
/// Ricci tensor with the usual sign (positive on spheres).
#[derive(Debug, Clone)]
pub struct CurvaturePack {
    pub nh: usize,
    pub nv: usize,
    pub riemann: Vec<f64>,
    /// `R_{ab} = R^t_{abt}` over all indices; its blocks are `R_ij`, `R_ia`, `R_ai`, `R_ab`.
    pub ricci: DMatrix<f64>,
    /// `g^{ij} R_ij`.
    pub r_h: f64,
    /// `hhat^{ab} R_ab`.
    pub s_v: f64,
    pub scalar: f64,
    pub einstein: DMatrix<f64>,
    /// Block-diagonal d-metric used for the contractions.
    pub dmetric: DMatrix<f64>,
}

impl CurvaturePack {
    pub fn dim(&self) -> usize {
        self.nh + self.nv
    }

    pub fn r(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.dim();
        self.riemann[((a * n + b) * n + c) * n + d]
    }

    /// Mixed Ricci component `R^a_b = dmetric^{ac} R_cb`.
    pub fn ricci_mixed(&self) -> DMatrix<f64> {
        let inv = block_inverse(&self.dmetric, self.nh);
        inv * &self.ricci
    }
}

fn block_inverse(m: &DMatrix<f64>, nh: usize) -> DMatrix<f64> {
    let n = m.nrows();
    let nv = n - nh;
    let g = m.view((0, 0), (nh, nh)).clone_owned();
    let h = m.view((nh, nh), (nv, nv)).clone_owned();
    let gi = g.try_inverse().unwrap_or_else(|| DMatrix::zeros(nh, nh));
    let hi = h.try_inverse().unwrap_or_else(|| DMatrix::zeros(nv, nv));
    let mut out = DMatrix::zeros(n, n);
    out.view_mut((0, 0), (nh, nh)).copy_from(&gi);
    out.view_mut((nh, nh), (nv, nv)).copy_from(&hi);
    out
}

/// Curvature of an arbitrary connection given as jets (order >= 1) in the
/// adapted frame of `dj` (order >= 2).
pub fn curvature_from(dj: &DMetricJets, conn: &Coefficients<Jet>) -> CurvaturePack {
    let (nh, nv) = (dj.nh, dj.nv);
    let n = nh + nv;
    let frames = FrameData::from_jets(dj);
    let gam = conn.values();
    let g = |a: usize, b: usize, c: usize| gam.data[(a * n + b) * n + c];
    // eg[((d * n + a) * n + b) * n + c] = e_d Gamma^a_{bc}
    let mut eg = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let j = &conn.data[(a * n + b) * n + c];
                if j.coeffs().iter().all(|v| *v == 0.0) {
                    continue;
                }
                for d in 0..n {
                    eg[((d * n + a) * n + b) * n + c] = dj.adapted_derivative(j, d).value();
                }
            }
        }
    }
    let egv = |d: usize, a: usize, b: usize, c: usize| eg[((d * n + a) * n + b) * n + c];
    let mut riemann = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut r = egv(d, a, b, c) - egv(c, a, b, d);
                    for m in 0..n {
                        r += g(m, b, c) * g(a, m, d) - g(m, b, d) * g(a, m, c);
                        r -= g(a, b, m) * frames.w(m, d, c);
                    }
                    riemann[((a * n + b) * n + c) * n + d] = r;
                }
            }
        }
    }
    let ricci = DMatrix::from_fn(n, n, |a, b| {
        (0..n).map(|t| riemann[((t * n + a) * n + b) * n + t]).sum()
    });
    let gv = dj.g_values();
    let hv = dj.hhat_values();
    let mut dmetric = DMatrix::zeros(n, n);
    dmetric.view_mut((0, 0), (nh, nh)).copy_from(&gv);
    dmetric.view_mut((nh, nh), (nv, nv)).copy_from(&hv);
    let inv = block_inverse(&dmetric, nh);
    let mut r_h = 0.0;
    let mut s_v = 0.0;
    for a in 0..n {
        for b in 0..n {
            let c = inv[(a, b)] * ricci[(a, b)];
            if a < nh && b < nh {
                r_h += c;
            } else if a >= nh && b >= nh {
                s_v += c;
            }
        }
    }
    let scalar = r_h + s_v;
    let einstein = &ricci - &dmetric * (0.5 * scalar);
    CurvaturePack {
        nh,
        nv,
        riemann,
        ricci,
        r_h,
        s_v,
        scalar,
        einstein,
        dmetric,
    }
}

/// Curvature of the canonical d-connection of `dm` at `point`.
pub fn curvature_and_ricci(dm: &dyn DMetricField, point: &[f64]) -> Result<CurvaturePack, GeometryError> {
    let dj = dm.jets(point, 2)?;
    let conn = canonical_jets(&dj)?;
    Ok(curvature_from(&dj, &conn))
}
