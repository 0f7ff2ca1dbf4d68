use nalgebra::DMatrix;

use crate::exprkit::Jet;

use super::dmetric::{DMetricField, DMetricJets};
use super::GeometryError;

/// Coordinate-basis jets of the total metric
/// `[[g + hhat N N, hhat N], [hhat N, hhat]]`, row-major `dim x dim`.
pub fn sasaki_jets(dj: &DMetricJets) -> Vec<Jet> {
    let (nh, nv) = (dj.nh, dj.nv);
    let n = nh + nv;
    let space = dj.g[0].space().clone();
    // hn[a][j] = hhat_ab N^b_j
    let mut hn: Vec<Jet> = Vec::with_capacity(nv * nh);
    for a in 0..nv {
        for j in 0..nh {
            let mut acc = Jet::zero(&space);
            for b in 0..nv {
                acc = &acc + &(&dj.hhat[a * nv + b] * &dj.n[b * nh + j]);
            }
            hn.push(acc);
        }
    }
    let mut out = vec![Jet::zero(&space); n * n];
    for i in 0..nh {
        for j in 0..nh {
            let mut acc = dj.g[i * nh + j].clone();
            for a in 0..nv {
                acc = &acc + &(&dj.n[a * nh + i] * &hn[a * nh + j]);
            }
            out[i * n + j] = acc;
        }
        for a in 0..nv {
            out[i * n + nh + a] = hn[a * nh + i].clone();
            out[(nh + a) * n + i] = hn[a * nh + i].clone();
        }
    }
    for a in 0..nv {
        for b in 0..nv {
            out[(nh + a) * n + nh + b] = dj.hhat[a * nv + b].clone();
        }
    }
    out
}

/// Coordinate matrix of the lifted metric at `point`.
pub fn sasaki_assemble(dm: &dyn DMetricField, point: &[f64]) -> Result<DMatrix<f64>, GeometryError> {
    let dj = dm.jets(point, 0)?;
    let n = dj.dim();
    let m = sasaki_jets(&dj);
    Ok(DMatrix::from_fn(n, n, |r, c| m[r * n + c].value()))
}
