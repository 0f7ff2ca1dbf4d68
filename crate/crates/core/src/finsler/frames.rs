use nalgebra::DMatrix;

use super::dmetric::{DMetricField, DMetricJets};
use super::GeometryError;

/// Anholonomy of the adapted frame `e_i = d_i - N^a_i d_a`, `e_a = d_a`.
///
/// `w` is dense over all `dim^3` index triples with `[e_b, e_c] = W^a_{bc} e_a`.
#[derive(Debug, Clone)]
pub struct FrameData {
    pub nh: usize,
    pub nv: usize,
    w: Vec<f64>,
    omega: Vec<f64>,
}

impl FrameData {
    pub fn dim(&self) -> usize {
        self.nh + self.nv
    }

    /// `W^a_{bc}` over the full index range.
    pub fn w(&self, a: usize, b: usize, c: usize) -> f64 {
        let n = self.dim();
        self.w[(a * n + b) * n + c]
    }

    /// `Omega^a_{ij}` with `a` a fiber index and `i, j` base indices.
    pub fn omega(&self, a: usize, i: usize, j: usize) -> f64 {
        self.omega[(a * self.nh + i) * self.nh + j]
    }

    pub fn omega_slice(&self) -> &[f64] {
        &self.omega
    }

    /// Builds the frame data from jets of order at least 1.
    pub fn from_jets(dj: &DMetricJets) -> FrameData {
        let (nh, nv) = (dj.nh, dj.nv);
        let n = nh + nv;
        let mut omega = vec![0.0; nv * nh * nh];
        // e_j N^a_i
        let en: Vec<f64> = (0..nv)
            .flat_map(|a| {
                (0..nh).flat_map(move |i| (0..nh).map(move |j| (a, i, j)))
            })
            .map(|(a, i, j)| dj.adapted_derivative(&dj.n[a * nh + i], j).value())
            .collect();
        for a in 0..nv {
            for i in 0..nh {
                for j in 0..nh {
                    omega[(a * nh + i) * nh + j] =
                        en[(a * nh + i) * nh + j] - en[(a * nh + j) * nh + i];
                }
            }
        }
        let mut w = vec![0.0; n * n * n];
        for b in 0..nv {
            for i in 0..nh {
                for a in 0..nv {
                    let d = dj.n[b * nh + i].derivative(nh + a).value();
                    w[((nh + b) * n + i) * n + nh + a] = d;
                    w[((nh + b) * n + nh + a) * n + i] = -d;
                }
            }
        }
        for a in 0..nv {
            for i in 0..nh {
                for j in 0..nh {
                    w[((nh + a) * n + i) * n + j] = omega[(a * nh + i) * nh + j];
                }
            }
        }
        FrameData { nh, nv, w, omega }
    }

    /// Adapted frame `E` with rows `e_alpha` in coordinate components.
    pub fn vielbein(dj: &DMetricJets) -> DMatrix<f64> {
        let (nh, nv) = (dj.nh, dj.nv);
        let mut e = DMatrix::identity(nh + nv, nh + nv);
        for i in 0..nh {
            for a in 0..nv {
                e[(i, nh + a)] = -dj.n[a * nh + i].value();
            }
        }
        e
    }
}

/// Anholonomy and N-curvature of a d-metric's N-connection at `point`.
pub fn nonholonomic_frames(dm: &dyn DMetricField, point: &[f64]) -> Result<FrameData, GeometryError> {
    let dj = dm.jets(point, 1)?;
    Ok(FrameData::from_jets(&dj))
}
