use crate::exprkit::{jetmat, Jet};
use crate::finsler::{DMetricField, DMetricJets, GeometryError};

/// Dense connection coefficients `Gamma^a_{bc}` over all `dim^3` index
/// triples, with `D_{e_c} e_b = Gamma^a_{bc} e_a` (derivative direction last).
#[derive(Debug, Clone)]
pub struct Coefficients<T> {
    pub nh: usize,
    pub nv: usize,
    pub data: Vec<T>,
}

impl<T: Clone> Coefficients<T> {
    pub fn dim(&self) -> usize {
        self.nh + self.nv
    }

    #[inline]
    pub fn idx(&self, a: usize, b: usize, c: usize) -> usize {
        let n = self.dim();
        (a * n + b) * n + c
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> &T {
        &self.data[self.idx(a, b, c)]
    }
}

impl Coefficients<Jet> {
    pub fn values(&self) -> Coefficients<f64> {
        Coefficients {
            nh: self.nh,
            nv: self.nv,
            data: self.data.iter().map(Jet::value).collect(),
        }
    }

    pub fn add(&self, other: &Coefficients<Jet>) -> Coefficients<Jet> {
        Coefficients {
            nh: self.nh,
            nv: self.nv,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Coefficients<f64> {
    pub fn zeros(nh: usize, nv: usize) -> Self {
        let n = nh + nv;
        Coefficients {
            nh,
            nv,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        let k = self.idx(a, b, c);
        self.data[k] = v;
    }

    pub fn max_abs_diff(&self, other: &Coefficients<f64>) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Canonical d-connection values at a point.
pub type DConnection = Coefficients<f64>;

impl DConnection {
    /// `L^i_{jk}`.
    pub fn l_h(&self, i: usize, j: usize, k: usize) -> f64 {
        *self.get(i, j, k)
    }

    /// `L^a_{bk}` with fiber-local `a, b`.
    pub fn l_v(&self, a: usize, b: usize, k: usize) -> f64 {
        *self.get(self.nh + a, self.nh + b, k)
    }

    /// `C^i_{jc}` with fiber-local `c`.
    pub fn c_h(&self, i: usize, j: usize, c: usize) -> f64 {
        *self.get(i, j, self.nh + c)
    }

    /// `C^a_{bc}` with fiber-local indices.
    pub fn c_v(&self, a: usize, b: usize, c: usize) -> f64 {
        let h = self.nh;
        *self.get(h + a, h + b, h + c)
    }
}

/// Adapted derivatives and inverses shared by the connection formulas.
pub(crate) struct Prepared<'a> {
    pub dj: &'a DMetricJets,
    pub ginv: Vec<Jet>,
    pub hinv: Vec<Jet>,
    /// `eg[(k * nh + i) * nh + j] = e_k g_ij`, k over all directions.
    pub eg: Vec<Jet>,
    /// `eh[(k * nv + a) * nv + b] = e_k hhat_ab`.
    pub eh: Vec<Jet>,
    /// `dn[(b * nv + a) * nh + k] = d_{y^b} N^a_k`.
    pub dn: Vec<Jet>,
    /// `en[(a * nh + i) * nh + j] = e_j N^a_i`.
    pub en: Vec<Jet>,
}

impl<'a> Prepared<'a> {
    pub fn new(dj: &'a DMetricJets) -> Result<Self, GeometryError> {
        assert!(dj.order() >= 1, "connection needs first derivatives");
        dj.validate()?;
        let (nh, nv) = (dj.nh, dj.nv);
        let n = nh + nv;
        let ginv = jetmat::invert(&dj.g, nh).ok_or(GeometryError::Degenerate { block: "g", det: 0.0 })?;
        let hinv = jetmat::invert(&dj.hhat, nv).ok_or(GeometryError::Degenerate { block: "h", det: 0.0 })?;
        let mut eg = Vec::with_capacity(n * nh * nh);
        let mut eh = Vec::with_capacity(n * nv * nv);
        for k in 0..n {
            for g in &dj.g {
                eg.push(dj.adapted_derivative(g, k));
            }
            for h in &dj.hhat {
                eh.push(dj.adapted_derivative(h, k));
            }
        }
        let mut dn = Vec::with_capacity(nv * nv * nh);
        for b in 0..nv {
            for nk in &dj.n {
                dn.push(nk.derivative(nh + b));
            }
        }
        let mut en = Vec::with_capacity(nv * nh * nh);
        for nk in &dj.n {
            for j in 0..nh {
                en.push(dj.adapted_derivative(nk, j));
            }
        }
        Ok(Prepared {
            dj,
            ginv,
            hinv,
            eg,
            eh,
            dn,
            en,
        })
    }

    pub fn zero(&self) -> Jet {
        self.eg[0].scale(0.0)
    }

    pub fn eg(&self, k: usize, i: usize, j: usize) -> &Jet {
        let nh = self.dj.nh;
        &self.eg[(k * nh + i) * nh + j]
    }

    pub fn eh(&self, k: usize, a: usize, b: usize) -> &Jet {
        let nv = self.dj.nv;
        &self.eh[(k * nv + a) * nv + b]
    }

    pub fn dn(&self, b: usize, a: usize, k: usize) -> &Jet {
        let (nh, nv) = (self.dj.nh, self.dj.nv);
        &self.dn[(b * nv + a) * nh + k]
    }

    /// `Omega^a_{ij} = e_j N^a_i - e_i N^a_j`.
    pub fn omega(&self, a: usize, i: usize, j: usize) -> Jet {
        let nh = self.dj.nh;
        &self.en[(a * nh + i) * nh + j] - &self.en[(a * nh + j) * nh + i]
    }

    pub fn ginv(&self, i: usize, j: usize) -> &Jet {
        &self.ginv[i * self.dj.nh + j]
    }

    pub fn hinv(&self, a: usize, b: usize) -> &Jet {
        &self.hinv[a * self.dj.nv + b]
    }

    pub fn g(&self, i: usize, j: usize) -> &Jet {
        &self.dj.g[i * self.dj.nh + j]
    }

    pub fn h(&self, a: usize, b: usize) -> &Jet {
        &self.dj.hhat[a * self.dj.nv + b]
    }

    /// Canonical coefficients as jets one order below the metric data.
    pub fn canonical(&self) -> Coefficients<Jet> {
        let (nh, nv) = (self.dj.nh, self.dj.nv);
        let n = nh + nv;
        let z = self.zero();
        let mut data = vec![z.clone(); n * n * n];
        let at = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
        for i in 0..nh {
            for j in 0..nh {
                for k in 0..nh {
                    let mut acc = z.clone();
                    for r in 0..nh {
                        let t = &(self.eg(k, j, r) + self.eg(j, k, r)) - self.eg(r, j, k);
                        acc = &acc + &(self.ginv(i, r) * &t);
                    }
                    data[at(i, j, k)] = acc.scale(0.5);
                }
                for c in 0..nv {
                    let mut acc = z.clone();
                    for k in 0..nh {
                        acc = &acc + &(self.ginv(i, k) * self.eg(nh + c, j, k));
                    }
                    data[at(i, j, nh + c)] = acc.scale(0.5);
                }
            }
        }
        for a in 0..nv {
            for b in 0..nv {
                for k in 0..nh {
                    let mut acc = z.clone();
                    for c in 0..nv {
                        let mut t = self.eh(k, b, c).clone();
                        for d in 0..nv {
                            t = &t - &(self.h(d, c) * self.dn(b, d, k));
                            t = &t - &(self.h(d, b) * self.dn(c, d, k));
                        }
                        acc = &acc + &(self.hinv(a, c) * &t);
                    }
                    data[at(nh + a, nh + b, k)] = self.dn(b, a, k) + &acc.scale(0.5);
                }
                for c in 0..nv {
                    let mut acc = z.clone();
                    for d in 0..nv {
                        let t = &(self.eh(nh + c, b, d) + self.eh(nh + b, c, d)) - self.eh(nh + d, b, c);
                        acc = &acc + &(self.hinv(a, d) * &t);
                    }
                    data[at(nh + a, nh + b, nh + c)] = acc.scale(0.5);
                }
            }
        }
        Coefficients { nh, nv, data }
    }
}

/// Canonical d-connection coefficient jets from d-metric jets of order `p >= 1`;
/// the result has order `p - 1`.
pub fn canonical_jets(dj: &DMetricJets) -> Result<Coefficients<Jet>, GeometryError> {
    Ok(Prepared::new(dj)?.canonical())
}

/// Canonical d-connection at `point`.
pub fn canonical_dconnection(dm: &dyn DMetricField, point: &[f64]) -> Result<DConnection, GeometryError> {
    let dj = dm.jets(point, 1)?;
    Ok(canonical_jets(&dj)?.values())
}
