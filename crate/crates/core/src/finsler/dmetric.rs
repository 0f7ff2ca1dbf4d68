use nalgebra::DMatrix;

use crate::exprkit::{Chart, Expr, Jet};

use super::GeometryError;

/// Smallest admissible `|det|` of the g and h blocks.
pub const DET_TOL: f64 = 1e-12;

/// Jets of a d-metric around one point, over all chart coordinates.
///
/// `g` is `nh x nh`, `h` is `nv x nv`, `n[a * nh + i]` holds `N^a_i`. All
/// blocks share one jet order. `hhat` is the fiber block as it enters the
/// total metric, i.e. `h` times the length factor (1 when absorbed).
#[derive(Debug, Clone)]
pub struct DMetricJets {
    pub nh: usize,
    pub nv: usize,
    pub g: Vec<Jet>,
    pub h: Vec<Jet>,
    pub hhat: Vec<Jet>,
    pub n: Vec<Jet>,
    pub lstar: f64,
}

impl DMetricJets {
    pub fn new(
        nh: usize,
        nv: usize,
        g: Vec<Jet>,
        h: Vec<Jet>,
        n: Vec<Jet>,
        lstar: f64,
        lstar_in_h: bool,
    ) -> DMetricJets {
        assert_eq!(g.len(), nh * nh);
        assert_eq!(h.len(), nv * nv);
        assert_eq!(n.len(), nv * nh);
        let s = if lstar_in_h { 1.0 } else { lstar * lstar };
        let hhat = h.iter().map(|j| j.scale(s)).collect();
        DMetricJets {
            nh,
            nv,
            g,
            h,
            hhat,
            n,
            lstar,
        }
    }

    pub fn dim(&self) -> usize {
        self.nh + self.nv
    }

    pub fn order(&self) -> usize {
        self.g
            .iter()
            .chain(&self.hhat)
            .chain(&self.n)
            .map(Jet::order)
            .min()
            .unwrap_or(0)
    }

    pub fn g_values(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.nh, self.nh, |i, j| self.g[i * self.nh + j].value())
    }

    pub fn hhat_values(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.nv, self.nv, |a, b| self.hhat[a * self.nv + b].value())
    }

    /// `N^a_i` values as an `nv x nh` matrix.
    pub fn n_values(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.nv, self.nh, |a, i| self.n[a * self.nh + i].value())
    }

    /// Symmetry and nondegeneracy of both blocks at the expansion point.
    pub fn validate(&self) -> Result<(), GeometryError> {
        check_block("g", &self.g_values())?;
        check_block("h", &self.hhat_values())?;
        Ok(())
    }

    /// `e_alpha f` for a jet `f` over the same coordinates:
    /// `e_i = d_i - N^a_i d_a`, `e_a = d_a`. The result is one order lower.
    pub fn adapted_derivative(&self, f: &Jet, alpha: usize) -> Jet {
        let nh = self.nh;
        let mut out = f.derivative(alpha);
        if alpha < nh {
            for a in 0..self.nv {
                let na = &self.n[a * nh + alpha];
                if na.coeffs().iter().all(|c| *c == 0.0) {
                    continue;
                }
                out = &out - &(na * &f.derivative(nh + a));
            }
        }
        out
    }
}

pub(crate) fn check_block(name: &'static str, m: &DMatrix<f64>) -> Result<(), GeometryError> {
    let n = m.nrows();
    let scale = m.iter().map(|v| v.abs()).fold(1.0, f64::max);
    for i in 0..n {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(GeometryError::Asymmetric {
                    block: name,
                    row: i,
                    col: j,
                });
            }
        }
    }
    let det = m.determinant();
    if !(det.abs() > DET_TOL) {
        return Err(GeometryError::Degenerate { block: name, det });
    }
    Ok(())
}

/// `(positive, negative)` eigenvalue counts of a symmetric matrix.
pub fn signature(m: &DMatrix<f64>) -> (usize, usize) {
    let eig = m.clone().symmetric_eigen();
    let pos = eig.eigenvalues.iter().filter(|v| **v > 0.0).count();
    let neg = eig.eigenvalues.iter().filter(|v| **v < 0.0).count();
    (pos, neg)
}

/// Records the signature of g at the first evaluated point and rejects any
/// later point where it differs.
#[derive(Debug, Default, Clone)]
pub struct SignatureGuard {
    seen: Option<(usize, usize)>,
}

impl SignatureGuard {
    pub fn check(&mut self, g: &DMatrix<f64>) -> Result<(usize, usize), GeometryError> {
        let s = signature(g);
        match self.seen {
            None => self.seen = Some(s),
            Some(prev) if prev != s => {
                return Err(GeometryError::SignatureChange {
                    expected: prev,
                    found: s,
                })
            }
            _ => {}
        }
        Ok(s)
    }

    pub fn recorded(&self) -> Option<(usize, usize)> {
        self.seen
    }
}

/// A d-metric field that can be expanded in jets at any point.
pub trait DMetricField: Send + Sync {
    fn nh(&self) -> usize;
    fn nv(&self) -> usize;
    fn lstar(&self) -> f64;
    /// Jets of g, h and N of the given order over all `nh + nv` coordinates.
    fn jets(&self, point: &[f64], order: usize) -> Result<DMetricJets, GeometryError>;
}

/// d-metric with every block given by an expression.
#[derive(Debug, Clone)]
pub struct ExprDMetric {
    pub chart: Chart,
    /// Row-major `nh x nh`.
    pub g: Vec<Expr>,
    /// Row-major `nv x nv`.
    pub h: Vec<Expr>,
    /// `n[a * nh + i] = N^a_i`.
    pub n: Vec<Expr>,
    pub lstar: f64,
    /// When set, `h` already contains the squared length constant.
    pub lstar_in_h: bool,
}

impl ExprDMetric {
    pub fn new(chart: Chart, g: Vec<Expr>, h: Vec<Expr>, n: Vec<Expr>, lstar: f64) -> Result<Self, GeometryError> {
        let nh = chart.n_base();
        let nv = chart.n_fiber();
        if g.len() != nh * nh || h.len() != nv * nv || n.len() != nv * nh {
            return Err(GeometryError::Dimension(format!(
                "blocks of sizes {}, {}, {} do not fit a {nh}+{nv} chart",
                g.len(),
                h.len(),
                n.len()
            )));
        }
        if !(lstar > 0.0) {
            return Err(GeometryError::Dimension(format!("length constant must be positive, got {lstar}")));
        }
        Ok(ExprDMetric {
            chart,
            g,
            h,
            n,
            lstar,
            lstar_in_h: false,
        })
    }

    /// Diagonal g and h with vanishing N.
    pub fn diagonal(chart: Chart, g: Vec<Expr>, h: Vec<Expr>, lstar: f64) -> Result<Self, GeometryError> {
        let nh = g.len();
        let nv = h.len();
        let dense = |d: Vec<Expr>, n: usize| {
            let mut out = vec![Expr::Const(0.0); n * n];
            for (k, e) in d.into_iter().enumerate() {
                out[k * n + k] = e;
            }
            out
        };
        ExprDMetric::new(chart, dense(g, nh), dense(h, nv), vec![Expr::Const(0.0); nh * nv], lstar)
    }
}

impl DMetricField for ExprDMetric {
    fn nh(&self) -> usize {
        self.chart.n_base()
    }

    fn nv(&self) -> usize {
        self.chart.n_fiber()
    }

    fn lstar(&self) -> f64 {
        self.lstar
    }

    fn jets(&self, point: &[f64], order: usize) -> Result<DMetricJets, GeometryError> {
        let wrt: Vec<usize> = (0..self.chart.len()).collect();
        let ev = |v: &[Expr]| -> Result<Vec<Jet>, GeometryError> {
            v.iter()
                .map(|e| e.eval_jet(point, order, &wrt).map_err(GeometryError::from))
                .collect()
        };
        Ok(DMetricJets::new(
            self.nh(),
            self.nv(),
            ev(&self.g)?,
            ev(&self.h)?,
            ev(&self.n)?,
            self.lstar,
            self.lstar_in_h,
        ))
    }
}
