use nalgebra::DMatrix;

use crate::exprkit::{jetmat, Chart, Expr, Jet, JetSpace};

use super::dmetric::{check_block, DMetricField, DMetricJets};
use super::GeometryError;

/// Semi-spray and canonical N-connection at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct SprayData {
    /// `G^k`.
    pub g: Vec<f64>,
    /// `N^a_j`, an `n x n` matrix with rows `a`.
    pub n: DMatrix<f64>,
}

/// A generating function `L = F^2` on a tangent-bundle chart.
#[derive(Debug, Clone)]
pub struct FinslerFunction {
    pub chart: Chart,
    pub l: Expr,
    quadratic: bool,
}

impl FinslerFunction {
    pub fn new(chart: Chart, l: Expr) -> Result<Self, GeometryError> {
        if chart.n_base() != chart.n_fiber() || chart.n_base() == 0 {
            return Err(GeometryError::Dimension(format!(
                "a tangent-bundle chart needs as many fiber as base coordinates, got {}+{}",
                chart.n_base(),
                chart.n_fiber()
            )));
        }
        let fib: Vec<usize> = chart.fiber_indices().collect();
        let quadratic = l.is_quadratic_in(&fib);
        Ok(FinslerFunction { chart, l, quadratic })
    }

    pub fn dim(&self) -> usize {
        self.chart.n_base()
    }

    pub fn is_quadratic(&self) -> bool {
        self.quadratic
    }

    fn check_point(&self, point: &[f64]) -> Result<(), GeometryError> {
        if point.len() != self.chart.len() {
            return Err(GeometryError::Dimension(format!(
                "point has {} coordinates, chart has {}",
                point.len(),
                self.chart.len()
            )));
        }
        if !self.quadratic && self.chart.fiber_indices().all(|a| point[a] == 0.0) {
            return Err(GeometryError::ZeroSection);
        }
        Ok(())
    }

    /// Hessian metric `1/2 d^2 L / dy^i dy^j`.
    pub fn hessian(&self, point: &[f64]) -> Result<DMatrix<f64>, GeometryError> {
        self.check_point(point)?;
        let n = self.dim();
        let wrt: Vec<usize> = self.chart.fiber_indices().collect();
        let l = self.l.eval_jet(point, 2, &wrt)?;
        let g = DMatrix::from_fn(n, n, |i, j| 0.5 * l.d(&[i, j]));
        check_block("g", &g)?;
        Ok(g)
    }

    /// Jets of the Hessian metric, the semi-spray and the canonical
    /// N-connection, with g and N of order `order` and G one order higher.
    pub fn jets(&self, point: &[f64], order: usize) -> Result<FinslerJets, GeometryError> {
        self.check_point(point)?;
        let n = self.dim();
        let wrt: Vec<usize> = (0..2 * n).collect();
        let l = self.l.eval_jet(point, order + 3, &wrt)?;
        let ly: Vec<Jet> = (0..n).map(|j| l.derivative(n + j)).collect();
        let mut g = Vec::with_capacity(n * n);
        let mut lxy = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                g.push(ly[j].derivative(n + i).scale(0.5));
                lxy.push(ly[j].derivative(i));
            }
        }
        check_block("g", &DMatrix::from_fn(n, n, |i, j| g[i * n + j].value()))?;
        let ginv = jetmat::invert(&g, n).ok_or(GeometryError::Degenerate {
            block: "g",
            det: 0.0,
        })?;
        let space = JetSpace::get(2 * n, order + 1);
        let y: Vec<Jet> = (0..n).map(|i| Jet::variable(&space, n + i, point[n + i])).collect();
        let rhs: Vec<Jet> = (0..n)
            .map(|j| {
                let mut acc = -l.derivative(j).truncate(order + 1);
                for i in 0..n {
                    acc = &acc + &(&y[i] * &lxy[j * n + i]);
                }
                acc
            })
            .collect();
        let spray: Vec<Jet> = (0..n)
            .map(|k| {
                let mut acc = Jet::zero(&space);
                for j in 0..n {
                    acc = &acc + &(&ginv[k * n + j] * &rhs[j]);
                }
                acc.scale(0.25)
            })
            .collect();
        let nconn: Vec<Jet> = (0..n)
            .flat_map(|a| {
                let s = &spray[a];
                (0..n).map(move |j| s.derivative(n + j))
            })
            .collect();
        let g = g.into_iter().map(|j| j.truncate(order)).collect();
        Ok(FinslerJets {
            g,
            spray,
            n: nconn,
        })
    }

    pub fn spray(&self, point: &[f64]) -> Result<SprayData, GeometryError> {
        let n = self.dim();
        let j = self.jets(point, 0)?;
        Ok(SprayData {
            g: j.spray.iter().map(Jet::value).collect(),
            n: DMatrix::from_fn(n, n, |a, i| j.n[a * n + i].value()),
        })
    }

    /// `L(x, y)` at a point.
    pub fn value(&self, point: &[f64]) -> Result<f64, GeometryError> {
        Ok(self.l.eval(point)?)
    }
}

/// Output of [`FinslerFunction::jets`].
#[derive(Debug, Clone)]
pub struct FinslerJets {
    pub g: Vec<Jet>,
    pub spray: Vec<Jet>,
    pub n: Vec<Jet>,
}

/// Hessian metric of `F2` at `point`.
pub fn hessian_metric(f: &FinslerFunction, point: &[f64]) -> Result<DMatrix<f64>, GeometryError> {
    f.hessian(point)
}

/// Semi-spray and canonical N-connection of `F2` at `point`.
pub fn semi_spray_and_nconnection(f: &FinslerFunction, point: &[f64]) -> Result<SprayData, GeometryError> {
    f.spray(point)
}

/// Sasaki-type d-metric of a generating function: `g = h` = Hessian, `N` canonical.
#[derive(Debug, Clone)]
pub struct FinslerDMetric {
    pub f: FinslerFunction,
    pub lstar: f64,
    pub lstar_in_h: bool,
}

impl FinslerDMetric {
    pub fn new(f: FinslerFunction, lstar: f64) -> Self {
        FinslerDMetric {
            f,
            lstar,
            lstar_in_h: false,
        }
    }
}

impl DMetricField for FinslerDMetric {
    fn nh(&self) -> usize {
        self.f.dim()
    }

    fn nv(&self) -> usize {
        self.f.dim()
    }

    fn lstar(&self) -> f64 {
        self.lstar
    }

    fn jets(&self, point: &[f64], order: usize) -> Result<DMetricJets, GeometryError> {
        let n = self.f.dim();
        let fj = self.f.jets(point, order)?;
        Ok(DMetricJets::new(
            n,
            n,
            fj.g.clone(),
            fj.g,
            fj.n,
            self.lstar,
            self.lstar_in_h,
        ))
    }
}
