//! Coefficient functions that may contain fiber integrals.
//!
//! A [`FieldFn`] is evaluated as a [`Jet`] like an [`Expr`], but can also
//! contain partial derivatives and integrals `int_{lower}^{u_var} f du_var`
//! along one coordinate. Integrals are computed by adaptive Simpson
//! quadrature on fixed-width cells anchored at the lower limit; cells are
//! cached per fiber (all other coordinates fixed), so nested integrals cost
//! one table per fiber and results do not depend on query order.

use rustc_hash::FxHashMap as HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex};

use crate::exprkit::jet::MAX_ORDER;
use crate::exprkit::{Expr, Jet, JetSpace};

use super::SolverError;

/// Absolute tolerance of each quadrature cell.
pub const QUAD_TOL: f64 = 1e-10;
/// Width of the cells the integration axis is cut into.
pub const CELL_WIDTH: f64 = 0.25;
const MAX_DEPTH: u32 = 40;

#[derive(Clone)]
pub enum FieldFn {
    Expr(Expr),
    Add(Box<FieldFn>, Box<FieldFn>),
    Sub(Box<FieldFn>, Box<FieldFn>),
    Mul(Box<FieldFn>, Box<FieldFn>),
    Div(Box<FieldFn>, Box<FieldFn>),
    Neg(Box<FieldFn>),
    Exp(Box<FieldFn>),
    Abs(Box<FieldFn>),
    Powf(Box<FieldFn>, f64),
    /// Partial derivative along a chart coordinate.
    Deriv(Box<FieldFn>, usize),
    Integral(Arc<Integral>),
}

/// `int_{lower}^{u_var} integrand du_var`.
pub struct Integral {
    pub integrand: FieldFn,
    pub var: usize,
    pub lower: f64,
    cells: Mutex<HashMap<CellKey, Arc<Cell>>>,
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct CellKey {
    fiber: Vec<u64>,
    order: usize,
    wrt: Vec<usize>,
    index: i64,
}

/// Adaptive Simpson leaves of one cell, each with its Richardson-corrected
/// coefficient integrals.
struct Cell {
    leaves: Vec<(f64, f64, Vec<f64>)>,
    total: Vec<f64>,
}

impl fmt::Debug for FieldFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldFn::Expr(e) => write!(f, "{e}"),
            FieldFn::Add(a, b) => write!(f, "({a:?} + {b:?})"),
            FieldFn::Sub(a, b) => write!(f, "({a:?} - {b:?})"),
            FieldFn::Mul(a, b) => write!(f, "({a:?} * {b:?})"),
            FieldFn::Div(a, b) => write!(f, "({a:?} / {b:?})"),
            FieldFn::Neg(a) => write!(f, "neg({a:?})"),
            FieldFn::Exp(a) => write!(f, "exp({a:?})"),
            FieldFn::Abs(a) => write!(f, "abs({a:?})"),
            FieldFn::Powf(a, p) => write!(f, "({a:?})^{p:?}"),
            FieldFn::Deriv(a, v) => write!(f, "d{v}({a:?})"),
            FieldFn::Integral(i) => write!(f, "int[{}; {:?}]({:?})", i.var, i.lower, i.integrand),
        }
    }
}

impl From<Expr> for FieldFn {
    fn from(e: Expr) -> Self {
        FieldFn::Expr(e)
    }
}

impl FieldFn {
    pub fn constant(c: f64) -> FieldFn {
        FieldFn::Expr(Expr::Const(c))
    }

    pub fn exp(self) -> FieldFn {
        FieldFn::Exp(Box::new(self))
    }

    pub fn abs(self) -> FieldFn {
        FieldFn::Abs(Box::new(self))
    }

    pub fn powf(self, p: f64) -> FieldFn {
        FieldFn::Powf(Box::new(self), p)
    }

    pub fn deriv(self, var: usize) -> FieldFn {
        FieldFn::Deriv(Box::new(self), var)
    }

    pub fn integral(integrand: FieldFn, var: usize, lower: f64) -> FieldFn {
        FieldFn::Integral(Arc::new(Integral {
            integrand,
            var,
            lower,
            cells: Mutex::new(HashMap::default()),
        }))
    }

    /// Constant zero expression.
    pub fn is_zero(&self) -> bool {
        matches!(self, FieldFn::Expr(e) if e.is_zero())
    }

    /// Conservative structural dependence on a chart coordinate.
    pub fn depends_on(&self, var: usize) -> bool {
        match self {
            FieldFn::Expr(e) => e.depends_on(var),
            FieldFn::Add(a, b) | FieldFn::Sub(a, b) | FieldFn::Mul(a, b) | FieldFn::Div(a, b) => {
                a.depends_on(var) || b.depends_on(var)
            }
            FieldFn::Neg(a) | FieldFn::Exp(a) | FieldFn::Abs(a) | FieldFn::Powf(a, _) => a.depends_on(var),
            FieldFn::Deriv(a, _) => a.depends_on(var),
            FieldFn::Integral(i) => (i.var == var && !i.integrand.is_zero()) || i.integrand.depends_on(var),
        }
    }

    pub fn value(&self, point: &[f64]) -> Result<f64, SolverError> {
        Ok(self.jet(point, 0, &[])?.value())
    }

    /// Jet of the given order with respect to the chart coordinates `wrt`.
    pub fn jet(&self, point: &[f64], order: usize, wrt: &[usize]) -> Result<Jet, SolverError> {
        if order > MAX_ORDER {
            return Err(SolverError::Order(order));
        }
        Ok(match self {
            FieldFn::Expr(e) => e.eval_jet(point, order, wrt)?,
            FieldFn::Add(a, b) => a.jet(point, order, wrt)? + b.jet(point, order, wrt)?,
            FieldFn::Sub(a, b) => a.jet(point, order, wrt)? - b.jet(point, order, wrt)?,
            FieldFn::Mul(a, b) => a.jet(point, order, wrt)? * b.jet(point, order, wrt)?,
            FieldFn::Div(a, b) => {
                let d = b.jet(point, order, wrt)?;
                if d.value() == 0.0 {
                    return Err(SolverError::Degenerate(format!("division by zero in {b:?}")));
                }
                a.jet(point, order, wrt)? / d
            }
            FieldFn::Neg(a) => -a.jet(point, order, wrt)?,
            FieldFn::Exp(a) => a.jet(point, order, wrt)?.exp(),
            FieldFn::Abs(a) => {
                let j = a.jet(point, order, wrt)?;
                if j.value() == 0.0 && order > 0 {
                    return Err(SolverError::Degenerate(format!("abs at zero of {a:?}")));
                }
                j.abs()
            }
            FieldFn::Powf(a, p) => {
                // |u|^p is C^order at u = 0 when p > order, with vanishing derivatives
                if let FieldFn::Abs(inner) = a.as_ref() {
                    let u = inner.jet(point, order, wrt)?;
                    if u.value() == 0.0 && *p > order as f64 {
                        return Ok(Jet::zero(u.space()));
                    }
                }
                let j = a.jet(point, order, wrt)?;
                let v = j.value();
                let integer = p.fract() == 0.0;
                if (v < 0.0 && !integer) || (v == 0.0 && (*p < 0.0 || (order > 0 && !integer))) {
                    return Err(SolverError::Degenerate(format!("{v}^{p} in {a:?}")));
                }
                if integer && p.abs() <= 16.0 {
                    j.powi(*p as i32)
                } else {
                    j.powf(*p)
                }
            }
            FieldFn::Deriv(a, var) => {
                if order + 1 > MAX_ORDER {
                    return Err(SolverError::Order(order + 1));
                }
                match wrt.iter().position(|w| w == var) {
                    Some(k) => a.jet(point, order + 1, wrt)?.derivative(k),
                    None => {
                        let mut ext = wrt.to_vec();
                        ext.push(*var);
                        let d = a.jet(point, order + 1, &ext)?.derivative(wrt.len());
                        drop_last_var(&d)
                    }
                }
            }
            FieldFn::Integral(i) => i.jet(point, order, wrt)?,
        })
    }
}

/// Restricts a jet to monomials that do not involve its last variable.
fn drop_last_var(j: &Jet) -> Jet {
    let n = j.nvars();
    let space = JetSpace::get(n - 1, j.order());
    let src = j.space();
    let coeffs = (0..space.len())
        .map(|i| {
            let mut alpha = space.monomial(i).to_vec();
            alpha.push(0);
            j.coeffs()[src.index_of(&alpha).expect("monomial")]
        })
        .collect();
    Jet::from_coeffs(&space, coeffs)
}

impl Integral {
    fn jet(&self, point: &[f64], order: usize, wrt: &[usize]) -> Result<Jet, SolverError> {
        let reduced: Vec<usize> = wrt.iter().copied().filter(|w| *w != self.var).collect();
        let rspace = JetSpace::get(reduced.len(), order);
        let target = point[self.var];
        let q = self.definite(point, order, &reduced, target)?;
        let Some(pv) = wrt.iter().position(|w| *w == self.var) else {
            return Ok(Jet::from_coeffs(&rspace, q));
        };
        let space = JetSpace::get(wrt.len(), order);
        let f = if order >= 1 {
            Some(self.integrand.jet(point, order - 1, wrt)?)
        } else {
            None
        };
        let coeffs = (0..space.len())
            .map(|i| {
                let alpha = space.monomial(i);
                let k = alpha[pv];
                if k == 0 {
                    let r: Vec<u8> = alpha
                        .iter()
                        .enumerate()
                        .filter(|(p, _)| *p != pv)
                        .map(|(_, a)| *a)
                        .collect();
                    q[rspace.index_of(&r).expect("monomial")]
                } else {
                    let f = f.as_ref().expect("order >= 1");
                    let mut lower = alpha.to_vec();
                    lower[pv] -= 1;
                    f.coeffs()[f.space().index_of(&lower).expect("monomial")] / k as f64
                }
            })
            .collect();
        Ok(Jet::from_coeffs(&space, coeffs))
    }

    fn fiber_key(&self, point: &[f64]) -> Vec<u64> {
        point
            .iter()
            .enumerate()
            .map(|(k, v)| if k == self.var { 0 } else { v.to_bits() })
            .collect()
    }

    fn sample(&self, point: &[f64], order: usize, wrt: &[usize], s: f64) -> Result<Vec<f64>, SolverError> {
        let mut p = point.to_vec();
        p[self.var] = s;
        Ok(self.integrand.jet(&p, order, wrt)?.coeffs().to_vec())
    }

    fn cell(&self, point: &[f64], order: usize, wrt: &[usize], index: i64) -> Result<Arc<Cell>, SolverError> {
        let key = CellKey {
            fiber: self.fiber_key(point),
            order,
            wrt: wrt.to_vec(),
            index,
        };
        if let Some(c) = self.cells.lock().expect("quadrature cache").get(&key) {
            return Ok(c.clone());
        }
        let a = self.lower + index as f64 * CELL_WIDTH;
        let b = a + CELL_WIDTH;
        let f = |s: f64| self.sample(point, order, wrt, s);
        let fa = f(a)?;
        let fm = f(0.5 * (a + b))?;
        let fb = f(b)?;
        let whole = simpson(a, b, &fa, &fm, &fb);
        let mut leaves = Vec::new();
        adaptive(&f, a, b, fa, fm, fb, whole, QUAD_TOL, MAX_DEPTH, &mut leaves)?;
        let mut total = vec![0.0; leaves[0].2.len()];
        for (_, _, v) in &leaves {
            add_into(&mut total, v, 1.0);
        }
        let cell = Arc::new(Cell { leaves, total });
        self.cells
            .lock()
            .expect("quadrature cache")
            .entry(key)
            .or_insert(cell.clone());
        Ok(cell)
    }

    /// `int_{cell start}^{s}` inside one cell.
    fn partial(&self, cell: &Cell, point: &[f64], order: usize, wrt: &[usize], s: f64) -> Result<Vec<f64>, SolverError> {
        let mut acc = vec![0.0; cell.total.len()];
        for (a, b, v) in &cell.leaves {
            if *b <= s {
                add_into(&mut acc, v, 1.0);
            } else {
                if s > *a {
                    let part = gauss5(|t| self.sample(point, order, wrt, t), *a, s)?;
                    add_into(&mut acc, &part, 1.0);
                }
                break;
            }
        }
        Ok(acc)
    }

    /// Coefficient integrals of the integrand jet from `lower` to `target`.
    fn definite(&self, point: &[f64], order: usize, wrt: &[usize], target: f64) -> Result<Vec<f64>, SolverError> {
        let len = JetSpace::get(wrt.len(), order).len();
        let mut acc = vec![0.0; len];
        if !target.is_finite() {
            return Err(SolverError::Degenerate(format!("integration limit {target}")));
        }
        let pos = (target - self.lower) / CELL_WIDTH;
        let k_end = pos.floor() as i64;
        if k_end >= 0 {
            for k in 0..k_end {
                add_into(&mut acc, &self.cell(point, order, wrt, k)?.total, 1.0);
            }
            let c = self.cell(point, order, wrt, k_end)?;
            add_into(&mut acc, &self.partial(&c, point, order, wrt, target)?, 1.0);
        } else {
            for k in (k_end + 1..0).rev() {
                add_into(&mut acc, &self.cell(point, order, wrt, k)?.total, -1.0);
            }
            let c = self.cell(point, order, wrt, k_end)?;
            let left = self.partial(&c, point, order, wrt, target)?;
            add_into(&mut acc, &c.total, -1.0);
            add_into(&mut acc, &left, 1.0);
        }
        Ok(acc)
    }
}

fn add_into(acc: &mut [f64], v: &[f64], s: f64) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += s * b;
    }
}

fn simpson(a: f64, b: f64, fa: &[f64], fm: &[f64], fb: &[f64]) -> Vec<f64> {
    let h = (b - a) / 6.0;
    fa.iter()
        .zip(fm)
        .zip(fb)
        .map(|((x, y), z)| h * (x + 4.0 * y + z))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &impl Fn(f64) -> Result<Vec<f64>, SolverError>,
    a: f64,
    b: f64,
    fa: Vec<f64>,
    fm: Vec<f64>,
    fb: Vec<f64>,
    whole: Vec<f64>,
    tol: f64,
    depth: u32,
    leaves: &mut Vec<(f64, f64, Vec<f64>)>,
) -> Result<(), SolverError> {
    let m = 0.5 * (a + b);
    let flm = f(0.5 * (a + m))?;
    let frm = f(0.5 * (m + b))?;
    let left = simpson(a, m, &fa, &flm, &fm);
    let right = simpson(m, b, &fm, &frm, &fb);
    let err = left
        .iter()
        .zip(&right)
        .zip(&whole)
        .map(|((l, r), w)| (l + r - w).abs())
        .fold(0.0, f64::max);
    if err <= 15.0 * tol || depth == 0 {
        let v = left
            .iter()
            .zip(&right)
            .zip(&whole)
            .map(|((l, r), w)| l + r + (l + r - w) / 15.0)
            .collect();
        leaves.push((a, b, v));
        return Ok(());
    }
    adaptive(f, a, m, fa, flm, fm.clone(), left, 0.5 * tol, depth - 1, leaves)?;
    adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, leaves)
}

/// Five-point Gauss-Legendre rule on `[a, b]`.
fn gauss5(f: impl Fn(f64) -> Result<Vec<f64>, SolverError>, a: f64, b: f64) -> Result<Vec<f64>, SolverError> {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_47,
        0.478_628_670_499_366_47,
        0.236_926_885_056_189_08,
        0.236_926_885_056_189_08,
    ];
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc: Option<Vec<f64>> = None;
    for (x, w) in X.iter().zip(W) {
        let v = f(c + h * x)?;
        match acc.as_mut() {
            None => acc = Some(v.iter().map(|y| w * h * y).collect()),
            Some(s) => add_into(s, &v, w * h),
        }
    }
    Ok(acc.expect("five nodes"))
}

macro_rules! field_binop {
    ($tr:ident, $m:ident, $v:ident) => {
        impl $tr for FieldFn {
            type Output = FieldFn;
            fn $m(self, rhs: FieldFn) -> FieldFn {
                FieldFn::$v(Box::new(self), Box::new(rhs))
            }
        }
    };
}

field_binop!(Add, add, Add);
field_binop!(Sub, sub, Sub);
field_binop!(Mul, mul, Mul);
field_binop!(Div, div, Div);

impl Neg for FieldFn {
    type Output = FieldFn;
    fn neg(self) -> FieldFn {
        FieldFn::Neg(Box::new(self))
    }
}
