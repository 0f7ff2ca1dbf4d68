use crate::exprkit::Expr;

use super::ansatz::{coord::*, Grid, ShellAnsatz, SourceSpec};
use super::field::FieldFn;
use super::residuals::DEGENERACY_TOL;
use super::SolverError;

/// Generating functions, integration functions and branch choices.
///
/// `phi[0]` depends on `(x, y3)`, `phi[1]` on `(x, y3, y5)` and `phi[2]` on
/// `(x, y3, y5, y7)`. `h0` holds the integration functions added to `h4`,
/// `h6`, `h8`. The `n` integration functions are indexed like the
/// corresponding N-coefficients of [`ShellAnsatz`].
#[derive(Debug, Clone)]
pub struct GeneratingData {
    /// Signature label of `g1 = g2 = eps exp(psi)`.
    pub eps: f64,
    pub psi: Expr,
    pub phi: [Expr; 3],
    pub h0: [Expr; 3],
    pub n0: [Vec<Expr>; 3],
    pub n1: [Vec<Expr>; 3],
    /// Branch sign per shell; flipping it flips the sign of `h4` (`h6`, `h8`)
    /// when the corresponding `h0` vanishes.
    pub signs: [f64; 3],
    /// Lower limits of the fiber integrals in `y3`, `y5`, `y7`.
    pub lower: [f64; 3],
}

fn zero_exprs(n: usize) -> Vec<Expr> {
    vec![Expr::Const(0.0); n]
}

impl GeneratingData {
    /// Zero integration functions, `+` branches, lower limits at 0.
    pub fn new(eps: f64, psi: Expr, phi: [Expr; 3]) -> GeneratingData {
        GeneratingData {
            eps,
            psi,
            phi,
            h0: [Expr::Const(0.0), Expr::Const(0.0), Expr::Const(0.0)],
            n0: [zero_exprs(2), zero_exprs(4), zero_exprs(6)],
            n1: [zero_exprs(2), zero_exprs(4), zero_exprs(6)],
            signs: [1.0; 3],
            lower: [0.0; 3],
        }
    }

    fn validate(&self) -> Result<(), SolverError> {
        if self.eps.abs() != 1.0 {
            return Err(SolverError::Config(format!("eps must be +1 or -1, got {}", self.eps)));
        }
        for s in self.signs {
            if s.abs() != 1.0 {
                return Err(SolverError::Config(format!("branch signs must be +1 or -1, got {s}")));
            }
        }
        for (k, len) in [2, 4, 6].into_iter().enumerate() {
            if self.n0[k].len() != len || self.n1[k].len() != len {
                return Err(SolverError::Config(format!(
                    "shell {k} needs {len} n integration functions"
                )));
            }
        }
        Ok(())
    }
}

/// `psi` with `eps (psi_11 + psi_22) = 2 hL exp(psi)` for a constant `hL`,
/// i.e. a conformal factor of constant curvature. For `eps hL > 0` it is
/// regular inside the unit disc only.
pub fn liouville_psi(eps: f64, lambda_h: f64) -> Expr {
    let r2 = Expr::Var(X1, "x1".into()).pow(2.0) + Expr::Var(X2, "x2".into()).pow(2.0);
    let k = eps * lambda_h;
    if k == 0.0 {
        return Expr::Const(0.0);
    }
    let (amp, base) = if k < 0.0 {
        (-4.0 / k, Expr::Const(1.0) + r2)
    } else {
        (4.0 / k, Expr::Const(1.0) - r2)
    };
    (Expr::Const(amp) / base.pow(2.0)).log()
}

struct ShellSpec<'a> {
    fiber: usize,
    lower_coords: &'a [usize],
    killing: &'a [usize],
    phi: &'a Expr,
    lambda: Expr,
    h0: &'a Expr,
    n0: &'a [Expr],
    n1: &'a [Expr],
    sign: f64,
    lower: f64,
}

struct ShellOut {
    ha: FieldFn,
    hb: FieldFn,
    w: Vec<FieldFn>,
    n: Vec<FieldFn>,
}

fn build_shell(s: &ShellSpec) -> ShellOut {
    let phi = FieldFn::from(s.phi.clone());
    let e2 = FieldFn::from((Expr::Const(2.0) * s.phi.clone()).exp());
    let em2 = FieldFn::from((Expr::Const(-2.0) * s.phi.clone()).exp());
    // d hb / d fiber
    let slope = FieldFn::constant(0.25 * s.sign) * e2.clone().deriv(s.fiber) / FieldFn::from(s.lambda.clone());
    let hb = FieldFn::from(s.h0.clone()) + FieldFn::integral(slope.clone(), s.fiber, s.lower);
    let ha = FieldFn::constant(s.sign) * slope.clone() * slope.clone() * em2 / hb.clone();
    let w = s
        .lower_coords
        .iter()
        .map(|&c| {
            if s.killing.contains(&c) {
                FieldFn::constant(0.0)
            } else {
                phi.clone().deriv(c) / phi.clone().deriv(s.fiber)
            }
        })
        .collect();
    // |hb|^(3/2) / |ha| rewritten so that it stays finite where hb vanishes
    let weight = hb.clone().abs().powf(2.5) * e2 / (slope.clone() * slope);
    let integral = FieldFn::integral(weight, s.fiber, s.lower);
    let n = s
        .n0
        .iter()
        .zip(s.n1)
        .map(|(n0, n1)| {
            let base = FieldFn::from(n0.clone());
            if n1.is_zero() {
                base
            } else {
                base + FieldFn::from(n1.clone()) * integral.clone()
            }
        })
        .collect();
    ShellOut { ha, hb, w, n }
}

fn vec_to_array<const N: usize>(v: Vec<FieldFn>) -> [FieldFn; N] {
    v.try_into().expect("length checked")
}

/// Exact solution of the separated equations from generating data.
///
/// `h4 = h0 + (s/4) int (exp(2 phi))^* / vL dv`, `h3 = s (h4^*)^2 exp(-2 phi) / h4`,
/// `w_i = d_i phi / phi^*`, `n_k = n0_k + n1_k int |h4|^(3/2) / |h3| dv`, and
/// the same pattern on the outer shells. The grid is used to check the
/// nonvanishing preconditions.
pub fn generate_solution(gd: &GeneratingData, s: &SourceSpec, grid: &Grid) -> Result<ShellAnsatz, SolverError> {
    gd.validate()?;
    let l = s.lambdas();
    let specs = [
        ShellSpec {
            fiber: V,
            lower_coords: &[X1, X2],
            killing: &[],
            phi: &gd.phi[0],
            lambda: l[1].clone(),
            h0: &gd.h0[0],
            n0: &gd.n0[0],
            n1: &gd.n1[0],
            sign: gd.signs[0],
            lower: gd.lower[0],
        },
        ShellSpec {
            fiber: Y5,
            lower_coords: &[X1, X2, V, Y4],
            killing: &[Y4],
            phi: &gd.phi[1],
            lambda: l[2].clone(),
            h0: &gd.h0[1],
            n0: &gd.n0[1],
            n1: &gd.n1[1],
            sign: gd.signs[1],
            lower: gd.lower[1],
        },
        ShellSpec {
            fiber: Y7,
            lower_coords: &[X1, X2, V, Y4, Y5, Y6],
            killing: &[Y4, Y6],
            phi: &gd.phi[2],
            lambda: l[3].clone(),
            h0: &gd.h0[2],
            n0: &gd.n0[2],
            n1: &gd.n1[2],
            sign: gd.signs[2],
            lower: gd.lower[2],
        },
    ];
    for p in grid.points() {
        for (k, sp) in specs.iter().enumerate() {
            let dphi = sp.phi.eval_jet(&p, 1, &[sp.fiber])?.d(&[0]);
            if !(dphi.abs() >= DEGENERACY_TOL) {
                return Err(SolverError::Degenerate(format!(
                    "fiber derivative of the shell-{k} generating function vanishes at {p:?}"
                )));
            }
            let lam = sp.lambda.eval(&p)?;
            if !(lam.abs() >= DEGENERACY_TOL) {
                return Err(SolverError::Degenerate(format!("shell-{k} source vanishes at {p:?}")));
            }
        }
    }
    let mut outs: Vec<ShellOut> = specs.iter().map(build_shell).collect();
    let g = FieldFn::from(Expr::Const(gd.eps) * gd.psi.clone().exp());
    let s2 = outs.pop().expect("three shells");
    let s1 = outs.pop().expect("three shells");
    let s0 = outs.pop().expect("three shells");
    let ansatz = ShellAnsatz {
        g: [g.clone(), g],
        h: [s0.ha, s0.hb, s1.ha, s1.hb, s2.ha, s2.hb],
        w: vec_to_array(s0.w),
        n: vec_to_array(s0.n),
        w1: vec_to_array(s1.w),
        n1: vec_to_array(s1.n),
        w2: vec_to_array(s2.w),
        n2: vec_to_array(s2.n),
    };
    ansatz.validate()?;
    Ok(ansatz)
}
