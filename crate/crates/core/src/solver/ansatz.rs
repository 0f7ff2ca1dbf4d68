use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::exprkit::Expr;

use super::field::FieldFn;
use super::SolverError;

/// Chart positions of the shell coordinates `x1, x2 | y3 .. y8`.
pub mod coord {
    pub const X1: usize = 0;
    pub const X2: usize = 1;
    pub const V: usize = 2;
    pub const Y4: usize = 3;
    pub const Y5: usize = 4;
    pub const Y6: usize = 5;
    pub const Y7: usize = 6;
    pub const Y8: usize = 7;
    pub const DIM: usize = 8;
}

/// Coefficients of the Killing-reduced three-shell ansatz.
///
/// `h[0..6]` holds `h3 .. h8`. `w1`, `n1` are indexed by the shell-0
/// coordinates `(x1, x2, y3, y4)`, `w2`, `n2` by `(x1, x2, y3 .. y6)`.
#[derive(Debug, Clone)]
pub struct ShellAnsatz {
    pub g: [FieldFn; 2],
    pub h: [FieldFn; 6],
    pub w: [FieldFn; 2],
    pub n: [FieldFn; 2],
    pub w1: [FieldFn; 4],
    pub n1: [FieldFn; 4],
    pub w2: [FieldFn; 6],
    pub n2: [FieldFn; 6],
}

fn zeros<const N: usize>() -> [FieldFn; N] {
    std::array::from_fn(|_| FieldFn::constant(0.0))
}

impl ShellAnsatz {
    /// Diagonal ansatz with vanishing N-coefficients.
    pub fn diagonal(g: [FieldFn; 2], h: [FieldFn; 6]) -> ShellAnsatz {
        ShellAnsatz {
            g,
            h,
            w: zeros(),
            n: zeros(),
            w1: zeros(),
            n1: zeros(),
            w2: zeros(),
            n2: zeros(),
        }
    }

    /// Constant diagonal coefficients.
    pub fn flat(g: [f64; 2], h: [f64; 6]) -> ShellAnsatz {
        ShellAnsatz::diagonal(g.map(FieldFn::constant), h.map(FieldFn::constant))
    }

    fn named(&self) -> Vec<(String, &FieldFn, &'static [usize])> {
        use coord::*;
        const G: &[usize] = &[X1, X2];
        const S0: &[usize] = &[X1, X2, V];
        const S1: &[usize] = &[X1, X2, V, Y5];
        const S2: &[usize] = &[X1, X2, V, Y5, Y7];
        let mut out: Vec<(String, &FieldFn, &'static [usize])> = Vec::new();
        for (k, f) in self.g.iter().enumerate() {
            out.push((format!("g{}", k + 1), f, G));
        }
        for (k, f) in self.h.iter().enumerate() {
            let allowed = match k {
                0 | 1 => S0,
                2 | 3 => S1,
                _ => S2,
            };
            out.push((format!("h{}", k + 3), f, allowed));
        }
        for k in 0..2 {
            out.push((format!("w_{}", k + 1), &self.w[k], S0));
            out.push((format!("n_{}", k + 1), &self.n[k], S0));
        }
        for k in 0..4 {
            out.push((format!("w_alpha_1[{k}]"), &self.w1[k], S1));
            out.push((format!("n_alpha_1[{k}]"), &self.n1[k], S1));
        }
        for k in 0..6 {
            out.push((format!("w_alpha_2[{k}]"), &self.w2[k], S2));
            out.push((format!("n_alpha_2[{k}]"), &self.n2[k], S2));
        }
        out
    }

    /// Checks the variable dependence of every coefficient, including the
    /// Killing symmetry on `y4, y6, y8`.
    pub fn validate(&self) -> Result<(), SolverError> {
        for (name, f, allowed) in self.named() {
            for var in 0..coord::DIM {
                if !allowed.contains(&var) && f.depends_on(var) {
                    return Err(SolverError::Config(format!(
                        "coefficient {name} depends on coordinate {}",
                        COORD_NAMES[var]
                    )));
                }
            }
        }
        Ok(())
    }
}

pub const COORD_NAMES: [&str; 8] = ["x1", "x2", "y3", "y4", "y5", "y6", "y7", "y8"];

/// Diagonal sources `Upsilon_2, Upsilon_4, Upsilon_6, Upsilon_8` in adapted
/// frames, together with the combinations `(hL, vL, 1L, 2L)` entering the
/// shell equations.
#[derive(Debug, Clone)]
pub struct SourceSpec {
    pub upsilon: [Expr; 4],
    lambdas: [Expr; 4],
}

/// Matrix taking `(U2, U4, U6, U8)` to `(hL, vL, 1L, 2L)`; each row omits one source.
pub fn source_matrix() -> Matrix4<f64> {
    Matrix4::from_fn(|r, c| if r == c { 0.0 } else { 1.0 })
}

/// `(hL, vL, 1L, 2L)` from `(U2, U4, U6, U8)`.
pub fn source_algebra(u: [f64; 4]) -> [f64; 4] {
    let l = source_matrix() * nalgebra::Vector4::from(u);
    [l[0], l[1], l[2], l[3]]
}

/// `(U2, U4, U6, U8)` from `(hL, vL, 1L, 2L)` by solving the linear system.
pub fn source_inverse(l: [f64; 4]) -> Result<[f64; 4], SolverError> {
    let u = source_matrix()
        .lu()
        .solve(&nalgebra::Vector4::from(l))
        .ok_or_else(|| SolverError::Config("singular source system".into()))?;
    Ok([u[0], u[1], u[2], u[3]])
}

impl SourceSpec {
    /// hL = U4 + U6 + U8, vL = U2 + U6 + U8, 1L = U2 + U4 + U8, 2L = U2 + U4 + U6.
    pub fn new(upsilon: [Expr; 4]) -> SourceSpec {
        let lambdas = std::array::from_fn(|skip| {
            Expr::sum((0..4).filter(|k| *k != skip).map(|k| upsilon[k].clone()))
        });
        SourceSpec { upsilon, lambdas }
    }

    pub fn constant(u: [f64; 4]) -> SourceSpec {
        SourceSpec::new(u.map(Expr::Const))
    }

    /// Sources realizing prescribed `(hL, vL, 1L, 2L)`; the prescribed
    /// expressions are kept as given.
    pub fn from_lambdas(l: [Expr; 4]) -> Result<SourceSpec, SolverError> {
        let inv = source_matrix()
            .try_inverse()
            .ok_or_else(|| SolverError::Config("singular source system".into()))?;
        let upsilon = std::array::from_fn(|r| {
            Expr::sum((0..4).filter_map(|c| {
                let k = inv[(r, c)];
                (k != 0.0).then(|| Expr::Const(k) * l[c].clone())
            }))
        });
        Ok(SourceSpec { upsilon, lambdas: l })
    }

    pub fn lambda_h(&self) -> Expr {
        self.lambdas[0].clone()
    }

    pub fn lambda_v(&self) -> Expr {
        self.lambdas[1].clone()
    }

    pub fn lambda_1(&self) -> Expr {
        self.lambdas[2].clone()
    }

    pub fn lambda_2(&self) -> Expr {
        self.lambdas[3].clone()
    }

    pub fn lambdas(&self) -> [Expr; 4] {
        self.lambdas.clone()
    }
}

/// One axis of a tensor grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub var: usize,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|k| self.min + step * k as f64).collect()
    }
}

/// Axis-aligned tensor grid; coordinates without an axis keep their base value.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub base: Vec<f64>,
    pub axes: Vec<Axis>,
}

impl Grid {
    pub fn new(base: Vec<f64>, axes: Vec<Axis>) -> Result<Grid, SolverError> {
        for a in &axes {
            if a.count == 0 {
                return Err(SolverError::Config(format!("grid axis {} has zero points", a.var)));
            }
            if a.var >= base.len() {
                return Err(SolverError::Config(format!("grid axis {} outside the chart", a.var)));
            }
        }
        Ok(Grid { base, axes })
    }

    /// Points in row-major order, last axis fastest.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = vec![self.base.clone()];
        for a in &self.axes {
            let vals = a.values();
            out = out
                .into_iter()
                .flat_map(|p| {
                    vals.iter().map(move |v| {
                        let mut q = p.clone();
                        q[a.var] = *v;
                        q
                    })
                })
                .collect();
        }
        out
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
