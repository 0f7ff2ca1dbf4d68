//! Diagonal trapping profile on the 8-d tangent bundle, its sources with the
//! reduced conservation law, and the off-diagonal brane metric assembled from
//! a shell ansatz.

use nalgebra::SMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::exprkit::{Jet, JetSpace};
use crate::solver::{coord, FieldFn, ShellAnsatz, SolverError};

pub type Matrix8 = SMatrix<f64, 8, 8>;

/// Bracket scanned when solving for the asymptotic constant.
pub const A_BRACKET: (f64, f64) = (0.0, 100.0);
/// Number of scan intervals over the bracket.
pub const A_SCAN: usize = 1000;
/// Bisection tolerance on `a`.
pub const A_TOL: f64 = 1e-12;
/// Largest `|phi''(eps)| eps^2` accepted at a tangent root.
pub const TANGENT_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BraneError {
    #[error("no sign change of phi''(eps) for a in ({lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("invalid brane parameters: {0}")]
    Invalid(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// How the asymptotic constant `a` is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AMode {
    /// Root of `d^2 phi / ds^2 = 0` at `s = eps`.
    Solve,
    Given(f64),
}

/// Warped profile `phi^2(s)`, `l sqrt|hbar|(s)` over the fiber coordinate `s = y5`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BraneProfile {
    pub eps: f64,
    pub a: f64,
    pub mass: f64,
    pub lambda: f64,
    pub m: u32,
    pub phi0: f64,
    /// Scale in front of the extra-dimensional block of the off-diagonal metric.
    pub lstar: f64,
}

/// Profile quantities as jets in `s`.
struct ProfileJets {
    phi2: Jet,
    /// `M^-(m+2) K1`, `M^-(m+2) K2`.
    k1: Jet,
    k2: Jet,
}

impl BraneProfile {
    /// Profile and reduced sources `M^-(m+2) K_i = Lambda + P_i(s) / (3 eps^2 + s^2)^2` as jets.
    fn jets(&self, s: f64, order: usize) -> ProfileJets {
        let space = JetSpace::get(1, order);
        let y = Jet::variable(&space, 0, s);
        let e2 = self.eps * self.eps;
        let y2 = &y * &y;
        let y4 = &y2 * &y2;
        let den = y2.add_scalar(3.0 * e2);
        let phi2 = &y2.scale(self.a).add_scalar(3.0 * e2) / &den;
        let inv_den2 = den.powi(-2);
        let (m, p) = (self.m as f64, self.phi0);
        let p1 = (&y4.scale(2.0 * p * m * (p * (m + 2.0) - 3.0) / (3.0 * e2))
            + &y2.scale(2.0 * (-2.0 * p * (m * m + 2.0 * m + 6.0) + 3.0 * (m + 3.0) * (1.0 + p * p))))
            .add_scalar(-6.0 * e2 * m * (m - 3.0 * p + 2.0));
        let p2 = (&y4.scale(2.0 * p * (m - 1.0) * (p * (m + 2.0) - 4.0) / (3.0 * e2))
            + &y2.scale(4.0 * (-p * (m * m + m + 10.0) + 2.0 * (m + 2.0) * (1.0 + p * p))))
            .add_scalar(-6.0 * e2 * (m - 1.0) * (m - 4.0 * p + 2.0));
        ProfileJets {
            phi2,
            k1: (&p1 * &inv_den2).add_scalar(self.lambda),
            k2: (&p2 * &inv_den2).add_scalar(self.lambda),
        }
    }

    pub fn phi2(&self, s: f64) -> f64 {
        let c = 3.0 * self.eps * self.eps;
        (c + self.a * s * s) / (c + s * s)
    }

    /// `l sqrt|hbar|(s)`.
    pub fn warp(&self, s: f64) -> f64 {
        let c = 3.0 * self.eps * self.eps;
        c * c / (c + s * s).powi(2)
    }

    /// `hbar(s)`, normalized so that `hbar(0) = 1`.
    pub fn hbar(&self, s: f64) -> f64 {
        self.warp(s).powi(2)
    }

    fn mass_factor(&self) -> f64 {
        self.mass.powi(self.m as i32 + 2)
    }

    pub fn k1(&self, s: f64) -> f64 {
        self.mass_factor() * self.jets(s, 0).k1.value()
    }

    pub fn k2(&self, s: f64) -> f64 {
        self.mass_factor() * self.jets(s, 0).k2.value()
    }

    /// `(Upsilon^beta_delta, Upsilon^5_5 = Upsilon^6_6)` at `s`.
    pub fn sources(&self, s: f64) -> (f64, f64) {
        let j = self.jets(s, 0);
        (self.lambda - j.k1.value(), self.lambda - j.k2.value())
    }

    /// `|dK1/ds - 4 (K2 - K1) d ln|phi| / ds|` at `s`.
    pub fn conservation_residual(&self, s: f64) -> f64 {
        let j = self.jets(s, 1);
        let f = self.mass_factor();
        let dk1 = f * j.k1.d(&[0]);
        let dlnphi = 0.5 * j.phi2.d(&[0]) / j.phi2.value();
        (dk1 - 4.0 * f * (j.k2.value() - j.k1.value()) * dlnphi).abs()
    }
}

/// `d^2 phi / ds^2` at `s = eps` and its derivative in `a`.
fn curvature_at_width(eps: f64, a: f64) -> (f64, f64) {
    let space = JetSpace::get(2, 3);
    let s = Jet::variable(&space, 0, eps);
    let av = Jet::variable(&space, 1, a);
    let s2 = &s * &s;
    let c = 3.0 * eps * eps;
    let phi = (&(&av * &s2).add_scalar(c) / &s2.add_scalar(c)).sqrt();
    (phi.d(&[0, 0]), phi.d(&[0, 0, 1]))
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    while hi - lo > A_TOL {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `phi''(eps) = 0` for `a` in `(0, 100]`. A scan looks for a sign
/// change; failing that, a tangent root is located where `d phi''/da` changes
/// sign and accepted if `phi''` vanishes there.
pub fn solve_asymptotic_constant(eps: f64) -> Result<f64, BraneError> {
    let (lo, hi) = A_BRACKET;
    let f = |a: f64| curvature_at_width(eps, a).0;
    let fa = |a: f64| curvature_at_width(eps, a).1;
    let samples: Vec<(f64, f64)> = (1..=A_SCAN)
        .map(|k| {
            let a = lo + (hi - lo) * k as f64 / A_SCAN as f64;
            (a, f(a))
        })
        .collect();
    if let Some((a, _)) = samples.iter().find(|(_, v)| *v == 0.0) {
        return Ok(*a);
    }
    if let Some(w) = samples.windows(2).find(|w| w[0].1 * w[1].1 < 0.0) {
        return Ok(bisect(f, w[0].0, w[1].0));
    }
    let k = (0..samples.len())
        .min_by(|&i, &j| samples[i].1.abs().total_cmp(&samples[j].1.abs()))
        .expect("nonempty scan");
    let left = if k == 0 { 0.5 * samples[0].0 } else { samples[k - 1].0 };
    let right = samples[(k + 1).min(samples.len() - 1)].0;
    if fa(left) * fa(right) < 0.0 {
        let a = bisect(fa, left, right);
        if f(a).abs() * eps * eps <= TANGENT_TOL {
            return Ok(a);
        }
    }
    Err(BraneError::NoSignChange { lo, hi })
}

/// Profile with `eps^2 = 40 M^4 / (3 Lambda)`.
pub fn brane_profile(mass: f64, lambda: f64, m: u32, phi0: f64, a_mode: AMode) -> Result<BraneProfile, BraneError> {
    if !(mass > 0.0 && lambda > 0.0) {
        return Err(BraneError::Invalid(format!("need M > 0 and Lambda > 0, got M = {mass}, Lambda = {lambda}")));
    }
    if m < 2 {
        return Err(BraneError::Invalid(format!("extra-dimension count m = {m} is below 2")));
    }
    let eps = (40.0 * mass.powi(4) / (3.0 * lambda)).sqrt();
    let a = match a_mode {
        AMode::Solve => solve_asymptotic_constant(eps)?,
        AMode::Given(a) => a,
    };
    Ok(BraneProfile {
        eps,
        a,
        mass,
        lambda,
        m,
        phi0,
        lstar: 1.0,
    })
}

/// One row of the brane report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BraneSample {
    pub y5: f64,
    pub phi2: f64,
    /// `l sqrt|hbar|`.
    pub hbar: f64,
    pub k1: f64,
    pub k2: f64,
    pub cons_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BraneReport {
    pub samples: Vec<BraneSample>,
    pub max_conservation_residual: f64,
}

/// Samples of the profile, sources and conservation residual over `y5` values.
pub fn brane_sources_and_conservation(p: &BraneProfile, grid: &[f64]) -> BraneReport {
    let samples: Vec<BraneSample> = grid
        .iter()
        .map(|&s| BraneSample {
            y5: s,
            phi2: p.phi2(s),
            hbar: p.warp(s),
            k1: p.k1(s),
            k2: p.k2(s),
            cons_residual: p.conservation_residual(s),
        })
        .collect();
    let max = samples.iter().map(|s| s.cons_residual).fold(0.0, f64::max);
    BraneReport {
        samples,
        max_conservation_residual: max,
    }
}

/// Diagonal metric `phi^2 eta (+) -l^2 hbar diag(1, 1, s7, s8)` at `y5 = s`,
/// with `eta = diag(1, -1, -1, -1)`.
pub fn diagonal_brane_metric(p: &BraneProfile, s: f64, signs: [f64; 2]) -> Matrix8 {
    let phi2 = p.phi2(s);
    let fiber = -p.lstar * p.lstar * p.hbar(s);
    Matrix8::from_diagonal(&nalgebra::SVector::<f64, 8>::from([
        phi2,
        -phi2,
        -phi2,
        -phi2,
        fiber,
        fiber,
        signs[0] * fiber,
        signs[1] * fiber,
    ]))
}

/// Off-diagonal brane metric in coordinates `(x1, x2, y3 .. y8)`. The outer
/// shell coefficients are `h_k = l^2 (hbar / phi^2) qh_k`, `k = 5..8`, and each
/// fiber coframe carries its `x`-components only.
pub fn assemble_brane_metric(
    a: &ShellAnsatz,
    p: &BraneProfile,
    qh: &[FieldFn; 4],
    point: &[f64],
) -> Result<Matrix8, BraneError> {
    if point.len() != coord::DIM {
        return Err(BraneError::Invalid(format!("expected {} coordinates, got {}", coord::DIM, point.len())));
    }
    let s = point[coord::Y5];
    let phi2 = p.phi2(s);
    if phi2 == 0.0 {
        return Err(BraneError::Invalid(format!("phi vanishes at y5 = {s}")));
    }
    let scale = p.lstar * p.lstar * p.hbar(s) / phi2;
    let mut h = [0.0; 6];
    h[0] = a.h[0].value(point)?;
    h[1] = a.h[1].value(point)?;
    for k in 0..4 {
        h[k + 2] = scale * qh[k].value(point)?;
    }
    let coeffs = [&a.w[..], &a.n[..], &a.w1[..], &a.n1[..], &a.w2[..], &a.n2[..]];
    let mut nmat = [[0.0; 2]; 6];
    for (row, c) in nmat.iter_mut().zip(coeffs) {
        for i in 0..2 {
            row[i] = c[i].value(point)?;
        }
    }
    let g = [a.g[0].value(point)?, a.g[1].value(point)?];
    let mut out = Matrix8::zeros();
    for i in 0..2 {
        for j in 0..2 {
            let mut b = if i == j { g[i] } else { 0.0 };
            for k in 0..6 {
                b += nmat[k][i] * nmat[k][j] * h[k];
            }
            out[(i, j)] = b;
        }
        for k in 0..6 {
            out[(i, k + 2)] = nmat[k][i] * h[k];
            out[(k + 2, i)] = nmat[k][i] * h[k];
        }
    }
    for k in 0..6 {
        out[(k + 2, k + 2)] = h[k];
    }
    Ok(out)
}
