//! Horava-Lifshitz ingredients: ADM assembly, anisotropic scaling,
//! three-dimensional curvature invariants, the action density, GR-limit
//! constants and the perturbative dispersion branches.

use nalgebra::{Matrix3, Matrix4};
use thiserror::Error;

use crate::exprkit::{jetmat, Chart, Expr, ExprError, Jet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HlError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("pole at lambda = 1/3 (lambda = {lambda})")]
    Pole { lambda: f64 },
    #[error("imaginary light speed: Lambda/(1 - 3 lambda) = {ratio} < 0")]
    ImaginarySpeed { ratio: f64 },
    #[error("degenerate spatial metric: det = {det:e}")]
    Degenerate { det: f64 },
    #[error("lapse depends on spatial coordinate `{0}`; projectability requires N = N(t)")]
    NotProjectable(String),
    #[error("vanishing lapse")]
    ZeroLapse,
    #[error("{0}")]
    Invalid(String),
}

/// Coupling constants of the theory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HlConstants {
    pub kappa: f64,
    pub mu: f64,
    pub varpi: f64,
    /// The cosmological constant of the potential.
    pub cc: f64,
    pub lambda: f64,
    pub eta: f64,
    pub z: f64,
}

impl Default for HlConstants {
    fn default() -> Self {
        HlConstants {
            kappa: 1.0,
            mu: 1.0,
            varpi: 1.0,
            cc: 1.0,
            lambda: 1.0,
            eta: 0.0,
            z: 3.0,
        }
    }
}

fn one_minus_3l(lambda: f64) -> Result<f64, HlError> {
    let d = 1.0 - 3.0 * lambda;
    if d.abs() <= 1e-12 {
        return Err(HlError::Pole { lambda });
    }
    Ok(d)
}

/// ADM fields on a chart whose first coordinate is time and next three are space.
#[derive(Debug, Clone)]
pub struct HlFields {
    pub chart: Chart,
    pub lapse: Expr,
    /// Upper-index shift `N^i`.
    pub shift: [Expr; 3],
    /// Row-major spatial metric.
    pub g: [Expr; 9],
    pub constants: HlConstants,
    /// Allow a lapse depending on space.
    pub non_projectable: bool,
}

impl HlFields {
    pub fn new(chart: Chart, lapse: Expr, shift: [Expr; 3], g: [Expr; 9], constants: HlConstants) -> Result<Self, HlError> {
        if chart.len() != 4 {
            return Err(HlError::Invalid(format!(
                "HL chart needs t plus three spatial coordinates, got {}",
                chart.len()
            )));
        }
        let f = HlFields {
            chart,
            lapse,
            shift,
            g,
            constants,
            non_projectable: false,
        };
        f.check_projectable()?;
        Ok(f)
    }

    pub fn check_projectable(&self) -> Result<(), HlError> {
        if self.non_projectable {
            return Ok(());
        }
        for k in 1..4 {
            if self.lapse.depends_on(k) {
                return Err(HlError::NotProjectable(self.chart.name(k).to_string()));
            }
        }
        Ok(())
    }

    fn values(&self, point: &[f64]) -> Result<(f64, [f64; 3], Matrix3<f64>), HlError> {
        let n = self.lapse.eval(point)?;
        let mut s = [0.0; 3];
        for (k, e) in self.shift.iter().enumerate() {
            s[k] = e.eval(point)?;
        }
        let mut g = Matrix3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                g[(i, j)] = self.g[i * 3 + j].eval(point)?;
            }
        }
        Ok((n, s, g))
    }
}

fn assemble(n: f64, s: &[f64; 3], g: &Matrix3<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    let mut nn = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            nn += g[(i, j)] * s[i] * s[j];
            m[(i + 1, j + 1)] = g[(i, j)];
        }
    }
    m[(0, 0)] = -n * n + nn;
    for j in 0..3 {
        let v: f64 = (0..3).map(|i| g[(i, j)] * s[i]).sum();
        m[(0, j + 1)] = v;
        m[(j + 1, 0)] = v;
    }
    m
}

/// ADM metric before and after the anisotropic scaling by `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmScaling {
    pub before: Matrix4<f64>,
    pub after: Matrix4<f64>,
    pub lapse: (f64, f64),
    pub shift: ([f64; 3], [f64; 3]),
    pub spatial: (Matrix3<f64>, Matrix3<f64>),
}

/// Assembles `g_11 = -N^2 + g_ij N^i N^j`, `g_1j = g_ij N^i` and rescales with
/// `t -> l^z t`, `x -> l x`: `N -> l^(1-z) N`, `N^i -> l^(1-z) N^i`, `g_ij -> g_ij`.
pub fn adm_assemble_and_scale(f: &HlFields, point: &[f64], l: f64) -> Result<AdmScaling, HlError> {
    if !(l > 0.0) {
        return Err(HlError::Invalid(format!("scaling factor must be positive, got {l}")));
    }
    let (n, s, g) = f.values(point)?;
    let factor = l.powf(1.0 - f.constants.z);
    let n2 = n * factor;
    let s2 = [s[0] * factor, s[1] * factor, s[2] * factor];
    Ok(AdmScaling {
        before: assemble(n, &s, &g),
        after: assemble(n2, &s2, &g),
        lapse: (n, n2),
        shift: (s, s2),
        spatial: (g, g),
    })
}

/// Extrinsic and intrinsic curvature of the spatial slice at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Invariants3d {
    pub sqrt_g: f64,
    pub lapse: f64,
    pub g: Matrix3<f64>,
    pub ginv: Matrix3<f64>,
    pub k: Matrix3<f64>,
    pub k_trace: f64,
    pub ricci: Matrix3<f64>,
    pub r: f64,
    /// `C^{ij}`.
    pub cotton: Matrix3<f64>,
    /// `eps^{ijk} R_il nabla_j R^l_k` with the tensor epsilon.
    pub chern_simons_like: f64,
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// `K_ij`, `K`, 3-d Ricci, scalar curvature and the Cotton-York tensor.
pub fn curvature_invariants_3d(f: &HlFields, point: &[f64]) -> Result<Invariants3d, HlError> {
    let wrt = [0usize, 1, 2, 3];
    let mut gj = Vec::with_capacity(9);
    for e in &f.g {
        gj.push(e.eval_jet(point, 3, &wrt)?);
    }
    let gv = Matrix3::from_fn(|i, j| gj[i * 3 + j].value());
    let det = gv.determinant();
    if !(det.abs() > 1e-12) {
        return Err(HlError::Degenerate { det });
    }
    let ginvj = jetmat::invert(&gj, 3).ok_or(HlError::Degenerate { det })?;
    let lapse = f.lapse.eval(point)?;
    if lapse == 0.0 {
        return Err(HlError::ZeroLapse);
    }
    // spatial derivative of a jet along x^(i+1)
    let d = |j: &Jet, i: usize| j.derivative(i + 1);
    // Christoffels (order 2)
    let mut gam: Vec<Jet> = Vec::with_capacity(27);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let mut acc = d(&gj[0], 0).scale(0.0);
                for l in 0..3 {
                    let t = &(&d(&gj[l * 3 + k], j) + &d(&gj[l * 3 + j], k)) - &d(&gj[j * 3 + k], l);
                    acc = &acc + &(&ginvj[i * 3 + l] * &t);
                }
                gam.push(acc.scale(0.5));
            }
        }
    }
    let ga = |i: usize, j: usize, k: usize| &gam[(i * 3 + j) * 3 + k];
    // Ricci (order 1)
    let mut ric: Vec<Jet> = Vec::with_capacity(9);
    for j in 0..3 {
        for k in 0..3 {
            let mut acc = d(ga(0, 0, 0), 0).scale(0.0);
            for i in 0..3 {
                acc = &acc + &d(ga(i, j, k), i);
                acc = &acc - &d(ga(i, j, i), k);
                for p in 0..3 {
                    acc = &acc + &(ga(i, i, p) * ga(p, j, k));
                    acc = &acc - &(ga(i, k, p) * ga(p, j, i));
                }
            }
            ric.push(acc);
        }
    }
    let mut r = ric[0].scale(0.0);
    for i in 0..3 {
        for j in 0..3 {
            r = &r + &(&ginvj[i * 3 + j] * &ric[i * 3 + j]);
        }
    }
    // mixed R^j_l (order 1)
    let mut mixed: Vec<Jet> = Vec::with_capacity(9);
    for j in 0..3 {
        for l in 0..3 {
            let mut acc = ric[0].scale(0.0);
            for m in 0..3 {
                acc = &acc + &(&ginvj[j * 3 + m] * &ric[m * 3 + l]);
            }
            mixed.push(acc);
        }
    }
    let gv0 = |i: usize, j: usize, k: usize| ga(i, j, k).value();
    // nabla_k T^j_l for a mixed tensor given as jets
    let cov_mixed = |t: &[Jet], k: usize, j: usize, l: usize| -> f64 {
        let mut v = d(&t[j * 3 + l], k).value();
        for m in 0..3 {
            v += gv0(j, k, m) * t[m * 3 + l].value();
            v -= gv0(m, k, l) * t[j * 3 + m].value();
        }
        v
    };
    let sqrt_g = det.abs().sqrt();
    let schouten: Vec<Jet> = (0..9)
        .map(|q| {
            let (j, l) = (q / 3, q % 3);
            if j == l {
                &mixed[q] - &r.scale(0.25)
            } else {
                mixed[q].clone()
            }
        })
        .collect();
    let mut cotton = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = 0.0;
            for k in 0..3 {
                for l in 0..3 {
                    let e = levi_civita(i, k, l);
                    if e != 0.0 {
                        acc += e * cov_mixed(&schouten, k, j, l);
                    }
                }
            }
            cotton[(i, j)] = acc / sqrt_g;
        }
    }
    let ricci = Matrix3::from_fn(|i, j| ric[i * 3 + j].value());
    let mut cs = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let e = levi_civita(i, j, k);
                if e == 0.0 {
                    continue;
                }
                for l in 0..3 {
                    cs += e / sqrt_g * ricci[(i, l)] * cov_mixed(&mixed, j, l, k);
                }
            }
        }
    }
    // extrinsic curvature
    let mut shift_low = Vec::with_capacity(3);
    let shift_j: Vec<Jet> = f
        .shift
        .iter()
        .map(|e| e.eval_jet(point, 1, &wrt))
        .collect::<Result<_, _>>()?;
    for j in 0..3 {
        let mut acc = shift_j[0].scale(0.0);
        for k in 0..3 {
            acc = &acc + &(&gj[j * 3 + k] * &shift_j[k]);
        }
        shift_low.push(acc);
    }
    let nabla_n = |i: usize, j: usize| {
        let mut v = d(&shift_low[j], i).value();
        for k in 0..3 {
            v -= gv0(k, i, j) * shift_low[k].value();
        }
        v
    };
    let k = Matrix3::from_fn(|i, j| {
        (gj[i * 3 + j].derivative(0).value() - nabla_n(i, j) - nabla_n(j, i)) / (2.0 * lapse)
    });
    let ginv = Matrix3::from_fn(|i, j| ginvj[i * 3 + j].value());
    let k_trace = (ginv * k).trace();
    Ok(Invariants3d {
        sqrt_g,
        lapse,
        g: gv,
        ginv,
        k,
        k_trace,
        ricci,
        r: r.value(),
        cotton,
        chern_simons_like: cs,
    })
}

/// Kinetic and potential densities of the action at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionDensity {
    pub kinetic: f64,
    pub potential: f64,
}

/// `(2/kappa^2) sqrt|g| N (K_ij K^ij - lambda K^2)` from invariants.
pub fn kinetic_density(inv: &Invariants3d, c: &HlConstants) -> f64 {
    let kup = inv.ginv * inv.k * inv.ginv;
    let kk = inv.k.component_mul(&kup).sum();
    2.0 / (c.kappa * c.kappa) * inv.sqrt_g * inv.lapse * (kk - c.lambda * inv.k_trace * inv.k_trace)
}

/// Potential density with detailed-balance couplings.
pub fn potential_density(inv: &Invariants3d, c: &HlConstants) -> Result<f64, HlError> {
    let den = one_minus_3l(c.lambda)?;
    let k2 = c.kappa * c.kappa;
    let w2 = c.varpi * c.varpi;
    let rup = inv.ginv * inv.ricci * inv.ginv;
    let rr = inv.ricci.component_mul(&rup).sum();
    let clow = inv.g * inv.cotton * inv.g;
    let cc = clow.component_mul(&inv.cotton).sum();
    let r = inv.r;
    let bracket = k2 * c.mu / (2.0 * w2) * inv.chern_simons_like - k2 * c.mu / 8.0 * rr
        + k2 * c.mu / (8.0 * den) * ((1.0 - 4.0 * c.lambda) / 4.0 * r * r + c.cc * r - 3.0 * c.cc * c.cc)
        - k2 / (2.0 * w2) * cc;
    Ok(inv.sqrt_g * inv.lapse * bracket)
}

pub fn hl_action_density(f: &HlFields, point: &[f64]) -> Result<ActionDensity, HlError> {
    let inv = curvature_invariants_3d(f, point)?;
    Ok(ActionDensity {
        kinetic: kinetic_density(&inv, &f.constants),
        potential: potential_density(&inv, &f.constants)?,
    })
}

/// Infrared constants `(c, G, Lambda_GR)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrLimit {
    pub c: f64,
    pub g_newton: f64,
    pub lambda_gr: f64,
}

pub fn gr_limit_constants(kappa: f64, mu: f64, cc: f64, lambda: f64) -> Result<GrLimit, HlError> {
    let den = one_minus_3l(lambda)?;
    let ratio = cc / den;
    if ratio < 0.0 {
        return Err(HlError::ImaginarySpeed { ratio });
    }
    let root = ratio.sqrt();
    let k2 = kappa * kappa;
    Ok(GrLimit {
        c: k2 * mu / 4.0 * root,
        g_newton: k2 * k2 * mu / 8.0 * root / (16.0 * std::f64::consts::PI),
        lambda_gr: 3.0 * k2 * k2 * mu * mu * cc * cc / (32.0 * den),
    })
}

/// Sign of the odd `p^5` term of the tensor branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdrBranch {
    ScalarLowP,
    ScalarHighP,
    TensorDb(Sign),
    ScalarUvBeyond,
    TensorBeyond(Sign),
}

impl MdrBranch {
    pub fn tag(self) -> &'static str {
        match self {
            MdrBranch::ScalarLowP => "scalar-low-p",
            MdrBranch::ScalarHighP => "scalar-high-p",
            MdrBranch::TensorDb(_) => "tensor-db",
            MdrBranch::ScalarUvBeyond => "scalar-uv-beyond",
            MdrBranch::TensorBeyond(_) => "tensor-beyond",
        }
    }

    pub fn sign(self) -> Option<Sign> {
        match self {
            MdrBranch::TensorDb(s) | MdrBranch::TensorBeyond(s) => Some(s),
            _ => None,
        }
    }

    /// Parses a branch tag; tensor branches require a sign.
    pub fn parse(tag: &str, sign: Option<Sign>) -> Result<MdrBranch, HlError> {
        let need = |s: Option<Sign>| {
            s.ok_or_else(|| HlError::Invalid(format!("branch `{tag}` requires an explicit sign")))
        };
        Ok(match tag {
            "scalar-low-p" => MdrBranch::ScalarLowP,
            "scalar-high-p" => MdrBranch::ScalarHighP,
            "tensor-db" => MdrBranch::TensorDb(need(sign)?),
            "scalar-uv-beyond" => MdrBranch::ScalarUvBeyond,
            "tensor-beyond" => MdrBranch::TensorBeyond(need(sign)?),
            other => return Err(HlError::Invalid(format!("unknown branch `{other}`"))),
        })
    }
}

/// Constants entering the dispersion branches. `c` defaults to the infrared
/// light speed, through `c^2 = kappa^4 mu^2 Lambda / (16 (1 - 3 lambda))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdrParams {
    pub constants: HlConstants,
    pub c: Option<f64>,
}

impl MdrParams {
    fn c2(&self) -> Result<f64, HlError> {
        match self.c {
            Some(c) => Ok(c * c),
            None => {
                let k = &self.constants;
                let den = one_minus_3l(k.lambda)?;
                Ok(k.kappa.powi(4) * k.mu * k.mu * k.cc / (16.0 * den))
            }
        }
    }
}

/// `omega^2(p)` for one branch.
pub fn mdr_omega2(branch: MdrBranch, params: &MdrParams, p: f64) -> Result<f64, HlError> {
    if p < 0.0 {
        return Err(HlError::Invalid(format!("momentum must be non-negative, got {p}")));
    }
    let k = &params.constants;
    let (kap, mu, w, lam) = (k.kappa, k.mu, k.varpi, k.lambda);
    let k2 = kap * kap;
    let k4 = k2 * k2;
    Ok(match branch {
        MdrBranch::ScalarLowP => {
            let den = one_minus_3l(lam)?;
            -9.0 * k4 * mu * mu * k.cc * k.cc / (32.0 * den * den)
        }
        MdrBranch::ScalarHighP => {
            let den = one_minus_3l(lam)?;
            let r = (1.0 - lam) / den;
            k4 * mu * mu / 16.0 * r * r * p.powi(4)
        }
        MdrBranch::TensorDb(s) => {
            params.c2()? * p * p + k4 * mu * mu / 16.0 * p.powi(4) + s.value() * k4 * mu / (4.0 * w * w) * p.powi(5)
                + k4 / (4.0 * w.powi(4)) * p.powi(6)
        }
        MdrBranch::ScalarUvBeyond => {
            let den = one_minus_3l(lam)?;
            k2 * (1.0 - lam).powi(2) / (16.0 * den * den) * p.powi(4)
                - 3.0 * k2 * (1.0 - lam) / (2.0 * den) * k.eta * p.powi(6)
        }
        MdrBranch::TensorBeyond(s) => {
            params.c2()? * p * p + k4 * mu * mu / 16.0 * p.powi(4) + s.value() * k4 * mu / (4.0 * w * w) * p.powi(5)
                + (k4 / (4.0 * w.powi(4)) - k2 * k.eta / 2.0) * p.powi(6)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprkit::parse_expr;

    fn chart() -> Chart {
        Chart::new(&["t", "x", "y", "z"], &[] as &[&str]).unwrap()
    }

    fn fields(lapse: &str, shift: [&str; 3], g: [&str; 9]) -> HlFields {
        let c = chart();
        let p = |s: &str| parse_expr(s, &c).unwrap();
        HlFields::new(
            c.clone(),
            p(lapse),
            shift.map(p),
            g.map(p),
            HlConstants::default(),
        )
        .unwrap()
    }

    const DELTA: [&str; 9] = ["1", "0", "0", "0", "1", "0", "0", "0", "1"];

    #[test]
    fn minkowski_and_hand_substitution() {
        let f = fields("1", ["0", "0", "0"], DELTA);
        let a = adm_assemble_and_scale(&f, &[0.0; 4], 2.0).unwrap();
        assert_eq!(a.before, Matrix4::from_diagonal(&nalgebra::Vector4::new(-1.0, 1.0, 1.0, 1.0)));
        let f = fields("2", ["3", "0", "0"], DELTA);
        let a = adm_assemble_and_scale(&f, &[0.0; 4], 2.0).unwrap();
        assert_eq!(a.before[(0, 0)], 5.0);
        assert_eq!(a.before[(0, 1)], 3.0);
        assert_eq!(a.lapse.1, 0.5);
        assert_eq!(a.shift.1[0], 0.75);
        assert_eq!(a.spatial.0, a.spatial.1);
    }

    #[test]
    fn non_projectable_lapse_rejected() {
        let c = chart();
        let p = |s: &str| parse_expr(s, &c).unwrap();
        let r = HlFields::new(c.clone(), p("1 + x"), ["0", "0", "0"].map(p), DELTA.map(p), HlConstants::default());
        assert!(matches!(r, Err(HlError::NotProjectable(n)) if n == "x"));
    }

    #[test]
    fn flat_static_potential() {
        let mut f = fields("1", ["0", "0", "0"], DELTA);
        f.constants = HlConstants {
            kappa: 1.3,
            mu: 0.7,
            cc: 0.9,
            lambda: 0.1,
            ..HlConstants::default()
        };
        let d = hl_action_density(&f, &[0.2, 0.1, 0.3, 0.4]).unwrap();
        assert_eq!(d.kinetic, 0.0);
        let c = f.constants;
        let expect = -3.0 * c.cc * c.cc * c.kappa * c.kappa * c.mu / (8.0 * (1.0 - 3.0 * c.lambda));
        assert!((d.potential - expect).abs() < 1e-14);
    }

    #[test]
    fn gr_limit_values_and_errors() {
        let g = gr_limit_constants(2.0, 1.0, 1.0, 0.0).unwrap();
        assert!((g.c - 1.0).abs() < 1e-15);
        assert!(matches!(gr_limit_constants(1.0, 1.0, 1.0, 1.0 / 3.0), Err(HlError::Pole { .. })));
        assert!(matches!(gr_limit_constants(1.0, 1.0, 1.0, 1.0), Err(HlError::ImaginarySpeed { .. })));
    }

    #[test]
    fn branch_examples() {
        let params = MdrParams {
            constants: HlConstants {
                lambda: 0.0,
                ..HlConstants::default()
            },
            c: None,
        };
        let w = mdr_omega2(MdrBranch::ScalarLowP, &params, 1.0).unwrap();
        assert!((w + 9.0 / 32.0).abs() < 1e-15);
        let one = MdrParams {
            constants: HlConstants::default(),
            c: Some(1.0),
        };
        assert_eq!(mdr_omega2(MdrBranch::ScalarHighP, &one, 3.0).unwrap(), 0.0);
        assert_eq!(mdr_omega2(MdrBranch::TensorDb(Sign::Minus), &one, 0.0).unwrap(), 0.0);
        assert!(MdrBranch::parse("tensor-db", None).is_err());
    }
}
