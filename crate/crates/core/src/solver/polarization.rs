use super::ansatz::{Grid, ShellAnsatz};
use super::field::FieldFn;
use super::SolverError;

/// Gravitational polarizations of the shell-0 data.
#[derive(Debug, Clone)]
pub struct Polarization {
    /// `eta_1, eta_2` on `g_1, g_2`.
    pub eta_g: [FieldFn; 2],
    /// `eta_3, eta_4` on `h_3, h_4`.
    pub eta_h: [FieldFn; 2],
    /// `eta^3_i` on `w_i`.
    pub eta_w: [FieldFn; 2],
    /// `eta^4_i` on `n_i`.
    pub eta_n: [FieldFn; 2],
}

impl Polarization {
    pub fn identity() -> Polarization {
        let one = || std::array::from_fn(|_| FieldFn::constant(1.0));
        Polarization {
            eta_g: one(),
            eta_h: one(),
            eta_w: one(),
            eta_n: one(),
        }
    }
}

/// Target data `g_i = eta_i g_i`, `h_a = eta_a h_a`, `w_i = eta^3_i w_i`,
/// `n_i = eta^4_i n_i` from primary data; outer shells are kept.
pub fn polarization_deform(primary: &ShellAnsatz, pol: &Polarization, grid: &Grid) -> Result<ShellAnsatz, SolverError> {
    let all = pol.eta_g.iter().chain(&pol.eta_h).chain(&pol.eta_w).chain(&pol.eta_n);
    for p in grid.points() {
        for (k, eta) in all.clone().enumerate() {
            if eta.value(&p)? == 0.0 {
                return Err(SolverError::Degenerate(format!("polarization {k} vanishes at {p:?}")));
            }
        }
    }
    let mul = |eta: &FieldFn, f: &FieldFn| eta.clone() * f.clone();
    let mut out = primary.clone();
    for k in 0..2 {
        out.g[k] = mul(&pol.eta_g[k], &primary.g[k]);
        out.h[k] = mul(&pol.eta_h[k], &primary.h[k]);
        out.w[k] = mul(&pol.eta_w[k], &primary.w[k]);
        out.n[k] = mul(&pol.eta_n[k], &primary.n[k]);
    }
    out.validate()?;
    Ok(out)
}
