use crate::exprkit::{jetmat, Jet};
use crate::finsler::{sasaki_jets, DMetricField, DMetricJets, GeometryError};

use super::connection::Coefficients;

/// Coordinate Christoffel symbols `Gamma^a_{bc}` of a metric given by jets
/// (row-major `n x n`, order `p >= 1`); result has order `p - 1`.
pub fn christoffel_jets(metric: &[Jet], n: usize) -> Result<Vec<Jet>, GeometryError> {
    assert_eq!(metric.len(), n * n);
    let inv = jetmat::invert(metric, n).ok_or(GeometryError::Degenerate {
        block: "total metric",
        det: 0.0,
    })?;
    // d[(c * n + a) * n + b] = d_c g_ab
    let mut d = Vec::with_capacity(n * n * n);
    for c in 0..n {
        for m in metric {
            d.push(m.derivative(c));
        }
    }
    let dd = |c: usize, a: usize, b: usize| &d[(c * n + a) * n + b];
    let zero = d[0].scale(0.0);
    let mut out = vec![zero.clone(); n * n * n];
    for b in 0..n {
        for c in b..n {
            // lowered: Gamma_{m b c} = 1/2 (d_b g_mc + d_c g_mb - d_m g_bc)
            let low: Vec<Jet> = (0..n)
                .map(|m| &(dd(b, m, c) + dd(c, m, b)) - dd(m, b, c))
                .collect();
            for a in 0..n {
                let mut acc = zero.clone();
                for m in 0..n {
                    acc = &acc + &(&inv[a * n + m] * &low[m]);
                }
                let v = acc.scale(0.5);
                out[(a * n + c) * n + b] = v.clone();
                out[(a * n + b) * n + c] = v;
            }
        }
    }
    Ok(out)
}

/// Levi-Civita coordinate Christoffels of the lifted metric of `dm` at `point`.
pub fn levicivita_oracle(dm: &dyn DMetricField, point: &[f64]) -> Result<Vec<f64>, GeometryError> {
    let dj = dm.jets(point, 1)?;
    let n = dj.dim();
    Ok(christoffel_jets(&sasaki_jets(&dj), n)?
        .iter()
        .map(Jet::value)
        .collect())
}

/// Coordinate Riemann tensor `R^a_{bcd} = [R(d_d, d_c) d_b]^a` from metric
/// jets of order `p >= 2`; result has order `p - 2`.
pub fn riemann_jets(metric: &[Jet], n: usize) -> Result<Vec<Jet>, GeometryError> {
    let gam = christoffel_jets(metric, n)?;
    let g = |a: usize, b: usize, c: usize| &gam[(a * n + b) * n + c];
    let zero = gam[0].derivative(0).scale(0.0);
    let mut out = vec![zero.clone(); n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut acc = &g(a, b, c).derivative(d) - &g(a, b, d).derivative(c);
                    for m in 0..n {
                        acc = &acc + &(g(m, b, c) * g(a, m, d));
                        acc = &acc - &(g(m, b, d) * g(a, m, c));
                    }
                    out[((a * n + b) * n + c) * n + d] = acc;
                }
            }
        }
    }
    Ok(out)
}

/// Levi-Civita connection of the lifted metric expressed in the adapted
/// frame, `nabla_{e_c} e_b = Gamma^a_{bc} e_a`, as jets one order below `dj`.
pub fn levicivita_adapted_jets(dj: &DMetricJets) -> Result<Coefficients<Jet>, GeometryError> {
    let (nh, nv) = (dj.nh, dj.nv);
    let n = nh + nv;
    let gam = christoffel_jets(&sasaki_jets(dj), n)?;
    let zero = gam[0].scale(0.0);
    // frame entries carry the full order so their derivatives keep order p - 1
    let zero_p = dj.g[0].scale(0.0);
    let one = zero_p.add_scalar(1.0);
    // E_b^l: e_i = d_i - N^a_i d_a, e_a = d_a (jets of order p)
    let e = |b: usize, l: usize| -> Jet {
        if b == l {
            return one.clone();
        }
        if b < nh && l >= nh {
            return -&dj.n[(l - nh) * nh + b];
        }
        zero_p.clone()
    };
    // inverse: e^i = dx^i, e^a = dy^a + N^a_i dx^i
    let einv = |a: usize, l: usize| -> Jet {
        if a == l {
            return one.clone();
        }
        if a >= nh && l < nh {
            return dj.n[(a - nh) * nh + l].clone();
        }
        zero_p.clone()
    };
    let mut data = vec![zero.clone(); n * n * n];
    for b in 0..n {
        for c in 0..n {
            // coordinate components of nabla_{e_c} e_b
            let mut v: Vec<Jet> = vec![zero.clone(); n];
            for (l, vl) in v.iter_mut().enumerate() {
                let mut acc = zero.clone();
                for nu in 0..n {
                    let ec = e(c, nu);
                    if ec.coeffs().iter().all(|x| *x == 0.0) {
                        continue;
                    }
                    acc = &acc + &(&ec * &e(b, l).derivative(nu));
                    for mu in 0..n {
                        let eb = e(b, mu);
                        if eb.coeffs().iter().all(|x| *x == 0.0) {
                            continue;
                        }
                        acc = &acc + &(&(&eb * &ec) * &gam[(l * n + mu) * n + nu]);
                    }
                }
                *vl = acc;
            }
            for a in 0..n {
                let mut acc = zero.clone();
                for (l, vl) in v.iter().enumerate() {
                    acc = &acc + &(&einv(a, l) * vl);
                }
                data[(a * n + b) * n + c] = acc;
            }
        }
    }
    Ok(Coefficients { nh, nv, data })
}

/// Metricity of coordinate Christoffels: `max |d_c g_ab - Gamma^m_{ac} g_mb - Gamma^m_{bc} g_am|`.
pub fn metricity_residual(metric: &[Jet], christoffel: &[f64], n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut r = metric[a * n + b].derivative(c).value();
                for m in 0..n {
                    r -= christoffel[(m * n + a) * n + c] * metric[m * n + b].value();
                    r -= christoffel[(m * n + b) * n + c] * metric[a * n + m].value();
                }
                worst = worst.max(r.abs());
            }
        }
    }
    worst
}
