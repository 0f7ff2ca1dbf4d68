use crate::exprkit::Jet;
use crate::finsler::{DMetricField, DMetricJets, GeometryError};

use super::connection::{Coefficients, DConnection, Prepared};

/// Nontrivial torsion blocks of a d-connection, fiber indices local.
#[derive(Debug, Clone)]
pub struct TorsionPack {
    pub nh: usize,
    pub nv: usize,
    /// `T^i_{jk} = L^i_{jk} - L^i_{kj}`, index `(i * nh + j) * nh + k`.
    pub t_hhh: Vec<f64>,
    /// `T^i_{ja} = C^i_{ja}`, index `(i * nh + j) * nv + a`.
    pub t_hhv: Vec<f64>,
    /// `T^a_{ji} = -Omega^a_{ji}`, index `(a * nh + j) * nh + i`.
    pub t_vhh: Vec<f64>,
    /// `T^c_{aj} = L^c_{aj} - e_a N^c_j`, index `(c * nv + a) * nh + j`.
    pub t_vvh: Vec<f64>,
    /// `T^a_{bc} = C^a_{bc} - C^a_{cb}`, index `(a * nv + b) * nv + c`.
    pub t_vvv: Vec<f64>,
}

impl TorsionPack {
    pub fn max_pure(&self) -> f64 {
        self.t_hhh
            .iter()
            .chain(&self.t_vvv)
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `T^c_{aj} = L^c_{aj} - d_{y^a} N^c_j` for a connection given as jets.
fn t_vvh(p: &Prepared<'_>, conn: &Coefficients<Jet>, c: usize, a: usize, j: usize) -> Jet {
    let nh = p.dj.nh;
    conn.get(nh + c, nh + a, j) - p.dn(a, c, j)
}

/// Distortion `Z` with `Gamma_LC = Gamma + Z`, as jets one order below `dj`.
pub fn distortion_jets(dj: &DMetricJets, conn: &Coefficients<Jet>) -> Result<Coefficients<Jet>, GeometryError> {
    let p = Prepared::new(dj)?;
    Ok(distortion_from(&p, conn))
}

pub(crate) fn distortion_from(p: &Prepared<'_>, conn: &Coefficients<Jet>) -> Coefficients<Jet> {
    let (nh, nv) = (p.dj.nh, p.dj.nv);
    let n = nh + nv;
    let z = conn.data[0].scale(0.0);
    let mut data = vec![z.clone(); n * n * n];
    let at = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
    let ch = |i: usize, j: usize, b: usize| conn.get(i, j, nh + b);
    let omega: Vec<Jet> = (0..nv)
        .flat_map(|a| (0..nh).flat_map(move |i| (0..nh).map(move |j| (a, i, j))))
        .map(|(a, i, j)| p.omega(a, i, j))
        .collect();
    let om = |a: usize, i: usize, j: usize| &omega[(a * nh + i) * nh + j];
    // sum_{d,r} Omega^d_{rk} hhat_db g^{ri}
    let om_raised = |k: usize, b: usize, i: usize| {
        let mut acc = z.clone();
        for d in 0..nv {
            for r in 0..nh {
                acc = &acc + &(&(om(d, r, k) * p.h(d, b)) * p.ginv(r, i));
            }
        }
        acc
    };
    for j in 0..nh {
        for k in 0..nh {
            for a in 0..nv {
                let mut acc = om(a, j, k).scale(-0.5);
                for i in 0..nh {
                    for b in 0..nv {
                        acc = &acc - &(&(ch(i, j, b) * p.g(i, k)) * p.hinv(a, b));
                    }
                }
                data[at(nh + a, j, k)] = acc;
            }
        }
    }
    for b in 0..nv {
        for k in 0..nh {
            let raised = (0..nh).map(|i| om_raised(k, b, i)).collect::<Vec<_>>();
            for i in 0..nh {
                data[at(i, nh + b, k)] = ch(i, k, b) + &raised[i].scale(0.5);
                data[at(i, k, nh + b)] = raised[i].scale(0.5);
            }
            for a in 0..nv {
                data[at(nh + a, k, nh + b)] = t_vvh(p, conn, a, b, k);
            }
        }
    }
    for a in 0..nv {
        for b in 0..nv {
            for i in 0..nh {
                let mut acc = z.clone();
                for r in 0..nh {
                    let mut s = z.clone();
                    for c in 0..nv {
                        s = &s + &(&t_vvh(p, conn, c, a, r) * p.h(c, b));
                        s = &s + &(&t_vvh(p, conn, c, b, r) * p.h(c, a));
                    }
                    acc = &acc + &(p.ginv(i, r) * &s);
                }
                data[at(i, nh + a, nh + b)] = acc.scale(-0.5);
            }
        }
    }
    Coefficients { nh, nv, data }
}

/// Torsion of `conn` and the distortion to Levi-Civita at `point`.
pub fn torsion_and_distortion(
    dm: &dyn DMetricField,
    conn: &DConnection,
    point: &[f64],
) -> Result<(TorsionPack, Coefficients<f64>), GeometryError> {
    let dj = dm.jets(point, 1)?;
    let p = Prepared::new(&dj)?;
    let (nh, nv) = (dj.nh, dj.nv);
    let space = dj.g[0].truncate(0).space().clone();
    let conn_j = Coefficients {
        nh,
        nv,
        data: conn.data.iter().map(|v| Jet::constant(&space, *v)).collect(),
    };
    let mut t_hhh = vec![0.0; nh * nh * nh];
    let mut t_hhv = vec![0.0; nh * nh * nv];
    let mut t_vhh = vec![0.0; nv * nh * nh];
    let mut t_vvh = vec![0.0; nv * nv * nh];
    let mut t_vvv = vec![0.0; nv * nv * nv];
    for i in 0..nh {
        for j in 0..nh {
            for k in 0..nh {
                t_hhh[(i * nh + j) * nh + k] = conn.l_h(i, j, k) - conn.l_h(i, k, j);
            }
            for a in 0..nv {
                t_hhv[(i * nh + j) * nv + a] = conn.c_h(i, j, a);
            }
        }
    }
    for a in 0..nv {
        for j in 0..nh {
            for i in 0..nh {
                t_vhh[(a * nh + j) * nh + i] = -p.omega(a, j, i).value();
            }
        }
        for b in 0..nv {
            for j in 0..nh {
                t_vvh[(a * nv + b) * nh + j] = self::t_vvh(&p, &conn_j, a, b, j).value();
            }
            for c in 0..nv {
                t_vvv[(a * nv + b) * nv + c] = conn.c_v(a, b, c) - conn.c_v(a, c, b);
            }
        }
    }
    let z = distortion_from(&p, &conn_j).values();
    Ok((
        TorsionPack {
            nh,
            nv,
            t_hhh,
            t_hhv,
            t_vhh,
            t_vvh,
            t_vvv,
        },
        z,
    ))
}
