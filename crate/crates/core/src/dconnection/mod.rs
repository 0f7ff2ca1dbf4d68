//! Canonical d-connection, torsion, distortion and curvature.

mod connection;
mod curvature;
mod levicivita;
mod torsion;

pub use connection::{canonical_dconnection, canonical_jets, Coefficients, DConnection};
pub use curvature::{curvature_and_ricci, curvature_from, CurvaturePack};
pub use levicivita::{christoffel_jets, levicivita_adapted_jets, levicivita_oracle, metricity_residual, riemann_jets};
pub use torsion::{distortion_jets, torsion_and_distortion, TorsionPack};

use crate::finsler::{DMetricField, GeometryError};

/// Largest `|D_c g_ab|` of the block-diagonal d-metric under `conn`.
pub fn compat_residual(dm: &dyn DMetricField, conn: &DConnection, point: &[f64]) -> Result<f64, GeometryError> {
    let dj = dm.jets(point, 1)?;
    let (nh, nv) = (dj.nh, dj.nv);
    let n = nh + nv;
    let zero = dj.g[0].scale(0.0);
    let metric = |a: usize, b: usize| {
        if a < nh && b < nh {
            &dj.g[a * nh + b]
        } else if a >= nh && b >= nh {
            &dj.hhat[(a - nh) * nv + b - nh]
        } else {
            &zero
        }
    };
    let mut worst: f64 = 0.0;
    for c in 0..n {
        for a in 0..n {
            for b in a..n {
                let mut r = dj.adapted_derivative(metric(a, b), c).value();
                for m in 0..n {
                    r -= conn.get(m, a, c) * metric(m, b).value();
                    r -= conn.get(m, b, c) * metric(a, m).value();
                }
                worst = worst.max(r.abs());
            }
        }
    }
    Ok(worst)
}
