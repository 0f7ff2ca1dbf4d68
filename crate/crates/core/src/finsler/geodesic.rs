use nalgebra::DMatrix;

use super::spray::FinslerFunction;
use super::GeometryError;

/// One sample of a geodesic: parameter, position and velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicSample {
    pub tau: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl FinslerFunction {
    /// `G^k(x, y)` from second derivatives of `L` only.
    pub fn spray_value(&self, point: &[f64]) -> Result<Vec<f64>, GeometryError> {
        let n = self.dim();
        let wrt: Vec<usize> = (0..2 * n).collect();
        let l = self.l.eval_jet(point, 2, &wrt)?;
        let g = DMatrix::from_fn(n, n, |i, j| 0.5 * l.d(&[n + i, n + j]));
        let det = g.determinant();
        if !(det.abs() > super::DET_TOL) {
            return Err(GeometryError::Degenerate { block: "g", det });
        }
        let rhs = nalgebra::DVector::from_fn(n, |j, _| {
            let mixed: f64 = (0..n).map(|i| point[n + i] * l.d(&[n + j, i])).sum();
            mixed - l.d(&[j])
        });
        let ginv = g
            .try_inverse()
            .ok_or(GeometryError::Degenerate { block: "g", det })?;
        Ok((ginv * rhs).iter().map(|v| 0.25 * v).collect())
    }
}

/// Integrates `x'' + 2 G(x, x') = 0` with classical RK4 at fixed `step`
/// over `[0, span]`, sampling every `every` steps (the final state is
/// always included).
pub fn geodesic_integrate(
    f: &FinslerFunction,
    x0: &[f64],
    y0: &[f64],
    span: f64,
    step: f64,
    every: usize,
) -> Result<Vec<GeodesicSample>, GeometryError> {
    let n = f.dim();
    if x0.len() != n || y0.len() != n {
        return Err(GeometryError::Dimension(format!(
            "initial data must have {n} components"
        )));
    }
    if !(step > 0.0) || !(span >= 0.0) {
        return Err(GeometryError::Dimension("step must be positive and span non-negative".into()));
    }
    let every = every.max(1);
    let steps = (span / step).round() as usize;
    let rhs = |tau: f64, s: &[f64]| -> Result<Vec<f64>, GeometryError> {
        let g = f.spray_value(s).map_err(|e| match e {
            GeometryError::Degenerate { det, .. } => GeometryError::GeodesicDegenerate { tau, det },
            other => other,
        })?;
        let mut out = Vec::with_capacity(2 * n);
        out.extend_from_slice(&s[n..]);
        out.extend(g.iter().map(|v| -2.0 * v));
        Ok(out)
    };
    let mut state: Vec<f64> = x0.iter().chain(y0).copied().collect();
    let mut samples = vec![GeodesicSample {
        tau: 0.0,
        x: x0.to_vec(),
        y: y0.to_vec(),
    }];
    let axpy = |s: &[f64], k: &[f64], h: f64| -> Vec<f64> {
        s.iter().zip(k).map(|(a, b)| a + h * b).collect()
    };
    for k in 0..steps {
        let tau = k as f64 * step;
        let k1 = rhs(tau, &state)?;
        let k2 = rhs(tau + 0.5 * step, &axpy(&state, &k1, 0.5 * step))?;
        let k3 = rhs(tau + 0.5 * step, &axpy(&state, &k2, 0.5 * step))?;
        let k4 = rhs(tau + step, &axpy(&state, &k3, step))?;
        for i in 0..2 * n {
            state[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if (k + 1) % every == 0 || k + 1 == steps {
            samples.push(GeodesicSample {
                tau: (k + 1) as f64 * step,
                x: state[..n].to_vec(),
                y: state[n..].to_vec(),
            });
        }
    }
    Ok(samples)
}
