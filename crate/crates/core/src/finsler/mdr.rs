use crate::exprkit::{Chart, Expr};

use super::GeometryError;

/// Coefficients of a modified dispersion relation on a tangent-bundle chart.
///
/// Hatted indices run over `slots`, fiber positions (0-based) that carry the
/// spatial quadratic form. The default leaves out slot 0, the time slot.
#[derive(Debug, Clone)]
pub struct MdrSpec {
    pub chart: Chart,
    /// Row-major `slots.len()` square matrix of base-dependent expressions.
    pub g: Vec<Expr>,
    pub slots: Vec<usize>,
    /// Independent components of the totally symmetric `q`, keyed by a
    /// multiset of positions into `slots`.
    pub q: Vec<(Vec<usize>, Expr)>,
    pub r: u32,
    pub c: f64,
}

fn multinomial(idx: &[usize]) -> f64 {
    let n = idx.len();
    let mut num: f64 = (1..=n).map(|k| k as f64).product();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && idx[j] == idx[i] {
            j += 1;
        }
        num /= (1..=(j - i)).map(|k| k as f64).product::<f64>();
        i = j;
    }
    num
}

impl MdrSpec {
    /// Spatial metric over fiber slots 1.. with `q = 0`.
    pub fn new(chart: Chart, g: Vec<Expr>, r: u32, c: f64) -> MdrSpec {
        let slots = (1..chart.n_fiber()).collect();
        MdrSpec {
            chart,
            g,
            slots,
            q: Vec::new(),
            r,
            c,
        }
    }

    fn validate(&self) -> Result<(), GeometryError> {
        let m = self.slots.len();
        if self.r == 0 {
            return Err(GeometryError::Dimension("MDR degree r must be at least 1".into()));
        }
        if self.g.len() != m * m {
            return Err(GeometryError::Dimension(format!(
                "spatial metric has {} entries for {m} slots",
                self.g.len()
            )));
        }
        if let Some(bad) = self.slots.iter().find(|s| **s >= self.chart.n_fiber()) {
            return Err(GeometryError::Dimension(format!("fiber slot {bad} out of range")));
        }
        let mut seen: Vec<Vec<usize>> = Vec::new();
        for (idx, _) in &self.q {
            if idx.len() != 2 * self.r as usize {
                return Err(GeometryError::Dimension(format!(
                    "q component {idx:?} has rank {}, expected 2r = {}",
                    idx.len(),
                    2 * self.r
                )));
            }
            if let Some(bad) = idx.iter().find(|k| **k >= m) {
                return Err(GeometryError::Dimension(format!("q index {bad} out of range")));
            }
            let mut sorted = idx.clone();
            sorted.sort_unstable();
            if seen.contains(&sorted) {
                return Err(GeometryError::Dimension(format!(
                    "q component {idx:?} given twice"
                )));
            }
            seen.push(sorted);
        }
        Ok(())
    }

    fn y(&self, slot: usize) -> Expr {
        Expr::var_at(&self.chart, self.chart.n_base() + self.slots[slot])
    }

    /// `g_ij y^i y^j` over the hatted slots.
    pub fn quadratic_form(&self) -> Expr {
        let m = self.slots.len();
        let mut terms = Vec::new();
        for i in 0..m {
            for j in 0..m {
                if self.g[i * m + j].is_zero() {
                    continue;
                }
                terms.push(self.g[i * m + j].clone() * self.y(i) * self.y(j));
            }
        }
        Expr::sum(terms)
    }

    /// `q_{i1..i2r} y^i1 ... y^i2r` summed over all index orderings.
    pub fn q_contraction(&self) -> Expr {
        let terms = self.q.iter().map(|(idx, coeff)| {
            let mut sorted = idx.clone();
            sorted.sort_unstable();
            let mut t = Expr::Const(multinomial(&sorted)) * coeff.clone();
            for &k in &sorted {
                t = t * self.y(k);
            }
            t
        });
        Expr::sum(terms)
    }
}

/// `F^2 = -(c y^0)^2 + g_ij y^i y^j [1 + (1/r) q(y..y) / (g_ij y^i y^j)^r]`.
pub fn finsler_from_mdr(spec: &MdrSpec) -> Result<Expr, GeometryError> {
    spec.validate()?;
    let y0 = Expr::var_at(&spec.chart, spec.chart.n_base());
    let time = Expr::Const(-(spec.c * spec.c)) * y0.pow(2.0);
    let gyy = spec.quadratic_form();
    let spatial = if spec.q.is_empty() {
        gyy
    } else {
        let corr = Expr::Const(1.0 / spec.r as f64) * spec.q_contraction()
            / gyy.clone().pow(spec.r as f64);
        gyy * (Expr::Const(1.0) + corr)
    };
    Ok(time + spatial)
}

/// Dispersion form `omega^2 = c^2 (g k k) [1 - (1/r) q(k..k) / (g k k)^r]`
/// evaluated with `k` read from the fiber slots of `point`.
pub fn dispersion_omega2(spec: &MdrSpec, point: &[f64]) -> Result<f64, GeometryError> {
    spec.validate()?;
    let gkk = spec.quadratic_form().eval(point)?;
    let q = spec.q_contraction().eval(point)?;
    Ok(spec.c * spec.c * gkk * (1.0 - q / (spec.r as f64 * gkk.powi(spec.r as i32))))
}
