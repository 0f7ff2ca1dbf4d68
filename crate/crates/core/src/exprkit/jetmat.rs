//! Small dense matrices of jets stored row-major.

use super::jet::Jet;

/// Inverse of an `n x n` jet matrix by Gauss-Jordan elimination with
/// partial pivoting on the values. Returns `None` when a pivot vanishes.
pub fn invert(m: &[Jet], n: usize) -> Option<Vec<Jet>> {
    assert_eq!(m.len(), n * n);
    if n == 0 {
        return Some(Vec::new());
    }
    let space = m[0].space().clone();
    let mut a: Vec<Jet> = m.to_vec();
    let mut inv: Vec<Jet> = (0..n * n)
        .map(|k| Jet::constant(&space, if k / n == k % n { 1.0 } else { 0.0 }))
        .collect();
    let scale = m.iter().map(|j| j.value().abs()).fold(0.0, f64::max);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| {
                a[r * n + col]
                    .value()
                    .abs()
                    .total_cmp(&a[s * n + col].value().abs())
            })
            .expect("non-empty range");
        if a[pivot * n + col].value().abs() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
                inv.swap(pivot * n + k, col * n + k);
            }
        }
        let p = a[col * n + col].recip();
        for k in 0..n {
            a[col * n + k] = &a[col * n + k] * &p;
            inv[col * n + k] = &inv[col * n + k] * &p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col].clone();
            if f.coeffs().iter().all(|c| *c == 0.0) {
                continue;
            }
            for k in 0..n {
                a[r * n + k] = &a[r * n + k] - &(&f * &a[col * n + k]);
                inv[r * n + k] = &inv[r * n + k] - &(&f * &inv[col * n + k]);
            }
        }
    }
    Some(inv)
}

/// Row-major values of a jet matrix.
pub fn values(m: &[Jet]) -> Vec<f64> {
    m.iter().map(Jet::value).collect()
}
