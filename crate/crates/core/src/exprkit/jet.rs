//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] stores the Taylor coefficients of a scalar function around a
//! point, for every multi-index of total degree `<= order` over `nvars`
//! carried variables. Monomials are enumerated graded by degree, so the
//! coefficient vector of an order-`p` jet is a prefix of the order-`q` jet
//! (`q > p`) of the same function. Truncation is a slice and binary
//! operations between jets of different order simply work at the lower one.
//!
//! Partial derivatives are recovered as `alpha! * coeff(alpha)`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

/// Highest order a [`JetSpace`] can be built for.
///
/// Curvature of Finsler-induced data needs fifth derivatives of `F^2`
/// (connection coefficients carry three, curvature differentiates once more
/// and the canonical N-connection adds one).
pub const MAX_ORDER: usize = 6;

pub type MultiIndex = Vec<u8>;

/// Monomial layout and multiplication table for a fixed `(nvars, order)`.
pub struct JetSpace {
    nvars: usize,
    order: usize,
    monomials: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
    /// `degree_end[d]` is one past the last monomial of degree `d`.
    degree_end: Vec<usize>,
    mul_table: Vec<(u32, u32, u32)>,
    /// Per-monomial `alpha!`.
    factorials: Vec<f64>,
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSpace")
            .field("nvars", &self.nvars)
            .field("order", &self.order)
            .field("len", &self.monomials.len())
            .finish()
    }
}

fn enumerate_degree(nvars: usize, degree: usize, out: &mut Vec<MultiIndex>) {
    fn rec(pos: usize, left: usize, cur: &mut MultiIndex, out: &mut Vec<MultiIndex>) {
        let n = cur.len();
        if pos + 1 == n {
            cur[pos] = left as u8;
            out.push(cur.clone());
            return;
        }
        for k in (0..=left).rev() {
            cur[pos] = k as u8;
            rec(pos + 1, left - k, cur, out);
        }
        cur[pos] = 0;
    }
    if nvars == 0 {
        if degree == 0 {
            out.push(Vec::new());
        }
        return;
    }
    let mut cur = vec![0u8; nvars];
    rec(0, degree, &mut cur, out);
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

impl JetSpace {
    fn build(nvars: usize, order: usize) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds MAX_ORDER");
        let mut monomials = Vec::new();
        let mut degree_end = Vec::with_capacity(order + 1);
        for d in 0..=order {
            enumerate_degree(nvars, d, &mut monomials);
            degree_end.push(monomials.len());
        }
        let lookup: HashMap<MultiIndex, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let degree_of = |m: &MultiIndex| m.iter().map(|&k| k as usize).sum::<usize>();
        let mut mul_table = Vec::new();
        for (i, a) in monomials.iter().enumerate() {
            let da = degree_of(a);
            for (j, b) in monomials.iter().enumerate() {
                if da + degree_of(b) > order {
                    // monomials are graded, every later b is at least as large
                    if degree_of(b) > order - da {
                        break;
                    }
                    continue;
                }
                let sum: MultiIndex = a.iter().zip(b).map(|(x, y)| x + y).collect();
                let k = lookup[&sum];
                mul_table.push((i as u32, j as u32, k as u32));
            }
        }
        let factorials = monomials
            .iter()
            .map(|m| m.iter().map(|&k| factorial(k as usize)).product())
            .collect();
        JetSpace {
            nvars,
            order,
            monomials,
            lookup,
            degree_end,
            mul_table,
            factorials,
        }
    }

    /// Shared space for `(nvars, order)`; built once per process.
    pub fn get(nvars: usize, order: usize) -> Arc<JetSpace> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetSpace>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("jet space cache poisoned");
        guard
            .entry((nvars, order))
            .or_insert_with(|| Arc::new(JetSpace::build(nvars, order)))
            .clone()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomial(&self, i: usize) -> &[u8] {
        &self.monomials[i]
    }

    pub fn index_of(&self, alpha: &[u8]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    /// Number of monomials of degree `<= order`.
    pub fn len_for_order(&self, order: usize) -> usize {
        self.degree_end[order.min(self.order)]
    }

    pub fn factorial_of(&self, i: usize) -> f64 {
        self.factorials[i]
    }
}

/// Converts a list of variable positions (repetition allowed) into a multi-index.
pub fn multi_index(nvars: usize, vars: &[usize]) -> MultiIndex {
    let mut alpha = vec![0u8; nvars];
    for &v in vars {
        alpha[v] += 1;
    }
    alpha
}

/// Truncated Taylor expansion of a scalar around a point.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.space.nvars)
            .field("order", &self.space.order)
            .field("value", &self.value())
            .finish()
    }
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, value: f64) -> Jet {
        let mut coeffs = vec![0.0; space.len()];
        coeffs[0] = value;
        Jet {
            space: space.clone(),
            coeffs,
        }
    }

    pub fn zero(space: &Arc<JetSpace>) -> Jet {
        Jet::constant(space, 0.0)
    }

    /// The coordinate function `u_var` expanded at `value`.
    pub fn variable(space: &Arc<JetSpace>, var: usize, value: f64) -> Jet {
        assert!(var < space.nvars, "variable {var} out of range");
        let mut j = Jet::constant(space, value);
        if space.order >= 1 {
            j.coeffs[1 + var] = 1.0;
        }
        j
    }

    /// Builds a jet from raw Taylor coefficients laid out as in `space`.
    pub fn from_coeffs(space: &Arc<JetSpace>, coeffs: Vec<f64>) -> Jet {
        assert_eq!(coeffs.len(), space.len());
        Jet {
            space: space.clone(),
            coeffs,
        }
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn nvars(&self) -> usize {
        self.space.nvars
    }

    pub fn order(&self) -> usize {
        self.space.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Mixed partial derivative for multi-index `alpha`.
    pub fn partial(&self, alpha: &[u8]) -> f64 {
        match self.space.index_of(alpha) {
            Some(i) => self.coeffs[i] * self.space.factorials[i],
            None => panic!(
                "multi-index {alpha:?} beyond jet order {}",
                self.space.order
            ),
        }
    }

    /// Partial derivative w.r.t. the listed variable positions.
    pub fn d(&self, vars: &[usize]) -> f64 {
        self.partial(&multi_index(self.space.nvars, vars))
    }

    /// First partials `[d/du_0, ..., d/du_{n-1}]`.
    pub fn gradient(&self) -> Vec<f64> {
        (0..self.space.nvars).map(|v| self.coeffs[1 + v]).collect()
    }

    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.space.order {
            return self.clone();
        }
        let space = JetSpace::get(self.space.nvars, order);
        let n = space.len();
        Jet {
            space,
            coeffs: self.coeffs[..n].to_vec(),
        }
    }

    /// Jet of `d/du_var`, one order lower.
    pub fn derivative(&self, var: usize) -> Jet {
        assert!(self.space.order >= 1, "cannot differentiate an order-0 jet");
        let lower = JetSpace::get(self.space.nvars, self.space.order - 1);
        let mut out = vec![0.0; lower.len()];
        let mut alpha: MultiIndex = vec![0; self.space.nvars];
        for (i, slot) in out.iter_mut().enumerate() {
            alpha.copy_from_slice(&lower.monomials[i]);
            alpha[var] += 1;
            let src = self.space.lookup[&alpha];
            *slot = self.coeffs[src] * alpha[var] as f64;
        }
        Jet {
            space: lower,
            coeffs: out,
        }
    }

    /// Rebuilds the jet of `u -> self(u)` in a space with more variables,
    /// where variable `k` of `self` becomes variable `map[k]`.
    pub fn embed(&self, target: &Arc<JetSpace>, map: &[usize]) -> Jet {
        assert_eq!(map.len(), self.space.nvars);
        let mut out = vec![0.0; target.len()];
        let mut alpha: MultiIndex = vec![0; target.nvars];
        let len = self.space.len_for_order(target.order);
        for i in 0..len {
            alpha.iter_mut().for_each(|a| *a = 0);
            for (k, &p) in self.space.monomials[i].iter().enumerate() {
                alpha[map[k]] += p;
            }
            out[target.lookup[&alpha]] = self.coeffs[i];
        }
        Jet {
            space: target.clone(),
            coeffs: out,
        }
    }

    fn common_space(&self, other: &Jet) -> Arc<JetSpace> {
        assert_eq!(
            self.space.nvars, other.space.nvars,
            "jets over different variable sets"
        );
        if self.space.order <= other.space.order {
            self.space.clone()
        } else {
            other.space.clone()
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let space = self.common_space(other);
        let n = space.len();
        let coeffs = self.coeffs[..n]
            .iter()
            .zip(&other.coeffs[..n])
            .map(|(a, b)| f(*a, *b))
            .collect();
        Jet { space, coeffs }
    }

    pub fn mul_jet(&self, other: &Jet) -> Jet {
        let space = self.common_space(other);
        let mut out = vec![0.0; space.len()];
        let a = &self.coeffs;
        let b = &other.coeffs;
        for &(i, j, k) in &space.mul_table {
            out[k as usize] += a[i as usize] * b[j as usize];
        }
        Jet { space, coeffs: out }
    }

    /// `sum_k taylor[k] * (self - self.value())^k`.
    fn compose(&self, taylor: &[f64]) -> Jet {
        let order = self.space.order;
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut acc = Jet::constant(&self.space, taylor[order]);
        for k in (0..order).rev() {
            acc = acc.mul_jet(&h);
            acc.coeffs[0] += taylor[k];
        }
        acc
    }

    /// Applies a scalar function given its derivatives `f^(k)(value)`, `k = 0..=order`.
    pub fn apply(&self, derivs: impl Fn(usize) -> f64) -> Jet {
        let order = self.space.order;
        let taylor: Vec<f64> = (0..=order).map(|k| derivs(k) / factorial(k)).collect();
        self.compose(&taylor)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.apply(|_| e)
    }

    /// Natural log; the value must be positive.
    pub fn ln(&self) -> Jet {
        let a = self.value();
        self.apply(|k| {
            if k == 0 {
                a.ln()
            } else {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * factorial(k - 1) / a.powi(k as i32)
            }
        })
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.apply(|k| match k % 4 {
            0 => s,
            1 => c,
            2 => -s,
            _ => -c,
        })
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.apply(|k| match k % 4 {
            0 => c,
            1 => -s,
            2 => -c,
            _ => s,
        })
    }

    /// `self^p` for real `p`; the value must be positive unless `p` is an integer.
    pub fn powf(&self, p: f64) -> Jet {
        if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
            return self.powi(p as i32);
        }
        let a = self.value();
        self.apply(|k| {
            let mut falling = 1.0;
            for m in 0..k {
                falling *= p - m as f64;
            }
            falling * a.powf(p - k as f64)
        })
    }

    /// Uses the correctly rounded `f64::sqrt` for the value.
    pub fn sqrt(&self) -> Jet {
        let a = self.value();
        let root = a.sqrt();
        self.apply(|k| {
            let mut falling = 1.0;
            for m in 0..k {
                falling *= 0.5 - m as f64;
            }
            falling * root / a.powi(k as i32)
        })
    }

    /// `1/self`, valid for any nonzero value.
    pub fn recip(&self) -> Jet {
        let a = self.value();
        self.apply(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * factorial(k) / a.powi(k as i32 + 1)
        })
    }

    /// Integer power by repeated squaring; exact for any base.
    pub fn powi(&self, n: i32) -> Jet {
        if n < 0 {
            return self.recip().powi(-n);
        }
        let mut result = Jet::constant(&self.space, 1.0);
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_jet(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_jet(&base);
            }
        }
        result
    }

    /// `|self|`, smooth away from a zero value.
    pub fn abs(&self) -> Jet {
        if self.value() < 0.0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Largest absolute Taylor coefficient difference, after bringing both
    /// jets to a common order.
    pub fn max_coeff_diff(&self, other: &Jet) -> f64 {
        let space = self.common_space(other);
        let n = space.len();
        self.coeffs[..n]
            .iter()
            .zip(&other.coeffs[..n])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_jet(rhs)
    }
}

impl Div for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        self.mul_jet(&rhs.recip())
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn graded_prefix_property() {
        let lo = JetSpace::get(3, 2);
        let hi = JetSpace::get(3, 4);
        for i in 0..lo.len() {
            assert_eq!(lo.monomial(i), hi.monomial(i));
        }
        assert_eq!(hi.len(), 35);
    }

    #[test]
    fn product_rule_partials() {
        // f = x * y^2 at (2, 3)
        let s = JetSpace::get(2, 4);
        let x = Jet::variable(&s, 0, 2.0);
        let y = Jet::variable(&s, 1, 3.0);
        let f = &x * &(&y * &y);
        assert_eq!(f.value(), 18.0);
        assert_eq!(f.d(&[1, 1]), 4.0);
        assert_eq!(f.d(&[0, 1, 1]), 2.0);
        assert_eq!(f.d(&[0]), 9.0);
        assert_eq!(f.d(&[0, 0]), 0.0);
    }

    #[test]
    fn exp_ln_inverse() {
        let s = JetSpace::get(2, 4);
        let x = Jet::variable(&s, 0, 0.7);
        let y = Jet::variable(&s, 1, -0.3);
        let u = &(&x * &y) + &x.sin();
        let back = u.exp().ln();
        assert!(back.max_coeff_diff(&u) < 1e-13);
    }

    #[test]
    fn powf_matches_powi_and_sqrt() {
        let s = JetSpace::get(1, 4);
        let x = Jet::variable(&s, 0, 1.7);
        let a = x.powf(3.0);
        let b = &(&x * &x) * &x;
        assert!(a.max_coeff_diff(&b) < 1e-13);
        let r = x.sqrt();
        assert!((&r * &r).max_coeff_diff(&x) < 1e-13);
        // d^3/dx^3 x^(1/2) = 3/8 x^(-5/2)
        assert!(close(r.d(&[0, 0, 0]), 0.375 * 1.7f64.powf(-2.5), 1e-14));
    }

    #[test]
    fn negative_base_integer_power_and_recip() {
        let s = JetSpace::get(1, 3);
        let x = Jet::variable(&s, 0, -2.0);
        let c = x.powi(3);
        assert_eq!(c.value(), -8.0);
        assert_eq!(c.d(&[0]), 12.0);
        assert_eq!(c.d(&[0, 0]), -12.0);
        let r = x.recip();
        assert!(close(r.d(&[0]), -0.25, 1e-15));
        assert!(close((&x * &r).value(), 1.0, 1e-15));
        assert!((&x * &r).coeffs()[1..].iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn derivative_and_embed() {
        let s = JetSpace::get(2, 3);
        let x = Jet::variable(&s, 0, 0.5);
        let y = Jet::variable(&s, 1, 1.5);
        let f = (&x * &y).sin();
        let fx = f.derivative(0);
        assert_eq!(fx.order(), 2);
        assert!(close(fx.value(), 1.5 * (0.75f64).cos(), 1e-14));
        assert!(close(fx.d(&[1]), f.d(&[0, 1]), 1e-14));
        let big = JetSpace::get(4, 3);
        let e = f.embed(&big, &[3, 1]);
        assert!(close(e.d(&[3, 1]), f.d(&[0, 1]), 1e-14));
        assert_eq!(e.d(&[0]), 0.0);
    }

    #[test]
    fn mixed_order_operations_truncate() {
        let s4 = JetSpace::get(1, 4);
        let s2 = JetSpace::get(1, 2);
        let a = Jet::variable(&s4, 0, 1.0).exp();
        let b = Jet::variable(&s2, 0, 1.0);
        let c = &a * &b;
        assert_eq!(c.order(), 2);
    }
}
