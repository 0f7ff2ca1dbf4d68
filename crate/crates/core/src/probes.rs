//! Seeded random inputs: expression trees, points and generating functions.
//! Used by the property checks and by the CLI's randomized probes.

use rand::Rng;

use crate::exprkit::{BinaryOp, Chart, Expr, UnaryOp};
use crate::finsler::MdrSpec;

fn constant<R: Rng>(rng: &mut R) -> Expr {
    // a mix of short decimals and full-precision values exercises float printing
    if rng.gen_bool(0.5) {
        Expr::Const(rng.gen_range(-40i32..=40) as f64 / 8.0)
    } else {
        Expr::Const(rng.gen_range(-10.0..10.0))
    }
}

fn variable<R: Rng>(rng: &mut R, chart: &Chart, vars: &[usize]) -> Expr {
    Expr::var_at(chart, vars[rng.gen_range(0..vars.len())])
}

/// Arbitrary tree over every node kind of the grammar.
pub fn random_tree<R: Rng>(rng: &mut R, chart: &Chart, depth: u32) -> Expr {
    let vars: Vec<usize> = (0..chart.len()).collect();
    tree(rng, chart, &vars, depth)
}

fn tree<R: Rng>(rng: &mut R, chart: &Chart, vars: &[usize], depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.5) {
            constant(rng)
        } else {
            variable(rng, chart, vars)
        };
    }
    match rng.gen_range(0..3) {
        0 => {
            let op = UnaryOp::ALL[rng.gen_range(0..UnaryOp::ALL.len())];
            Expr::unary(op, tree(rng, chart, vars, depth - 1))
        }
        1 => {
            let op = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div][rng.gen_range(0..4)];
            Expr::binary(op, tree(rng, chart, vars, depth - 1), tree(rng, chart, vars, depth - 1))
        }
        _ => {
            let p = if rng.gen_bool(0.5) {
                rng.gen_range(-3i32..=4) as f64
            } else {
                rng.gen_range(-8i32..=8) as f64 / 4.0
            };
            Expr::Pow(Box::new(tree(rng, chart, vars, depth - 1)), p)
        }
    }
}

/// Polynomial tree in `vars`: sums, differences, products and small
/// non-negative integer powers with coefficients in `[-2, 2]`.
pub fn random_polynomial<R: Rng>(rng: &mut R, chart: &Chart, vars: &[usize], depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.4) {
            Expr::Const(rng.gen_range(-2.0..2.0))
        } else {
            variable(rng, chart, vars)
        };
    }
    match rng.gen_range(0..4) {
        0 => random_polynomial(rng, chart, vars, depth - 1) + random_polynomial(rng, chart, vars, depth - 1),
        1 => random_polynomial(rng, chart, vars, depth - 1) - random_polynomial(rng, chart, vars, depth - 1),
        2 => random_polynomial(rng, chart, vars, depth - 1) * random_polynomial(rng, chart, vars, depth - 1),
        _ => random_polynomial(rng, chart, vars, depth - 1).pow(rng.gen_range(0..=3) as f64),
    }
}

/// Smooth composite tree that stays inside every domain: logs and roots only
/// see arguments bounded away from zero, divisions likewise.
pub fn random_smooth<R: Rng>(rng: &mut R, chart: &Chart, vars: &[usize], depth: u32) -> Expr {
    let leaf = |rng: &mut R| random_polynomial(rng, chart, vars, 1);
    if depth == 0 {
        return leaf(rng);
    }
    let sub = |rng: &mut R| random_smooth(rng, chart, vars, depth - 1);
    let bounded = |rng: &mut R| Expr::Const(0.5) * sub(rng).sin();
    match rng.gen_range(0..7) {
        0 => sub(rng) + sub(rng),
        1 => sub(rng) * sub(rng),
        2 => bounded(rng).exp(),
        3 => sub(rng).cos(),
        4 => (Expr::Const(2.0) + bounded(rng)).log(),
        5 => (Expr::Const(1.5) + bounded(rng)).sqrt(),
        _ => sub(rng) / (Expr::Const(2.0) + bounded(rng)),
    }
}

pub fn random_point<R: Rng>(rng: &mut R, dim: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Lorentzian `g_ij(x)` on the 4 base coordinates of the Finsler chart:
/// `diag(-1, 1, 1, 1)` plus small x-dependent polynomial perturbations.
pub fn random_base_metric<R: Rng>(rng: &mut R, chart: &Chart) -> Vec<Expr> {
    let xs: Vec<usize> = chart.base_indices().collect();
    let n = xs.len();
    let mut g = vec![Expr::Const(0.0); n * n];
    for i in 0..n {
        for j in i..n {
            let pert = Expr::Const(0.05) * random_polynomial(rng, chart, &xs, 2).sin();
            let e = if i == j {
                Expr::Const(if i == 0 { -1.0 } else { 1.0 }) + pert
            } else {
                pert
            };
            g[i * n + j] = e.clone();
            g[j * n + i] = e;
        }
    }
    g
}

/// `L = g_ij(x) y^i y^j` with a random Lorentzian base metric.
pub fn random_quadratic_lagrangian<R: Rng>(rng: &mut R, chart: &Chart) -> (Expr, Vec<Expr>) {
    let g = random_base_metric(rng, chart);
    let n = chart.n_base();
    let y = |i: usize| Expr::var_at(chart, n + i);
    let mut terms = Vec::new();
    for i in 0..n {
        for j in 0..n {
            terms.push(g[i * n + j].clone() * y(i) * y(j));
        }
    }
    (Expr::sum(terms), g)
}

/// Dispersion data with an x-dependent spatial metric and random `q` of degree `r`.
pub fn random_mdr<R: Rng>(rng: &mut R, chart: &Chart, r: u32) -> MdrSpec {
    let xs: Vec<usize> = chart.base_indices().collect();
    let m = chart.n_fiber() - 1;
    let mut g = vec![Expr::Const(0.0); m * m];
    for i in 0..m {
        g[i * m + i] = Expr::Const(1.0) + Expr::Const(0.1) * random_polynomial(rng, chart, &xs, 2).sin();
    }
    let mut spec = MdrSpec::new(chart.clone(), g, r, 1.0);
    let mut seen: Vec<Vec<usize>> = Vec::new();
    for _ in 0..3 {
        let mut idx: Vec<usize> = (0..2 * r as usize).map(|_| rng.gen_range(0..m)).collect();
        idx.sort_unstable();
        if seen.contains(&idx) {
            continue;
        }
        seen.push(idx.clone());
        let coeff = Expr::Const(rng.gen_range(0.01..0.08)) * (Expr::Const(1.0) + Expr::Const(0.2) * random_polynomial(rng, chart, &xs, 1).cos());
        spec.q.push((idx, coeff));
    }
    spec
}

/// Fiber point away from the zero section and from the light cone of the
/// base `diag(-1, 1, 1, 1)` metric.
pub fn random_fiber_point<R: Rng>(rng: &mut R, chart: &Chart) -> Vec<f64> {
    let mut p = random_point(rng, chart.len(), -0.8, 0.8);
    let n = chart.n_base();
    p[n] = rng.gen_range(0.1..0.4) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    for k in n + 1..chart.len() {
        p[k] = rng.gen_range(0.5..1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    }
    p
}
