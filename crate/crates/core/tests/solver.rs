use finslerforge_core::exprkit::{parse_expr, Chart, Expr};
use finslerforge_core::solver::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn chart() -> Chart {
    Chart::shell()
}

fn e(s: &str) -> Expr {
    parse_expr(s, &chart()).unwrap()
}

fn f(s: &str) -> FieldFn {
    FieldFn::from(e(s))
}

fn base() -> Vec<f64> {
    vec![0.0, 0.0, 0.0, 0.0, 0.3, 0.0, 0.4, 0.0]
}

fn grid(n: usize) -> Grid {
    use coord::*;
    Grid::new(
        base(),
        vec![
            Axis { var: X1, min: -0.8, max: 0.8, count: n },
            Axis { var: X2, min: -0.8, max: 0.8, count: n },
            Axis { var: V, min: 0.0, max: 1.2, count: n },
        ],
    )
    .unwrap()
}

fn sources() -> SourceSpec {
    SourceSpec::from_lambdas([e("-1"), e("0.8 + 0.1 * x1^2"), e("1.2 + 0.1 * y3"), e("0.7 + 0.1 * sin(y5)")]).unwrap()
}

fn family(phis: [&str; 3]) -> GeneratingData {
    let mut gd = GeneratingData::new(1.0, liouville_psi(1.0, -1.0), phis.map(e));
    gd.h0 = [e("1"), e("1 + 0.1 * x1"), e("2")];
    gd.n0[0] = vec![e("0.1 * x1"), e("0.2")];
    gd.n1[0] = vec![e("0.3 + 0.1 * x2"), e("-0.2")];
    gd.n1[1] = vec![e("0.1"), e("0.2 * x1"), e("0.1"), e("0")];
    gd.n1[2] = vec![e("0.1"), e("0"), e("0"), e("0"), e("0.05"), e("0")];
    gd
}

const FAMILIES_PHI: [[&str; 3]; 3] = [
    [
        "0.4 * y3 + 0.1 * exp(0.3 * x1 - 0.2 * x2) * exp(0.5 * y3)",
        "0.5 * y5 + 0.1 * x1 * y3 + 0.2 * exp(0.3 * y5)",
        "0.6 * y7 + 0.1 * x2 + 0.05 * y5 * y3 + 0.1 * exp(0.2 * y7)",
    ],
    [
        "y3 + 0.1 * y3^3 + 0.2 * x1 * x2 * y3 + 0.1 * x1^2",
        "y5 + 0.2 * y5^2 + 0.1 * x2 * y3",
        "y7 + 0.1 * y7^3 + 0.1 * x1 * y5",
    ],
    [
        "y3 + 0.3 * sin(y3 + x1) + 0.1 * cos(x2)",
        "y5 + 0.2 * cos(y5 - x2) + 0.1 * sin(y3)",
        "y7 + 0.25 * sin(2 * y7) * cos(x1)",
    ],
];

#[test]
fn flat_shells_have_zero_residuals() {
    let a = ShellAnsatz::flat([1.0, 1.0], [1.0, -2.0, 3.0, 1.5, 1.0, 1.0]);
    let r = shell_residuals(&a, &SourceSpec::constant([0.0; 4]), &grid(3)).unwrap();
    assert_eq!(r.max(), 0.0);
    assert!(r.excluded.is_empty());
}

#[test]
fn conformal_base_equation() {
    // g1 = g2 = exp(r^2): R^1_1 = -exp(-r^2) (psi_11 + psi_22) / 2 = -2 exp(-r^2)
    let mut a = ShellAnsatz::flat([1.0, 1.0], [1.0; 6]);
    a.g = [f("exp(x1^2 + x2^2)"), f("exp(x1^2 + x2^2)")];
    let s = SourceSpec::from_lambdas([e("2 * exp(-(x1^2 + x2^2))"), e("0"), e("0"), e("0")]).unwrap();
    let r = shell_residuals(&a, &s, &grid(5)).unwrap();
    assert!(r.family("h_ricci").unwrap() < 1e-12);
    // a constant source of 2 only balances the equation at the origin
    let s = SourceSpec::from_lambdas([e("2"), e("0"), e("0"), e("0")]).unwrap();
    let origin = residuals_at(&a, &s, &base(), OuterShellForm::Symmetric).unwrap();
    assert!(origin[0] < 1e-12);
    assert!(shell_residuals(&a, &s, &grid(5)).unwrap().family("h_ricci").unwrap() > 0.1);
}

#[test]
fn liouville_factor_has_constant_source() {
    for (eps, lam) in [(1.0, -1.0), (1.0, 0.5), (-1.0, 2.0)] {
        let mut a = ShellAnsatz::flat([1.0, 1.0], [1.0; 6]);
        let g = FieldFn::from(Expr::Const(eps) * liouville_psi(eps, lam).exp());
        a.g = [g.clone(), g];
        let s = SourceSpec::from_lambdas([Expr::Const(lam), e("0"), e("0"), e("0")]).unwrap();
        let gr = Grid::new(
            base(),
            vec![
                Axis { var: 0, min: -0.6, max: 0.6, count: 5 },
                Axis { var: 1, min: -0.6, max: 0.6, count: 5 },
            ],
        )
        .unwrap();
        assert!(shell_residuals(&a, &s, &gr).unwrap().family("h_ricci").unwrap() < 1e-12);
    }
}

#[test]
fn generated_h4_matches_closed_form() {
    let mut gd = GeneratingData::new(1.0, e("0"), [e("y3"), e("y5"), e("y7")]);
    gd.lower = [-1.5, 0.0, 0.0];
    let s = SourceSpec::from_lambdas([e("0"), e("1"), e("1"), e("1")]).unwrap();
    let a = generate_solution(&gd, &s, &grid(2)).unwrap();
    for v in [-1.0, -0.2, 0.5, 1.7] {
        let mut p = base();
        p[2] = v;
        // h4 = (1/4) int_{v0}^{v} (e^{2v})' dv, h3 = (h4')^2 e^{-2v} / h4
        let h4 = 0.25 * ((2.0 * v).exp() - (-3.0f64).exp());
        let h3 = (0.5 * (2.0 * v).exp()).powi(2) * (-2.0 * v).exp() / h4;
        assert!((a.h[1].value(&p).unwrap() - h4).abs() < 1e-8);
        assert!((a.h[0].value(&p).unwrap() - h3).abs() < 1e-8 * h3.abs().max(1.0));
        // no x dependence: w vanishes, and n stays at its integration function
        assert_eq!(a.w[0].value(&p).unwrap(), 0.0);
        assert_eq!(a.n[1].value(&p).unwrap(), 0.0);
    }
}

#[test]
fn generated_families_solve_all_shells() {
    let s = sources();
    let start = std::time::Instant::now();
    for phis in FAMILIES_PHI {
        let gd = family(phis);
        let g = grid(9);
        let a = generate_solution(&gd, &s, &g).unwrap();
        let r = shell_residuals(&a, &s, &g).unwrap();
        assert!(r.excluded.is_empty(), "{:?}", r.excluded.first());
        assert!(r.max() < 1e-6, "{phis:?}: {:?}", r.families);
    }
    assert!(start.elapsed().as_secs_f64() < 60.0);
}

#[test]
fn curvature_engine_agrees_with_separated_equations() {
    let s = sources();
    let gd = family(FAMILIES_PHI[0]);
    let g = grid(9);
    let a = generate_solution(&gd, &s, &g).unwrap();
    let pts: Vec<Vec<f64>> = g.points().into_iter().step_by(36).take(20).collect();
    assert_eq!(pts.len(), 20);
    let c = cross_module_check(&a, &s, &pts).unwrap();
    assert!(c.horizontal < 1e-5, "{}", c.horizontal);
    assert!(c.vertical < 1e-5, "{}", c.vertical);
}

#[test]
fn branch_flip_keeps_residuals() {
    let s = sources();
    let g = grid(4);
    let mut gd = family(FAMILIES_PHI[2]);
    gd.h0 = [e("0"), e("0"), e("0")];
    gd.lower = [-0.5, -0.5, -0.5];
    let a = generate_solution(&gd, &s, &g).unwrap();
    gd.signs = [-1.0, -1.0, -1.0];
    let b = generate_solution(&gd, &s, &g).unwrap();
    for p in g.points() {
        for k in [1, 3, 5] {
            let (x, y) = (a.h[k].value(&p).unwrap(), b.h[k].value(&p).unwrap());
            assert!((x + y).abs() < 1e-14 * x.abs().max(1.0));
        }
        for k in [0, 2, 4] {
            assert!((a.h[k].value(&p).unwrap() - b.h[k].value(&p).unwrap()).abs() < 1e-12);
        }
        let ra = residuals_at(&a, &s, &p, OuterShellForm::Symmetric).unwrap();
        let rb = residuals_at(&b, &s, &p, OuterShellForm::Symmetric).unwrap();
        for (x, y) in ra.iter().zip(rb) {
            assert!((x - y).abs() < 1e-9);
            assert!(*x < 1e-6);
        }
    }
}

#[test]
fn printed_outer_shell_form_is_not_solved() {
    let s = sources();
    let g = grid(3);
    let a = generate_solution(&family(FAMILIES_PHI[1]), &s, &g).unwrap();
    let sym = shell_residuals(&a, &s, &g).unwrap();
    let printed = shell_residuals_with(&a, &s, &g, OuterShellForm::Printed).unwrap();
    assert!(sym.family("v2_ricci").unwrap() < 1e-6);
    assert!(printed.family("v2_ricci").unwrap() > 1e-3);
    assert!(printed.family("w2_balance").unwrap() > 1e-3);
    assert_eq!(sym.family("v1_ricci"), printed.family("v1_ricci"));
}

#[test]
fn lc_constraints() {
    let g = grid(3);
    // w = n = 0, h4 = h4(v): all satisfied
    let mut a = ShellAnsatz::flat([1.0, 1.0], [1.0; 6]);
    a.h[1] = f("2 + y3^2");
    let r = lc_constraints_check(&a, &g).unwrap();
    assert_eq!(r.max(), 0.0);
    // w1 = v with h4 = 1 violates the first condition
    let mut b = ShellAnsatz::flat([1.0, 1.0], [1.0; 6]);
    b.w[0] = f("y3");
    let r = lc_constraints_check(&b, &g).unwrap();
    assert!((r.get("w_fiber_log").unwrap() - 1.0).abs() < 1e-15);
    assert!(!r.passes(1e-8));
}

#[test]
fn lc_filter_on_generated_solution() {
    let s = SourceSpec::from_lambdas([e("-1"), e("0.8"), e("1.2"), e("0.7")]).unwrap();
    let mut gd = GeneratingData::new(1.0, liouville_psi(1.0, -1.0), [e("0.5 * y3 + 0.1 * exp(y3)"), e("y5 + 0.1 * y5^2"), e("y7")]);
    gd.h0 = [e("1"), e("1"), e("1")];
    gd.n0[0] = vec![e("0.3 * x1"), e("0.3 * x2")];
    let g = grid(9);
    let a = generate_solution(&gd, &s, &g).unwrap();
    let r = lc_constraints_check(&a, &g).unwrap();
    assert!(r.max() < 1e-8, "{:?}", r.constraints);
    assert!(shell_residuals(&a, &s, &g).unwrap().max() < 1e-6);
}

#[test]
fn source_algebra_round_trip() {
    assert_eq!(source_algebra([2.0; 4]), [6.0; 4]);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let u: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-5.0..5.0));
        let l = source_algebra(u);
        assert!((l.iter().sum::<f64>() - 3.0 * u.iter().sum::<f64>()).abs() < 1e-12);
        let back = source_inverse(l).unwrap();
        for (a, b) in u.iter().zip(back) {
            assert!((a - b).abs() < 1e-12);
        }
        let spec = SourceSpec::from_lambdas(l.map(Expr::Const)).unwrap();
        for (a, b) in spec.upsilon.iter().zip(u) {
            assert!((a.eval(&[0.0; 8]).unwrap() - b).abs() < 1e-12);
        }
    }
}

#[test]
fn polarizations() {
    let g = grid(3);
    let s = sources();
    let a = generate_solution(&family(FAMILIES_PHI[0]), &s, &g).unwrap();
    let same = polarization_deform(&a, &Polarization::identity(), &g).unwrap();
    let mut pol = Polarization::identity();
    pol.eta_h = [FieldFn::constant(2.0), FieldFn::constant(2.0)];
    let twice = polarization_deform(&a, &pol, &g).unwrap();
    for p in g.points() {
        for k in 0..2 {
            let x = a.h[k].value(&p).unwrap();
            assert_eq!(same.h[k].value(&p).unwrap(), x);
            assert_eq!(twice.h[k].value(&p).unwrap(), 2.0 * x);
        }
    }
    // deform a flat seed onto the generated data
    let seed = ShellAnsatz::flat([1.0, 1.0], [1.0; 6]);
    let mut seed = seed;
    seed.h[2..].clone_from_slice(&a.h[2..]);
    seed.w1 = a.w1.clone();
    seed.n1 = a.n1.clone();
    seed.w2 = a.w2.clone();
    seed.n2 = a.n2.clone();
    seed.w = a.w.clone().map(|w| w * FieldFn::constant(0.5));
    seed.n = a.n.clone().map(|n| n * FieldFn::constant(0.25));
    let pol = Polarization {
        eta_g: a.g.clone(),
        eta_h: [a.h[0].clone(), a.h[1].clone()],
        eta_w: [FieldFn::constant(2.0), FieldFn::constant(2.0)],
        eta_n: [FieldFn::constant(4.0), FieldFn::constant(4.0)],
    };
    let target = polarization_deform(&seed, &pol, &g).unwrap();
    assert!(shell_residuals(&target, &s, &g).unwrap().max() < 1e-6);
    pol_zero_rejected(&seed, &g);
}

fn pol_zero_rejected(seed: &ShellAnsatz, g: &Grid) {
    let mut pol = Polarization::identity();
    pol.eta_g[0] = f("x1");
    assert!(matches!(polarization_deform(seed, &pol, g), Err(SolverError::Degenerate(_))));
}

#[test]
fn killing_symmetry_enforced() {
    let mut a = ShellAnsatz::flat([1.0, 1.0], [1.0; 6]);
    a.h[1] = f("1 + y4^2");
    let err = shell_residuals(&a, &SourceSpec::constant([0.0; 4]), &grid(2)).unwrap_err();
    assert!(err.to_string().contains("y4"));
}

#[test]
fn degenerate_points_are_reported() {
    let mut a = ShellAnsatz::flat([1.0, 1.0], [1.0; 6]);
    a.h[0] = f("y3");
    let r = shell_residuals(&a, &SourceSpec::constant([0.0; 4]), &grid(3)).unwrap();
    assert_eq!(r.excluded.len(), 9);
    assert_eq!(r.points.len(), 18);
}

#[test]
fn random_points_quadrature_precision() {
    // h4 of a generated shell against a fine independent trapezoid sum
    let s = sources();
    let gd = family(FAMILIES_PHI[2]);
    let a = generate_solution(&gd, &s, &grid(2)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let mut p = base();
        p[0] = rng.gen_range(-0.8..0.8);
        p[1] = rng.gen_range(-0.8..0.8);
        p[2] = rng.gen_range(0.0..1.2);
        let phi = |v: f64| {
            let mut q = p.clone();
            q[2] = v;
            parse_expr(FAMILIES_PHI[2][0], &chart()).unwrap().eval_jet(&q, 1, &[2]).unwrap()
        };
        let lam = |v: f64| 0.8 + 0.1 * p[0] * p[0] + 0.0 * v;
        let slope = |v: f64| {
            let j = phi(v);
            0.25 * 2.0 * j.d(&[0]) * (2.0 * j.value()).exp() / lam(v)
        };
        let n = 20000;
        let h = p[2] / n as f64;
        let mut acc = 0.5 * (slope(0.0) + slope(p[2]));
        for k in 1..n {
            acc += slope(k as f64 * h);
        }
        let expect = 1.0 + acc * h;
        assert!((a.h[1].value(&p).unwrap() - expect).abs() < 1e-7);
    }
}
