use finslerforge_core::exprkit::{parse_expr, Chart, Expr, ExprError, Jet, JetSpace};
use finslerforge_core::probes::{random_point, random_polynomial, random_smooth, random_tree};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn chart() -> Chart {
    Chart::finsler()
}

#[test]
fn print_parse_round_trip() {
    let c = chart();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let t = random_tree(&mut rng, &c, 5);
        let printed = t.to_string();
        let back = parse_expr(&printed, &c).unwrap_or_else(|e| panic!("{printed}: {e}"));
        assert_eq!(back, t, "{printed}");
    }
}

/// Central differences with step `h` for first and second partials.
fn fd_partials(e: &Expr, p: &[f64], i: usize, j: usize, h: f64) -> (f64, f64) {
    let at = |di: f64, dj: f64| {
        let mut q = p.to_vec();
        q[i] += di;
        q[j] += dj;
        e.eval(&q).unwrap()
    };
    let first = (at(h, 0.0) - at(-h, 0.0)) / (2.0 * h);
    let second = if i == j {
        (at(h, 0.0) - 2.0 * at(0.0, 0.0) + at(-h, 0.0)) / (h * h)
    } else {
        (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h)
    };
    (first, second)
}

fn close(ad: f64, fd: f64, scale: f64) -> bool {
    (ad - fd).abs() <= 1e-5 * ad.abs().max(scale)
}

#[test]
fn ad_matches_finite_differences_on_polynomials() {
    let c = chart();
    let vars: Vec<usize> = (0..8).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..500 {
        let e = random_polynomial(&mut rng, &c, &vars, 4);
        let p = random_point(&mut rng, 8, -1.0, 1.0);
        let jet = e.eval_jet(&p, 2, &vars).unwrap();
        let scale = jet.coeffs().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..8 {
            for j in i..8 {
                let (d1, d2) = fd_partials(&e, &p, i, j, 1e-4);
                assert!(close(jet.d(&[i]), d1, scale), "{e}: d{i} {} vs {d1}", jet.d(&[i]));
                assert!(close(jet.d(&[i, j]), d2, scale), "{e}: d{i}{j} {} vs {d2}", jet.d(&[i, j]));
            }
        }
    }
}

#[test]
fn ad_matches_finite_differences_on_composites() {
    let c = chart();
    let vars = [0, 2, 5];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let e = random_smooth(&mut rng, &c, &vars, 3);
        let p = random_point(&mut rng, 8, -1.0, 1.0);
        let jet = e.eval_jet(&p, 2, &vars).unwrap();
        let scale = jet.coeffs().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, &i) in vars.iter().enumerate() {
            for (b, &j) in vars.iter().enumerate().skip(a) {
                let (d1, d2) = fd_partials(&e, &p, i, j, 1e-4);
                assert!(close(jet.d(&[a]), d1, scale), "{e}");
                assert!(close(jet.d(&[a, b]), d2, scale), "{e}");
            }
        }
    }
}

#[test]
fn mixed_partials_are_symmetric() {
    let c = chart();
    let e = parse_expr("sin(x1 * y2) * exp(x3) / (2 + cos(y1 * x1))", &c).unwrap();
    let j = e.eval_jet(&[0.3, 0.1, -0.2, 0.0, 0.7, 0.4, 0.0, 0.0], 4, &[0, 2, 4, 5]).unwrap();
    // a jet stores one coefficient per multi-index, so every ordering reads the same value
    assert_eq!(j.d(&[0, 3, 2]), j.d(&[3, 2, 0]));
    assert_eq!(j.d(&[1, 1, 0, 3]), j.d(&[3, 1, 0, 1]));
}

#[test]
fn hand_derivatives_of_product() {
    let c = chart();
    let e = parse_expr("x1 * y1^2", &c).unwrap();
    let j = e.eval_jet(&[2.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0], 3, &[0, 4]).unwrap();
    assert_eq!(j.d(&[1, 1]), 4.0);
    assert_eq!(j.d(&[0, 1, 1]), 2.0);
}

#[test]
fn parse_errors() {
    let c = chart();
    assert!(matches!(parse_expr("y1 +", &c), Err(ExprError::Syntax { offset: 4, .. })));
    match parse_expr("y9 * 2", &c) {
        Err(ExprError::Undeclared(name)) => assert_eq!(name, "y9"),
        other => panic!("{other:?}"),
    }
}

fn jet_strategy() -> impl Strategy<Value = Jet> {
    prop::collection::vec(-3.0f64..3.0, 15).prop_map(|c| Jet::from_coeffs(&JetSpace::get(2, 4), c))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, rng_algorithm: prop::test_runner::RngAlgorithm::ChaCha, ..ProptestConfig::default() })]

    #[test]
    fn jet_ring_laws(a in jet_strategy(), b in jet_strategy(), c in jet_strategy()) {
        let tol = 1e-12 * 1e3;
        prop_assert!((&a + &b).max_coeff_diff(&(&b + &a)) == 0.0);
        prop_assert!((&a * &b).max_coeff_diff(&(&b * &a)) <= tol);
        prop_assert!((&(&a + &b) + &c).max_coeff_diff(&(&a + &(&b + &c))) <= tol);
        prop_assert!((&(&a * &b) * &c).max_coeff_diff(&(&a * &(&b * &c))) <= tol);
        prop_assert!((&a * &(&b + &c)).max_coeff_diff(&(&(&a * &b) + &(&a * &c))) <= tol);
    }

    #[test]
    fn order_zero_is_real_arithmetic(x in -5.0f64..5.0, y in 0.5f64..5.0) {
        let s = JetSpace::get(0, 0);
        let (a, b) = (Jet::constant(&s, x), Jet::constant(&s, y));
        prop_assert_eq!((&a * &b).value(), x * y);
        prop_assert_eq!((&a + &b).value(), x + y);
        prop_assert_eq!(b.sqrt().value(), y.sqrt());
    }
}
