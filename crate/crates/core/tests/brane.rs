use finslerforge_core::brane::*;
use finslerforge_core::exprkit::{parse_expr, Chart};
use finslerforge_core::solver::{FieldFn, ShellAnsatz};
use nalgebra::SMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn f(s: &str) -> FieldFn {
    FieldFn::from(parse_expr(s, &Chart::shell()).unwrap())
}

fn profile() -> BraneProfile {
    brane_profile(0.7, 1.3, 2, 1.0, AMode::Solve).unwrap()
}

/// Sources written out term by term, independent of the jet evaluation.
fn k_by_hand(p: &BraneProfile, s: f64) -> (f64, f64) {
    let (e2, m, q) = (p.eps * p.eps, p.m as f64, p.phi0);
    let den = (3.0 * e2 + s * s).powi(2);
    let b1 = 2.0 * q * m * (q * (m + 2.0) - 3.0) / (3.0 * e2) * s.powi(4)
        + 2.0 * (-2.0 * q * (m * m + 2.0 * m + 6.0) + 3.0 * (m + 3.0) * (1.0 + q * q)) * s * s
        - 6.0 * e2 * m * (m - 3.0 * q + 2.0);
    let b2 = 2.0 * q * (m - 1.0) * (q * (m + 2.0) - 4.0) / (3.0 * e2) * s.powi(4)
        + 4.0 * (-q * (m * m + m + 10.0) + 2.0 * (m + 2.0) * (1.0 + q * q)) * s * s
        - 6.0 * e2 * (m - 1.0) * (m - 4.0 * q + 2.0);
    let mf = p.mass.powi(p.m as i32 + 2);
    (mf * (p.lambda + b1 / den), mf * (p.lambda + b2 / den))
}

#[test]
fn boundary_values_and_width() {
    for (mass, lambda, m) in [(0.7, 1.3, 2), (1.0, 1.0, 4), (2.5, 0.2, 3)] {
        let p = brane_profile(mass, lambda, m, 1.0, AMode::Given(3.0)).unwrap();
        assert!((p.phi2(0.0) - 1.0).abs() <= 1e-15);
        assert!((p.warp(0.0) - 1.0).abs() <= 1e-15);
        assert!((p.eps * p.eps * 3.0 * lambda - 40.0 * mass.powi(4)).abs() <= 1e-12 * 40.0 * mass.powi(4));
        assert!((p.phi2(1e7) - 3.0).abs() < 1e-9);
    }
}

#[test]
fn asymptotic_constant_is_tangent_root() {
    let p = profile();
    assert!((p.a - 1.0).abs() < 1e-9);
    // the flat profile is the only admissible one: phi = 1 everywhere
    assert!((p.phi2(3.0 * p.eps) - 1.0).abs() < 1e-9);
}

#[test]
fn invalid_parameters() {
    assert!(matches!(brane_profile(0.0, 1.0, 2, 1.0, AMode::Solve), Err(BraneError::Invalid(_))));
    assert!(matches!(brane_profile(1.0, 1.0, 1, 1.0, AMode::Solve), Err(BraneError::Invalid(_))));
}

#[test]
fn sources_match_direct_substitution() {
    let p = brane_profile(0.9, 1.1, 3, 0.6, AMode::Given(2.0)).unwrap();
    for s in [-3.0, -0.4, 0.0, 0.25, 1.7, 6.0] {
        let (k1, k2) = k_by_hand(&p, s);
        assert!((p.k1(s) - k1).abs() < 1e-12 * k1.abs().max(1.0));
        assert!((p.k2(s) - k2).abs() < 1e-12 * k2.abs().max(1.0));
        let mf = p.mass.powi(p.m as i32 + 2);
        let (ub, uf) = p.sources(s);
        assert!((ub - (p.lambda - k1 / mf)).abs() < 1e-12);
        assert!((uf - (p.lambda - k2 / mf)).abs() < 1e-12);
        assert_eq!(p.k1(s), p.k1(-s));
        assert_eq!(p.k2(s), p.k2(-s));
    }
}

#[test]
fn conservation_residual_against_finite_differences() {
    let p = brane_profile(0.9, 1.1, 2, 1.0, AMode::Given(2.0)).unwrap();
    let h = 1e-5;
    for s in [-1.0, 0.3, 2.2] {
        let dk1 = (k_by_hand(&p, s + h).0 - k_by_hand(&p, s - h).0) / (2.0 * h);
        let dln = ((p.phi2(s + h)).ln() - (p.phi2(s - h)).ln()) / (4.0 * h);
        let (k1, k2) = k_by_hand(&p, s);
        let want = (dk1 - 4.0 * (k2 - k1) * dln).abs();
        assert!((p.conservation_residual(s) - want).abs() < 1e-6 * want.max(1.0));
    }
}

#[test]
fn report_over_width_window() {
    let p = profile();
    let grid: Vec<f64> = (0..=40).map(|k| p.eps * (-5.0 + 0.25 * k as f64)).collect();
    let r = brane_sources_and_conservation(&p, &grid);
    assert_eq!(r.samples.len(), 41);
    assert!(r.max_conservation_residual.is_finite());
    let mid = &r.samples[20];
    assert_eq!((mid.y5, mid.phi2, mid.hbar), (0.0, 1.0, 1.0));
}

fn sample_ansatz() -> (ShellAnsatz, [FieldFn; 4]) {
    let mut a = ShellAnsatz::flat([1.0, 1.0], [1.0; 6]);
    a.g = [f("1 + 0.1 * x1^2"), f("-1 - 0.2 * x2^2")];
    a.h[0] = f("-2 + 0.1 * y3");
    a.h[1] = f("1.5 + 0.1 * x1 * y3");
    a.w = [f("0.3 * y3"), f("x1 - 0.2")];
    a.n = [f("0.1 * x2"), f("0.4")];
    a.w1 = [f("0.2 * y5"), f("0.1"), f("0"), f("0")];
    a.n1 = [f("-0.3"), f("0.05 * y5 * x1"), f("0"), f("0")];
    a.w2 = [f("0.1 * y7"), f("-0.2"), f("0"), f("0"), f("0"), f("0")];
    a.n2 = [f("0.3 * x1"), f("0.15 * y7"), f("0"), f("0"), f("0"), f("0")];
    let qh = [f("-1 - 0.1 * y5^2"), f("-1.2"), f("-0.8 + 0.1 * y7"), f("-1 + 0.05 * x1")];
    (a, qh)
}

type M8 = SMatrix<f64, 8, 8>;

#[test]
fn metric_is_congruent_to_block_diagonal() {
    let p = brane_profile(0.9, 1.1, 2, 1.0, AMode::Given(2.0)).unwrap();
    let (a, qh) = sample_ansatz();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let pt: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = assemble_brane_metric(&a, &p, &qh, &pt).unwrap();
        assert!((g - g.transpose()).amax() <= 1e-12);
        // coframe matrix E with rows e^a = dy^a + N^a_i dx^i
        let s = pt[4];
        let scale = p.lstar * p.lstar * p.hbar(s) / p.phi2(s);
        let v = |x: &FieldFn| x.value(&pt).unwrap();
        let mut d = M8::zeros();
        d[(0, 0)] = v(&a.g[0]);
        d[(1, 1)] = v(&a.g[1]);
        d[(2, 2)] = v(&a.h[0]);
        d[(3, 3)] = v(&a.h[1]);
        for k in 0..4 {
            d[(k + 4, k + 4)] = scale * v(&qh[k]);
        }
        let rows = [&a.w[..], &a.n[..], &a.w1[..], &a.n1[..], &a.w2[..], &a.n2[..]];
        let mut e = M8::identity();
        for (r, c) in rows.iter().enumerate() {
            e[(r + 2, 0)] = v(&c[0]);
            e[(r + 2, 1)] = v(&c[1]);
        }
        let want = e.transpose() * d * e;
        assert!((g - want).amax() <= 1e-10 * want.amax().max(1.0));
    }
}

#[test]
fn vanishing_n_coefficients_give_diagonal_pattern() {
    let p = brane_profile(0.9, 1.1, 2, 1.0, AMode::Given(2.0)).unwrap();
    let (a, qh) = sample_ansatz();
    let diag = ShellAnsatz::diagonal(a.g.clone(), a.h.clone());
    let pt = [0.2, -0.3, 0.5, 0.0, 0.7, 0.0, -0.4, 0.0];
    let g = assemble_brane_metric(&diag, &p, &qh, &pt).unwrap();
    let scale = p.hbar(0.7) / p.phi2(0.7);
    for r in 0..8 {
        for c in 0..8 {
            if r != c {
                assert_eq!(g[(r, c)], 0.0);
            }
        }
    }
    for k in 0..4 {
        assert!((g[(k + 4, k + 4)] - scale * qh[k].value(&pt).unwrap()).abs() < 1e-14);
    }
}

#[test]
fn vanishing_scale_drops_bracketed_terms() {
    let mut p = brane_profile(0.9, 1.1, 2, 1.0, AMode::Given(2.0)).unwrap();
    let (a, qh) = sample_ansatz();
    let pt = [0.4, 0.1, -0.2, 0.0, 0.6, 0.0, 0.3, 0.0];
    let full = assemble_brane_metric(&a, &p, &qh, &pt).unwrap();
    p.lstar = 0.0;
    let bare = assemble_brane_metric(&a, &p, &qh, &pt).unwrap();
    let v = |x: &FieldFn| x.value(&pt).unwrap();
    let scale = p.hbar(0.6) / p.phi2(0.6);
    let outer: [(&[FieldFn], usize); 4] = [(&a.w1, 0), (&a.n1, 1), (&a.w2, 2), (&a.n2, 3)];
    for (i, j) in [(0, 0), (0, 1), (1, 1)] {
        let bracket: f64 = outer.iter().map(|(c, k)| v(&c[i]) * v(&c[j]) * v(&qh[*k])).sum();
        assert!((full[(i, j)] - bare[(i, j)] - scale * bracket).abs() < 1e-13);
    }
}

#[test]
fn diagonal_metric_signs() {
    let p = profile();
    let g = diagonal_brane_metric(&p, 0.0, [1.0, -1.0]);
    let d: Vec<f64> = (0..8).map(|k| g[(k, k)]).collect();
    assert_eq!(d, vec![1.0, -1.0, -1.0, -1.0, -1.0, -1.0, -1.0, 1.0]);
}
