use finslerforge_core::exprkit::{parse_expr, Chart, Expr};
use finslerforge_core::finsler::*;
use finslerforge_core::probes::{random_fiber_point, random_mdr, random_point, random_quadratic_lagrangian};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn chart() -> Chart {
    Chart::finsler()
}

fn ff(src: &str) -> FinslerFunction {
    let c = chart();
    FinslerFunction::new(c.clone(), parse_expr(src, &c).unwrap()).unwrap()
}

/// Christoffel symbols `Gamma^k_{ij}` of `g(x)` from central differences of the entries.
fn christoffel_fd(g: &[Expr], p: &[f64]) -> Vec<f64> {
    let n = 4;
    let h = 1e-5;
    let at = |q: &[f64]| DMatrix::from_fn(n, n, |i, j| g[i * n + j].eval(q).unwrap());
    let dg: Vec<DMatrix<f64>> = (0..n)
        .map(|k| {
            let (mut a, mut b) = (p.to_vec(), p.to_vec());
            a[k] += h;
            b[k] -= h;
            (at(&a) - at(&b)) / (2.0 * h)
        })
        .collect();
    let ginv = at(p).try_inverse().unwrap();
    let mut out = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                out[(k * n + i) * n + j] =
                    (0..n).map(|l| 0.5 * ginv[(k, l)] * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)])).sum();
            }
        }
    }
    out
}

#[test]
fn minkowski_hessian() {
    let f = ff("neg(y1^2) + y2^2 + y3^2 + y4^2");
    let g = hessian_metric(&f, &[0.1, 0.2, 0.3, 0.4, 1.0, 2.0, 3.0, 4.0]).unwrap();
    assert_eq!(g, DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 1.0, 1.0, 1.0])));
}

#[test]
fn quartic_hessian_matches_finite_differences() {
    let f = ff("(y1^4 + y2^4 + y3^4 + y4^4)^0.5");
    let p = [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0];
    let g = hessian_metric(&f, &p).unwrap();
    let h = 1e-4;
    let l = |d: &[(usize, f64)]| {
        let mut q = p.to_vec();
        for (k, v) in d {
            q[4 + k] += v;
        }
        f.value(&q).unwrap()
    };
    for i in 0..4 {
        for j in 0..4 {
            let fd = 0.5 * (l(&[(i, h), (j, h)]) - l(&[(i, h), (j, -h)]) - l(&[(i, -h), (j, h)]) + l(&[(i, -h), (j, -h)]))
                / (4.0 * h * h);
            assert!((g[(i, j)] - fd).abs() < 1e-6, "{i}{j}: {} vs {fd}", g[(i, j)]);
        }
    }
    assert!((&g - g.transpose()).amax() <= 1e-12);
}

#[test]
fn vanishing_q_reduces_to_base_metric() {
    let c = chart();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut spec = random_mdr(&mut rng, &c, 1);
    spec.q.clear();
    let f = FinslerFunction::new(c.clone(), finsler_from_mdr(&spec).unwrap()).unwrap();
    let p = random_fiber_point(&mut rng, &c);
    let g = hessian_metric(&f, &p).unwrap();
    assert_eq!(g[(0, 0)], -1.0);
    for i in 0..3 {
        for j in 0..3 {
            assert!((g[(i + 1, j + 1)] - spec.g[i * 3 + j].eval(&p).unwrap()).abs() < 1e-14);
        }
    }
}

#[test]
fn quadratic_lagrangian_gives_christoffel_connection() {
    let c = chart();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..3 {
        let (l, g) = random_quadratic_lagrangian(&mut rng, &c);
        let f = FinslerFunction::new(c.clone(), l).unwrap();
        for _ in 0..10 {
            let p = random_fiber_point(&mut rng, &c);
            let s = semi_spray_and_nconnection(&f, &p).unwrap();
            let gam = christoffel_fd(&g, &p);
            for k in 0..4 {
                for j in 0..4 {
                    let want: f64 = (0..4).map(|m| gam[(k * 4 + j) * 4 + m] * p[4 + m]).sum();
                    assert!((s.n[(k, j)] - want).abs() < 1e-6 * want.abs().max(1.0));
                }
            }
        }
    }
}

#[test]
fn x_independent_has_no_spray() {
    let f = ff("y1^2 + y2^2 + y3^2 + y4^2");
    let s = semi_spray_and_nconnection(&f, &[0.3, 0.1, 0.2, 0.5, 1.0, -1.0, 2.0, 0.5]).unwrap();
    assert!(s.g.iter().all(|v| *v == 0.0));
    assert_eq!(s.n.amax(), 0.0);
}

fn non_quadratic() -> Vec<FinslerFunction> {
    let c = chart();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    vec![
        ff("(y1^4 + (1 + 0.1 * x2^2) * y2^4 + y3^4 + y4^4)^0.5"),
        FinslerFunction::new(c.clone(), finsler_from_mdr(&random_mdr(&mut rng, &c, 1)).unwrap()).unwrap(),
        FinslerFunction::new(c.clone(), finsler_from_mdr(&random_mdr(&mut rng, &c, 2)).unwrap()).unwrap(),
    ]
}

fn scaled(p: &[f64], beta: f64) -> Vec<f64> {
    p.iter().enumerate().map(|(k, v)| if k >= 4 { beta * v } else { *v }).collect()
}

#[test]
fn homogeneity_probes() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let c = chart();
    for f in non_quadratic() {
        for _ in 0..5 {
            let p = random_fiber_point(&mut rng, &c);
            let g = hessian_metric(&f, &p).unwrap();
            let s = semi_spray_and_nconnection(&f, &p).unwrap();
            for beta in [0.5, 2.0, 7.0] {
                let q = scaled(&p, beta);
                // Euler: y . dF/dy = F with F = sqrt|L|, i.e. y . dL/dy = 2 L
                let fiber: Vec<usize> = (4..8).collect();
                let lj = f.l.eval_jet(&q, 1, &fiber).unwrap();
                let euler: f64 = (0..4).map(|i| q[4 + i] * lj.d(&[i])).sum();
                assert!((euler - 2.0 * lj.value()).abs() <= 1e-9 * lj.value().abs().max(1.0) * beta * beta);
                let gb = hessian_metric(&f, &q).unwrap();
                assert!((&gb - &g).amax() <= 1e-9 * g.amax());
                let sb = semi_spray_and_nconnection(&f, &q).unwrap();
                assert!((&sb.n - &s.n * beta).amax() <= 1e-9 * s.n.amax().max(1.0) * beta);
            }
        }
    }
}

#[test]
fn anholonomy_matches_finite_differences() {
    let c = Chart::new(&["x1", "x2"], &["y1", "y2"]).unwrap();
    let p = |s: &str| parse_expr(s, &c).unwrap();
    let n = vec![p("0.3 * x2 * y1 + 0.1 * y2^2"), p("x1^2 * 0.2 - y1 * y2"), p("exp(0.2 * x1) * y2"), p("sin(x1 * y1)")];
    let dm = ExprDMetric::new(c.clone(), vec![p("1"), p("0"), p("0"), p("1")], vec![p("1"), p("0"), p("0"), p("1")], n.clone(), 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let pt = random_point(&mut rng, 4, -1.0, 1.0);
        let fr = nonholonomic_frames(&dm, &pt).unwrap();
        let h = 1e-6;
        for b in 0..2 {
            for i in 0..2 {
                for a in 0..2 {
                    let (mut u, mut d) = (pt.clone(), pt.clone());
                    u[2 + a] += h;
                    d[2 + a] -= h;
                    let fd = (n[b * 2 + i].eval(&u).unwrap() - n[b * 2 + i].eval(&d).unwrap()) / (2.0 * h);
                    assert!((fr.w(2 + b, i, 2 + a) - fd).abs() < 1e-5);
                }
            }
        }
        for a in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(fr.omega(a, i, j), -fr.omega(a, j, i));
                }
            }
        }
    }
}

#[test]
fn sasaki_determinant_and_congruence() {
    let c = chart();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (l, _) = random_quadratic_lagrangian(&mut rng, &c);
    let f = FinslerFunction::new(c.clone(), l).unwrap();
    let lstar = 0.8;
    let dm = FinslerDMetric::new(f, lstar);
    for _ in 0..10 {
        let p = random_fiber_point(&mut rng, &c);
        let m = sasaki_assemble(&dm, &p).unwrap();
        let dj = dm.jets(&p, 0).unwrap();
        let g = dj.g_values();
        let hh = dj.hhat_values();
        let det = g.determinant() * hh.determinant();
        assert!((m.determinant() - det).abs() < 1e-9 * det.abs());
        let nv = dj.n_values();
        let mut e = DMatrix::<f64>::identity(8, 8);
        for a in 0..4 {
            for i in 0..4 {
                e[(4 + a, i)] = nv[(a, i)];
            }
        }
        let mut block = DMatrix::<f64>::zeros(8, 8);
        block.view_mut((0, 0), (4, 4)).copy_from(&g);
        block.view_mut((4, 4), (4, 4)).copy_from(&hh);
        let want = e.transpose() * block * e;
        assert!((&m - &want).amax() < 1e-12 * want.amax());
        assert!((&m - m.transpose()).amax() <= 1e-12);
    }
}

#[test]
fn geodesics_conserve_lagrangian() {
    let c = Chart::new(&["x1", "x2"], &["y1", "y2"]).unwrap();
    let f = FinslerFunction::new(
        c.clone(),
        parse_expr("(1 + 0.2 * x2^2) * y1^2 + 0.1 * x1 * y1 * y2 + (2 + sin(x1)) * y2^2", &c).unwrap(),
    )
    .unwrap();
    let tr = geodesic_integrate(&f, &[0.1, 0.2], &[0.3, -0.2], 10.0, 1e-3, 1000).unwrap();
    let l0 = f.value(&[0.1, 0.2, 0.3, -0.2]).unwrap();
    for s in &tr {
        let p: Vec<f64> = s.x.iter().chain(&s.y).copied().collect();
        assert!((f.value(&p).unwrap() - l0).abs() < 1e-6);
    }
}

#[test]
fn great_circles_close() {
    let c = Chart::new(&["x1", "x2"], &["y1", "y2"]).unwrap();
    let f = FinslerFunction::new(c.clone(), parse_expr("y1^2 + sin(x1)^2 * y2^2", &c).unwrap()).unwrap();
    let x0: [f64; 2] = [1.2, 0.3];
    // unit speed: y1^2 + sin^2(x1) y2^2 = 1
    let y1: f64 = 0.6;
    let y0 = [y1, (1.0 - y1 * y1).sqrt() / x0[0].sin()];
    let period = 2.0 * std::f64::consts::PI;
    let tr = geodesic_integrate(&f, &x0, &y0, period, period / 4000.0, 4000).unwrap();
    let end = tr.last().unwrap();
    assert!((end.x[0] - x0[0]).abs() < 1e-4);
    // the azimuth winds once around the axis
    assert!((end.x[1] - x0[1] - period).abs() < 1e-4, "{}", end.x[1]);
}

#[test]
fn dispersion_is_dual_to_mdr_to_first_order() {
    let c = chart();
    let delta: Vec<Expr> = (0..9).map(|k| Expr::Const(if k % 4 == 0 { 1.0 } else { 0.0 })).collect();
    let y = [0.0, 0.0, 0.0, 0.0, 0.0, 0.8, -0.5, 0.6];
    let err = |t: f64| {
        let mut spec = MdrSpec::new(c.clone(), delta.clone(), 1, 1.0);
        spec.q = vec![(vec![0, 0], Expr::Const(t)), (vec![1, 2], Expr::Const(0.5 * t))];
        let l = finsler_from_mdr(&spec).unwrap();
        let j = l.eval_jet(&y, 1, &[5, 6, 7]).unwrap();
        // covector p = dL/2dy on the spatial slots, read back as the fiber point
        let mut p = y;
        for k in 0..3 {
            p[5 + k] = 0.5 * j.d(&[k]);
        }
        let spatial = l.eval(&y).unwrap();
        (dispersion_omega2(&spec, &p).unwrap() - spatial).abs()
    };
    let (e1, e2) = (err(0.02), err(0.01));
    assert!(e1 < 1e-3);
    let ratio = e1 / e2;
    assert!((3.5..4.5).contains(&ratio), "{ratio}");
}
