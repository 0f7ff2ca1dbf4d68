use finslerforge_core::exprkit::{parse_expr, Chart};
use finslerforge_core::hl::*;

fn fields(lapse: &str, shift: [&str; 3], g: [&str; 9]) -> HlFields {
    let c = Chart::new(&["t", "x", "y", "z"], &[] as &[&str]).unwrap();
    let p = |s: &str| parse_expr(s, &c).unwrap();
    HlFields::new(c.clone(), p(lapse), shift.map(p), g.map(p), HlConstants::default()).unwrap()
}

const PT: [f64; 4] = [0.3, 0.2, -0.4, 0.5];

#[test]
fn cotton_vanishes_on_conformally_flat_metric() {
    let w = "exp(0.4 * x - 0.3 * y * z + 0.2 * x^2)";
    let f = fields("1", ["0", "0", "0"], [w, "0", "0", "0", w, "0", "0", "0", w]);
    let inv = curvature_invariants_3d(&f, &PT).unwrap();
    assert!(inv.r.abs() > 1e-3);
    assert!(inv.cotton.abs().max() < 1e-10, "{}", inv.cotton);
}

#[test]
fn cotton_is_symmetric_and_nonzero_on_generic_metric() {
    let f = fields(
        "1",
        ["0", "0", "0"],
        ["1 + 0.3 * y^2", "0.2 * z", "0", "0.2 * z", "1 + 0.1 * x * z", "0.1 * x", "0", "0.1 * x", "2 + 0.2 * sin(y)"],
    );
    let inv = curvature_invariants_3d(&f, &PT).unwrap();
    let asym = (inv.cotton - inv.cotton.transpose()).abs().max();
    assert!(inv.cotton.abs().max() > 1e-3);
    assert!(asym < 1e-10, "{asym}");
    // traceless: g_ij C^ij = 0
    assert!(inv.g.component_mul(&inv.cotton).sum().abs() < 1e-10);
}

#[test]
fn round_three_sphere_curvature() {
    // metric a^2 (dchi^2 + sin^2 chi (dth^2 + sin^2 th dph^2))
    let a = 1.6_f64;
    let a2 = format!("{}", a * a);
    let g1 = format!("{a2} * sin(x)^2");
    let g2 = format!("{a2} * sin(x)^2 * sin(y)^2");
    let f = fields("1", ["0", "0", "0"], [&a2, "0", "0", "0", &g1, "0", "0", "0", &g2]);
    let inv = curvature_invariants_3d(&f, &[0.0, 0.9, 1.1, 0.3]).unwrap();
    assert!((inv.r - 6.0 / (a * a)).abs() < 1e-10);
    let expect = inv.g * (2.0 / (a * a));
    assert!((inv.ricci - expect).abs().max() < 1e-10);
    assert!(inv.cotton.abs().max() < 1e-9);
}

#[test]
fn extrinsic_curvature_of_expanding_slice() {
    // g = e^{2t} delta, N = 1, no shift: K_ij = e^{2t} delta, K = 3
    let w = "exp(2 * t)";
    let f = fields("1", ["0", "0", "0"], [w, "0", "0", "0", w, "0", "0", "0", w]);
    let inv = curvature_invariants_3d(&f, &PT).unwrap();
    assert!((inv.k_trace - 3.0).abs() < 1e-12);
    let d = hl_action_density(&f, &PT).unwrap();
    let sg = (3.0 * PT[0]).exp();
    let expect = 2.0 * sg * (3.0 - 9.0);
    assert!((d.kinetic - expect).abs() < 1e-10 * expect.abs());
    // a pure-gauge shift on flat space gives zero extrinsic curvature
    let f = fields("1", ["0.3 * y", "-0.3 * x", "0"], ["1", "0", "0", "0", "1", "0", "0", "0", "1"]);
    let inv = curvature_invariants_3d(&f, &PT).unwrap();
    assert!(inv.k.abs().max() < 1e-14);
}

#[test]
fn scaling_rescales_time_components() {
    let f = fields("1 + t^2", ["0.5", "x", "0.1 * y"], ["2", "0.3", "0", "0.3", "1", "0", "0", "0", "1.5"]);
    for l in [0.5, 2.0, 7.0] {
        let s = adm_assemble_and_scale(&f, &PT, l).unwrap();
        let l4 = l.powi(-4);
        let l2 = l.powi(-2);
        assert!((s.after[(0, 0)] - l4 * s.before[(0, 0)]).abs() < 1e-14);
        for j in 1..4 {
            assert!((s.after[(0, j)] - l2 * s.before[(0, j)]).abs() < 1e-14);
            for k in 1..4 {
                assert_eq!(s.after[(j, k)], s.before[(j, k)]);
            }
        }
    }
}

#[test]
fn gr_limit_formulas() {
    let (k, m, cc, lam) = (1.4_f64, 0.6, 0.8, -0.2);
    let g = gr_limit_constants(k, m, cc, lam).unwrap();
    let root = (cc / (1.0 - 3.0 * lam)).sqrt();
    assert!((g.c - k * k * m / 4.0 * root).abs() < 1e-15);
    assert!((16.0 * std::f64::consts::PI * g.g_newton - k.powi(4) * m / 8.0 * root).abs() < 1e-15);
    assert!((g.lambda_gr - 3.0 * k.powi(4) * m * m * cc * cc / (32.0 * (1.0 - 3.0 * lam))).abs() < 1e-15);
}

#[test]
fn tensor_branch_sign_only_affects_odd_power() {
    let params = MdrParams {
        constants: HlConstants {
            kappa: 1.1,
            mu: 0.9,
            varpi: 1.3,
            eta: 0.2,
            ..HlConstants::default()
        },
        c: Some(1.0),
    };
    let p: f64 = 0.7;
    for (plus, minus) in [
        (MdrBranch::TensorDb(Sign::Plus), MdrBranch::TensorDb(Sign::Minus)),
        (MdrBranch::TensorBeyond(Sign::Plus), MdrBranch::TensorBeyond(Sign::Minus)),
    ] {
        let a = mdr_omega2(plus, &params, p).unwrap();
        let b = mdr_omega2(minus, &params, p).unwrap();
        let k4 = 1.1_f64.powi(4);
        assert!((a - b - 2.0 * k4 * 0.9 / (4.0 * 1.69) * p.powi(5)).abs() < 1e-14);
    }
    let db = mdr_omega2(MdrBranch::TensorDb(Sign::Plus), &params, p).unwrap();
    let bey = mdr_omega2(MdrBranch::TensorBeyond(Sign::Plus), &params, p).unwrap();
    assert!((db - bey - 1.21 * 0.2 / 2.0 * p.powi(6)).abs() < 1e-14);
}
