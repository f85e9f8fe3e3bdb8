mod common;

use proptest::prelude::*;
use sta_core::poly::{solve_ansatz, BoundarySpec, TrajectoryKind};
use sta_core::Error;

fn horner(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, x| acc * s + x)
}

#[test]
fn fifth_order_transport_closed_form() {
    let (d, t_f) = (common::D, 0.2e-6);
    let a = solve_ansatz(&BoundarySpec::rest_to_rest(0.0, d), 5, t_f, TrajectoryKind::Alpha).unwrap();
    for i in 0..=20 {
        let s = i as f64 / 20.0;
        let expect = d * (10.0 * s.powi(3) - 15.0 * s.powi(4) + 6.0 * s.powi(5));
        assert!((a.evaluate(s * t_f, 0).unwrap() - expect).abs() < 1e-12 * d);
    }
}

#[test]
fn seventh_order_rho_with_expansion_velocity() {
    let (gamma, eps, t_f) = (3f64.sqrt(), 2e5, 1.3e-6);
    let spec = BoundarySpec {
        deriv1_f: eps,
        ..BoundarySpec::rest_to_rest(1.0, gamma)
    }
    .with_zero_jerk();
    let rho = solve_ansatz(&spec, 7, t_f, TrajectoryKind::Rho).unwrap();
    let et = eps * t_f;
    let c = [
        1.0,
        0.0,
        0.0,
        0.0,
        5.0 * (-7.0 + 7.0 * gamma - 3.0 * et),
        -3.0 * (-28.0 + 28.0 * gamma - 13.0 * et),
        2.0 * (-35.0 + 35.0 * gamma - 17.0 * et),
        -10.0 * (-2.0 + 2.0 * gamma - et),
    ];
    for i in 0..=20 {
        let s = i as f64 / 20.0;
        assert!((rho.evaluate(s * t_f, 0).unwrap() - horner(&c, s)).abs() < 1e-12);
    }
    assert!((rho.evaluate(t_f, 1).unwrap() - eps).abs() < 1e-9 * eps);
    assert!(rho.evaluate(t_f, 3).unwrap().abs() < 1e-6 / t_f.powi(3));
}

#[test]
fn fifth_order_launch_for_arbitrary_traps() {
    let (d, v0, gamma, eps, t_f) = (common::D, 10.0, 3f64.sqrt(), 2.0, 1e-6);
    let a = solve_ansatz(&BoundarySpec::rest_to_moving(0.0, d, v0), 5, t_f, TrajectoryKind::Alpha).unwrap();
    let rspec = BoundarySpec {
        deriv1_f: eps,
        ..BoundarySpec::rest_to_rest(1.0, gamma)
    };
    let r = solve_ansatz(&rspec, 5, t_f, TrajectoryKind::Rho).unwrap();
    let tv = t_f * v0;
    let te = t_f * eps;
    let ca = [0.0, 0.0, 0.0, 2.0 * (5.0 * d - 2.0 * tv), -15.0 * d + 7.0 * tv, 3.0 * (2.0 * d - tv)];
    let cr = [
        1.0,
        0.0,
        0.0,
        2.0 * (-5.0 + 5.0 * gamma - 2.0 * te),
        15.0 - 15.0 * gamma + 7.0 * te,
        3.0 * (-2.0 + 2.0 * gamma - te),
    ];
    for i in 0..=20 {
        let s = i as f64 / 20.0;
        assert!((a.evaluate(s * t_f, 0).unwrap() - horner(&ca, s)).abs() < 1e-12 * d);
        assert!((r.evaluate(s * t_f, 0).unwrap() - horner(&cr, s)).abs() < 1e-12);
    }
}

#[test]
fn wrong_constraint_count_is_rejected() {
    let spec = BoundarySpec::rest_to_rest(0.0, 1.0).with_zero_jerk();
    assert!(matches!(
        solve_ansatz(&spec, 5, 1.0, TrajectoryKind::Alpha),
        Err(Error::OrderMismatch { .. })
    ));
    assert!(matches!(
        solve_ansatz(&BoundarySpec::rest_to_rest(0.0, 1.0), 6, 1.0, TrajectoryKind::Alpha),
        Err(Error::UnsupportedOrder(6))
    ));
}

proptest! {
    #[test]
    fn boundary_conditions_hold(
        v0 in -1e-3f64..1e-3,
        vf in -1e-3f64..1e-3,
        d0 in -50.0f64..50.0,
        df in -50.0f64..50.0,
        jerk in any::<bool>(),
        t_f in 1e-7f64..1e-5,
    ) {
        let spec = BoundarySpec { deriv1_0: d0, deriv1_f: df, ..BoundarySpec::rest_to_rest(v0, vf) };
        let (spec, order) = if jerk { (spec.with_zero_jerk(), 7) } else { (spec, 5) };
        let p = solve_ansatz(&spec, order, t_f, TrajectoryKind::Alpha).unwrap();
        let scale = v0.abs().max(vf.abs()).max(d0.abs() * t_f).max(df.abs() * t_f).max(1e-300);
        prop_assert!((p.evaluate(0.0, 0).unwrap() - v0).abs() <= 1e-10 * scale);
        prop_assert!((p.evaluate(t_f, 0).unwrap() - vf).abs() <= 1e-10 * scale);
        prop_assert!((p.evaluate(0.0, 1).unwrap() - d0).abs() * t_f <= 1e-10 * scale);
        prop_assert!((p.evaluate(t_f, 1).unwrap() - df).abs() * t_f <= 1e-10 * scale);
        prop_assert!(p.evaluate(0.0, 2).unwrap().abs() * t_f * t_f <= 1e-9 * scale);
        prop_assert!(p.evaluate(t_f, 2).unwrap().abs() * t_f * t_f <= 1e-9 * scale);
        if jerk {
            prop_assert!(p.evaluate(t_f, 3).unwrap().abs() * t_f.powi(3) <= 1e-8 * scale);
        }
    }

    #[test]
    fn derivatives_match_finite_differences(gamma in 1.0f64..4.0, s in 0.1f64..0.9) {
        let t_f = 1e-6;
        let p = solve_ansatz(&BoundarySpec::rest_to_rest(1.0, gamma), 5, t_f, TrajectoryKind::Rho).unwrap();
        let h = 1e-4 * t_f;
        let t = s * t_f;
        for k in 0..3 {
            let fd = common::central_diff(|x| p.evaluate(x, k).unwrap(), t, h);
            let exact = p.evaluate(t, k + 1).unwrap();
            let scale = (gamma - 1.0) / t_f.powi(k as i32 + 1);
            prop_assert!((fd - exact).abs() <= 1e-6 * scale.max(1e-300));
        }
    }

    #[test]
    fn rest_to_rest_coefficients_sum_to_final_value(a in -10.0f64..10.0, b in -10.0f64..10.0) {
        let p = solve_ansatz(&BoundarySpec::rest_to_rest(a, b), 5, 1.0, TrajectoryKind::Rho).unwrap();
        let sum: f64 = p.coefficients.iter().sum();
        prop_assert!((sum - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0));
    }

    #[test]
    fn solving_is_deterministic(gamma in 1.0f64..5.0) {
        let spec = BoundarySpec::rest_to_rest(1.0, gamma);
        let p = solve_ansatz(&spec, 5, 1e-6, TrajectoryKind::Rho).unwrap();
        let q = solve_ansatz(&spec, 5, 1e-6, TrajectoryKind::Rho).unwrap();
        prop_assert_eq!(p, q);
    }
}
