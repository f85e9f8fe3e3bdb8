mod common;

use num_complex::Complex64;
use sta_core::doublewell::{effective_frequency, well_levels, DoubleWellParams, WellSettings};
use sta_core::protocol::{build_controls, ProtocolControls, TrapSpec};
use sta_core::qsim::*;
use sta_core::units::{oscillator_length, BE9_ION_MASS, HBAR};

fn a0() -> f64 {
    oscillator_length(BE9_ION_MASS, common::omega0())
}

fn ground_and_first(c: &ProtocolControls, grid: Grid) -> (Eigenstates, Vec<QuantumState>) {
    let eig = stationary_eigenstates(&|_| 0.0, c.trap.mass, c.trap.omega0, &grid, 2).unwrap();
    let f0 = c.frame(0.0);
    let states = (0..2)
        .map(|n| QuantumState::new(grid, eig.complex_state(n), f0).unwrap())
        .collect();
    (eig, states)
}

#[test]
fn oscillator_levels_on_moderate_grid() {
    let grid = Grid::centered(1024, 0.0, 10.0 * a0()).unwrap();
    let w = common::omega0();
    let e = stationary_eigenstates(&|_| 0.0, BE9_ION_MASS, w, &grid, 6).unwrap();
    for (n, en) in e.energies.iter().enumerate() {
        assert!((en / (HBAR * w * (n as f64 + 0.5)) - 1.0).abs() < 1e-6);
    }
}

#[test]
fn symmetric_double_well_states_have_parity() {
    let m = BE9_ION_MASS;
    let w = common::omega0();
    let a = a0();
    // wells at +-3 a0 with curvature m w^2
    let lambda = -m * w * w / 4.0;
    let beta = -lambda / (2.0 * 9.0 * a * a);
    let u = move |y: f64| beta * y.powi(4) + lambda * y * y;
    let grid = Grid::centered(512, 0.0, 12.0 * a).unwrap();
    let e = stationary_eigenstates(&u, m, 0.0, &grid, 4).unwrap();
    let n = grid.n_points;
    for (k, phi) in e.states.iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let peak = phi.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        for j in 1..n {
            assert!((phi[j] - sign * phi[n - j]).abs() < 1e-8 * peak, "state {k}");
        }
    }
}

#[test]
fn double_well_level_spacing_matches_effective_frequency() {
    let p = DoubleWellParams::fig4();
    let (left, right) = well_levels(&p, 2, &WellSettings::default()).unwrap();
    let quantum = HBAR * effective_frequency(&p);
    for levels in [&left, &right] {
        assert!(((levels[1] - levels[0]) / quantum - 1.0).abs() < 0.05);
    }
    // the bias lowers the left well
    assert!(left[0] < right[0]);
}

#[test]
fn identity_protocol_preserves_state() {
    let trap = TrapSpec::harmonic(BE9_ION_MASS, common::omega0(), 1.0, 0.0);
    let c = build_controls(&trap, 0.3e-6, 1001).unwrap();
    let v = verify_protocol(&c, &[InitialState::Eigen(0), InitialState::Eigen(1)], SimulationSettings::default()).unwrap();
    for s in &v.statistics {
        assert!((s.fidelity - 1.0).abs() < 1e-9);
    }
}

#[test]
fn invariant_and_norm_are_conserved_during_transport() {
    let c = build_controls(&common::dual(), 0.91e-6, 2001).unwrap();
    let grid = default_grid(&c.trap, DEFAULT_POINTS).unwrap();
    let (eig, states) = ground_and_first(&c, grid);
    let w0 = c.trap.omega0;
    let n = (2.0 * min_steps(&c, &grid) as f64) as usize;
    let prop = Propagator::new(&c, &|_| 0.0, grid, n).unwrap();
    let mut worst_inv: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    let out = prop
        .run_observed(states, n / 16, |s| {
            for (k, st) in s.iter().enumerate() {
                let inv = invariant_expectation(st, c.trap.mass, w0, &|_| 0.0);
                worst_inv = worst_inv.max((inv / eig.energies[k] - 1.0).abs());
                worst_norm = worst_norm.max((st.norm_sq() - 1.0).abs());
            }
        })
        .unwrap();
    assert!(worst_inv < 1e-6, "{worst_inv:e}");
    assert!(worst_norm < NORM_TOLERANCE, "{worst_norm:e}");
    assert_eq!(out[0].t, c.t_f);
}

#[test]
fn final_energy_matches_level_formula() {
    let c = build_controls(&common::dual_launch(), 1.216e-6, 2001).unwrap();
    let v = verify_protocol(&c, &[InitialState::Eigen(0), InitialState::Eigen(1)], SimulationSettings::default()).unwrap();
    let t = c.t_f;
    let frame = c.frame(t);
    let x0 = c.trap_center(t).unwrap();
    for (n, s) in v.statistics.iter().enumerate() {
        let expect = harmonic_level_energy(n, c.trap.mass, c.trap.omega0, &frame, c.omega_sq(t), x0);
        assert!((s.energy / expect - 1.0).abs() < 1e-6, "{} vs {}", s.energy, expect);
        assert!(s.fidelity > 0.9999);
    }
}

#[test]
fn phase_routes_agree() {
    let c = build_controls(&common::dual(), 0.91e-6, 2001).unwrap();
    let grid = default_grid(&c.trap, DEFAULT_POINTS).unwrap();
    let v = simulate(&c, &|_| 0.0, grid, &[InitialState::Eigen(0)], DEFAULT_STEP_FACTOR).unwrap();
    let s = &v.statistics[0];
    assert!((s.lr_phase_propagated - s.lr_phase).abs() < 1e-5, "{} vs {}", s.lr_phase_propagated, s.lr_phase);

    let eig = stationary_eigenstates(&|_| 0.0, c.trap.mass, c.trap.omega0, &grid, 1).unwrap();
    let phi = QuantumState::new(grid, eig.complex_state(0), c.frame(0.0)).unwrap();
    let numeric = lewis_riesenfeld_phase_numeric(&c, &phi, &|_| 0.0, c.t_f).unwrap();
    assert!((numeric - s.lr_phase).abs() < 1e-6 * s.lr_phase.abs().max(1.0));
}

#[test]
fn superposition_keeps_relative_phase() {
    let c = build_controls(&common::dual(), 0.91e-6, 2001).unwrap();
    let init = InitialState::Superposition(vec![(0, Complex64::new(1.0, 0.0)), (1, Complex64::new(0.0, 1.0))]);
    let v = verify_protocol(&c, &[init], SimulationSettings::default()).unwrap();
    assert!(v.statistics[0].fidelity > 0.9999);
}

#[test]
fn slow_protocol_is_adiabatic() {
    let c = build_controls(&common::dual(), 50e-6, 2001).unwrap();
    let grid = Grid::centered(128, 0.0, 10.0 * a0()).unwrap();
    let v = simulate(&c, &|_| 0.0, grid, &[InitialState::Eigen(0)], 1.0).unwrap();
    assert!(v.statistics[0].fidelity >= 0.999);
}

#[test]
fn uniform_force_leaves_dispersion_unchanged() {
    let w = common::omega0();
    let m = BE9_ION_MASS;
    let drive = UniformForce {
        mass: m,
        omega0: w,
        force: m * common::V_LAUNCH / 1e-6,
        duration: 1e-6,
    };
    let grid = Grid::centered(512, 0.0, 40.0 * a0()).unwrap();
    let eig = stationary_eigenstates(&|_| 0.0, m, w, &grid, 1).unwrap();
    let s0 = QuantumState::new(grid, eig.complex_state(0), drive.frame(0.0)).unwrap();
    let prop = Propagator::new(&drive, &|_| 0.0, grid, 2 * min_steps(&drive, &grid)).unwrap();
    let out = prop.run(vec![s0]).unwrap();
    let (v, dv) = velocity_moments(&out[0], m);
    assert!((v / common::V_LAUNCH - 1.0).abs() < 1e-9);
    assert!((dv / constant_field_dispersion(0, m, w) - 1.0).abs() < 1e-6);
}

#[test]
fn corrupted_controls_lose_fidelity() {
    let mut c = build_controls(&common::dual(), 0.91e-6, 2001).unwrap();
    let n = c.n_samples();
    for w2 in &mut c.omega_sq[n / 3..2 * n / 3] {
        *w2 = -*w2;
    }
    let grid = default_grid(&c.trap, DEFAULT_POINTS).unwrap();
    let r = simulate(&c, &|_| 0.0, grid, &[InitialState::Eigen(0)], DEFAULT_STEP_FACTOR);
    match r {
        Ok(v) => assert!(v.statistics[0].fidelity < 0.5 || v.statistics[0].boundary_probability > 1e-6),
        Err(e) => panic!("corrupted run should still propagate: {e}"),
    }
}

#[test]
fn cfl_violation_is_reported() {
    let c = build_controls(&common::dual(), 0.91e-6, 1001).unwrap();
    let grid = default_grid(&c.trap, DEFAULT_POINTS).unwrap();
    assert!(matches!(
        Propagator::new(&c, &|_| 0.0, grid, 10),
        Err(sta_core::Error::CflViolation { .. })
    ));
}

#[test]
fn launch_dispersion_follows_final_scaling() {
    let m = BE9_ION_MASS;
    let w0 = common::omega0();
    for gamma in [1.0, 3f64.sqrt(), 10f64.sqrt()] {
        for eps in [0.0, 2.0, 2e5] {
            let trap = TrapSpec::harmonic(m, w0, gamma, common::D)
                .with_launch(common::V_LAUNCH)
                .with_expansion_velocity(eps);
            let c = build_controls(&trap, 1.5e-6, 2001).unwrap();
            let init: Vec<InitialState> = (0..3).map(InitialState::Eigen).collect();
            let grid = Grid::centered(256, 0.0, DEFAULT_HALF_WIDTH * a0()).unwrap();
            let v = simulate(&c, &|_| 0.0, grid, &init, 1.0).unwrap();
            for (n, s) in v.statistics.iter().enumerate() {
                // invariant eigenstate of width rho a0 with chirp rho'
                let expect = ((2 * n + 1) as f64 * HBAR / (2.0 * m * w0) * (eps * eps + w0 * w0 / (gamma * gamma))).sqrt();
                assert!((s.velocity_dispersion / expect - 1.0).abs() < 1e-4, "gamma {gamma} eps {eps} n {n}");
                assert!((s.mean_velocity / common::V_LAUNCH - 1.0).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn lewis_riesenfeld_phase_limits() {
    let w = common::omega0();
    let t_f = 0.4e-6;
    let level = |n: usize| HBAR * w * (n as f64 + 0.5);

    let still = build_controls(&TrapSpec::harmonic(BE9_ION_MASS, w, 1.0, 0.0), t_f, 1001).unwrap();
    for n in 0..3 {
        let phase = lewis_riesenfeld_phase(&still, level(n), t_f).unwrap().total();
        let expect = -w * (n as f64 + 0.5) * t_f;
        assert!((phase / expect - 1.0).abs() < 1e-9, "{phase} vs {expect}");
    }

    let moved = build_controls(&TrapSpec::harmonic(BE9_ION_MASS, w, 1.0, 370e-6), t_f, 1001).unwrap();
    let p0 = lewis_riesenfeld_phase(&moved, level(0), t_f).unwrap().total();
    let p1 = lewis_riesenfeld_phase(&moved, level(1), t_f).unwrap().total();
    // the n-independent frame phase is ~1e8 rad, so rounding sets the floor
    let tol = 8.0 * f64::EPSILON * p0.abs();
    assert!(((p1 - p0) - (-w * t_f)).abs() < tol, "{p0} {p1}");
}
