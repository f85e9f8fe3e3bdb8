//! One test per acceptance criterion. Each prints a single
//! `criterion N: PASS|FAIL ...` line before asserting.

mod common;

use std::time::Instant;

use sta_core::doublewell::{
    launch_trap, verify_against_simulation, well_convergence, DoubleWellParams, Well, WellSettings,
};
use sta_core::protocol::{build_controls, TrapSpec};
use sta_core::qsim::*;
use sta_core::timing::*;
use sta_core::units::{oscillator_length, BE9_ION_MASS, HBAR};

const US: f64 = 1e-6;

fn verdict(n: u32, ok: bool, detail: String) {
    println!("criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n}: {detail}");
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value / target - 1.0).abs() <= rel
}

fn item(name: &str, value: f64, target: f64, rel: f64) -> (bool, String) {
    let ok = within(value, target, rel);
    (
        ok,
        format!("{name}={:.4}us(target {:.4}, {})", value / US, target / US, if ok { "ok" } else { "off" }),
    )
}

fn collect(items: &[(bool, String)]) -> (bool, String) {
    let ok = items.iter().all(|i| i.0);
    (ok, items.iter().map(|i| i.1.as_str()).collect::<Vec<_>>().join(" "))
}

#[test]
fn criterion_1_transport_expansion_times() {
    let start = Instant::now();
    let e = minimal_time_default(&common::expansion(), Constraint::RealFrequency).unwrap();
    let t = minimal_time_default(&common::transport(), Constraint::Box).unwrap();
    let d = minimal_time_default(&common::dual(), Constraint::Box).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let (ok, detail) = collect(&[
        item("expansion", e, 0.443 * US, 0.01),
        item("transport", t, 0.2 * US, 0.01),
        item("dual", d, 0.91 * US, 0.01),
    ]);
    verdict(1, ok && elapsed < 5.0, format!("{detail} runtime={elapsed:.2}s"));
}

#[test]
fn criterion_2_launch_times() {
    let start = Instant::now();
    let trap = common::dual_launch();
    let (se, st) = SequentialPlan::new(&trap).stage_minimal_times().unwrap();
    let d = minimal_time_default(&trap, Constraint::Both).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let (ok, detail) = collect(&[
        item("expansion", se, 0.443 * US, 0.01),
        item("rigid-launch", st, 2.295 * US, 0.01),
        item("dual-launch", d, 1.216 * US, 0.01),
        item("sequential-sum", se + st, 2.734 * US, 0.01),
    ]);
    verdict(2, ok && elapsed < 5.0, format!("{detail} runtime={elapsed:.2}s"));
}

#[test]
fn criterion_3_exceeded_distance_sweep() {
    let start = Instant::now();
    let trap = common::dual();
    let grid = exceeded_distance_grid(&trap).unwrap();
    let dual = sweep_exceeded_distance(&trap, SweepMode::Dual, &grid).unwrap();
    let seq = sweep_exceeded_distance(&trap, SweepMode::Sequential, &grid).unwrap();

    // a point where neither protocol leaves the box has nothing to compare
    let compared: Vec<(f64, f64)> = seq
        .values
        .iter()
        .zip(&dual.values)
        .map(|(&s, &d)| (s, d))
        .filter(|&(s, d)| s > 0.0 || d > 0.0)
        .collect();
    let losses = compared.iter().filter(|(s, d)| s <= d).count();
    let seq_above = losses == 0 && !compared.is_empty();

    let t_exp = minimal_time_default(&SequentialPlan::new(&trap).expansion, Constraint::RealFrequency).unwrap();
    let ends = sweep_exceeded_distance(&trap, SweepMode::Sequential, &[1.05 * t_exp, 3.0 * t_exp]).unwrap();
    let blow_up = ends.values[0] >= 10.0 * ends.values[1];

    let mean = dual.values.iter().sum::<f64>() / dual.values.len() as f64;
    let (lo, hi) = dual
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let variation = if mean > 0.0 { (hi - lo) / mean } else { 0.0 };
    let stable = variation <= 0.5;
    let elapsed = start.elapsed().as_secs_f64();

    verdict(
        3,
        seq_above && blow_up && stable && elapsed < 10.0,
        format!(
            "seq>dual at {}/{} points ({}) blow-up {:.3e}/{:.3e} ({}) dual variation {:.2} of mean ({}) runtime={elapsed:.2}s",
            compared.len() - losses,
            compared.len(),
            if seq_above { "ok" } else { "off" },
            ends.values[0],
            ends.values[1],
            if blow_up { "ok" } else { "off" },
            variation,
            if stable { "ok" } else { "off" },
        ),
    );
}

fn harmonic_fidelity_case(name: &str, trap: &TrapSpec, t_f: f64) -> (bool, String) {
    let start = Instant::now();
    let c = build_controls(trap, t_f, 4001).unwrap();
    let grid = default_grid(&c.trap, DEFAULT_POINTS).unwrap();
    let init = [InitialState::Eigen(0), InitialState::Eigen(1)];
    let (base, _, delta) = convergence_delta(&c, &|_| 0.0, grid, &init, DEFAULT_STEP_FACTOR).unwrap();
    fidelity_summary(name, &base, delta, start.elapsed().as_secs_f64())
}

fn fidelity_summary(name: &str, v: &Verification, delta: f64, elapsed: f64) -> (bool, String) {
    let worst = v.statistics.iter().map(|s| s.fidelity).fold(1.0, f64::min);
    let ok = worst >= 0.999 && delta < 1e-5 && elapsed < 60.0;
    (
        ok,
        format!("{name}: min fidelity {worst:.8} delta {delta:.1e} {elapsed:.1}s ({})", if ok { "ok" } else { "off" }),
    )
}

#[test]
fn criterion_4_fidelity() {
    let transport = harmonic_fidelity_case("transport", &common::dual(), 0.91 * US);
    let launch = harmonic_fidelity_case("launch", &common::dual_launch(), 1.216 * US);

    let start = Instant::now();
    let p = DoubleWellParams::fig4();
    let trap = launch_trap(&p, 3f64.sqrt(), common::D, common::V_LAUNCH, 2.0);
    let c = build_controls(&trap, 1.0 * US, 4001).unwrap();
    // the two lowest states of the biased double well both sit in the left well
    let (base, _, delta) = well_convergence(&p, &c, Well::Left, &[0, 1], &WellSettings::default()).unwrap();
    let well = fidelity_summary("double-well", &base, delta, start.elapsed().as_secs_f64());

    let (ok, detail) = collect(&[transport, launch, well]);
    verdict(4, ok, detail);
}

/// Dispersion formula as printed alongside the launch protocol.
fn printed_dispersion(m: f64, w0: f64, gamma: f64, eps: f64) -> f64 {
    (HBAR / (2.0 * m * w0) * (gamma * gamma * eps * eps + w0 * w0 / gamma.powi(4))).sqrt()
}

#[test]
fn criterion_5_dispersion() {
    let m = BE9_ION_MASS;
    let w0 = common::omega0();
    let mut worst: f64 = 0.0;
    let mut misses = Vec::new();
    for gamma in [1.0, 3f64.sqrt(), 10f64.sqrt()] {
        for eps in [0.0, 1.0, 2.0] {
            let trap = TrapSpec::harmonic(m, w0, gamma, common::D)
                .with_launch(common::V_LAUNCH)
                .with_expansion_velocity(eps);
            let c = build_controls(&trap, 1.216 * US, 4001).unwrap();
            let v = verify_protocol(&c, &[InitialState::Eigen(0)], SimulationSettings::default()).unwrap();
            let dv = v.statistics[0].velocity_dispersion;
            let rel = (dv / printed_dispersion(m, w0, gamma, eps) - 1.0).abs();
            worst = worst.max(rel);
            if rel > 1e-3 {
                misses.push(format!("(gamma^2={:.0},eps={eps})", gamma * gamma));
            }
        }
    }

    let a0 = oscillator_length(m, w0);
    let field = UniformForce {
        mass: m,
        omega0: w0,
        force: 1e-21,
        duration: 1.0 * US,
    };
    let grid = Grid::centered(DEFAULT_POINTS, 0.0, 60.0 * a0).unwrap();
    let eig = stationary_eigenstates(&|_| 0.0, m, w0, &grid, 1).unwrap();
    let s0 = QuantumState::new(grid, eig.complex_state(0), field.frame(0.0)).unwrap();
    let prop = Propagator::new(&field, &|_| 0.0, grid, 2 * min_steps(&field, &grid)).unwrap();
    let out = prop.run(vec![s0]).unwrap();
    let (_, dv) = velocity_moments(&out[0], m);
    let control_rel = (dv / (HBAR * w0 / (2.0 * m)).sqrt() - 1.0).abs();

    verdict(
        5,
        misses.is_empty() && control_rel < 1e-3,
        format!(
            "launch grid worst rel dev {worst:.3e}, cells beyond 1e-3: [{}]; constant-field rel dev {control_rel:.1e}",
            misses.join(" ")
        ),
    );
}

#[test]
fn criterion_6_double_well_launch() {
    let p = DoubleWellParams::fig4();
    let trap = launch_trap(&p, 3f64.sqrt(), common::D, common::V_LAUNCH, 2.0);
    let r = verify_against_simulation(&p, &trap, 1.0 * US, 4001, &WellSettings::default()).unwrap();
    let ok = r.rel_dev_v_minus < 0.05 && r.rel_dev_v_plus < 0.05 && r.rel_dev_delta_v < 0.05;
    verdict(
        6,
        ok,
        format!(
            "v- dev {:.1e} v+ dev {:.1e} dv dev {:.1e}; separated analytic={} numeric={}",
            r.rel_dev_v_minus, r.rel_dev_v_plus, r.rel_dev_delta_v, r.analytic.separated, r.separated_numeric
        ),
    );
}

#[test]
fn criterion_7_property_suites() {
    let p = DoubleWellParams::fig4();
    let cases = [
        (common::dual(), 0.91 * US),
        (common::dual_launch(), 1.216 * US),
        (launch_trap(&p, 3f64.sqrt(), common::D, common::V_LAUNCH, 2.0), 1.0 * US),
    ];
    let mut residual: f64 = 0.0;
    let mut roundtrip: f64 = 0.0;
    for (trap, t_f) in &cases {
        let c = build_controls(trap, *t_f, 4001).unwrap();
        let w_scale = trap.omega0.powi(2).max(1.0 / (t_f * t_f));
        for i in 0..c.n_samples() {
            residual = residual
                .max(c.ermakov_residual(i).abs() / w_scale)
                .max(c.newton_residual(i).abs() / (w_scale * trap.d));
        }
        let [rho, rho_d, alpha, alpha_d] = common::integrate_forward(&c);
        let v_scale = (trap.d / t_f).max(trap.v_f.abs());
        roundtrip = roundtrip
            .max((rho - trap.gamma).abs() / trap.gamma)
            .max((rho_d - trap.epsilon).abs() * t_f / trap.gamma)
            .max((alpha - trap.d).abs() / trap.d)
            .max((alpha_d - trap.v_f).abs() / v_scale);
    }

    let c = build_controls(&common::dual(), 0.91 * US, 4001).unwrap();
    let grid = default_grid(&c.trap, DEFAULT_POINTS).unwrap();
    let eig = stationary_eigenstates(&|_| 0.0, c.trap.mass, c.trap.omega0, &grid, 2).unwrap();
    let states = (0..2)
        .map(|n| QuantumState::new(grid, eig.complex_state(n), c.frame(0.0)).unwrap())
        .collect();
    let n = 2 * min_steps(&c, &grid);
    let mut inv_dev: f64 = 0.0;
    let mut norm_dev: f64 = 0.0;
    Propagator::new(&c, &|_| 0.0, grid, n)
        .unwrap()
        .run_observed(states, n / 32, |s| {
            for (k, st) in s.iter().enumerate() {
                let i = invariant_expectation(st, c.trap.mass, c.trap.omega0, &|_| 0.0);
                inv_dev = inv_dev.max((i / eig.energies[k] - 1.0).abs());
                norm_dev = norm_dev.max((st.norm_sq() - 1.0).abs());
            }
        })
        .unwrap();

    let mut bound_ok = true;
    for gamma in [1.5, 3f64.sqrt(), 10f64.sqrt(), 4.0] {
        let trap = TrapSpec::harmonic(BE9_ION_MASS, common::omega0(), gamma, 0.0);
        let t = minimal_time_default(&trap, Constraint::RealFrequency).unwrap();
        bound_ok &= analytic_bound(&trap) <= t;
    }

    let ok = residual < 1e-9 && roundtrip < 1e-6 && inv_dev < 1e-6 && norm_dev < 1e-9 && bound_ok;
    verdict(
        7,
        ok,
        format!(
            "residual {residual:.1e} roundtrip {roundtrip:.1e} invariant {inv_dev:.1e} norm {norm_dev:.1e} bound {}",
            if bound_ok { "ok" } else { "off" }
        ),
    );
}

#[test]
fn criterion_8_eigensolver() {
    let m = BE9_ION_MASS;
    let w0 = common::omega0();
    let grid = Grid::centered(2048, 0.0, DEFAULT_HALF_WIDTH * oscillator_length(m, w0)).unwrap();
    let e = stationary_eigenstates(&|_| 0.0, m, w0, &grid, 6).unwrap();
    let worst = e
        .energies
        .iter()
        .enumerate()
        .map(|(n, en)| (en / (HBAR * w0 * (n as f64 + 0.5)) - 1.0).abs())
        .fold(0.0, f64::max);
    verdict(8, worst < 1e-6, format!("worst rel dev over n<=5: {worst:.1e}"));
}
