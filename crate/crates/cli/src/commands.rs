use std::path::Path;

use serde::Serialize;
use sta_core::doublewell::{
    differential_launch, effective_frequency, launch_trap, potential_snapshots, verify_against_simulation,
    DifferentialLaunchReport, DoubleWellComparison, DoubleWellParams, WellSettings,
};
use sta_core::protocol::{
    build_controls, check_constraints, ConstraintReport, ProtocolControls, TrapSpec,
};
use sta_core::qsim::{self, InitialState, LaunchStatistics, QuantumState};
use sta_core::timing::{
    exceeded_distance_grid, minimal_time_default, sweep_exceeded_distance, Constraint, MinTimeQuery,
    SequentialPlan, SweepMode, DEFAULT_REL_TOL,
};
use sta_core::units::HBAR;
use sta_core::{Error, PolynomialTrajectory};

use crate::io::{read_controls, sci, sidecar, significant, write_controls, write_csv, write_json};
use crate::scenario::{Mode, Scenario, SCHEMA_VERSION};
use crate::{CliError, EXIT_CONSTRAINT, EXIT_OK, EXIT_VERIFY};

const US: f64 = 1e-6;
const UM: f64 = 1e-6;
/// Number of potential snapshots written by the double-well command.
pub const SNAPSHOT_COUNT: usize = 9;

fn mhz(omega: f64) -> f64 {
    omega / (2.0 * std::f64::consts::PI) / 1e6
}

#[derive(Serialize)]
struct DesignSidecar<'a> {
    schema_version: &'static str,
    mode: Mode,
    trap: TrapSpec,
    t_f: f64,
    n_samples: usize,
    real_frequency_required: bool,
    box_required: bool,
    feasible: bool,
    report: ConstraintReport,
    rho: &'a PolynomialTrajectory,
    alpha: &'a PolynomialTrajectory,
}

pub fn design(scenario: &Path, out: &Path) -> Result<i32, CliError> {
    let sc = Scenario::load(scenario)?;
    let trap = sc.trap()?;
    let t_f = sc.t_f()?;
    let controls = build_controls(&trap, t_f, sc.protocol.n_samples)?;
    let report = check_constraints(&controls, sc.tol_box(&trap))?;
    let feasible = report.feasible(sc.constraints.real_frequency, sc.constraints.trap_box);

    write_controls(out, &controls)?;
    write_json(
        &sidecar(out),
        &DesignSidecar {
            schema_version: SCHEMA_VERSION,
            mode: sc.protocol.mode,
            trap,
            t_f,
            n_samples: controls.n_samples(),
            real_frequency_required: sc.constraints.real_frequency,
            box_required: sc.constraints.trap_box,
            feasible,
            report,
            rho: &controls.rho,
            alpha: &controls.alpha,
        },
    )?;

    println!("t_f = {} us, {} samples", significant(t_f / US, 4), controls.n_samples());
    if report.min_omega_sq >= 0.0 {
        println!("min omega/2pi = {} MHz", significant(mhz(report.min_omega_sq.sqrt()), 4));
    } else {
        println!(
            "omega^2 reaches {:.4e} (rad/s)^2 at t = {} us (imaginary frequency)",
            report.min_omega_sq,
            significant(report.t_min_omega_sq / US, 4)
        );
    }
    if let (Some(lo), Some(hi), Some(xe)) = (report.x0_min, report.x0_max, report.exceeded_distance) {
        println!(
            "trap center in [{}, {}] um, exceeded distance {} um",
            significant(lo / UM, 4),
            significant(hi / UM, 4),
            significant(xe / UM, 4)
        );
    }
    println!("feasible: {}", if feasible { "yes" } else { "no" });
    Ok(if feasible { EXIT_OK } else { EXIT_CONSTRAINT })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    Dual,
    Sequential,
}

#[derive(Serialize)]
struct MinTimeOutput {
    protocol: ProtocolKind,
    constraint: Option<Constraint>,
    t_min_s: f64,
    t_min_us: f64,
    /// Stage times `(expansion, transport)` of a sequential protocol.
    stages_s: Option<(f64, f64)>,
    bracket_s: Option<(f64, f64)>,
    rel_tol: f64,
    /// No constraint binds above the bracket floor.
    unconstrained: bool,
}

pub fn mintime(scenario: &Path, constraint: Constraint, protocol: ProtocolKind, json: bool) -> Result<i32, CliError> {
    let sc = Scenario::load(scenario)?;
    let trap = sc.trap()?;
    let infeasible = |e: &Error| -> Option<i32> {
        match e {
            Error::InvalidBracket { hi_feasible: false, .. } => {
                eprintln!("no feasible duration inside the search bracket: {e}");
                Some(EXIT_CONSTRAINT)
            }
            _ => None,
        }
    };
    let output = match protocol {
        ProtocolKind::Dual => {
            let bracket = MinTimeQuery::new(trap, constraint).bracket;
            let (t, unconstrained) = match minimal_time_default(&trap, constraint) {
                Ok(t) => (t, false),
                Err(Error::InvalidBracket { lo_feasible: true, .. }) => (0.0, true),
                Err(e) => return infeasible(&e).ok_or_else(|| e.into()),
            };
            MinTimeOutput {
                protocol,
                constraint: Some(constraint),
                t_min_s: t,
                t_min_us: t / US,
                stages_s: None,
                bracket_s: Some(bracket),
                rel_tol: DEFAULT_REL_TOL,
                unconstrained,
            }
        }
        ProtocolKind::Sequential => {
            let (te, tt) = match SequentialPlan::new(&trap).stage_minimal_times() {
                Ok(v) => v,
                Err(e) => return infeasible(&e).ok_or_else(|| e.into()),
            };
            MinTimeOutput {
                protocol,
                constraint: None,
                t_min_s: te + tt,
                t_min_us: (te + tt) / US,
                stages_s: Some((te, tt)),
                bracket_s: None,
                rel_tol: DEFAULT_REL_TOL,
                unconstrained: te + tt == 0.0,
            }
        }
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&output).map_err(|e| CliError::input(e.to_string()))?);
    } else {
        if let Some((te, tt)) = output.stages_s {
            println!(
                "expansion stage {} us (real frequency), transport stage {} us (box)",
                significant(te / US, 4),
                significant(tt / US, 4)
            );
        }
        println!("minimal time: {} us", significant(output.t_min_us, 4));
    }
    Ok(EXIT_OK)
}

fn parse_states(spec: &str) -> Result<Vec<InitialState>, CliError> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map(InitialState::Eigen)
                .map_err(|_| CliError::input(format!("--state: {s:?} is not a level index")))
        })
        .collect()
}

/// Controls from a CSV written by `design`. The polynomial frame is rebuilt
/// from the scenario and checked against the stored columns.
fn controls_from_csv(path: &Path, trap: &TrapSpec, t_f: f64) -> Result<ProtocolControls, CliError> {
    let cols = read_controls(path)?;
    let err = |msg: String| CliError::input(format!("{}: {msg}", path.display()));
    let n = cols.t.len();
    if n < 2 {
        return Err(err("needs at least two rows".into()));
    }
    let last = cols.t[n - 1];
    if (last - t_f).abs() > 1e-9 * t_f {
        return Err(err(format!("final time {last:e} s differs from protocol.t_f {t_f:e} s")));
    }
    for (i, &t) in cols.t.iter().enumerate() {
        let expect = t_f * i as f64 / (n - 1) as f64;
        if (t - expect).abs() > 1e-9 * t_f {
            return Err(err(format!("row {}: times must be uniformly spaced", i + 2)));
        }
    }
    let reference = build_controls(trap, t_f, 2)?;
    let d_scale = trap.d.abs().max(trap.v_f.abs() * t_f).max(1e-9);
    for (i, &t) in cols.t.iter().enumerate() {
        let rho = reference.rho.derivatives(t)[0];
        let alpha = reference.alpha.derivatives(t)[0];
        if (cols.rho[i] - rho).abs() > 1e-9 * rho || (cols.alpha[i] - alpha).abs() > 1e-9 * d_scale {
            return Err(err(format!("row {}: rho/alpha do not match the scenario trajectories", i + 2)));
        }
    }
    let x0 = trap.harmonic.then_some(cols.x0);
    Ok(ProtocolControls::from_samples(
        *trap,
        t_f,
        cols.omega_sq,
        x0,
        cols.force,
        reference.rho,
        reference.alpha,
    )?)
}

#[derive(Serialize)]
struct VerifyOutput {
    schema_version: &'static str,
    t_f: f64,
    n_points: usize,
    half_width_m: f64,
    n_steps: usize,
    threshold: f64,
    max_boundary_probability: f64,
    passed: bool,
    statistics: Vec<LaunchStatistics>,
}

pub struct VerifyArgs<'a> {
    pub scenario: &'a Path,
    pub state: &'a str,
    pub controls: Option<&'a Path>,
    pub out: Option<&'a Path>,
    pub snapshots: Option<&'a Path>,
    pub threshold: f64,
    pub max_boundary: f64,
}

pub fn verify(args: VerifyArgs) -> Result<i32, CliError> {
    let sc = Scenario::load(args.scenario)?;
    if !sc.protocol.mode.harmonic() {
        return Err(CliError::input(
            "protocol.mode: verify handles transport and launch protocols; use the doublewell command",
        ));
    }
    let initial = parse_states(args.state)?;
    let trap = sc.trap()?;
    let t_f = sc.t_f()?;
    let controls = match args.controls {
        Some(p) => controls_from_csv(p, &trap, t_f)?,
        None => build_controls(&trap, t_f, sc.protocol.n_samples)?,
    };
    let grid = sc.grid(&trap)?;
    let factor = sc.step_factor(&controls, &grid);
    let zero = |_: f64| 0.0;
    let (v, states) = qsim::simulate_with_states(&controls, &zero, grid, &initial, factor)?;

    let passed = v
        .statistics
        .iter()
        .all(|s| s.fidelity >= args.threshold && s.boundary_probability <= args.max_boundary);
    let quantum = HBAR * trap.omega0;
    for s in &v.statistics {
        println!(
            "{:?}: fidelity {:.10}, <v> = {} m/s, dv = {} m/s, E = {} hbar omega0, edge probability {:.1e}",
            s.initial,
            s.fidelity,
            significant(s.mean_velocity, 6),
            significant(s.velocity_dispersion, 6),
            significant(s.energy / quantum, 6),
            s.boundary_probability
        );
    }
    println!("{} steps on {} points; verification {}", v.n_steps, grid.n_points, if passed { "passed" } else { "FAILED" });

    if let Some(out) = args.out {
        write_json(
            out,
            &VerifyOutput {
                schema_version: SCHEMA_VERSION,
                t_f,
                n_points: grid.n_points,
                half_width_m: 0.5 * (grid.x_max - grid.x_min),
                n_steps: v.n_steps,
                threshold: args.threshold,
                max_boundary_probability: args.max_boundary,
                passed,
                statistics: v.statistics,
            },
        )?;
    }
    if let Some(path) = args.snapshots {
        write_snapshots(path, &states)?;
    }
    Ok(if passed { EXIT_OK } else { EXIT_VERIFY })
}

fn write_snapshots(path: &Path, states: &[QuantumState]) -> Result<(), CliError> {
    let rows = states.iter().enumerate().flat_map(|(k, s)| {
        let x = s.lab_coords();
        let rho = s.lab_density();
        let y = s.grid.coords();
        (0..s.psi.len())
            .map(|i| {
                vec![
                    k.to_string(),
                    sci(x[i]),
                    sci(y[i]),
                    sci(rho[i]),
                    sci(s.psi[i].re),
                    sci(s.psi[i].im),
                ]
            })
            .collect::<Vec<_>>()
    });
    write_csv(path, &["state", "x_m", "y_m", "density_per_m", "re_chi", "im_chi"], rows)
}

pub fn sweep(scenario: &Path, mode: SweepMode, out: &Path) -> Result<i32, CliError> {
    let sc = Scenario::load(scenario)?;
    let trap = sc.trap()?;
    let grid = exceeded_distance_grid(&trap)?;
    let result = sweep_exceeded_distance(&trap, mode, &grid)?;
    write_csv(
        out,
        &["t_f_us", "xe_over_d"],
        result.t_f.iter().zip(&result.values).map(|(t, v)| vec![sci(t / US), sci(*v)]),
    )?;
    let (i_max, max) = result
        .values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let inside = result.values.iter().filter(|&&v| v == 0.0).count();
    println!(
        "{} points from {} to {} us; max x_e/d = {} at {} us; {} points stay inside the box",
        result.t_f.len(),
        significant(result.t_f[0] / US, 4),
        significant(result.t_f[result.t_f.len() - 1] / US, 4),
        significant(max, 4),
        significant(result.t_f[i_max] / US, 4),
        inside
    );
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SnapshotInfo {
    index: usize,
    t_s: f64,
    alpha_m: f64,
    rho: f64,
    left_deeper: bool,
    right_minus_left_j: f64,
}

#[derive(Serialize)]
struct DoubleWellOutput {
    schema_version: &'static str,
    preset: Option<String>,
    params: DoubleWellParams,
    trap: TrapSpec,
    t_f: f64,
    omega_eff: f64,
    launch: DifferentialLaunchReport,
    snapshots: Vec<SnapshotInfo>,
    comparison: Option<DoubleWellComparison>,
}

pub struct DoubleWellArgs<'a> {
    pub scenario: &'a Path,
    pub preset: Option<&'a str>,
    pub out: &'a Path,
    pub simulate: bool,
    pub tolerance: f64,
}

pub fn doublewell(args: DoubleWellArgs) -> Result<i32, CliError> {
    let sc = Scenario::load(args.scenario)?;
    if sc.protocol.mode.harmonic() {
        return Err(CliError::input("protocol.mode: the doublewell command needs mode doublewell or arbitrary"));
    }
    let p = match args.preset {
        Some(name) => DoubleWellParams::preset(name)
            .ok_or_else(|| CliError::input(format!("--preset: unknown preset {name:?}")))?,
        None => sc
            .doublewell
            .ok_or_else(|| CliError::input("doublewell: section missing and no --preset given"))?,
    };
    p.validate()?;
    let f = sc.trap;
    if (f.mass / p.mass - 1.0).abs() > 1e-9 {
        return Err(CliError::input(format!(
            "trap.mass: {:e} kg differs from the double-well mass {:e} kg",
            f.mass, p.mass
        )));
    }
    let trap = launch_trap(&p, f.gamma, f.d, f.v_f, f.epsilon);
    trap.validate().map_err(|e| CliError::input(format!("trap: {e}")))?;
    let t_f = sc.t_f()?;
    let launch = differential_launch(&p, &trap)?;
    let controls = build_controls(&trap, t_f, sc.protocol.n_samples)?;

    std::fs::create_dir_all(args.out).map_err(|e| CliError::input(format!("{}: {e}", args.out.display())))?;
    let d = trap.d;
    write_csv(
        &args.out.join("alpha.csv"),
        &["t_s", "alpha_m", "alpha_over_d", "rho", "omega_sq", "F_N"],
        controls.times.iter().enumerate().map(|(i, &t)| {
            let a = controls.alpha.derivatives(t)[0];
            vec![
                sci(t),
                sci(a),
                sci(if d != 0.0 { a / d } else { f64::NAN }),
                sci(controls.rho.derivatives(t)[0]),
                sci(controls.omega_sq[i]),
                sci(controls.force[i]),
            ]
        }),
    )?;

    let snaps = potential_snapshots(&p, &controls, SNAPSHOT_COUNT)?;
    let mut info = Vec::with_capacity(snaps.len());
    for (k, s) in snaps.iter().enumerate() {
        write_csv(
            &args.out.join(format!("snapshot_{k}.csv")),
            &["scaled_x", "x_m", "potential_J"],
            (0..s.x.len()).map(|i| vec![sci(s.scaled_x[i]), sci(s.x[i]), sci(s.potential[i])]),
        )?;
        info.push(SnapshotInfo {
            index: k,
            t_s: s.t,
            alpha_m: s.alpha,
            rho: s.rho,
            left_deeper: s.left_deeper(),
            right_minus_left_j: s.right_minus_left,
        });
    }

    let comparison = if args.simulate {
        let settings = WellSettings {
            n_points: sc.n_points(),
            half_width: sc.half_width(sta_core::doublewell::WELL_WINDOW_HALF_WIDTH),
            ..WellSettings::default()
        };
        Some(verify_against_simulation(&p, &trap, t_f, sc.protocol.n_samples, &settings)?)
    } else {
        None
    };

    println!(
        "<v+> = {} m/s, <v-> = {} m/s, dv = {} m/s, separated: {}",
        significant(launch.v_plus, 8),
        significant(launch.v_minus, 8),
        significant(launch.delta_v, 6),
        if launch.separated { "yes" } else { "no" }
    );
    for w in &launch.warnings {
        println!("warning: {w}");
    }
    let mut code = EXIT_OK;
    if let Some(c) = &comparison {
        println!(
            "simulation: <v-> rel dev {:.2e}, <v+> rel dev {:.2e}, dv rel dev {:.2e}, separated: {}",
            c.rel_dev_v_minus,
            c.rel_dev_v_plus,
            c.rel_dev_delta_v,
            if c.separated_numeric { "yes" } else { "no" }
        );
        let worst = c.rel_dev_v_minus.max(c.rel_dev_v_plus).max(c.rel_dev_delta_v);
        if !(worst <= args.tolerance) {
            code = EXIT_VERIFY;
        }
    }

    write_json(
        &args.out.join("report.json"),
        &DoubleWellOutput {
            schema_version: SCHEMA_VERSION,
            preset: args.preset.map(str::to_owned),
            params: p,
            trap,
            t_f,
            omega_eff: effective_frequency(&p),
            launch,
            snapshots: info,
            comparison,
        },
    )?;
    Ok(code)
}
