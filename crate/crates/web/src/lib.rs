//! Browser front end. Each exported function takes plain numbers in
//! laboratory units (MHz, um, us, m/s) and returns a JSON document for the
//! page to plot.

use serde::Serialize;
use sta_core::doublewell::{differential_launch, launch_trap, potential_snapshots, DifferentialLaunchReport, DoubleWellParams};
use sta_core::protocol::{build_controls, check_constraints, default_tol_box, ConstraintReport, TrapSpec};
use sta_core::timing::{exceeded_distance_grid, minimal_time_default, sweep_exceeded_distance, Constraint, SweepMode};
use sta_core::units::{angular_from_mhz, BE9_ION_MASS};
use wasm_bindgen::prelude::*;

const US: f64 = 1e-6;
const UM: f64 = 1e-6;
const PLOT_SAMPLES: usize = 1001;

fn harmonic_trap(f_mhz: f64, gamma: f64, d_um: f64, v_f: f64, epsilon: f64) -> TrapSpec {
    TrapSpec::harmonic(BE9_ION_MASS, angular_from_mhz(f_mhz), gamma, d_um * UM)
        .with_launch(v_f)
        .with_expansion_velocity(epsilon)
}

#[derive(Debug, Serialize)]
pub struct DesignView {
    pub t_us: Vec<f64>,
    /// Instantaneous trap frequency / 2 pi in MHz, negative where omega^2 < 0.
    pub f_mhz_signed: Vec<f64>,
    pub x0_um: Vec<f64>,
    pub alpha_um: Vec<f64>,
    pub rho: Vec<f64>,
    pub report: ConstraintReport,
    pub feasible: bool,
    /// Shortest duration meeting both constraints, if one was found.
    pub t_min_us: Option<f64>,
}

pub fn design_view(f_mhz: f64, gamma: f64, d_um: f64, v_f: f64, epsilon: f64, t_f_us: f64) -> Result<DesignView, String> {
    let trap = harmonic_trap(f_mhz, gamma, d_um, v_f, epsilon);
    let c = build_controls(&trap, t_f_us * US, PLOT_SAMPLES).map_err(|e| e.to_string())?;
    let report = check_constraints(&c, default_tol_box(&trap)).map_err(|e| e.to_string())?;
    let to_mhz = |w2: f64| w2.signum() * w2.abs().sqrt() / (2.0 * std::f64::consts::PI) / 1e6;
    Ok(DesignView {
        t_us: c.times.iter().map(|t| t / US).collect(),
        f_mhz_signed: c.omega_sq.iter().map(|&w2| to_mhz(w2)).collect(),
        x0_um: c.x0.clone().unwrap_or_default().iter().map(|x| x / UM).collect(),
        alpha_um: c.times.iter().map(|&t| c.alpha.derivatives(t)[0] / UM).collect(),
        rho: c.times.iter().map(|&t| c.rho.derivatives(t)[0]).collect(),
        feasible: report.feasible(true, true),
        report,
        t_min_us: minimal_time_default(&trap, Constraint::Both).ok().map(|t| t / US),
    })
}

#[derive(Debug, Serialize)]
pub struct SweepView {
    pub t_f_us: Vec<f64>,
    pub dual: Vec<f64>,
    pub sequential: Vec<f64>,
}

pub fn sweep_view(f_mhz: f64, gamma: f64, d_um: f64) -> Result<SweepView, String> {
    let trap = harmonic_trap(f_mhz, gamma, d_um, 0.0, 0.0);
    let grid = exceeded_distance_grid(&trap).map_err(|e| e.to_string())?;
    let dual = sweep_exceeded_distance(&trap, SweepMode::Dual, &grid).map_err(|e| e.to_string())?;
    let seq = sweep_exceeded_distance(&trap, SweepMode::Sequential, &grid).map_err(|e| e.to_string())?;
    Ok(SweepView {
        t_f_us: grid.iter().map(|t| t / US).collect(),
        dual: dual.values,
        sequential: seq.values,
    })
}

#[derive(Debug, Serialize)]
pub struct SnapshotView {
    pub t_us: f64,
    pub scaled_x: Vec<f64>,
    /// Potential in units of its largest magnitude over the snapshot.
    pub potential: Vec<f64>,
    pub left_deeper: bool,
}

#[derive(Debug, Serialize)]
pub struct DoubleWellView {
    pub launch: DifferentialLaunchReport,
    pub t_us: Vec<f64>,
    pub alpha_over_d: Vec<f64>,
    pub snapshots: Vec<SnapshotView>,
}

pub fn doublewell_view(preset: &str, epsilon: f64, v0: f64, t_f_us: f64, count: usize) -> Result<DoubleWellView, String> {
    let p = DoubleWellParams::preset(preset).ok_or_else(|| format!("unknown preset {preset:?}"))?;
    let d = 370.0 * UM;
    let trap = launch_trap(&p, 3f64.sqrt(), d, v0, epsilon);
    let launch = differential_launch(&p, &trap).map_err(|e| e.to_string())?;
    let c = build_controls(&trap, t_f_us * US, PLOT_SAMPLES).map_err(|e| e.to_string())?;
    let snaps = potential_snapshots(&p, &c, count.clamp(2, 32)).map_err(|e| e.to_string())?;
    Ok(DoubleWellView {
        launch,
        t_us: c.times.iter().map(|t| t / US).collect(),
        alpha_over_d: c.times.iter().map(|&t| c.alpha.derivatives(t)[0] / d).collect(),
        snapshots: snaps
            .into_iter()
            .map(|s| {
                let scale = s.potential.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
                SnapshotView {
                    t_us: s.t / US,
                    left_deeper: s.left_deeper(),
                    potential: s.potential.iter().map(|v| v / scale).collect(),
                    scaled_x: s.scaled_x,
                }
            })
            .collect(),
    })
}

fn to_json<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsError::new(&e))
}

/// Controls and constraint report of a harmonic protocol.
#[wasm_bindgen]
pub fn design(f_mhz: f64, gamma: f64, d_um: f64, v_f: f64, epsilon: f64, t_f_us: f64) -> Result<String, JsError> {
    to_json(design_view(f_mhz, gamma, d_um, v_f, epsilon, t_f_us))
}

/// Exceeded-distance ratio of the dual and sequential protocols.
#[wasm_bindgen]
pub fn sweep(f_mhz: f64, gamma: f64, d_um: f64) -> Result<String, JsError> {
    to_json(sweep_view(f_mhz, gamma, d_um))
}

/// Differential launch report, trajectory and potential snapshots.
#[wasm_bindgen]
pub fn doublewell(preset: &str, epsilon: f64, v0: f64, t_f_us: f64, count: usize) -> Result<String, JsError> {
    to_json(doublewell_view(preset, epsilon, v0, t_f_us, count))
}
