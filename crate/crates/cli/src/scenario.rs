//! Scenario files: JSON, SI units throughout.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sta_core::doublewell::DoubleWellParams;
use sta_core::protocol::{default_tol_box, ProtocolControls, TrapSpec, MIN_CONSTRAINT_SAMPLES};
use sta_core::qsim::{self, Grid};
use sta_core::units::oscillator_length;

use crate::CliError;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: String,
    pub trap: TrapFields,
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub constraints: Constraints,
    #[serde(default)]
    pub simulation: Option<SimulationSection>,
    #[serde(default)]
    pub doublewell: Option<DoubleWellParams>,
}

/// Trap parameters. Whether the trap is harmonic follows from the protocol
/// mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapFields {
    /// kg
    pub mass: f64,
    /// Initial angular frequency, rad/s. Omitted for arbitrary traps.
    #[serde(default)]
    pub omega0: f64,
    pub gamma: f64,
    /// m
    pub d: f64,
    /// m/s
    #[serde(default)]
    pub v_f: f64,
    /// 1/s
    #[serde(default)]
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Transport,
    Launch,
    Arbitrary,
    Doublewell,
}

impl Mode {
    pub fn harmonic(self) -> bool {
        matches!(self, Mode::Transport | Mode::Launch)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub mode: Mode,
    /// s
    #[serde(default)]
    pub t_f: Option<f64>,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
}

fn default_samples() -> usize {
    2001
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constraints {
    #[serde(default = "yes")]
    pub real_frequency: bool,
    #[serde(default = "yes", rename = "box")]
    pub trap_box: bool,
    /// m; defaults to a relative tolerance on `d`.
    #[serde(default)]
    pub tol_box: Option<f64>,
}

fn yes() -> bool {
    true
}

impl Default for Constraints {
    fn default() -> Self {
        Self {
            real_frequency: true,
            trap_box: true,
            tol_box: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default)]
    pub n_points: Option<usize>,
    /// Exact number of time steps; must respect the stability limit.
    #[serde(default)]
    pub n_steps: Option<usize>,
    /// Half-width of the frame grid in oscillator lengths.
    #[serde(default)]
    pub box_half_width: Option<f64>,
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::input(msg)
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| input(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| input(format!("{}: {}", path.display(), e.message)))
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let sc: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            input(format!("{path}: {}", e.into_inner()))
        })?;
        sc.validate()?;
        Ok(sc)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(input(format!(
                "schema_version: expected \"{SCHEMA_VERSION}\", got \"{}\"",
                self.schema_version
            )));
        }
        self.trap()?;
        if let Some(t) = self.protocol.t_f {
            if !(t > 0.0 && t.is_finite()) {
                return Err(input(format!("protocol.t_f: {t:e} must be positive")));
            }
        }
        if self.protocol.n_samples < MIN_CONSTRAINT_SAMPLES {
            return Err(input(format!(
                "protocol.n_samples: {} is below the minimum of {MIN_CONSTRAINT_SAMPLES}",
                self.protocol.n_samples
            )));
        }
        if let Some(tol) = self.constraints.tol_box {
            if !(tol >= 0.0 && tol.is_finite()) {
                return Err(input(format!("constraints.tol_box: {tol:e} must be non-negative")));
            }
        }
        if let Some(sim) = &self.simulation {
            if let Some(n) = sim.n_points {
                if n < 16 || !n.is_power_of_two() {
                    return Err(input(format!("simulation.n_points: {n} must be a power of two >= 16")));
                }
            }
            if sim.n_steps == Some(0) {
                return Err(input("simulation.n_steps: must be positive"));
            }
            if let Some(w) = sim.box_half_width {
                if !(w > 0.0 && w.is_finite()) {
                    return Err(input(format!("simulation.box_half_width: {w} must be positive")));
                }
            }
        }
        if let Some(p) = &self.doublewell {
            p.validate().map_err(|e| input(format!("doublewell: {e}")))?;
        }
        Ok(())
    }

    pub fn trap(&self) -> Result<TrapSpec, CliError> {
        let f = &self.trap;
        let trap = TrapSpec {
            mass: f.mass,
            omega0: f.omega0,
            gamma: f.gamma,
            d: f.d,
            v_f: f.v_f,
            epsilon: f.epsilon,
            harmonic: self.protocol.mode.harmonic(),
        };
        trap.validate().map_err(|e| input(format!("trap: {e}")))?;
        Ok(trap)
    }

    pub fn t_f(&self) -> Result<f64, CliError> {
        self.protocol
            .t_f
            .ok_or_else(|| input("protocol.t_f: required by this command"))
    }

    pub fn tol_box(&self, trap: &TrapSpec) -> f64 {
        self.constraints.tol_box.unwrap_or_else(|| default_tol_box(trap))
    }

    fn sim(&self) -> SimulationSection {
        self.simulation.unwrap_or(SimulationSection {
            n_points: None,
            n_steps: None,
            box_half_width: None,
        })
    }

    pub fn n_points(&self) -> usize {
        self.sim().n_points.unwrap_or(qsim::DEFAULT_POINTS)
    }

    pub fn half_width(&self, default: f64) -> f64 {
        self.sim().box_half_width.unwrap_or(default)
    }

    /// Frame grid for a harmonic protocol.
    pub fn grid(&self, trap: &TrapSpec) -> Result<Grid, CliError> {
        let a0 = oscillator_length(trap.mass, trap.omega0);
        Grid::centered(self.n_points(), 0.0, self.half_width(qsim::DEFAULT_HALF_WIDTH) * a0)
            .map_err(|e| input(format!("simulation: {e}")))
    }

    /// Step factor that reproduces `simulation.n_steps` exactly, or the
    /// default.
    pub fn step_factor(&self, controls: &ProtocolControls, grid: &Grid) -> f64 {
        match self.sim().n_steps {
            Some(n) => (n as f64 - 0.5) / qsim::min_steps(controls, grid) as f64,
            None => qsim::DEFAULT_STEP_FACTOR,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "schema_version": "1",
        "trap": { "mass": 1.5e-26, "omega0": 1.2e7, "gamma": 2.0, "d": 1e-4 },
        "protocol": { "mode": "transport", "t_f": 1e-6 }
    }"#;

    #[test]
    fn minimal_scenario_gets_defaults() {
        let sc = Scenario::parse(BASE).unwrap();
        assert_eq!(sc.protocol.n_samples, 2001);
        assert!(sc.constraints.real_frequency && sc.constraints.trap_box);
        assert!(sc.trap().unwrap().harmonic);
    }

    #[test]
    fn unknown_field_is_named() {
        let text = BASE.replace("\"d\": 1e-4", "\"d\": 1e-4, \"dd\": 1");
        let err = Scenario::parse(&text).unwrap_err();
        assert!(err.message.contains("trap") && err.message.contains("dd"), "{}", err.message);
    }

    #[test]
    fn invalid_gamma_is_named() {
        let err = Scenario::parse(&BASE.replace("2.0", "0.0")).unwrap_err();
        assert!(err.message.contains("gamma"), "{}", err.message);
    }

    #[test]
    fn wrong_type_names_path() {
        let err = Scenario::parse(&BASE.replace("\"transport\"", "\"warp\"")).unwrap_err();
        assert!(err.message.starts_with("protocol.mode"), "{}", err.message);
    }

    #[test]
    fn schema_version_checked() {
        let err = Scenario::parse(&BASE.replace("\"1\"", "\"2\"")).unwrap_err();
        assert!(err.message.contains("schema_version"));
    }
}
