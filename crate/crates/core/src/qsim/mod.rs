//! Time-dependent Schrödinger solver used to verify designed protocols.

mod drive;
mod eigen;
mod grid;
mod observables;
mod propagate;

pub use drive::{Drive, Frame, FrameTerms, UniformForce};
pub use eigen::{stationary_eigenstates, Eigenstates, EDGE_TOLERANCE};
pub use grid::Grid;
pub use observables::{
    constant_field_dispersion, energy, fidelity, harmonic_level_energy, inner, invariant_expectation,
    launch_dispersion, lewis_riesenfeld_phase, lewis_riesenfeld_phase_numeric, position_moments,
    propagated_phase, velocity_moments, wrap_phase, LrPhase,
};
pub use propagate::{min_steps, step_limit, Propagator, QuantumState, CFL_FRACTION, NORM_TOLERANCE};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{ProtocolControls, TrapSpec};
use crate::units::oscillator_length;

/// Half-width of the default harmonic grid in oscillator lengths.
pub const DEFAULT_HALF_WIDTH: f64 = 12.0;
pub const DEFAULT_POINTS: usize = 512;
/// Default number of steps as a multiple of [`min_steps`].
pub const DEFAULT_STEP_FACTOR: f64 = 2.0;

/// Frame-coordinate grid for a harmonic trap. The frame keeps the packet
/// width fixed, so the extent does not depend on `gamma`.
pub fn default_grid(trap: &TrapSpec, n_points: usize) -> Result<Grid> {
    if !trap.harmonic || trap.omega0 <= 0.0 {
        return Err(Error::InvalidTrap(
            "a default grid needs a harmonic trap with omega0 > 0".into(),
        ));
    }
    let a0 = oscillator_length(trap.mass, trap.omega0);
    Grid::centered(n_points, 0.0, DEFAULT_HALF_WIDTH * a0)
}

/// Initial state in terms of the invariant eigenbasis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    Eigen(usize),
    /// `(n, amplitude)` pairs; renormalised on use.
    Superposition(Vec<(usize, Complex64)>),
}

impl InitialState {
    pub fn components(&self) -> Vec<(usize, Complex64)> {
        match self {
            InitialState::Eigen(n) => vec![(*n, Complex64::new(1.0, 0.0))],
            InitialState::Superposition(c) => {
                let norm = c.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt();
                c.iter().map(|&(n, a)| (n, a / norm)).collect()
            }
        }
    }

    pub fn max_level(&self) -> usize {
        self.components().iter().map(|c| c.0).max().unwrap_or(0)
    }

    fn validate(&self) -> Result<()> {
        if let InitialState::Superposition(c) = self {
            let norm: f64 = c.iter().map(|(_, a)| a.norm_sqr()).sum();
            if c.is_empty() || !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::InvalidInput("superposition has no weight".into()));
            }
        }
        Ok(())
    }

    /// `sum_n c_n exp(i phase(n)) phi_n`.
    pub fn assemble(&self, eig: &Eigenstates, phase: impl Fn(usize) -> f64) -> Vec<Complex64> {
        let mut psi = vec![Complex64::new(0.0, 0.0); eig.grid.n_points];
        for (n, c) in self.components() {
            let w = c * Complex64::from_polar(1.0, phase(n));
            for (p, &v) in psi.iter_mut().zip(&eig.states[n]) {
                *p += w * v;
            }
        }
        psi
    }
}

/// Outcome of propagating one initial state through a harmonic protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaunchStatistics {
    pub initial: InitialState,
    pub fidelity: f64,
    pub energy: f64,
    pub mean_velocity: f64,
    pub velocity_dispersion: f64,
    pub mean_position: f64,
    /// Lewis–Riesenfeld phase of the lowest component, from quadrature.
    pub lr_phase: f64,
    /// The same phase read off the propagated state, wrapped to `(-pi, pi]`
    /// relative to `lr_phase`.
    pub lr_phase_propagated: f64,
    pub boundary_probability: f64,
}

/// Checks that a propagated state ends in the frame the trap was designed for.
pub fn check_final_frame(state: &QuantumState, trap: &TrapSpec, t_f: f64) -> Result<()> {
    let f = state.frame;
    let close = |a: f64, b: f64, scale: f64| (a - b).abs() <= 1e-9 * scale.max(b.abs());
    let ok = (state.t - t_f).abs() <= 1e-9 * t_f
        && close(f.rho, trap.gamma, 1.0)
        && close(f.rho_dot, trap.epsilon, 1.0 / t_f)
        && close(f.alpha, trap.d, trap.d.max(1e-6))
        && close(f.alpha_dot, trap.v_f, 1e-3);
    if ok {
        Ok(())
    } else {
        Err(Error::FrameMismatch(format!(
            "state at t = {:e} has rho = {}, rho' = {}, alpha = {:e}, alpha' = {}",
            state.t, f.rho, f.rho_dot, f.alpha, f.alpha_dot
        )))
    }
}

/// Statistics of `state` after `controls` were applied to `initial`.
pub fn launch_statistics(
    state: &QuantumState,
    eig: &Eigenstates,
    initial: &InitialState,
    controls: &ProtocolControls,
    u: &dyn Fn(f64) -> f64,
) -> Result<LaunchStatistics> {
    check_final_frame(state, &controls.trap, controls.t_f)?;
    let phases: Vec<LrPhase> = initial
        .components()
        .iter()
        .map(|&(n, _)| lewis_riesenfeld_phase(controls, eig.energies[n], controls.t_f))
        .collect::<Result<_>>()?;
    let comps = initial.components();
    let target = initial.assemble(eig, |n| {
        let i = comps.iter().position(|c| c.0 == n).unwrap_or(0);
        phases[i].dynamical
    });
    let (lowest, _) = comps
        .iter()
        .enumerate()
        .min_by_key(|(_, c)| c.0)
        .map(|(i, c)| (i, c.0))
        .unwrap_or((0, 0));
    let lr = phases[lowest].total();
    let phi = eig.complex_state(comps[lowest].0);
    let seen = propagated_phase(state, &phi) - comps[lowest].1.arg();
    let m = controls.trap.mass;
    let (v, dv) = velocity_moments(state, m);
    let (x, _) = position_moments(state);
    Ok(LaunchStatistics {
        initial: initial.clone(),
        fidelity: fidelity(state, &target),
        energy: energy(state, controls, u),
        mean_velocity: v,
        velocity_dispersion: dv,
        mean_position: x,
        lr_phase: lr,
        lr_phase_propagated: lr + wrap_phase(seen - lr),
        boundary_probability: state.boundary_probability,
    })
}

/// Numerical settings of a verification run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSettings {
    pub n_points: usize,
    pub step_factor: f64,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        Self {
            n_points: DEFAULT_POINTS,
            step_factor: DEFAULT_STEP_FACTOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub grid: Grid,
    pub n_steps: usize,
    pub statistics: Vec<LaunchStatistics>,
}

/// Propagates each initial state through a harmonic protocol and reports
/// fidelity to the target invariant state and the final observables.
pub fn verify_protocol(
    controls: &ProtocolControls,
    initial: &[InitialState],
    settings: SimulationSettings,
) -> Result<Verification> {
    let grid = default_grid(&controls.trap, settings.n_points)?;
    let zero = |_: f64| 0.0;
    simulate(controls, &zero, grid, initial, settings.step_factor)
}

/// Propagation with an explicit grid and extra potential `u`.
pub fn simulate(
    controls: &ProtocolControls,
    u: &dyn Fn(f64) -> f64,
    grid: Grid,
    initial: &[InitialState],
    step_factor: f64,
) -> Result<Verification> {
    simulate_with_states(controls, u, grid, initial, step_factor).map(|(v, _)| v)
}

/// [`simulate`] that also returns the propagated states.
pub fn simulate_with_states(
    controls: &ProtocolControls,
    u: &dyn Fn(f64) -> f64,
    grid: Grid,
    initial: &[InitialState],
    step_factor: f64,
) -> Result<(Verification, Vec<QuantumState>)> {
    if initial.is_empty() {
        return Err(Error::InvalidInput("no initial state given".into()));
    }
    for s in initial {
        s.validate()?;
    }
    let n_levels = initial.iter().map(|s| s.max_level()).max().unwrap_or(0) + 1;
    let eig = stationary_eigenstates(u, controls.trap.mass, controls.trap.omega0, &grid, n_levels)?;
    let n_steps = ((step_factor * min_steps(controls, &grid) as f64).ceil() as usize).max(1);
    let prop = Propagator::new(controls, u, grid, n_steps)?;
    let frame0 = controls.frame(0.0);
    let states = initial
        .iter()
        .map(|s| QuantumState::new(grid, s.assemble(&eig, |_| 0.0), frame0))
        .collect::<Result<Vec<_>>>()?;
    let out = prop.run(states)?;
    let statistics = out
        .iter()
        .zip(initial)
        .map(|(s, init)| launch_statistics(s, &eig, init, controls, u))
        .collect::<Result<Vec<_>>>()?;
    Ok((
        Verification {
            grid,
            n_steps,
            statistics,
        },
        out,
    ))
}

/// Largest change in fidelity between `settings` and a run with twice the
/// points and twice the steps.
pub fn convergence_delta(
    controls: &ProtocolControls,
    u: &dyn Fn(f64) -> f64,
    grid: Grid,
    initial: &[InitialState],
    step_factor: f64,
) -> Result<(Verification, Verification, f64)> {
    let base = simulate(controls, u, grid, initial, step_factor)?;
    let fine_grid = grid.refined();
    let factor = 2.0 * base.n_steps as f64 / min_steps(controls, &fine_grid) as f64;
    let fine = simulate(controls, u, fine_grid, initial, factor.max(1.0))?;
    let delta = base
        .statistics
        .iter()
        .zip(&fine.statistics)
        .map(|(a, b)| (a.fidelity - b.fidelity).abs())
        .fold(0.0, f64::max);
    Ok((base, fine, delta))
}
