//! Differential launching of the states of a biased double well
//! `U(sigma) = beta sigma^4 + lambda sigma^2 + mu sigma` in an arbitrary trap.
//!
//! Analytic estimates treat each well as a harmonic oscillator of frequency
//! `Omega = 2 sqrt(-lambda / m)`; [`verify_against_simulation`] checks them
//! against propagation of the true eigenstates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{build_controls, ProtocolControls, TrapSpec};
use crate::qsim::{self, Drive, Grid, InitialState, LaunchStatistics};
use crate::units::{oscillator_length, BE9_ION_MASS, HBAR};

/// Bias above this fraction of the two-well bound triggers a warning.
pub const VALIDITY_FRACTION: f64 = 0.1;

/// Half-width of each per-well simulation window in units of `sqrt(hbar / m Omega)`.
pub const WELL_WINDOW_HALF_WIDTH: f64 = 12.0;

/// Samples per potential snapshot.
pub const SNAPSHOT_POINTS: usize = 801;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoubleWellParams {
    /// Quartic coefficient, N/m^3.
    pub beta: f64,
    /// Quadratic coefficient, N/m.
    pub lambda: f64,
    /// Linear bias, N.
    pub mu: f64,
    /// kg
    pub mass: f64,
}

impl DoubleWellParams {
    pub fn fig3() -> Self {
        Self {
            beta: 5.2e-3,
            lambda: -8.7e-12,
            mu: 86.4e-21,
            mass: BE9_ION_MASS,
        }
    }

    pub fn fig4() -> Self {
        Self {
            lambda: -4.7e-12,
            ..Self::fig3()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "fig3" => Some(Self::fig3()),
            "fig4" => Some(Self::fig4()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda < 0.0) {
            return Err(Error::NotDoubleWell(self.lambda));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidInput(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(Error::InvalidInput(format!("mass must be positive, got {}", self.mass)));
        }
        if !self.mu.is_finite() || !self.lambda.is_finite() {
            return Err(Error::InvalidInput("mu and lambda must be finite".into()));
        }
        Ok(())
    }

    pub fn potential(&self, sigma: f64) -> f64 {
        let s2 = sigma * sigma;
        self.beta * s2 * s2 + self.lambda * s2 + self.mu * sigma
    }

    pub fn potential_second_derivative(&self, sigma: f64) -> f64 {
        12.0 * self.beta * sigma * sigma + 2.0 * self.lambda
    }

    /// `(4 sqrt 2 / 3) sqrt(-lambda^3 / beta)`, the scale the bias must stay well below.
    pub fn validity_bound(&self) -> f64 {
        4.0 * 2f64.sqrt() / 3.0 * (-self.lambda.powi(3) / self.beta).sqrt()
    }

    /// `|mu|` relative to [`validity_bound`](Self::validity_bound).
    pub fn validity_ratio(&self) -> f64 {
        self.mu.abs() / self.validity_bound()
    }

    /// `|mu| < hbar sqrt(2 beta / m)` evaluated in SI units exactly as
    /// written. The two sides have different dimensions, so the outcome is
    /// reported but not relied on; the simulation determines localisation.
    pub fn localization_condition_literal(&self) -> bool {
        self.mu.abs() < HBAR * (2.0 * self.beta / self.mass).sqrt()
    }

    /// Barrier height above the deeper well in units of `hbar Omega`.
    pub fn barrier_over_quantum(&self) -> Result<f64> {
        let (plus, minus) = well_minima(self)?;
        let top = self.potential(-self.mu / (2.0 * self.lambda));
        let bottom = self.potential(plus).min(self.potential(minus));
        Ok((top - bottom) / (HBAR * effective_frequency(self)))
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let r = self.validity_ratio();
        if r > VALIDITY_FRACTION {
            w.push(format!(
                "bias |mu| is {r:.3} of the two-well bound; the harmonic-well estimates may be poor"
            ));
        }
        if !self.localization_condition_literal() {
            w.push("literal localisation condition |mu| < hbar sqrt(2 beta / m) fails (dimensionally inhomogeneous)".into());
        }
        w
    }
}

/// Approximate well minima `(sigma_plus, sigma_minus)`.
pub fn well_minima(p: &DoubleWellParams) -> Result<(f64, f64)> {
    p.validate()?;
    let half_sep = (-p.lambda / p.beta).sqrt() / 2f64.sqrt();
    let shift = p.mu / (4.0 * p.lambda);
    Ok((half_sep + shift, -half_sep + shift))
}

/// `2 sqrt(-lambda / m)`.
pub fn effective_frequency(p: &DoubleWellParams) -> f64 {
    2.0 * (-p.lambda / p.mass).sqrt()
}

/// Arbitrary-trap specification of a double-well launch ending with
/// velocity `v0` and expansion velocity `epsilon`.
pub fn launch_trap(p: &DoubleWellParams, gamma: f64, d: f64, v0: f64, epsilon: f64) -> TrapSpec {
    TrapSpec::arbitrary(p.mass, gamma, d)
        .with_launch(v0)
        .with_expansion_velocity(epsilon)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferentialLaunchReport {
    pub v_plus: f64,
    pub v_minus: f64,
    pub delta_v: f64,
    /// `v_plus - v_minus > 2 delta_v`.
    pub separated: bool,
    pub sigma_plus: f64,
    pub sigma_minus: f64,
    /// Well separation in sigma space, metres.
    pub separation_sigma: f64,
    /// Physical separation `gamma (sigma_plus - sigma_minus)` at the final time.
    pub separation_final: f64,
    pub omega_eff: f64,
    pub validity_ratio: f64,
    pub localization_condition_literal: bool,
    pub warnings: Vec<String>,
}

/// Final per-well mean velocities and their common dispersion in the
/// harmonic-well approximation.
pub fn differential_launch(p: &DoubleWellParams, trap: &TrapSpec) -> Result<DifferentialLaunchReport> {
    trap.validate()?;
    let (sp, sm) = well_minima(p)?;
    let omega = effective_frequency(p);
    let (v0, eps, gamma) = (trap.v_f, trap.epsilon, trap.gamma);
    let v_plus = v0 + eps * sp;
    let v_minus = v0 + eps * sm;
    let delta_v = (HBAR / (2.0 * p.mass * omega) * (eps * eps + omega * omega / (gamma * gamma))).sqrt();
    Ok(DifferentialLaunchReport {
        v_plus,
        v_minus,
        delta_v,
        separated: (v_plus - v_minus).abs() > 2.0 * delta_v,
        sigma_plus: sp,
        sigma_minus: sm,
        separation_sigma: sp - sm,
        separation_final: gamma * (sp - sm),
        omega_eff: omega,
        validity_ratio: p.validity_ratio(),
        localization_condition_literal: p.localization_condition_literal(),
        warnings: p.warnings(),
    })
}

/// Total potential `-F x + m omega^2 x^2 / 2 + U((x - alpha)/rho) / rho^2`
/// at time `t`, sampled against `(x - alpha) / d` and shifted so the left
/// well's minimum is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSnapshot {
    pub t: f64,
    pub alpha: f64,
    pub rho: f64,
    /// `(x - alpha) / d`
    pub scaled_x: Vec<f64>,
    pub x: Vec<f64>,
    /// J, left minimum at zero.
    pub potential: Vec<f64>,
    /// Depth of the right minimum above the left one, J.
    pub right_minus_left: f64,
}

impl PotentialSnapshot {
    pub fn left_deeper(&self) -> bool {
        self.right_minus_left > 0.0
    }
}

pub fn potential_snapshot(p: &DoubleWellParams, controls: &ProtocolControls, t: f64) -> Result<PotentialSnapshot> {
    let (sp, sm) = well_minima(p)?;
    let frame = controls.frame(t);
    let w2 = controls.omega_sq(t);
    let force = controls.force(t);
    let d = if controls.trap.d != 0.0 { controls.trap.d } else { 1.0 };
    let reach = 2.0 * sp.abs().max(sm.abs()) * frame.rho;
    let n = SNAPSHOT_POINTS;
    let x: Vec<f64> = (0..n)
        .map(|i| frame.alpha - reach + 2.0 * reach * i as f64 / (n - 1) as f64)
        .collect();
    let barrier_sigma = -p.mu / (2.0 * p.lambda);
    let r2 = frame.rho * frame.rho;
    let v = |x: f64| {
        // measure the linear and quadratic terms from alpha to avoid cancellation
        let dx = x - frame.alpha;
        let lin_quad = -force * dx + 0.5 * p.mass * w2 * (dx * dx + 2.0 * frame.alpha * dx);
        lin_quad + p.potential(dx / frame.rho) / r2
    };
    let raw: Vec<f64> = x.iter().map(|&xi| v(xi)).collect();
    let split = frame.alpha + frame.rho * barrier_sigma;
    let min_on = |left: bool| {
        x.iter()
            .zip(&raw)
            .filter(|(xi, _)| (**xi < split) == left)
            .map(|(_, v)| *v)
            .fold(f64::INFINITY, f64::min)
    };
    let (left, right) = (min_on(true), min_on(false));
    Ok(PotentialSnapshot {
        t,
        alpha: frame.alpha,
        rho: frame.rho,
        scaled_x: x.iter().map(|xi| (xi - frame.alpha) / d).collect(),
        potential: raw.iter().map(|v| v - left).collect(),
        x,
        right_minus_left: right - left,
    })
}

/// Snapshots at `count` uniformly spaced times including both ends.
pub fn potential_snapshots(p: &DoubleWellParams, controls: &ProtocolControls, count: usize) -> Result<Vec<PotentialSnapshot>> {
    let count = count.max(2);
    (0..count)
        .map(|i| potential_snapshot(p, controls, controls.t_f * i as f64 / (count - 1) as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Well {
    Left,
    Right,
}

/// One propagated state of a single well.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellRun {
    pub well: Well,
    /// Level within the well.
    pub level: usize,
    /// Eigenvalue of the full `U` (unshifted), J.
    pub energy: f64,
    pub mean_velocity: f64,
    pub velocity_dispersion: f64,
    pub fidelity: f64,
    pub boundary_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSubstitute {
    pub mean_velocity: f64,
    pub velocity_dispersion: f64,
    pub analytic_dispersion: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleWellComparison {
    pub analytic: DifferentialLaunchReport,
    pub ground_state_well: Well,
    pub first_excited_well: Well,
    /// Ground state of each well: `[left, right]`.
    pub well_ground: [WellRun; 2],
    /// Global ground and first excited states.
    pub global_states: Vec<WellRun>,
    pub rel_dev_v_minus: f64,
    pub rel_dev_v_plus: f64,
    pub rel_dev_delta_v: f64,
    pub separated_numeric: bool,
    pub barrier_over_quantum: f64,
    pub harmonic_substitute: HarmonicSubstitute,
    pub n_steps: usize,
}

/// Numerical settings of the double-well verification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellSettings {
    pub n_points: usize,
    pub step_factor: f64,
    pub half_width: f64,
}

impl Default for WellSettings {
    fn default() -> Self {
        Self {
            n_points: qsim::DEFAULT_POINTS,
            step_factor: qsim::DEFAULT_STEP_FACTOR,
            half_width: WELL_WINDOW_HALF_WIDTH,
        }
    }
}

/// Window grid of one well. The tunnelling amplitude through the barrier
/// is negligible for the parameters of interest, so each well is simulated
/// on its own grid.
pub fn well_grid(p: &DoubleWellParams, well: Well, settings: &WellSettings) -> Result<Grid> {
    let (sp, sm) = well_minima(p)?;
    let center = match well {
        Well::Left => sm,
        Well::Right => sp,
    };
    let a = oscillator_length(p.mass, effective_frequency(p));
    Grid::centered(settings.n_points, center, settings.half_width * a)
}

fn shifted_potential(p: &DoubleWellParams, grid: &Grid) -> (f64, impl Fn(f64) -> f64) {
    let p = *p;
    let c = 0.5 * (grid.x_min + grid.x_max);
    let u0 = p.potential(c);
    (u0, move |s: f64| {
        // expand about the window centre so the constant offset cancels exactly
        let ds = s - c;
        let d2 = ds * ds;
        p.beta * (d2 * d2 + 4.0 * c * d2 * ds + 6.0 * c * c * d2 + 4.0 * c * c * c * ds)
            + p.lambda * (d2 + 2.0 * c * ds)
            + p.mu * ds
    })
}

fn run_well(
    p: &DoubleWellParams,
    controls: &ProtocolControls,
    well: Well,
    levels: &[usize],
    settings: &WellSettings,
) -> Result<(Vec<WellRun>, usize)> {
    let grid = well_grid(p, well, settings)?;
    let (u0, u) = shifted_potential(p, &grid);
    let initial: Vec<InitialState> = levels.iter().map(|&n| InitialState::Eigen(n)).collect();
    let out = qsim::simulate(controls, &u, grid, &initial, settings.step_factor)?;
    let eig = qsim::stationary_eigenstates(&u, p.mass, 0.0, &grid, levels.iter().max().unwrap() + 1)?;
    let runs = out
        .statistics
        .iter()
        .zip(levels)
        .map(|(s, &n)| well_run(s, well, n, eig.energies[n] + u0))
        .collect();
    Ok((runs, out.n_steps))
}

fn well_run(s: &LaunchStatistics, well: Well, level: usize, energy: f64) -> WellRun {
    WellRun {
        well,
        level,
        energy,
        mean_velocity: s.mean_velocity,
        velocity_dispersion: s.velocity_dispersion,
        fidelity: s.fidelity,
        boundary_probability: s.boundary_probability,
    }
}

/// Fidelity convergence of `levels` in one well window: the base run with
/// `settings` against twice the points and twice the steps.
pub fn well_convergence(
    p: &DoubleWellParams,
    controls: &ProtocolControls,
    well: Well,
    levels: &[usize],
    settings: &WellSettings,
) -> Result<(qsim::Verification, qsim::Verification, f64)> {
    let grid = well_grid(p, well, settings)?;
    let (_, u) = shifted_potential(p, &grid);
    let initial: Vec<InitialState> = levels.iter().map(|&n| InitialState::Eigen(n)).collect();
    qsim::convergence_delta(controls, &u, grid, &initial, settings.step_factor)
}

/// Lowest eigenvalues of each well window, unshifted: `(left, right)`.
pub fn well_levels(p: &DoubleWellParams, n_levels: usize, settings: &WellSettings) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut out = [Vec::new(), Vec::new()];
    for (slot, well) in out.iter_mut().zip([Well::Left, Well::Right]) {
        let grid = well_grid(p, well, settings)?;
        let (u0, u) = shifted_potential(p, &grid);
        let e = qsim::stationary_eigenstates(&u, p.mass, 0.0, &grid, n_levels)?;
        *slot = e.energies.iter().map(|x| x + u0).collect();
    }
    let [l, r] = out;
    Ok((l, r))
}

/// Propagates the ground state of each well, the global ground and first
/// excited states, and a harmonic stand-in for the double well, then
/// compares final velocity moments with [`differential_launch`].
pub fn verify_against_simulation(
    p: &DoubleWellParams,
    trap: &TrapSpec,
    t_f: f64,
    n_samples: usize,
    settings: &WellSettings,
) -> Result<DoubleWellComparison> {
    if trap.harmonic {
        return Err(Error::InvalidTrap("double-well launching needs an arbitrary trap".into()));
    }
    let analytic = differential_launch(p, trap)?;
    let controls = build_controls(trap, t_f, n_samples)?;

    // global ordering from merging the per-well spectra
    let (left, right) = well_levels(p, 2, settings)?;
    let mut merged: Vec<(f64, Well, usize)> = left
        .iter()
        .enumerate()
        .map(|(n, &e)| (e, Well::Left, n))
        .chain(right.iter().enumerate().map(|(n, &e)| (e, Well::Right, n)))
        .collect();
    merged.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lowest = &merged[..2];

    let mut levels_left = vec![0];
    let mut levels_right = vec![0];
    for &(_, w, n) in lowest {
        let list = match w {
            Well::Left => &mut levels_left,
            Well::Right => &mut levels_right,
        };
        if !list.contains(&n) {
            list.push(n);
        }
    }
    let (runs_left, n_steps) = run_well(p, &controls, Well::Left, &levels_left, settings)?;
    let (runs_right, _) = run_well(p, &controls, Well::Right, &levels_right, settings)?;
    let find = |w: Well, n: usize| -> WellRun {
        let list = match w {
            Well::Left => &runs_left,
            Well::Right => &runs_right,
        };
        list.iter().find(|r| r.level == n).cloned().expect("level was simulated")
    };
    let well_ground = [find(Well::Left, 0), find(Well::Right, 0)];
    let global_states: Vec<WellRun> = lowest.iter().map(|&(_, w, n)| find(w, n)).collect();

    let harmonic_substitute = harmonic_substitute(p, trap, &controls, settings)?;

    let rel = |num: f64, ana: f64| (num - ana).abs() / ana.abs();
    let [l, r] = &well_ground;
    let dv_num = l.velocity_dispersion.max(r.velocity_dispersion);
    Ok(DoubleWellComparison {
        rel_dev_v_minus: rel(l.mean_velocity, analytic.v_minus),
        rel_dev_v_plus: rel(r.mean_velocity, analytic.v_plus),
        rel_dev_delta_v: rel(l.velocity_dispersion, analytic.delta_v)
            .max(rel(r.velocity_dispersion, analytic.delta_v)),
        separated_numeric: (r.mean_velocity - l.mean_velocity).abs() > 2.0 * dv_num,
        ground_state_well: lowest[0].1,
        first_excited_well: lowest[1].1,
        well_ground,
        global_states,
        barrier_over_quantum: p.barrier_over_quantum()?,
        harmonic_substitute,
        analytic,
        n_steps,
    })
}

/// The same protocol with `U` replaced by a single harmonic well of
/// frequency `Omega`, which must reproduce harmonic launching.
fn harmonic_substitute(
    p: &DoubleWellParams,
    trap: &TrapSpec,
    controls: &ProtocolControls,
    settings: &WellSettings,
) -> Result<HarmonicSubstitute> {
    let omega = effective_frequency(p);
    let a = oscillator_length(p.mass, omega);
    let grid = Grid::centered(settings.n_points, 0.0, settings.half_width * a)?;
    let m = p.mass;
    let u = move |s: f64| 0.5 * m * omega * omega * s * s;
    let out = qsim::simulate(controls, &u, grid, &[InitialState::Eigen(0)], settings.step_factor)?;
    let s = &out.statistics[0];
    Ok(HarmonicSubstitute {
        mean_velocity: s.mean_velocity,
        velocity_dispersion: s.velocity_dispersion,
        analytic_dispersion: qsim::launch_dispersion(0, m, omega, trap.gamma, trap.epsilon),
        fidelity: s.fidelity,
    })
}
