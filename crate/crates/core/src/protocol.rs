//! Inverse engineering of the physical controls from the auxiliary functions.
//!
//! Given rho(t) and alpha(t), the Ermakov equation fixes the squared trap
//! frequency and the Newton equation fixes either the trap center (harmonic
//! traps) or the homogeneous force (arbitrary traps, where the harmonic and
//! linear terms only act as auxiliary controls).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{cubic_uniform, refined_max, refined_min};
use crate::poly::{solve_ansatz, BoundarySpec, PolynomialTrajectory, TrajectoryKind};

/// Relative golden-section tolerance (in units of `t_f`) for extremum refinement.
const EXTREMUM_REL_TOL: f64 = 1e-6;

/// Default trap-box tolerance relative to the transport distance.
pub const DEFAULT_BOX_TOL_REL: f64 = 1e-9;

/// Minimum grid size accepted by [`check_constraints`].
pub const MIN_CONSTRAINT_SAMPLES: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSpec {
    /// kg
    pub mass: f64,
    /// Initial angular frequency, rad/s. Zero for arbitrary traps.
    pub omega0: f64,
    /// Final value of rho; the final frequency is `omega0 / gamma^2`.
    pub gamma: f64,
    /// Transport distance, m.
    pub d: f64,
    /// Final centroid velocity, m/s.
    #[serde(default)]
    pub v_f: f64,
    /// Final expansion velocity `rho'(t_f)`, 1/s.
    #[serde(default)]
    pub epsilon: f64,
    /// `true`: pure harmonic trap with moving center. `false`: arbitrary
    /// potential with auxiliary harmonic and linear terms.
    #[serde(default = "default_true")]
    pub harmonic: bool,
}

fn default_true() -> bool {
    true
}

impl TrapSpec {
    pub fn harmonic(mass: f64, omega0: f64, gamma: f64, d: f64) -> Self {
        Self {
            mass,
            omega0,
            gamma,
            d,
            v_f: 0.0,
            epsilon: 0.0,
            harmonic: true,
        }
    }

    pub fn arbitrary(mass: f64, gamma: f64, d: f64) -> Self {
        Self {
            omega0: 0.0,
            harmonic: false,
            ..Self::harmonic(mass, 0.0, gamma, d)
        }
    }

    pub fn with_launch(self, v_f: f64) -> Self {
        Self { v_f, ..self }
    }

    pub fn with_expansion_velocity(self, epsilon: f64) -> Self {
        Self { epsilon, ..self }
    }

    /// Final angular frequency `omega0 / gamma^2`.
    pub fn final_omega(&self) -> f64 {
        self.omega0 / (self.gamma * self.gamma)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidTrap(msg));
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return bad(format!("mass = {:e} must be positive", self.mass));
        }
        if !(self.omega0 >= 0.0 && self.omega0.is_finite()) {
            return bad(format!("omega0 = {:e} must be non-negative", self.omega0));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma = {:e} must be positive", self.gamma));
        }
        if !self.d.is_finite() || !self.v_f.is_finite() || !self.epsilon.is_finite() {
            return bad("d, v_f and epsilon must be finite".into());
        }
        if self.harmonic && self.omega0 == 0.0 {
            return bad("harmonic protocols need omega0 > 0".into());
        }
        if !self.harmonic && self.omega0 != 0.0 {
            return bad(format!(
                "arbitrary-trap protocols require omega0 = 0 (got {:e})",
                self.omega0
            ));
        }
        Ok(())
    }
}

/// Squared trap frequency from the Ermakov equation,
/// `omega^2 = omega0^2 / rho^4 - rho'' / rho`.
///
/// For arbitrary traps `omega0 = 0` and this reduces to `-rho'' / rho`. The
/// result may be negative; no square root is taken.
pub fn derive_omega(rho: &PolynomialTrajectory, trap: &TrapSpec, t: f64) -> Result<f64> {
    let r = rho.evaluate(t, 0)?;
    if r <= 0.0 {
        return Err(Error::NonPositiveRho { t, rho: r });
    }
    let r_dd = rho.evaluate(t, 2)?;
    let w0 = if trap.harmonic { trap.omega0 } else { 0.0 };
    Ok(w0 * w0 / r.powi(4) - r_dd / r)
}

/// Trap center from the Newton equation, `x0 = alpha'' / omega^2 + alpha`.
pub fn derive_x0<F>(alpha: &PolynomialTrajectory, omega_sq_at: F, omega0: f64, t: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let w2 = omega_sq_at(t)?;
    if w2.abs() < 1e-12 * omega0 * omega0 || w2 == 0.0 {
        return Err(Error::ZeroFrequency { t });
    }
    Ok(alpha.evaluate(t, 2)? / w2 + alpha.evaluate(t, 0)?)
}

/// Homogeneous force for arbitrary traps, `F = m alpha'' + m omega^2 alpha`.
pub fn derive_force<F>(alpha: &PolynomialTrajectory, omega_sq_at: F, mass: f64, t: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let w2 = omega_sq_at(t)?;
    Ok(mass * (alpha.evaluate(t, 2)? + w2 * alpha.evaluate(t, 0)?))
}

/// Boundary conditions and ansatz orders for the auxiliary functions.
///
/// Harmonic traps: fifth order for rest-to-rest, seventh order with vanishing
/// third derivatives when the final velocity (alpha) or expansion velocity
/// (rho) is nonzero. Arbitrary traps: fifth order with first-derivative
/// boundary data only.
pub fn auxiliary_trajectories(
    trap: &TrapSpec,
    t_f: f64,
) -> Result<(PolynomialTrajectory, PolynomialTrajectory)> {
    let rho_spec = BoundarySpec {
        deriv1_f: trap.epsilon,
        ..BoundarySpec::rest_to_rest(1.0, trap.gamma)
    };
    let alpha_spec = BoundarySpec::rest_to_moving(0.0, trap.d, trap.v_f);

    let (rho_spec, rho_order) = if trap.harmonic && trap.epsilon != 0.0 {
        (rho_spec.with_zero_jerk(), 7)
    } else {
        (rho_spec, 5)
    };
    let (alpha_spec, alpha_order) = if trap.harmonic && trap.v_f != 0.0 {
        (alpha_spec.with_zero_jerk(), 7)
    } else {
        (alpha_spec, 5)
    };

    let rho = solve_ansatz(&rho_spec, rho_order, t_f, TrajectoryKind::Rho)?;
    let alpha = solve_ansatz(&alpha_spec, alpha_order, t_f, TrajectoryKind::Alpha)?;
    Ok((rho, alpha))
}

/// Sampled control signals and the trajectories that generated them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolControls {
    pub trap: TrapSpec,
    pub t_f: f64,
    pub times: Vec<f64>,
    /// (rad/s)^2
    pub omega_sq: Vec<f64>,
    /// Trap center, m (harmonic traps only).
    pub x0: Option<Vec<f64>>,
    /// Homogeneous force, N. For harmonic traps this is `m omega^2 x0`.
    pub force: Vec<f64>,
    pub rho: PolynomialTrajectory,
    pub alpha: PolynomialTrajectory,
}

/// Builds the auxiliary functions for `trap` and samples the controls on a
/// uniform grid of `n_samples` points.
pub fn build_controls(trap: &TrapSpec, t_f: f64, n_samples: usize) -> Result<ProtocolControls> {
    trap.validate()?;
    if !(t_f > 0.0 && t_f.is_finite()) {
        return Err(Error::InvalidInput(format!("t_f = {t_f:e} must be positive")));
    }
    if n_samples < 2 {
        return Err(Error::InvalidInput(format!(
            "n_samples = {n_samples} must be at least 2"
        )));
    }
    let (rho, alpha) = auxiliary_trajectories(trap, t_f)?;
    rho.check_positive()?;

    let times: Vec<f64> = (0..n_samples)
        .map(|i| t_f * i as f64 / (n_samples - 1) as f64)
        .collect();
    let omega_sq = times
        .iter()
        .map(|&t| derive_omega(&rho, trap, t))
        .collect::<Result<Vec<f64>>>()?;

    let (x0, force) = if trap.harmonic {
        let x0 = times
            .iter()
            .zip(&omega_sq)
            .map(|(&t, &w2)| derive_x0(&alpha, |_| Ok(w2), trap.omega0, t))
            .collect::<Result<Vec<f64>>>()?;
        let force = x0
            .iter()
            .zip(&omega_sq)
            .map(|(x, w2)| trap.mass * w2 * x)
            .collect();
        (Some(x0), force)
    } else {
        let force = times
            .iter()
            .zip(&omega_sq)
            .map(|(&t, &w2)| derive_force(&alpha, |_| Ok(w2), trap.mass, t))
            .collect::<Result<Vec<f64>>>()?;
        (None, force)
    };

    Ok(ProtocolControls {
        trap: *trap,
        t_f,
        times,
        omega_sq,
        x0,
        force,
        rho,
        alpha,
    })
}

impl ProtocolControls {
    /// Reassembles controls from stored samples (e.g. read back from disk).
    #[allow(clippy::too_many_arguments)]
    pub fn from_samples(
        trap: TrapSpec,
        t_f: f64,
        omega_sq: Vec<f64>,
        x0: Option<Vec<f64>>,
        force: Vec<f64>,
        rho: PolynomialTrajectory,
        alpha: PolynomialTrajectory,
    ) -> Result<Self> {
        trap.validate()?;
        let n = omega_sq.len();
        if n < 2 || force.len() != n || x0.as_ref().is_some_and(|x| x.len() != n) {
            return Err(Error::InvalidInput(
                "control sample columns must have equal length >= 2".into(),
            ));
        }
        let times = (0..n).map(|i| t_f * i as f64 / (n - 1) as f64).collect();
        Ok(Self {
            trap,
            t_f,
            times,
            omega_sq,
            x0,
            force,
            rho,
            alpha,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.times.len()
    }

    fn spacing(&self) -> f64 {
        self.t_f / (self.n_samples() - 1) as f64
    }

    /// Analytic squared frequency at any `t`.
    pub fn omega_sq_exact(&self, t: f64) -> Result<f64> {
        derive_omega(&self.rho, &self.trap, t)
    }

    /// Analytic trap center (harmonic traps).
    pub fn x0_exact(&self, t: f64) -> Result<f64> {
        derive_x0(&self.alpha, |s| self.omega_sq_exact(s), self.trap.omega0, t)
    }

    /// Squared frequency interpolated from the samples.
    pub fn omega_sq_sampled(&self, t: f64) -> f64 {
        cubic_uniform(&self.omega_sq, 0.0, self.spacing(), t)
    }

    /// Force interpolated from the samples.
    pub fn force_sampled(&self, t: f64) -> f64 {
        cubic_uniform(&self.force, 0.0, self.spacing(), t)
    }

    /// Real frequency where `omega^2 >= 0`, NaN elsewhere.
    pub fn omega_real(&self) -> Vec<f64> {
        self.omega_sq
            .iter()
            .map(|&w2| if w2 >= 0.0 { w2.sqrt() } else { f64::NAN })
            .collect()
    }

    /// `rho'' + omega^2 rho - omega0^2 / rho^3` at sample `i`.
    pub fn ermakov_residual(&self, i: usize) -> f64 {
        let [r, _, r_dd, _] = self.rho.derivatives(self.times[i]);
        let w0 = self.trap.omega0;
        r_dd + self.omega_sq[i] * r - w0 * w0 / r.powi(3)
    }

    /// `alpha'' + omega^2 alpha - F / m` at sample `i`.
    pub fn newton_residual(&self, i: usize) -> f64 {
        let [a, _, a_dd, _] = self.alpha.derivatives(self.times[i]);
        a_dd + self.omega_sq[i] * a - self.force[i] / self.trap.mass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    /// (rad/s)^2
    pub min_omega_sq: f64,
    /// Time of the frequency minimum, s.
    pub t_min_omega_sq: f64,
    /// Trap-center extrema, m (harmonic traps only).
    pub x0_max: Option<f64>,
    pub x0_min: Option<f64>,
    /// `x0_max - x0_min - d`, m.
    pub exceeded_distance: Option<f64>,
    pub real_frequency_ok: bool,
    pub box_ok: bool,
    pub tol_box: f64,
}

impl ConstraintReport {
    pub fn feasible(&self, real_frequency: bool, trap_box: bool) -> bool {
        (!real_frequency || self.real_frequency_ok) && (!trap_box || self.box_ok)
    }
}

/// Default box tolerance for a trap.
pub fn default_tol_box(trap: &TrapSpec) -> f64 {
    DEFAULT_BOX_TOL_REL * trap.d.abs()
}

/// Evaluates the real-frequency and trap-box constraints. Extrema are taken
/// over the samples and refined by golden-section search on the analytic
/// signals.
pub fn check_constraints(controls: &ProtocolControls, tol_box: f64) -> Result<ConstraintReport> {
    if controls.n_samples() < MIN_CONSTRAINT_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "constraint check needs at least {MIN_CONSTRAINT_SAMPLES} samples, got {}",
            controls.n_samples()
        )));
    }
    let times = &controls.times;
    let w2_exact = |t: f64| controls.omega_sq_exact(t).unwrap_or(f64::NAN);
    let (t_min, min_w2) = refined_min(w2_exact, times, &controls.omega_sq, EXTREMUM_REL_TOL);

    let (x0_max, x0_min, exceeded, box_ok) = match &controls.x0 {
        Some(x0) => {
            let x0_exact = |t: f64| controls.x0_exact(t).unwrap_or(f64::NAN);
            let (_, max) = refined_max(x0_exact, times, x0, EXTREMUM_REL_TOL);
            let (_, min) = refined_min(x0_exact, times, x0, EXTREMUM_REL_TOL);
            let d = controls.trap.d;
            let (lo, hi) = if d >= 0.0 { (0.0, d) } else { (d, 0.0) };
            let ok = min >= lo - tol_box && max <= hi + tol_box;
            (Some(max), Some(min), Some(max - min - d.abs()), ok)
        }
        None => (None, None, None, true),
    };

    Ok(ConstraintReport {
        min_omega_sq: min_w2,
        t_min_omega_sq: t_min,
        x0_max,
        x0_min,
        exceeded_distance: exceeded,
        real_frequency_ok: min_w2 > 0.0,
        box_ok,
        tol_box,
    })
}
