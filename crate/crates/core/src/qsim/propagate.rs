//! Strang split-step Fourier propagation in the moving frame.
//!
//! The wavefunction is written `psi(x, t) = rho^{-1/2} exp(i S) chi(y, t)`
//! with `y = (x - alpha) / rho` and
//! `S = (m / hbar) [rho' x^2 / (2 rho) + (alpha' rho - alpha rho') x / rho]`.
//! In these variables the kinetic term carries a factor `1 / rho^2`, the
//! harmonic and linear terms reduce to the Ermakov and Newton residuals, and
//! a spatially uniform term is accumulated separately as a global phase.
//! The grid therefore stays fixed on the packet however far it travels.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::drive::{Drive, Frame, FrameTerms};
use super::grid::Grid;
use crate::error::{Error, Result};
use crate::units::HBAR;

/// Fraction of the shortest dynamical period allowed per step.
pub const CFL_FRACTION: f64 = 0.02;

/// Allowed deviation of the norm from one after propagation.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Wavefunction in the moving frame at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumState {
    pub t: f64,
    pub grid: Grid,
    /// `chi(y)` sampled on `grid`, normalised to `sum |chi|^2 dy = 1`.
    pub psi: Vec<Complex64>,
    pub frame: Frame,
    /// Phase accumulated by the spatially uniform part of the frame
    /// Hamiltonian; the full state is `exp(i global_phase) chi`.
    pub global_phase: f64,
    /// Probability in the outer 5% of the grid on either side.
    pub boundary_probability: f64,
}

impl QuantumState {
    pub fn new(grid: Grid, psi: Vec<Complex64>, frame: Frame) -> Result<Self> {
        if psi.len() != grid.n_points {
            return Err(Error::InvalidInput(format!(
                "state has {} samples, grid has {}",
                psi.len(),
                grid.n_points
            )));
        }
        let mut s = Self {
            t: 0.0,
            grid,
            psi,
            frame,
            global_phase: 0.0,
            boundary_probability: 0.0,
        };
        s.boundary_probability = s.edge_probability();
        Ok(s)
    }

    pub fn norm_sq(&self) -> f64 {
        self.psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    fn edge_probability(&self) -> f64 {
        let n = self.psi.len();
        let w = self.grid.edge_width().min(n / 2);
        let edge: f64 = self.psi[..w]
            .iter()
            .chain(&self.psi[n - w..])
            .map(|c| c.norm_sqr())
            .sum();
        edge * self.grid.dx()
    }

    /// Lab-frame coordinate of each grid point.
    pub fn lab_coords(&self) -> Vec<f64> {
        self.grid
            .coords()
            .into_iter()
            .map(|y| self.frame.alpha + self.frame.rho * y)
            .collect()
    }

    /// Lab-frame probability density `|psi(x)|^2 = |chi(y)|^2 / rho`.
    pub fn lab_density(&self) -> Vec<f64> {
        self.psi
            .iter()
            .map(|c| c.norm_sqr() / self.frame.rho)
            .collect()
    }
}

/// Largest stable time step for `drive` on `grid`.
pub fn step_limit<D: Drive + ?Sized>(drive: &D, grid: &Grid) -> f64 {
    let dx = grid.dx();
    let kinetic = HBAR / (drive.mass() * dx * dx);
    let fastest = drive.max_abs_omega().max(drive.omega0()).max(kinetic);
    CFL_FRACTION * 2.0 * std::f64::consts::PI / fastest
}

/// Smallest number of steps satisfying [`step_limit`].
pub fn min_steps<D: Drive + ?Sized>(drive: &D, grid: &Grid) -> usize {
    (drive.duration() / step_limit(drive, grid)).ceil().max(1.0) as usize
}

pub struct Propagator<'a, D: Drive + ?Sized> {
    drive: &'a D,
    grid: Grid,
    n_steps: usize,
    y: Vec<f64>,
    u: Vec<f64>,
    k_sq: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl<'a, D: Drive + ?Sized> Propagator<'a, D> {
    /// `u` is the non-harmonic part of the potential in frame coordinates.
    pub fn new(drive: &'a D, u: &dyn Fn(f64) -> f64, grid: Grid, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidInput("at least one time step is required".into()));
        }
        let dt = drive.duration() / n_steps as f64;
        let limit = step_limit(drive, &grid);
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::CflViolation { dt, limit });
        }
        let y = grid.coords();
        let u: Vec<f64> = y.iter().map(|&yi| u(yi)).collect();
        let k_sq = grid.wavenumbers().into_iter().map(|k| k * k).collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n_points);
        let inv = planner.plan_fft_inverse(grid.n_points);
        Ok(Self {
            drive,
            grid,
            n_steps,
            y,
            u,
            k_sq,
            fwd,
            inv,
        })
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.drive.duration() / self.n_steps as f64
    }

    /// Propagates all states from `t = 0` over the full protocol.
    pub fn run(&self, initial: Vec<QuantumState>) -> Result<Vec<QuantumState>> {
        self.run_observed(initial, 0, |_| {})
    }

    /// Propagates and calls `observer` with the current states every
    /// `every` steps (never when `every == 0`), including the initial and
    /// final time.
    pub fn run_observed<F>(&self, initial: Vec<QuantumState>, every: usize, mut observer: F) -> Result<Vec<QuantumState>>
    where
        F: FnMut(&[QuantumState]),
    {
        for s in &initial {
            if s.grid != self.grid {
                return Err(Error::InvalidInput("state grid differs from propagator grid".into()));
            }
        }
        let n = self.grid.n_points;
        let dt = self.dt();
        let m = self.drive.mass();
        let mut states = initial;
        if every > 0 {
            observer(&states);
        }

        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fwd.get_inplace_scratch_len()];
        let mut spectra: Vec<Vec<Complex64>> = states.iter().map(|s| s.psi.clone()).collect();
        for spec in &mut spectra {
            self.fwd.process_with_scratch(spec, &mut scratch);
        }

        let mut kinetic = vec![Complex64::new(0.0, 0.0); n];
        let mut potential = vec![Complex64::new(0.0, 0.0); n];
        let inv_n = 1.0 / n as f64;
        let mut global = 0.0;
        for step in 0..self.n_steps {
            let t_mid = (step as f64 + 0.5) * dt;
            let terms = FrameTerms::at(self.drive, t_mid);
            let kin_coeff = -HBAR * terms.inv_rho_sq * dt / (4.0 * m);
            for (kf, &k2) in kinetic.iter_mut().zip(&self.k_sq) {
                *kf = Complex64::from_polar(1.0, kin_coeff * k2);
            }
            for ((pf, &y), &u) in potential.iter_mut().zip(&self.y).zip(&self.u) {
                let v = terms.quad * y * y + terms.lin * y + u * terms.inv_rho_sq;
                *pf = Complex64::from_polar(inv_n, -v * dt / HBAR);
            }
            global -= terms.global * dt / HBAR;

            for spec in &mut spectra {
                for (c, kf) in spec.iter_mut().zip(&kinetic) {
                    *c *= kf;
                }
                self.inv.process_with_scratch(spec, &mut scratch);
                for (c, pf) in spec.iter_mut().zip(&potential) {
                    *c *= pf;
                }
                self.fwd.process_with_scratch(spec, &mut scratch);
                for (c, kf) in spec.iter_mut().zip(&kinetic) {
                    *c *= kf;
                }
            }

            let done = step + 1 == self.n_steps;
            if done || (every > 0 && (step + 1) % every == 0) {
                let t = (step + 1) as f64 * dt;
                let frame = self.drive.frame(t);
                for (s, spec) in states.iter_mut().zip(&spectra) {
                    s.psi.copy_from_slice(spec);
                    self.inv.process_with_scratch(&mut s.psi, &mut scratch);
                    for c in &mut s.psi {
                        *c *= inv_n;
                    }
                    s.t = t;
                    s.frame = frame;
                    s.boundary_probability = s.boundary_probability.max(s.edge_probability());
                }
                for s in &mut states {
                    s.global_phase += global;
                }
                global = 0.0;
                if every > 0 {
                    observer(&states);
                }
            }
        }
        for s in &states {
            let drift = (s.norm_sq() - 1.0).abs();
            if drift > NORM_TOLERANCE {
                return Err(Error::NormDrift(drift));
            }
        }
        Ok(states)
    }
}
