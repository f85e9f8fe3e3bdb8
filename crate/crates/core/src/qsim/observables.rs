use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::drive::{Drive, FrameTerms};
use super::propagate::QuantumState;
use crate::error::Result;
use crate::numeric::adaptive_simpson;
use crate::units::HBAR;

const PHASE_REL_TOL: f64 = 1e-10;

pub fn inner(a: &[Complex64], b: &[Complex64], dx: f64) -> Complex64 {
    a.iter().zip(b).map(|(p, q)| p.conj() * q).sum::<Complex64>() * dx
}

/// `|<target|state>|^2` in the frame of `state`.
pub fn fidelity(state: &QuantumState, target: &[Complex64]) -> f64 {
    inner(target, &state.psi, state.grid.dx()).norm_sqr()
}

/// `-i hbar d/dy` applied spectrally.
fn momentum(psi: &[Complex64], state: &QuantumState) -> Vec<Complex64> {
    let n = psi.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf = psi.to_vec();
    planner.plan_fft_forward(n).process(&mut buf);
    for (c, k) in buf.iter_mut().zip(state.grid.wavenumbers()) {
        *c *= HBAR * k / n as f64;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf
}

fn expect_real(state: &QuantumState, f: impl Fn(f64) -> f64) -> f64 {
    state
        .psi
        .iter()
        .zip(state.grid.coords())
        .map(|(c, y)| c.norm_sqr() * f(y))
        .sum::<f64>()
        * state.grid.dx()
}

/// Mean and standard deviation of the lab position `alpha + rho y`.
pub fn position_moments(state: &QuantumState) -> (f64, f64) {
    let f = state.frame;
    let y1 = expect_real(state, |y| y);
    let y2 = expect_real(state, |y| y * y);
    (f.alpha + f.rho * y1, f.rho * (y2 - y1 * y1).max(0.0).sqrt())
}

/// `v chi` with `v = alpha' + rho' y + p_y / (m rho)`, the lab velocity
/// operator expressed in frame variables.
fn velocity_applied(state: &QuantumState, mass: f64) -> Vec<Complex64> {
    let f = state.frame;
    let p = momentum(&state.psi, state);
    state
        .psi
        .iter()
        .zip(p)
        .zip(state.grid.coords())
        .map(|((c, pc), y)| c * (f.alpha_dot + f.rho_dot * y) + pc / (mass * f.rho))
        .collect()
}

/// Mean and dispersion of the lab velocity.
pub fn velocity_moments(state: &QuantumState, mass: f64) -> (f64, f64) {
    let vpsi = velocity_applied(state, mass);
    let dx = state.grid.dx();
    let mean = inner(&state.psi, &vpsi, dx).re;
    // centred second moment; <v^2> - <v>^2 cancels badly for a fast packet
    let var = vpsi
        .iter()
        .zip(&state.psi)
        .map(|(v, c)| (v - c * mean).norm_sqr())
        .sum::<f64>()
        * dx;
    (mean, var.sqrt())
}

/// Kinetic energy `<p_y^2> / 2m` in the frame.
fn frame_kinetic(state: &QuantumState, mass: f64) -> f64 {
    let p = momentum(&state.psi, state);
    p.iter().map(|c| c.norm_sqr()).sum::<f64>() * state.grid.dx() / (2.0 * mass)
}

/// Lab-frame energy at the state's time.
///
/// For a displaced harmonic trap the potential is measured from the trap
/// bottom, `m omega^2 (x - x0)^2 / 2`; otherwise `-F x + m omega^2 x^2 / 2 +
/// U(y) / rho^2` is used as is.
pub fn energy<D: Drive + ?Sized>(state: &QuantumState, drive: &D, u: &dyn Fn(f64) -> f64) -> f64 {
    let m = drive.mass();
    let t = state.t;
    let f = state.frame;
    let (v_mean, v_sd) = velocity_moments(state, m);
    let kinetic = 0.5 * m * (v_mean * v_mean + v_sd * v_sd);
    let w2 = drive.omega_sq(t);
    let y1 = expect_real(state, |y| y);
    let y2 = expect_real(state, |y| y * y);
    let extra = expect_real(state, u) / (f.rho * f.rho);
    let potential = match drive.trap_center(t) {
        Some(x0) => {
            let s = f.alpha - x0;
            0.5 * m * w2 * (s * s + 2.0 * s * f.rho * y1 + f.rho * f.rho * y2)
        }
        None => {
            let x1 = f.alpha + f.rho * y1;
            let x2 = f.alpha * f.alpha + 2.0 * f.alpha * f.rho * y1 + f.rho * f.rho * y2;
            -drive.force(t) * x1 + 0.5 * m * w2 * x2
        }
    };
    kinetic + potential + extra
}

/// Expectation of the invariant `p_y^2/2m + m omega0^2 y^2 / 2 + U(y)`.
pub fn invariant_expectation(state: &QuantumState, mass: f64, omega0: f64, u: &dyn Fn(f64) -> f64) -> f64 {
    frame_kinetic(state, mass)
        + expect_real(state, |y| 0.5 * mass * omega0 * omega0 * y * y + u(y))
}

/// Energy of the `n`-th invariant eigenstate of a harmonic protocol at a
/// time where the frame is `frame`, the trap frequency squared `omega_sq`
/// and the trap centre `x0`.
pub fn harmonic_level_energy(
    n: usize,
    mass: f64,
    omega0: f64,
    frame: &super::drive::Frame,
    omega_sq: f64,
    x0: f64,
) -> f64 {
    let level = (2 * n + 1) as f64 * HBAR / (4.0 * omega0);
    let r = frame.rho;
    level * (frame.rho_dot.powi(2) + omega_sq * r * r + omega0 * omega0 / (r * r))
        + 0.5 * mass * frame.alpha_dot.powi(2)
        + 0.5 * mass * omega_sq * (frame.alpha - x0).powi(2)
}

/// Velocity dispersion of the `n`-th state after a harmonic protocol ending
/// with `rho = gamma`, `rho' = epsilon`.
pub fn launch_dispersion(n: usize, mass: f64, omega0: f64, gamma: f64, epsilon: f64) -> f64 {
    let width = (2 * n + 1) as f64 * HBAR / (2.0 * mass * omega0);
    (width * (epsilon * epsilon + omega0 * omega0 / (gamma * gamma))).sqrt()
}

/// Velocity dispersion after releasing the `n`-th trap state into a uniform
/// field, which leaves the momentum distribution unchanged.
pub fn constant_field_dispersion(n: usize, mass: f64, omega0: f64) -> f64 {
    ((2 * n + 1) as f64 * HBAR * omega0 / (2.0 * mass)).sqrt()
}

/// Lewis–Riesenfeld phase split into the part driven by the invariant
/// eigenvalue and the part from the frame transformation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrPhase {
    pub dynamical: f64,
    pub frame: f64,
}

impl LrPhase {
    pub fn total(&self) -> f64 {
        self.dynamical + self.frame
    }
}

/// `-(1/hbar) int_0^t (lambda / rho^2 + g) dt'` by quadrature, with `g` the
/// spatially uniform term of the frame Hamiltonian.
pub fn lewis_riesenfeld_phase<D: Drive + ?Sized>(drive: &D, lambda: f64, t: f64) -> Result<LrPhase> {
    let dyn_int = adaptive_simpson(|s| FrameTerms::at(drive, s).inv_rho_sq, 0.0, t, PHASE_REL_TOL)?;
    let frame_int = adaptive_simpson(|s| FrameTerms::at(drive, s).global, 0.0, t, PHASE_REL_TOL)?;
    Ok(LrPhase {
        dynamical: -lambda * dyn_int / HBAR,
        frame: -frame_int / HBAR,
    })
}

/// Same phase computed from `<phi|H_frame(t)|phi>` for a stationary state
/// `phi`, which also picks up any residual of the controls.
pub fn lewis_riesenfeld_phase_numeric<D: Drive + ?Sized>(
    drive: &D,
    phi: &QuantumState,
    u: &dyn Fn(f64) -> f64,
    t: f64,
) -> Result<f64> {
    let m = drive.mass();
    let kinetic = frame_kinetic(phi, m);
    let y1 = expect_real(phi, |y| y);
    let y2 = expect_real(phi, |y| y * y);
    let extra = expect_real(phi, u);
    let integrand = |s: f64| {
        let ft = FrameTerms::at(drive, s);
        (kinetic + extra) * ft.inv_rho_sq + ft.quad * y2 + ft.lin * y1 + ft.global
    };
    Ok(-adaptive_simpson(integrand, 0.0, t, PHASE_REL_TOL)? / HBAR)
}

/// Phase of the overlap with a stationary state, including the tracked
/// global phase.
pub fn propagated_phase(state: &QuantumState, phi: &[Complex64]) -> f64 {
    inner(phi, &state.psi, state.grid.dx()).arg() + state.global_phase
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let r = x.rem_euclid(two_pi);
    if r > std::f64::consts::PI {
        r - two_pi
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::drive::Frame;
    use crate::qsim::grid::Grid;
    use crate::units::{angular_from_mhz, oscillator_length, BE9_ION_MASS};
    use approx::assert_relative_eq;

    fn gaussian(frame: Frame, k0: f64) -> (QuantumState, f64) {
        let w = angular_from_mhz(2.0);
        let a0 = oscillator_length(BE9_ION_MASS, w);
        let grid = Grid::centered(512, 0.0, 12.0 * a0).unwrap();
        let norm = (std::f64::consts::PI * a0 * a0).powf(-0.25);
        let psi = grid
            .coords()
            .iter()
            .map(|&y| Complex64::from_polar(norm * (-0.5 * y * y / (a0 * a0)).exp(), k0 * y))
            .collect();
        (QuantumState::new(grid, psi, frame).unwrap(), w)
    }

    #[test]
    fn moments_of_ground_state() {
        let frame = Frame {
            rho: 2.0,
            rho_dot: 0.0,
            alpha: 1e-4,
            alpha_dot: 3.0,
            ..Frame::default()
        };
        let (s, w) = gaussian(frame, 0.0);
        let m = BE9_ION_MASS;
        let (x, dx) = position_moments(&s);
        assert_relative_eq!(x, 1e-4, max_relative = 1e-12);
        assert_relative_eq!(dx, 2.0 * oscillator_length(m, w) / 2f64.sqrt(), max_relative = 1e-10);
        let (v, dv) = velocity_moments(&s, m);
        assert_relative_eq!(v, 3.0, max_relative = 1e-12);
        assert_relative_eq!(dv, constant_field_dispersion(0, m, w) / 2.0, max_relative = 1e-10);
        assert_relative_eq!(
            invariant_expectation(&s, m, w, &|_| 0.0),
            0.5 * HBAR * w,
            max_relative = 1e-10
        );
    }

    #[test]
    fn boosted_packet_velocity() {
        let (s, _) = gaussian(Frame { rho: 1.0, ..Frame::default() }, 1e7);
        let m = BE9_ION_MASS;
        let (v, _) = velocity_moments(&s, m);
        assert_relative_eq!(v, HBAR * 1e7 / m, max_relative = 1e-10);
    }

    #[test]
    fn dispersion_formulas_agree_at_unit_gamma() {
        let m = BE9_ION_MASS;
        let w = angular_from_mhz(2.0);
        for n in 0..3 {
            assert_relative_eq!(
                launch_dispersion(n, m, w, 1.0, 0.0),
                constant_field_dispersion(n, m, w),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn phase_wrapping() {
        use std::f64::consts::PI;
        assert_relative_eq!(wrap_phase(3.0 * PI), PI, epsilon = 1e-12);
        assert_relative_eq!(wrap_phase(-0.5), -0.5, epsilon = 1e-15);
        assert_relative_eq!(wrap_phase(2.0 * PI + 0.1), 0.1, epsilon = 1e-12);
    }
}
