//! Physical constants (SI).

use std::f64::consts::PI;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Unified atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Electron mass, kg.
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;

/// Mass of a singly ionised beryllium-9 atom, kg.
pub const BE9_ION_MASS: f64 = 9.012_183_1 * ATOMIC_MASS_UNIT - ELECTRON_MASS;

/// Angular frequency (rad/s) for an ordinary frequency given in MHz.
pub fn angular_from_mhz(f_mhz: f64) -> f64 {
    2.0 * PI * f_mhz * 1e6
}

/// Harmonic oscillator length sqrt(hbar / (m omega)), m.
pub fn oscillator_length(mass: f64, omega: f64) -> f64 {
    (HBAR / (mass * omega)).sqrt()
}
