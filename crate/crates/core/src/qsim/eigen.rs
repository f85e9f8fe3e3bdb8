//! Stationary states of `p^2/2m + m omega0^2 y^2 / 2 + U(y)` on a periodic grid.
//!
//! A second-order finite-difference Hamiltonian is diagonalised first
//! (Sturm bisection plus inverse iteration on the tridiagonal matrix); its
//! lowest vectors then span the subspace for a Rayleigh–Ritz step with the
//! spectral Hamiltonian used by the propagator, which removes the O(dx^2)
//! error of the stencil.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::units::HBAR;

/// Number of extra finite-difference vectors kept for the Ritz subspace.
const RITZ_PADDING: usize = 20;

/// Largest acceptable ratio between edge amplitude and peak amplitude.
pub const EDGE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenstates {
    pub grid: Grid,
    /// Energies in joules, ascending.
    pub energies: Vec<f64>,
    /// Real eigenfunctions normalised so that `sum |phi|^2 dx = 1`.
    pub states: Vec<Vec<f64>>,
}

impl Eigenstates {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn complex_state(&self, n: usize) -> Vec<Complex64> {
        self.states[n].iter().map(|&v| Complex64::new(v, 0.0)).collect()
    }
}

/// Lowest `n_states` eigenpairs of the frame Hamiltonian at `t = 0`
/// (`rho = 1`): confinement `omega0` plus the extra potential `u`.
pub fn stationary_eigenstates(
    u: &dyn Fn(f64) -> f64,
    mass: f64,
    omega0: f64,
    grid: &Grid,
    n_states: usize,
) -> Result<Eigenstates> {
    let n = grid.n_points;
    if n_states == 0 || n_states > n / 4 {
        return Err(Error::InvalidInput(format!(
            "cannot resolve {n_states} states on {n} points"
        )));
    }
    let dx = grid.dx();
    let y = grid.coords();
    let potential: Vec<f64> = y
        .iter()
        .map(|&yi| 0.5 * mass * omega0 * omega0 * yi * yi + u(yi))
        .collect();
    if potential.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("potential is not finite on the grid".into()));
    }

    // tridiagonal FD matrix in units of hbar^2 / (m dx^2)
    let e_unit = HBAR * HBAR / (mass * dx * dx);
    let diag: Vec<f64> = potential.iter().map(|v| 1.0 + v / e_unit).collect();
    let off = -0.5;

    let k = (n_states + RITZ_PADDING).min(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    for j in 0..k {
        let lambda = kth_eigenvalue(&diag, off, j);
        let v = inverse_iteration(&diag, off, lambda, &basis)?;
        basis.push(v);
    }

    let hv: Vec<Vec<f64>> = basis
        .iter()
        .map(|v| apply_spectral(v, &potential, grid, mass))
        .collect();
    let mut a = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let s: f64 = basis[i].iter().zip(&hv[j]).map(|(p, q)| p * q).sum();
            a[(i, j)] = s;
            a[(j, i)] = s;
        }
    }
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));

    let norm = 1.0 / dx.sqrt();
    let mut energies = Vec::with_capacity(n_states);
    let mut states = Vec::with_capacity(n_states);
    for &col in order.iter().take(n_states) {
        let energy = eig.eigenvalues[col];
        if !energy.is_finite() {
            return Err(Error::NotConverged("Ritz eigenvalue is not finite".into()));
        }
        let mut phi = vec![0.0; n];
        for (b, v) in basis.iter().enumerate() {
            let c = eig.eigenvectors[(b, col)];
            for (p, x) in phi.iter_mut().zip(v) {
                *p += c * x;
            }
        }
        let s = phi.iter().map(|x| x * x).sum::<f64>().sqrt();
        for p in &mut phi {
            *p *= norm / s;
        }
        fix_sign(&mut phi);
        check_edges(&phi, grid)?;
        energies.push(energy);
        states.push(phi);
    }
    Ok(Eigenstates {
        grid: *grid,
        energies,
        states,
    })
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`.
fn sturm_count(diag: &[f64], off: f64, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    let off_sq = off * off;
    for (i, &d) in diag.iter().enumerate() {
        q = if i == 0 { d - x } else { d - x - off_sq / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d.abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn kth_eigenvalue(diag: &[f64], off: f64, k: usize) -> f64 {
    let radius = 2.0 * off.abs();
    let mut lo = diag.iter().cloned().fold(f64::INFINITY, f64::min) - radius;
    let mut hi = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + radius;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(T - shift) x = b` for tridiagonal `T` with partial pivoting.
fn solve_shifted(diag: &[f64], off: f64, shift: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    // U has up to two superdiagonals after pivoting
    let mut u0: Vec<f64> = diag.iter().map(|d| d - shift).collect();
    let mut u1 = vec![off; n];
    let mut u2 = vec![0.0; n];
    let mut rhs = b.to_vec();
    let lower = off;
    for i in 0..n - 1 {
        if lower.abs() > u0[i].abs() {
            // swap rows i and i+1
            let (a0, a1, a2) = (u0[i], u1[i], u2[i]);
            let (below_diag, below_super) = (u0[i + 1], u1[i + 1]);
            u0[i] = lower;
            u1[i] = below_diag;
            u2[i] = below_super;
            rhs.swap(i, i + 1);
            let factor = a0 / lower;
            u0[i + 1] = a1 - factor * below_diag;
            u1[i + 1] = a2 - factor * below_super;
            rhs[i + 1] -= factor * rhs[i];
        } else {
            let pivot = if u0[i] == 0.0 { f64::EPSILON } else { u0[i] };
            u0[i] = pivot;
            let factor = lower / pivot;
            u0[i + 1] -= factor * u1[i];
            u1[i + 1] -= factor * u2[i];
            rhs[i + 1] -= factor * rhs[i];
        }
    }
    if u0[n - 1] == 0.0 {
        u0[n - 1] = f64::EPSILON;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        if i + 1 < n {
            s -= u1[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * x[i + 2];
        }
        x[i] = s / u0[i];
    }
    x
}

fn inverse_iteration(diag: &[f64], off: f64, lambda: f64, previous: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = diag.len();
    let shift = lambda - 1e-12 * (lambda.abs() + 1.0);
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_75).fract())
        .collect();
    for _ in 0..4 {
        orthogonalize(&mut v, previous);
        normalize(&mut v)?;
        v = solve_shifted(diag, off, shift, &v);
    }
    orthogonalize(&mut v, previous);
    normalize(&mut v)?;
    Ok(v)
}

fn orthogonalize(v: &mut [f64], previous: &[Vec<f64>]) {
    for p in previous {
        let c: f64 = v.iter().zip(p).map(|(a, b)| a * b).sum();
        for (a, b) in v.iter_mut().zip(p) {
            *a -= c * b;
        }
    }
}

fn normalize(v: &mut [f64]) -> Result<()> {
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !s.is_finite() || s == 0.0 {
        return Err(Error::NotConverged("inverse iteration broke down".into()));
    }
    for x in v.iter_mut() {
        *x /= s;
    }
    Ok(())
}

/// `H v` with the kinetic term evaluated spectrally.
fn apply_spectral(v: &[f64], potential: &[f64], grid: &Grid, mass: f64) -> Vec<f64> {
    let n = v.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fwd.process(&mut buf);
    let scale = HBAR * HBAR / (2.0 * mass) / n as f64;
    for (b, k) in buf.iter_mut().zip(grid.wavenumbers()) {
        *b *= scale * k * k;
    }
    inv.process(&mut buf);
    buf.iter()
        .zip(v)
        .zip(potential)
        .map(|((t, &x), &p)| t.re + p * x)
        .collect()
}

/// Makes the first lobe that carries appreciable weight positive.
fn fix_sign(phi: &mut [f64]) {
    let peak = phi.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if let Some(&first) = phi.iter().find(|x| x.abs() > 0.1 * peak) {
        if first < 0.0 {
            for p in phi.iter_mut() {
                *p = -*p;
            }
        }
    }
}

fn check_edges(phi: &[f64], grid: &Grid) -> Result<()> {
    let peak = phi.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let w = grid.edge_width().min(phi.len() / 2);
    let edge = phi[..w]
        .iter()
        .chain(&phi[phi.len() - w..])
        .fold(0.0_f64, |m, x| m.max(x.abs()));
    let ratio = edge / peak;
    if ratio > EDGE_TOLERANCE {
        return Err(Error::InsufficientGrid(ratio, grid.n_points));
    }
    Ok(())
}
