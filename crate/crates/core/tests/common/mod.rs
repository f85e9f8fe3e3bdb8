#![allow(dead_code)]

use sta_core::protocol::{ProtocolControls, TrapSpec};
use sta_core::units::{angular_from_mhz, BE9_ION_MASS};

pub const D: f64 = 370e-6;
pub const V_LAUNCH: f64 = 10.0;

pub fn omega0() -> f64 {
    angular_from_mhz(2.0)
}

pub fn expansion() -> TrapSpec {
    TrapSpec::harmonic(BE9_ION_MASS, omega0(), 10f64.sqrt(), 0.0)
}

pub fn transport() -> TrapSpec {
    TrapSpec::harmonic(BE9_ION_MASS, omega0(), 1.0, D)
}

pub fn dual() -> TrapSpec {
    TrapSpec::harmonic(BE9_ION_MASS, omega0(), 10f64.sqrt(), D)
}

pub fn dual_launch() -> TrapSpec {
    dual().with_launch(V_LAUNCH)
}

/// Adaptive Dormand–Prince 5(4) integration of `y' = f(t, y)` from `t0` to `t1`.
pub fn dopri5<F, const N: usize>(f: F, t0: f64, t1: f64, y0: [f64; N], rtol: f64, atol: [f64; N]) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let mut t = t0;
    let mut y = y0;
    let mut h = (t1 - t0) / 1000.0;
    while t < t1 {
        if t + h > t1 {
            h = t1 - t;
        }
        let mut k = [[0.0; N]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for i in 0..N {
                    ys[i] += h * A[s][j] * kj[i];
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y_new = y;
        let mut err: f64 = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for s in 0..7 {
                y_new[i] += h * B[s] * k[s][i];
                e += h * E[s] * k[s][i];
            }
            let sc = atol[i] + rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / sc).abs());
        }
        if err <= 1.0 {
            t += h;
            y = y_new;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    y
}

/// Central difference of `f` at `t` with step `h`.
pub fn central_diff(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    (f(t - 2.0 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2.0 * h)) / (12.0 * h)
}

/// Integrates the Ermakov and Newton equations driven by the sampled
/// controls and returns `[rho, rho', alpha, alpha']` at the final time.
pub fn integrate_forward(c: &ProtocolControls) -> [f64; 4] {
    let w0 = if c.trap.harmonic { c.trap.omega0 } else { 0.0 };
    let m = c.trap.mass;
    let d = c.trap.d.abs().max(1e-6);
    let rhs = |t: f64, y: &[f64; 4]| {
        let w2 = c.omega_sq_sampled(t);
        let f = c.force_sampled(t);
        [y[1], -w2 * y[0] + w0 * w0 / y[0].powi(3), y[3], -w2 * y[2] + f / m]
    };
    let scale_v = 1.0 / c.t_f;
    dopri5(rhs, 0.0, c.t_f, [1.0, 0.0, 0.0, 0.0], 1e-11, [1e-13, 1e-13 * scale_v, 1e-13 * d, 1e-13 * d * scale_v])
}
