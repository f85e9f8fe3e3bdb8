//! Small numerical kernels shared by the protocol and simulation code.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of `f` on `[a, b]`, stopping when the
/// bracket is narrower than `tol`. Returns `(x, f(x))`.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a).abs() > tol && iterations < 200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Minimum of `f` over samples `values` taken at uniform `times`, refined by
/// golden-section search between the neighbours of the best sample.
pub fn refined_min<F: Fn(f64) -> f64>(f: F, times: &[f64], values: &[f64], rel_tol: f64) -> (f64, f64) {
    let (idx, &v) = values
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_nan())
        .fold((0, &f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    if times.len() < 3 || !v.is_finite() {
        return (times[idx], v);
    }
    let lo = times[idx.saturating_sub(1)];
    let hi = times[(idx + 1).min(times.len() - 1)];
    let span = times[times.len() - 1] - times[0];
    let (t, fv) = golden_section_min(&f, lo, hi, rel_tol * span.abs());
    if fv < v {
        (t, fv)
    } else {
        (times[idx], v)
    }
}

/// Maximum counterpart of [`refined_min`].
pub fn refined_max<F: Fn(f64) -> f64>(f: F, times: &[f64], values: &[f64], rel_tol: f64) -> (f64, f64) {
    let neg: Vec<f64> = values.iter().map(|v| -v).collect();
    let (t, v) = refined_min(|x| -f(x), times, &neg, rel_tol);
    (t, -v)
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

/// Adaptive Simpson quadrature with Richardson correction.
///
/// The tolerance is relative to the magnitude of a coarse initial estimate.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    // seed on a fixed partition so oscillatory integrands are not under-sampled
    const PIECES: usize = 16;
    let h = (b - a) / PIECES as f64;
    let pieces: Vec<(f64, f64, f64, f64, f64, f64)> = (0..PIECES)
        .map(|i| {
            let x0 = a + i as f64 * h;
            let x1 = x0 + h;
            let (f0, fm, f1) = (f(x0), f(0.5 * (x0 + x1)), f(x1));
            (x0, x1, f0, fm, f1, simpson(f0, fm, f1, h))
        })
        .collect();
    let coarse: f64 = pieces.iter().map(|p| p.5.abs()).sum();
    let abs_tol = (rel_tol * coarse).max(f64::MIN_POSITIVE);
    let mut total = 0.0;
    for (x0, x1, f0, fm, f1, whole) in pieces {
        total += simpson_step(&f, x0, x1, f0, fm, f1, whole, abs_tol / PIECES as f64, 50)?;
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return Err(Error::QuadratureFailure(a, b));
    }
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure(a, b));
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Four-point Lagrange interpolation on a uniform grid starting at `t0` with
/// spacing `h`. Exact at the nodes.
pub fn cubic_uniform(values: &[f64], t0: f64, h: f64, t: f64) -> f64 {
    let n = values.len();
    match n {
        0 => return f64::NAN,
        1 => return values[0],
        _ => {}
    }
    let u = ((t - t0) / h).clamp(0.0, (n - 1) as f64);
    let i = u.floor() as usize;
    let frac = u - i as f64;
    if frac == 0.0 {
        return values[i];
    }
    if n < 4 {
        let j = i.min(n - 2);
        let w = u - j as f64;
        return values[j] * (1.0 - w) + values[j + 1] * w;
    }
    // stencil j..j+3 containing the interval, shifted at the edges
    let j = i.saturating_sub(1).min(n - 4);
    let x = u - j as f64;
    let (y0, y1, y2, y3) = (values[j], values[j + 1], values[j + 2], values[j + 3]);
    -y0 * (x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0 + y1 * x * (x - 2.0) * (x - 3.0) / 2.0
        - y2 * x * (x - 1.0) * (x - 3.0) / 2.0
        + y3 * x * (x - 1.0) * (x - 2.0) / 6.0
}
