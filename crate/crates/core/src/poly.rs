//! Polynomial auxiliary trajectories fixed by boundary conditions.
//!
//! An auxiliary function (the scaling factor rho or the centroid alpha) is
//! written as a polynomial in the scaled time `s = t / t_f`. Its coefficients
//! are the unique solution of a Hermite interpolation problem: value, first
//! and second derivative (and optionally the third) prescribed at both ends.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest time derivative any formula downstream needs.
pub const MAX_DERIVATIVE: usize = 3;

/// Uniform samples used when checking positivity of rho.
const POSITIVITY_SAMPLES: usize = 2001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryKind {
    Rho,
    Alpha,
}

/// Boundary values of a trajectory and its time derivatives at `t = 0` and
/// `t = t_f`. Derivatives are with respect to physical time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub value0: f64,
    pub valuef: f64,
    pub deriv1_0: f64,
    pub deriv1_f: f64,
    pub deriv2_0: f64,
    pub deriv2_f: f64,
    pub deriv3_0: Option<f64>,
    pub deriv3_f: Option<f64>,
}

impl BoundarySpec {
    /// Rest-to-rest conditions between two values.
    pub fn rest_to_rest(value0: f64, valuef: f64) -> Self {
        Self {
            value0,
            valuef,
            deriv1_0: 0.0,
            deriv1_f: 0.0,
            deriv2_0: 0.0,
            deriv2_f: 0.0,
            deriv3_0: None,
            deriv3_f: None,
        }
    }

    /// Start at rest, end with first derivative `velocity_f`.
    pub fn rest_to_moving(value0: f64, valuef: f64, velocity_f: f64) -> Self {
        Self {
            deriv1_f: velocity_f,
            ..Self::rest_to_rest(value0, valuef)
        }
    }

    /// Adds vanishing third derivatives at both ends.
    pub fn with_zero_jerk(self) -> Self {
        Self {
            deriv3_0: Some(0.0),
            deriv3_f: Some(0.0),
            ..self
        }
    }

    pub fn constraint_count(&self) -> usize {
        6 + usize::from(self.deriv3_0.is_some()) + usize::from(self.deriv3_f.is_some())
    }

    /// `(derivative order, at_end, value)` for every active constraint.
    fn constraints(&self) -> Vec<(usize, bool, f64)> {
        let mut out = vec![
            (0, false, self.value0),
            (1, false, self.deriv1_0),
            (2, false, self.deriv2_0),
            (0, true, self.valuef),
            (1, true, self.deriv1_f),
            (2, true, self.deriv2_f),
        ];
        if let Some(v) = self.deriv3_0 {
            out.push((3, false, v));
        }
        if let Some(v) = self.deriv3_f {
            out.push((3, true, v));
        }
        out
    }
}

/// Polynomial in `s = t / t_f` with coefficients `c[i]` multiplying `s^i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialTrajectory {
    pub coefficients: Vec<f64>,
    pub t_f: f64,
    pub kind: TrajectoryKind,
}

/// `i! / (i - k)!`
fn falling_factorial(i: usize, k: usize) -> f64 {
    (0..k).map(|j| (i - j) as f64).product()
}

/// Solves the Hermite interpolation problem for a polynomial of degree
/// `order` (5 or 7).
///
/// The system is assembled in `s`-space with the boundary data divided by
/// their largest magnitude, so the matrix entries are small integers
/// regardless of the physical units of the trajectory.
pub fn solve_ansatz(
    spec: &BoundarySpec,
    order: usize,
    t_f: f64,
    kind: TrajectoryKind,
) -> Result<PolynomialTrajectory> {
    if order != 5 && order != 7 {
        return Err(Error::UnsupportedOrder(order));
    }
    let got = spec.constraint_count();
    if got != order + 1 {
        return Err(Error::OrderMismatch {
            order,
            expected: order + 1,
            got,
        });
    }
    if !(t_f > 0.0 && t_f.is_finite()) {
        return Err(Error::InvalidInput(format!("t_f = {t_f:e} must be positive")));
    }

    // d^k/ds^k = t_f^k d^k/dt^k
    let constraints: Vec<(usize, bool, f64)> = spec
        .constraints()
        .into_iter()
        .map(|(k, end, v)| (k, end, v * t_f.powi(k as i32)))
        .collect();
    let scale = constraints
        .iter()
        .map(|&(_, _, v)| v.abs())
        .fold(0.0_f64, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };

    let n = order + 1;
    let mut matrix = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for (row, &(k, at_end, v)) in constraints.iter().enumerate() {
        for i in k..n {
            // at s = 0 only the s^k term survives
            if at_end || i == k {
                matrix[(row, i)] = falling_factorial(i, k);
            }
        }
        rhs[row] = v / scale;
    }

    let lu = matrix.clone().lu();
    let mut coeffs = lu.solve(&rhs).ok_or(Error::SingularSystem)?;
    // one round of iterative refinement
    let residual = &rhs - &matrix * &coeffs;
    if let Some(correction) = lu.solve(&residual) {
        coeffs += correction;
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::SingularSystem);
    }

    Ok(PolynomialTrajectory {
        coefficients: coeffs.iter().map(|c| c * scale).collect(),
        t_f,
        kind,
    })
}

impl PolynomialTrajectory {
    /// Constant trajectory (used for the trivial limits).
    pub fn constant(value: f64, t_f: f64, kind: TrajectoryKind) -> Self {
        Self {
            coefficients: vec![value],
            t_f,
            kind,
        }
    }

    /// `deriv_order`-th time derivative at `t`.
    pub fn evaluate(&self, t: f64, deriv_order: usize) -> Result<f64> {
        if deriv_order > MAX_DERIVATIVE {
            return Err(Error::DerivativeOrder(deriv_order));
        }
        let slack = 1e-12 * self.t_f;
        if !(t >= -slack && t <= self.t_f + slack) {
            return Err(Error::OutOfDomain { t, t_f: self.t_f });
        }
        let s = (t / self.t_f).clamp(0.0, 1.0);
        Ok(self.eval_s(s, deriv_order) / self.t_f.powi(deriv_order as i32))
    }

    /// Value and first three time derivatives at `t`, clamped to the domain.
    pub fn derivatives(&self, t: f64) -> [f64; 4] {
        let s = (t / self.t_f).clamp(0.0, 1.0);
        let mut out = [0.0; 4];
        let mut scale = 1.0;
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.eval_s(s, k) / scale;
            scale *= self.t_f;
        }
        out
    }

    /// k-th derivative with respect to `s` (Horner).
    pub fn eval_s(&self, s: f64, k: usize) -> f64 {
        let c = &self.coefficients;
        if k >= c.len() {
            return 0.0;
        }
        c[k..]
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (j, &cj)| acc * s + cj * falling_factorial(j + k, k))
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    /// Checks `rho(t) > 0` on `[0, t_f]` by dense sampling plus the stationary
    /// points of the polynomial.
    pub fn check_positive(&self) -> Result<()> {
        let n = POSITIVITY_SAMPLES;
        let mut candidates: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();

        let mut prev_s = 0.0;
        let mut prev_d = self.eval_s(0.0, 1);
        for i in 1..n {
            let s = i as f64 / (n - 1) as f64;
            let d = self.eval_s(s, 1);
            if prev_d == 0.0 {
                candidates.push(prev_s);
            } else if prev_d.signum() != d.signum() {
                let (mut lo, mut hi) = (prev_s, s);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if self.eval_s(mid, 1).signum() == prev_d.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                candidates.push(0.5 * (lo + hi));
            }
            prev_s = s;
            prev_d = d;
        }

        let (s_min, v_min) = candidates
            .into_iter()
            .map(|s| (s, self.eval_s(s, 0)))
            .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        if v_min > 0.0 {
            Ok(())
        } else {
            Err(Error::NonPositiveRho {
                t: s_min * self.t_f,
                rho: v_min,
            })
        }
    }
}
