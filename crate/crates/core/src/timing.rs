//! Constraint-limited minimal protocol times and exceeded-distance sweeps.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{build_controls, check_constraints, default_tol_box, TrapSpec};

/// Samples used for every feasibility evaluation.
pub const FEASIBILITY_SAMPLES: usize = 2001;

/// Default relative tolerance of the minimal-time bisection.
pub const DEFAULT_REL_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    RealFrequency,
    Box,
    Both,
}

impl Constraint {
    fn flags(self) -> (bool, bool) {
        match self {
            Constraint::RealFrequency => (true, false),
            Constraint::Box => (false, true),
            Constraint::Both => (true, true),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinTimeQuery {
    pub trap: TrapSpec,
    pub constraint: Constraint,
    /// `(t_lo, t_hi)`, s
    pub bracket: (f64, f64),
    pub rel_tol: f64,
}

impl MinTimeQuery {
    /// Query with the default bracket
    /// `[bound / 2 + 1 ns, 100 gamma^2 / omega]`.
    pub fn new(trap: TrapSpec, constraint: Constraint) -> Self {
        Self {
            trap,
            constraint,
            bracket: default_bracket(&trap),
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

fn default_bracket(trap: &TrapSpec) -> (f64, f64) {
    let lo = 0.5 * analytic_bound(trap) + 1e-9;
    let omega = if trap.omega0 > 0.0 { trap.omega0 } else { 1e6 };
    let hi = 100.0 / omega * trap.gamma.max(1.0).powi(2);
    (lo, hi.max(4.0 * lo))
}

/// Whether the protocol of duration `t_f` satisfies `constraint`. Protocols
/// that cannot be built (frequency crossing zero exactly, rho not positive)
/// count as infeasible.
pub fn is_feasible(trap: &TrapSpec, constraint: Constraint, t_f: f64) -> bool {
    let (freq, trap_box) = constraint.flags();
    build_controls(trap, t_f, FEASIBILITY_SAMPLES)
        .and_then(|c| check_constraints(&c, default_tol_box(trap)))
        .map(|r| r.feasible(freq, trap_box))
        .unwrap_or(false)
}

/// Geometric bisection for the shortest feasible duration.
pub fn minimal_time(query: &MinTimeQuery) -> Result<f64> {
    query.trap.validate()?;
    let (lo, hi) = query.bracket;
    if !(lo > 0.0 && lo < hi) || !(query.rel_tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "bracket ({lo:e}, {hi:e}) with rel_tol {:e}",
            query.rel_tol
        )));
    }
    match bisect(query, lo, hi) {
        Err(Error::NonMonotone(_)) => bisect(query, lo, 0.5 * (lo + hi)),
        other => other,
    }
}

/// [`minimal_time`] with the default bracket, widened once by a factor of
/// four on each side if it does not enclose the threshold.
pub fn minimal_time_default(trap: &TrapSpec, constraint: Constraint) -> Result<f64> {
    let query = MinTimeQuery::new(*trap, constraint);
    match minimal_time(&query) {
        Err(Error::InvalidBracket { .. }) => {
            let (lo, hi) = query.bracket;
            minimal_time(&MinTimeQuery {
                bracket: (lo / 4.0, hi * 4.0),
                ..query
            })
        }
        other => other,
    }
}

fn bisect(query: &MinTimeQuery, mut lo: f64, mut hi: f64) -> Result<f64> {
    let feasible = |t: f64| is_feasible(&query.trap, query.constraint, t);
    let (lo_ok, hi_ok) = (feasible(lo), feasible(hi));
    if lo_ok || !hi_ok {
        return Err(Error::InvalidBracket {
            lo,
            hi,
            lo_feasible: lo_ok,
            hi_feasible: hi_ok,
        });
    }
    while hi / lo > 1.0 + query.rel_tol {
        let mid = (lo * hi).sqrt();
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let t = (lo * hi).sqrt();
    let tol = 2.0 * query.rel_tol;
    if !feasible(t * (1.0 + tol)) || feasible(t * (1.0 - tol)) {
        return Err(Error::NonMonotone(t));
    }
    Ok(t)
}

/// Lower bound `sqrt(gamma^2 - 1) / omega0` on the duration of any expansion
/// that keeps the frequency real.
pub fn analytic_bound(trap: &TrapSpec) -> f64 {
    if trap.gamma <= 1.0 || trap.omega0 <= 0.0 {
        return 0.0;
    }
    (trap.gamma * trap.gamma - 1.0).sqrt() / trap.omega0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Dual,
    Sequential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// s, strictly increasing
    pub t_f: Vec<f64>,
    pub values: Vec<f64>,
    pub metric: String,
}

/// Stages of a sequential protocol: a pure expansion and a rigid transport
/// executed one after the other.
///
/// Rest-to-rest transport is done first at the initial frequency, then the
/// expansion. A launch expands first and then transports at the final
/// frequency, since the launch must end the protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequentialPlan {
    pub expansion: TrapSpec,
    pub transport: TrapSpec,
    pub transport_first: bool,
}

impl SequentialPlan {
    pub fn new(trap: &TrapSpec) -> Self {
        let expansion = TrapSpec {
            d: 0.0,
            v_f: 0.0,
            ..*trap
        };
        let transport_first = trap.v_f == 0.0;
        let omega = if transport_first {
            trap.omega0
        } else {
            trap.final_omega()
        };
        let transport = TrapSpec {
            omega0: omega,
            gamma: 1.0,
            epsilon: 0.0,
            ..*trap
        };
        Self {
            expansion,
            transport,
            transport_first,
        }
    }

    /// Minimal stage times `(expansion, transport)` under the real-frequency
    /// and box constraints respectively.
    pub fn stage_minimal_times(&self) -> Result<(f64, f64)> {
        let t_exp = if self.expansion.gamma == 1.0 {
            0.0
        } else {
            minimal_time_default(&self.expansion, Constraint::RealFrequency)?
        };
        let t_tra = if self.transport.d == 0.0 && self.transport.v_f == 0.0 {
            0.0
        } else {
            minimal_time_default(&self.transport, Constraint::Box)?
        };
        Ok((t_exp, t_tra))
    }

    /// Exceeded distance of the concatenated trap-center trajectory when the
    /// expansion stage lasts `t_exp` and the transport stage `t_tra`.
    pub fn exceeded_distance(&self, t_exp: f64, t_tra: f64) -> Result<f64> {
        let d = self.transport.d;
        let c = build_controls(&self.transport, t_tra, FEASIBILITY_SAMPLES)?;
        let r = check_constraints(&c, default_tol_box(&self.transport))?;
        let (mut hi, mut lo) = (r.x0_max.unwrap_or(d), r.x0_min.unwrap_or(0.0));
        if t_exp > 0.0 {
            // the expansion stage holds the center at 0 (before) or d (after)
            let held = if self.transport_first { d } else { 0.0 };
            hi = hi.max(held);
            lo = lo.min(held);
        }
        Ok(hi.max(d) - lo.min(0.0) - d)
    }
}

fn ensure_increasing(t_f: &[f64]) -> Result<()> {
    if t_f.windows(2).any(|w| w[1] <= w[0]) || t_f.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::InvalidInput(
            "sweep durations must be positive and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// `x_e / d` as a function of the total protocol time.
///
/// In sequential mode the expansion stage runs at its real-frequency minimal
/// time and the transport stage gets the remainder of `t_f`.
pub fn sweep_exceeded_distance(trap: &TrapSpec, mode: SweepMode, t_f: &[f64]) -> Result<SweepResult> {
    trap.validate()?;
    ensure_increasing(t_f)?;
    if trap.d == 0.0 {
        return Err(Error::InvalidInput("exceeded-distance ratio needs d != 0".into()));
    }
    let d = trap.d.abs();

    let point: Box<dyn Fn(f64) -> Result<f64> + Sync> = match mode {
        SweepMode::Dual => Box::new(move |t| {
            let c = build_controls(trap, t, FEASIBILITY_SAMPLES)?;
            let r = check_constraints(&c, default_tol_box(trap))?;
            Ok(r.exceeded_distance.unwrap_or(0.0).max(0.0) / d)
        }),
        SweepMode::Sequential => {
            let plan = SequentialPlan::new(trap);
            let t_exp = if plan.expansion.gamma == 1.0 {
                0.0
            } else {
                minimal_time_default(&plan.expansion, Constraint::RealFrequency)?
            };
            Box::new(move |t| {
                if t <= t_exp {
                    return Err(Error::InvalidInput(format!(
                        "sequential protocol needs t_f > expansion time {t_exp:e} s"
                    )));
                }
                Ok(plan.exceeded_distance(t_exp, t - t_exp)?.max(0.0) / d)
            })
        }
    };

    #[cfg(feature = "parallel")]
    let values = t_f.par_iter().map(|&t| point(t)).collect::<Result<Vec<f64>>>()?;
    #[cfg(not(feature = "parallel"))]
    let values = t_f.iter().map(|&t| point(t)).collect::<Result<Vec<f64>>>()?;

    Ok(SweepResult {
        t_f: t_f.to_vec(),
        values,
        metric: "xe_over_d".into(),
    })
}

/// `n` log-spaced durations between `lo_factor` and `hi_factor` times `t_min`.
pub fn log_grid(t_min: f64, lo_factor: f64, hi_factor: f64, n: usize) -> Vec<f64> {
    let (a, b) = ((t_min * lo_factor).ln(), (t_min * hi_factor).ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n.max(2) - 1) as f64).exp())
        .collect()
}

/// Thirty log-spaced durations from 1.01 to 5 times the real-frequency
/// minimal time of the expansion.
pub fn exceeded_distance_grid(trap: &TrapSpec) -> Result<Vec<f64>> {
    let expansion = SequentialPlan::new(trap).expansion;
    let t_min = minimal_time_default(&expansion, Constraint::RealFrequency)?;
    Ok(log_grid(t_min, 1.01, 5.0, 30))
}
