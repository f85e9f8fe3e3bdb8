//! Shortcut-to-adiabaticity design of ion launch, transport and expansion
//! protocols based on Lewis–Riesenfeld invariants, with a split-step
//! Schrödinger solver to verify them.

pub mod doublewell;
pub mod error;
pub mod numeric;
pub mod poly;
pub mod protocol;
pub mod qsim;
pub mod timing;
pub mod units;

pub use error::{Error, Result};
pub use poly::{solve_ansatz, BoundarySpec, PolynomialTrajectory, TrajectoryKind};
pub use protocol::{build_controls, check_constraints, ConstraintReport, ProtocolControls, TrapSpec};
pub use timing::{minimal_time, Constraint, MinTimeQuery, SequentialPlan, SweepMode};
