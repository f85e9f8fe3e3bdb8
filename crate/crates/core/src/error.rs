use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("boundary constraint matrix is singular")]
    SingularSystem,
    #[error("ansatz of order {order} needs {expected} constraints, got {got}")]
    OrderMismatch {
        order: usize,
        expected: usize,
        got: usize,
    },
    #[error("unsupported ansatz order {0} (expected 5 or 7)")]
    UnsupportedOrder(usize),
    #[error("t = {t:e} s outside [0, {t_f:e}] s")]
    OutOfDomain { t: f64, t_f: f64 },
    #[error("derivative order {0} not supported (max 3)")]
    DerivativeOrder(usize),
    #[error("scaling factor rho = {rho:e} is not positive at t = {t:e} s")]
    NonPositiveRho { t: f64, rho: f64 },
    #[error("trap frequency vanishes at t = {t:e} s, trap center undefined")]
    ZeroFrequency { t: f64 },
    #[error("invalid trap: {0}")]
    InvalidTrap(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid bracket [{lo:e}, {hi:e}] s (feasible at lo: {lo_feasible}, at hi: {hi_feasible})")]
    InvalidBracket {
        lo: f64,
        hi: f64,
        lo_feasible: bool,
        hi_feasible: bool,
    },
    #[error("feasibility is not monotone near t = {0:e} s")]
    NonMonotone(f64),
    #[error("eigensolver did not converge: {0}")]
    NotConverged(String),
    #[error("grid too small: edge amplitude {0:e} for state {1}")]
    InsufficientGrid(f64, usize),
    #[error("time step {dt:e} s exceeds stability limit {limit:e} s")]
    CflViolation { dt: f64, limit: f64 },
    #[error("norm drifted by {0:e}")]
    NormDrift(f64),
    #[error("adaptive quadrature failed on [{0:e}, {1:e}]")]
    QuadratureFailure(f64, f64),
    #[error("state frame does not match protocol end point: {0}")]
    FrameMismatch(String),
    #[error("not a double well: lambda = {0:e} must be negative and beta positive")]
    NotDoubleWell(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
