use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Side of a branch cut from which a one-sided limit is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Above,
    Below,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A single input is malformed (non-finite, non-positive, weight outside (0,1)).
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("config: {0}")]
    Config(String),

    /// Inputs are individually fine but the model is outside its domain.
    #[error("parameter domain: {0}")]
    ParameterDomain(String),

    #[error("unstable parameters: lhs1 = {lhs1:.12}, lhs2 = {lhs2:.12} (both must be < 1)")]
    Unstable { lhs1: f64, lhs2: f64 },

    #[error("branch points violate the expected ordering: {0}")]
    OrderingViolation(String),

    #[error("point {point} lies on the branch cut [{from}, {to}]")]
    OnCut { point: f64, from: f64, to: f64 },

    #[error("argument {0} is not strictly inside a branch cut")]
    NotOnCut(f64),

    #[error("pole at the origin")]
    PoleAtZero,

    #[error("phase denominator is non-positive at x = {x} (value {value})")]
    BranchAmbiguity { x: f64, value: f64 },

    #[error("kernel root at distance {distance:e} from the integration segment; use the principal-value variant")]
    NearSingularity { distance: f64 },

    #[error("{0} kernel roots lie inside the integration segment")]
    MultipleSingularities(usize),

    #[error("pole of the boundary coefficient at y = {0}")]
    PoleOfAlpha(num_complex::Complex64),

    #[error("pole of the generating function at {0}")]
    AtPole(num_complex::Complex64),

    #[error("kernel vanishes at (x, y) = ({x}, {y})")]
    KernelZero {
        x: num_complex::Complex64,
        y: num_complex::Complex64,
    },

    #[error("phase jump of {jump:.3} rad between adjacent samples; increase the sample count")]
    PhaseAliasing { jump: f64 },

    #[error("{what} did not converge after {iterations} iterations (last change {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("tail window [{from}, {to}] is unreliable: {reason}")]
    WindowUnreliable {
        from: usize,
        to: usize,
        reason: String,
    },

    #[error("non-removable pole at {0}")]
    PoleEncountered(num_complex::Complex64),

    #[error("quadrature estimate {estimate:e} exceeds tolerance after {intervals} subintervals")]
    Quadrature { estimate: f64, intervals: usize },

    #[error("numerical self-check failed: {what} (residual {residual:e})")]
    IdentityCheck { what: &'static str, residual: f64 },
}

/// Coarse grouping used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Domain,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter { .. } | Error::Config(_) => ErrorClass::Input,
            Error::ParameterDomain(_)
            | Error::Unstable { .. }
            | Error::OnCut { .. }
            | Error::NotOnCut(_)
            | Error::PoleAtZero
            | Error::PoleOfAlpha(_)
            | Error::AtPole(_)
            | Error::KernelZero { .. }
            | Error::PoleEncountered(_) => ErrorClass::Domain,
            _ => ErrorClass::Numerical,
        }
    }
}
