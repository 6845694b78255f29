//! Stationary analysis of a two-class non-work-conserving GPS queue.
//!
//! The joint queue-length generating function is recovered from a
//! Riemann–Hilbert boundary value problem on a circle, tail asymptotics
//! of the queue lengths follow from its singularities, and a truncated
//! Markov chain solver plus a simulator serve as independent references.

pub mod asymptotics;
pub mod error;
pub mod kernel;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod resultants;
pub mod rh;

pub use num_complex::Complex64;

pub use asymptotics::{classify_case, tail_estimate, tail_eval, CaseClassification, RemovableCheck, TailCase, TailEstimate};
pub use error::{Error, ErrorClass, Result, Side};
pub use kernel::{BoundaryRelations, BranchPoints, Kernel, KernelPoly};
pub use model::{DerivedRates, ModelParams, ParamOverrides, Queue, StabilityVerdict, TransitionRates};
pub use oracle::{simulate, solve_stationary, Estimate, Horizon, SimConfig, SimResult, StationaryGrid};
pub use quadrature::QuadratureConfig;
pub use resultants::{locate_poles, PoleReport, QuadRoots, QuadraticPoly, Resultants};
pub use rh::{GFValue, IndexReport, Region, RhSolution, RhSolver};
