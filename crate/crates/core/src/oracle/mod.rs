//! Reference solutions independent of the boundary value problem: the
//! stationary vector of the truncated Markov chain and a discrete-event simulator.

mod ctmc;
mod sim;

pub use ctmc::{solve_stationary, solve_stationary_rates, SolverConfig, StationaryGrid};
pub use sim::{simulate, simulate_rates, Estimate, Horizon, SimConfig, SimResult};
