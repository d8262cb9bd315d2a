//! QUBO solvers built around direct minimization of the expected objective of
//! Goemans-Williamson randomized rounding over low-rank spherical factors.
//!
//! * [`instance`], [`reductions`], [`io`]: problem representation, reductions
//!   from MaxCut and Subset-Sum, the instance text format.
//! * [`rounding`]: GW rounding and its closed-form expectation.
//! * [`dem`]: DEM-RC, exact DEM and the generic DC loop.
//! * [`subproblem`]: the second-order cone descent-direction problem.
//! * [`baselines`]: annealing, tabu search, simulated bifurcation, Burer's
//!   rank-2 heuristic and a factorized SDP surrogate.

pub mod baselines;
pub mod dem;
pub mod error;
pub mod exhaustive;
pub mod instance;
pub mod io;
pub mod reductions;
pub mod rng;
pub mod rounding;
pub mod subproblem;

pub use error::{Error, FormatError, Result};
pub use instance::{Convention, QuboInstance, SignVector};
pub use reductions::WeightedGraph;
pub use rounding::{FactorMatrix, RoundingResult};
