//! Reference solvers: simulated annealing, tabu search, simulated
//! bifurcation, Burer's rank-2 relaxation and a factor-descent stand-in for
//! the GW semidefinite relaxation.
//!
//! Every solver takes a ±1 instance and returns `(x, value, trace)` where
//! `value` is `evaluate(x)` recomputed from scratch and the trace carries a
//! non-increasing best-seen sequence.

mod anneal;
mod bifurcation;
mod burer;
mod sdp_surrogate;
mod tabu;

pub use anneal::{metropolis_accept, simulated_annealing, SaParams, SaTrace};
pub use bifurcation::{simulated_bifurcation, spectral_radius, SbParams, SbTrace};
pub use burer::{burer2, torus_gradient, torus_objective, BurerTrace};
pub use sdp_surrogate::{default_surrogate_rank, gw_sdp_surrogate, SdpTrace};
pub use tabu::{tabu_search, TabuMove, TabuParams, TabuTrace};

use rand::Rng as _;

use crate::instance::SignVector;
use crate::rng::Rng;

fn random_signs(n: usize, rng: &mut Rng) -> Vec<i8> {
    (0..n)
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect()
}

/// Strictly better: lower value, ties broken lexicographically on `x`.
fn improves(value: f64, x: &SignVector, best: &Option<(SignVector, f64)>) -> bool {
    match best {
        None => true,
        Some((bx, bv)) => value < *bv || (value == *bv && x < bx),
    }
}
