use std::f64::consts::TAU;

use ndarray::Array1;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::instance::{Convention, QuboInstance, SignVector};
use crate::rng::{self, tag};
use crate::rounding::{hyperplane_partitions_rank2, FactorMatrix};

const MAX_DESCENT_ITERS: usize = 2000;
const ARMIJO: f64 = 1e-4;
const GRAD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BurerTrace {
    /// Torus objective along each restart's descent.
    pub descents: Vec<Vec<f64>>,
    /// Exact rank-2 rounding value of each restart.
    pub restart_values: Vec<f64>,
    /// Best rounded value after each restart.
    pub best_values: Vec<f64>,
}

/// `sum_ij Q_ij cos(phi_i - phi_j)`.
pub fn torus_objective(inst: &QuboInstance, phi: &[f64]) -> f64 {
    let (c, s) = trig(phi);
    let q = inst.q();
    c.dot(&q.dot(&c)) + s.dot(&q.dot(&s))
}

/// `d/dphi_a = 2 (cos phi_a (Q s)_a - sin phi_a (Q c)_a)`.
pub fn torus_gradient(inst: &QuboInstance, phi: &[f64]) -> Vec<f64> {
    let (c, s) = trig(phi);
    let q = inst.q();
    let qc = q.dot(&c);
    let qs = q.dot(&s);
    (0..phi.len())
        .map(|a| 2.0 * (c[a] * qs[a] - s[a] * qc[a]))
        .collect()
}

fn trig(phi: &[f64]) -> (Array1<f64>, Array1<f64>) {
    (
        phi.iter().map(|p| p.cos()).collect(),
        phi.iter().map(|p| p.sin()).collect(),
    )
}

/// Backtracking gradient descent on the torus; returns the final angles and
/// the value sequence.
fn descend(inst: &QuboInstance, mut phi: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let mut value = torus_objective(inst, &phi);
    let mut values = vec![value];
    let mut step = 1.0 / (1.0 + inst.max_abs() * inst.n() as f64);
    for _ in 0..MAX_DESCENT_ITERS {
        let g = torus_gradient(inst, &phi);
        let g2: f64 = g.iter().map(|v| v * v).sum();
        if g2.sqrt() <= GRAD_TOL * (1.0 + value.abs()) {
            break;
        }
        let mut t = step * 2.0;
        let accepted = loop {
            let trial: Vec<f64> = phi.iter().zip(&g).map(|(p, gi)| p - t * gi).collect();
            let v = torus_objective(inst, &trial);
            if v <= value - ARMIJO * t * g2 {
                break Some((trial, v));
            }
            t *= 0.5;
            if t < 1e-16 {
                break None;
            }
        };
        let Some((trial, v)) = accepted else { break };
        phi = trial;
        value = v;
        step = t;
        values.push(value);
    }
    (phi, values)
}

/// Burer's rank-2 heuristic: descent on the torus from random angles, then
/// exact enumeration of the hyperplane partitions of the rank-2 factor.
pub fn burer2(
    inst: &QuboInstance,
    restarts: usize,
    seed: u64,
) -> Result<(SignVector, f64, BurerTrace)> {
    inst.require(Convention::PlusMinusOne)?;
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let n = inst.n();
    let base = rng::derive_seed(seed, tag::RESTART);
    let mut trace = BurerTrace::default();
    let mut best: Option<(SignVector, f64)> = None;
    for r in 0..restarts {
        let mut rng = rng::substream(base, r as u64);
        let phi: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * TAU).collect();
        let (phi, values) = descend(inst, phi);
        let (x, v) = if n == 1 {
            let x = SignVector::ones(1);
            let v = inst.evaluate(&x)?;
            (x, v)
        } else {
            hyperplane_partitions_rank2(&FactorMatrix::from_angles(&phi)?, inst)?
        };
        trace.descents.push(values);
        trace.restart_values.push(v);
        if super::improves(v, &x, &best) {
            best = Some((x, v));
        }
        trace
            .best_values
            .push(best.as_ref().map(|b| b.1).unwrap_or(v));
    }
    let (x, _) = best.expect("restarts >= 1");
    let value = inst.evaluate(&x)?;
    Ok((x, value, trace))
}
