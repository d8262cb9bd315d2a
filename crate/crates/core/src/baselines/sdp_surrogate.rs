use crate::dem::{retract, riemannian_project};
use crate::error::{Error, Result};
use crate::instance::{Convention, QuboInstance, SignVector};
use crate::rng::{self, tag};
use crate::rounding::{gw_round, FactorMatrix, RoundingResult};

const ARMIJO: f64 = 1e-4;

/// `ceil(sqrt(2n))`, at most `n`.
pub fn default_surrogate_rank(n: usize) -> usize {
    ((2.0 * n as f64).sqrt().ceil() as usize).clamp(1, n.max(1))
}

#[derive(Debug, Clone)]
pub struct SdpTrace {
    pub rank: usize,
    /// `<Q, F F^T>` before each step and after the last.
    pub relaxation_values: Vec<f64>,
    /// Final relaxation factor, the one that was rounded.
    pub factor: FactorMatrix,
    pub rounding: RoundingResult,
}

impl SdpTrace {
    pub fn relaxation_value(&self) -> f64 {
        *self
            .relaxation_values
            .last()
            .expect("at least the start value")
    }
}

fn linear_value(inst: &QuboInstance, f: &FactorMatrix) -> f64 {
    let q = inst.q();
    let qf = q.dot(f.as_array());
    qf.iter().zip(f.as_array().iter()).map(|(a, b)| a * b).sum()
}

/// Stand-in for the GW semidefinite relaxation: Riemannian descent with
/// backtracking on `<Q, F F^T>` over unit-row factors of rank `rank`
/// (default [`default_surrogate_rank`]), followed by GW rounding.
pub fn gw_sdp_surrogate(
    inst: &QuboInstance,
    rank: Option<usize>,
    steps: usize,
    trials: usize,
    seed: u64,
) -> Result<(SignVector, f64, SdpTrace)> {
    inst.require(Convention::PlusMinusOne)?;
    let n = inst.n();
    let rank = rank.unwrap_or_else(|| default_surrogate_rank(n));
    if rank == 0 || rank > n {
        return Err(Error::InvalidArgument(format!(
            "rank must lie in [1, {n}], got {rank}"
        )));
    }
    let mut f = FactorMatrix::random(n, rank, rng::derive_seed(seed, tag::INIT))?;
    let mut value = linear_value(inst, &f);
    let mut values = vec![value];
    let mut step = 1.0 / (1.0 + 2.0 * inst.max_abs() * n as f64);
    for _ in 0..steps {
        let g = riemannian_project(&f, &(inst.q().dot(f.as_array()) * 2.0))?;
        let g2: f64 = g.iter().map(|v| v * v).sum();
        if g2.sqrt() <= 1e-12 * (1.0 + value.abs()) {
            break;
        }
        let mut t = 2.0 * step;
        let accepted = loop {
            let trial = retract(f.as_array() - &(&g * t))?;
            let v = linear_value(inst, &trial);
            if v <= value - ARMIJO * t * g2 {
                break Some((trial, v));
            }
            t *= 0.5;
            if t < 1e-16 {
                break None;
            }
        };
        let Some((trial, v)) = accepted else { break };
        f = trial;
        value = v;
        step = t;
        values.push(value);
    }
    let rounding = gw_round(inst, &f, trials, rng::derive_seed(seed, tag::ROUNDING))?;
    let x = rounding.best_x.clone();
    let v = inst.evaluate(&x)?;
    Ok((
        x,
        v,
        SdpTrace {
            rank,
            relaxation_values: values,
            factor: f,
            rounding,
        },
    ))
}
