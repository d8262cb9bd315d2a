use ndarray::{Array1, Array2};
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::instance::{sign_energy, sign_of, Convention, QuboInstance, SignVector};
use crate::rng::{self, tag};

/// Ballistic simulated bifurcation.
///
/// The dynamics are `x' = y`, `y' = -(mu(t) - lambda) x + J x - gamma y`
/// with `J = -Q` off the diagonal. `None` fields are resolved against the
/// spectral radius `rho` of `J`: `dt = 0.25 / sqrt(rho)`,
/// `gamma = 0.1 sqrt(rho)`, and `mu` ramps from `lambda + 2 rho` down to
/// `lambda`, crossing the threshold `mu_c = lambda + rho` where the origin
/// loses stability.
#[derive(Debug, Clone, PartialEq)]
pub struct SbParams {
    pub lambda: f64,
    pub gamma: Option<f64>,
    pub dt: Option<f64>,
    pub steps: usize,
    pub mu_start: Option<f64>,
    pub mu_end: Option<f64>,
    pub seed: u64,
}

impl Default for SbParams {
    fn default() -> Self {
        SbParams {
            lambda: 0.0,
            gamma: None,
            dt: None,
            steps: 1000,
            mu_start: None,
            mu_end: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SbTrace {
    pub rho: f64,
    pub dt: f64,
    pub gamma: f64,
    /// `mu` at each step.
    pub mu: Vec<f64>,
    /// Best sign-vector value seen after each step.
    pub best_values: Vec<f64>,
    /// Continuous positions after the last step.
    pub final_state: Vec<f64>,
}

/// Largest absolute eigenvalue of a symmetric matrix by power iteration on
/// `J^2`.
pub fn spectral_radius(j: &Array2<f64>, tol: f64, max_iter: usize, seed: u64) -> f64 {
    let n = j.nrows();
    let mut rng = rng::from_seed(seed);
    let mut v: Array1<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let norm = v.dot(&v).sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    v /= norm;
    let mut estimate = 0.0;
    for _ in 0..max_iter {
        let w = j.dot(&v);
        let w2 = j.dot(&w);
        let next = v.dot(&w2);
        let norm = w2.dot(&w2).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v = w2 / norm;
        let done = (next - estimate).abs() <= tol * next.abs();
        estimate = next;
        if done {
            break;
        }
    }
    estimate.max(0.0).sqrt()
}

fn coupling(inst: &QuboInstance) -> Array2<f64> {
    let mut j = inst.q().mapv(|v| -v);
    j.diag_mut().fill(0.0);
    j
}

pub fn simulated_bifurcation(
    inst: &QuboInstance,
    p: &SbParams,
) -> Result<(SignVector, f64, SbTrace)> {
    inst.require(Convention::PlusMinusOne)?;
    if p.steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    let n = inst.n();
    let j = coupling(inst);
    let mut rho = spectral_radius(&j, 1e-14, 100_000, rng::derive_seed(p.seed, tag::DIRECTION));
    if rho == 0.0 {
        rho = 1.0;
    }
    let dt = p.dt.unwrap_or(0.25 / rho.sqrt());
    let gamma = p.gamma.unwrap_or(0.1 * rho.sqrt());
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "damping must be positive, got {gamma}"
        )));
    }
    let mu_start = p.mu_start.unwrap_or(p.lambda + 2.0 * rho);
    let mu_end = p.mu_end.unwrap_or(p.lambda);

    let mut rng = rng::from_seed(rng::derive_seed(p.seed, tag::INIT));
    let mut x: Array1<f64> = (0..n).map(|_| 0.2 * (rng.random::<f64>() - 0.5)).collect();
    let mut y = Array1::<f64>::zeros(n);
    let mut best: Option<(Vec<i8>, f64)> = None;
    let mut trace = SbTrace {
        rho,
        dt,
        gamma,
        ..SbTrace::default()
    };
    let q = inst.q();

    for step in 0..p.steps {
        let frac = if p.steps > 1 {
            step as f64 / (p.steps - 1) as f64
        } else {
            1.0
        };
        let mu = mu_start + (mu_end - mu_start) * frac;
        trace.mu.push(mu);
        let force = j.dot(&x);
        for i in 0..n {
            y[i] += dt * (-(mu - p.lambda) * x[i] + force[i] - gamma * y[i]);
            x[i] += dt * y[i];
            if x[i].abs() > 1.0 {
                x[i] = x[i].signum();
                y[i] = 0.0;
            }
        }
        let s: Vec<i8> = x.iter().map(|&v| sign_of(v)).collect();
        let e = sign_energy(q, &s);
        if best
            .as_ref()
            .is_none_or(|(bs, bv)| e < *bv || (e == *bv && s < *bs))
        {
            best = Some((s, e));
        }
        trace
            .best_values
            .push(best.as_ref().map(|b| b.1).unwrap_or(e));
    }
    trace.final_state = x.to_vec();
    let (bx, _) = best.expect("steps >= 1");
    let bx = SignVector::new(bx)?;
    let value = inst.evaluate(&bx)?;
    Ok((bx, value, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn radius_of_diagonal() {
        let j = array![[0.0, 0.0], [0.0, -3.0]];
        assert!((spectral_radius(&j, 1e-15, 1000, 1) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_coupling_decays() {
        let inst = QuboInstance::plus_minus_one(Array2::zeros((4, 4))).unwrap();
        let p = SbParams {
            steps: 2000,
            ..SbParams::default()
        };
        let (x, v, trace) = simulated_bifurcation(&inst, &p).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(x.len(), 4);
        assert!(trace.final_state.iter().all(|v| v.abs() < 1e-3));
    }

    #[test]
    fn mu_ramps_between_endpoints() {
        let inst = crate::reductions::gen_random_gaussian(5, 1).unwrap();
        let p = SbParams {
            steps: 11,
            mu_start: Some(2.0),
            mu_end: Some(1.0),
            ..SbParams::default()
        };
        let (_, _, trace) = simulated_bifurcation(&inst, &p).unwrap();
        assert_eq!(trace.mu[0], 2.0);
        assert_eq!(trace.mu[10], 1.0);
    }
}
