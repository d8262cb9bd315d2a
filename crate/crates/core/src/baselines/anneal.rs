use rand::seq::SliceRandom;
use rand::Rng as _;

use super::random_signs;
use crate::error::{Error, Result};
use crate::instance::{sign_energy, sign_field, Convention, QuboInstance, SignVector};
use crate::rng;

/// Geometric schedule `T_t = alpha^t T0` over `sweeps` sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct SaParams {
    pub t0: f64,
    pub alpha: f64,
    pub sweeps: usize,
    pub seed: u64,
}

impl SaParams {
    /// `T0 = max|Q_ij| n` and `alpha` such that the last sweep runs at
    /// about `1e-3 T0`.
    pub fn for_instance(inst: &QuboInstance, sweeps: usize, seed: u64) -> Self {
        let scale = inst.max_abs() * inst.n() as f64;
        let t0 = if scale > 0.0 { scale } else { 1.0 };
        let alpha = if sweeps > 1 {
            1e-3f64.powf(1.0 / (sweeps - 1) as f64)
        } else {
            0.5
        };
        SaParams {
            t0,
            alpha,
            sweeps,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0.is_finite() && self.t0 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "initial temperature must be positive, got {}",
                self.t0
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "cooling factor must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.sweeps == 0 {
            return Err(Error::InvalidArgument("sweeps must be at least 1".into()));
        }
        Ok(())
    }

    pub fn temperature(&self, sweep: usize) -> f64 {
        self.t0 * self.alpha.powi(sweep as i32)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SaTrace {
    /// Temperature of each sweep.
    pub temperatures: Vec<f64>,
    /// Best value seen by the end of each sweep.
    pub best_values: Vec<f64>,
    pub accepted: usize,
    pub proposed: usize,
}

/// Metropolis rule given a uniform draw `u` in `[0, 1)`.
#[inline]
pub fn metropolis_accept(delta: f64, temperature: f64, u: f64) -> bool {
    delta <= 0.0 || u < (-delta / temperature).exp()
}

/// Single-flip simulated annealing. Each sweep visits all variables in a
/// fresh random order.
pub fn simulated_annealing(
    inst: &QuboInstance,
    p: &SaParams,
) -> Result<(SignVector, f64, SaTrace)> {
    inst.require(Convention::PlusMinusOne)?;
    p.validate()?;
    let q = inst.q();
    let n = inst.n();
    let mut rng = rng::from_seed(p.seed);
    let mut x = random_signs(n, &mut rng);
    let mut field = sign_field(q, &x);
    let mut energy = sign_energy(q, &x);
    let mut best_x = x.clone();
    let mut best = energy;
    let mut order: Vec<usize> = (0..n).collect();
    let mut trace = SaTrace::default();

    for sweep in 0..p.sweeps {
        let t = p.temperature(sweep);
        trace.temperatures.push(t);
        order.shuffle(&mut rng);
        for &i in &order {
            let xi = f64::from(x[i]);
            let delta = -4.0 * xi * field[i] + 4.0 * q[[i, i]];
            trace.proposed += 1;
            if !metropolis_accept(delta, t, rng.random::<f64>()) {
                continue;
            }
            trace.accepted += 1;
            x[i] = -x[i];
            for (h, qj) in field.iter_mut().zip(q.row(i)) {
                *h -= 2.0 * xi * qj;
            }
            energy += delta;
            if energy < best {
                best = energy;
                best_x.copy_from_slice(&x);
            }
        }
        // resynchronize to keep rounding drift out of the comparisons
        energy = sign_energy(q, &x);
        trace.best_values.push(best);
    }
    let best_x = SignVector::new(best_x)?;
    let value = inst.evaluate(&best_x)?;
    Ok((best_x, value, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn zero_matrix() {
        let inst = QuboInstance::plus_minus_one(Array2::zeros((4, 4))).unwrap();
        let p = SaParams::for_instance(&inst, 10, 3);
        let (_, v, _) = simulated_annealing(&inst, &p).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn temperatures_follow_schedule() {
        let inst = crate::reductions::gen_random_gaussian(6, 2).unwrap();
        let p = SaParams {
            t0: 3.5,
            alpha: 0.9,
            sweeps: 25,
            seed: 1,
        };
        let (_, _, trace) = simulated_annealing(&inst, &p).unwrap();
        for (t, temp) in trace.temperatures.iter().enumerate() {
            assert_eq!(*temp, 0.9f64.powi(t as i32) * 3.5);
        }
    }

    #[test]
    fn default_schedule_ends_near_target() {
        let inst = crate::reductions::gen_random_gaussian(6, 2).unwrap();
        let p = SaParams::for_instance(&inst, 200, 0);
        let ratio = p.temperature(199) / p.t0;
        assert!((ratio - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_params() {
        let inst = crate::reductions::gen_random_gaussian(3, 2).unwrap();
        for p in [
            SaParams {
                t0: 0.0,
                alpha: 0.5,
                sweeps: 1,
                seed: 0,
            },
            SaParams {
                t0: 1.0,
                alpha: 1.0,
                sweeps: 1,
                seed: 0,
            },
            SaParams {
                t0: 1.0,
                alpha: 0.5,
                sweeps: 0,
                seed: 0,
            },
        ] {
            assert!(simulated_annealing(&inst, &p).is_err());
        }
    }
}
