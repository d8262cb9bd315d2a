//! Goemans-Williamson randomized rounding from a factor `F` of the
//! correlation matrix `X = F F^T`, and the closed-form expectation of the
//! rounded objective.

use std::f64::consts::{FRAC_2_PI, PI};

use ndarray::{Array1, Array2, ArrayView1};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::instance::{sign_energy, sign_field, sign_of, Convention, QuboInstance, SignVector};
use crate::rng;

/// Tolerance on row norms accepted by [`FactorMatrix::new`].
pub const ROW_NORM_TOL: f64 = 1e-10;

/// `n x k` factor with unit-norm rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorMatrix(Array2<f64>);

impl FactorMatrix {
    pub fn new(f: Array2<f64>) -> Result<Self> {
        let (n, k) = f.dim();
        if n == 0 || k == 0 || k > n {
            return Err(Error::InvalidArgument(format!(
                "factor shape {n}x{k} needs 1 <= k <= n"
            )));
        }
        for (row, r) in f.rows().into_iter().enumerate() {
            let norm = r.dot(&r).sqrt();
            if (norm - 1.0).abs() > ROW_NORM_TOL || !norm.is_finite() {
                return Err(Error::NotNormalized { row, norm });
            }
        }
        Ok(FactorMatrix(f.as_standard_layout().into_owned()))
    }

    /// Normalizes every row of `f`. Zero rows are rejected.
    pub fn normalized(mut f: Array2<f64>) -> Result<Self> {
        for (row, mut r) in f.rows_mut().into_iter().enumerate() {
            let norm = r.dot(&r).sqrt();
            if norm == 0.0 || !norm.is_finite() {
                return Err(Error::NotNormalized { row, norm });
            }
            r.mapv_inplace(|v| v / norm);
        }
        Self::new(f)
    }

    /// Rows drawn i.i.d. from N(0, I_k), then normalized.
    pub fn random(n: usize, k: usize, seed: u64) -> Result<Self> {
        let mut rng = rng::from_seed(seed);
        let f = Array2::from_shape_simple_fn((n, k), || StandardNormal.sample(&mut rng));
        Self::normalized(f)
    }

    /// Rank-1 factor with rows `(x_i)`.
    pub fn from_signs(x: &SignVector) -> Self {
        FactorMatrix(Array2::from_shape_fn((x.len(), 1), |(i, _)| {
            f64::from(x.as_slice()[i])
        }))
    }

    /// Rank-2 factor with rows `(cos phi_i, sin phi_i)`.
    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        let f = Array2::from_shape_fn((angles.len(), 2), |(i, c)| {
            if c == 0 {
                angles[i].cos()
            } else {
                angles[i].sin()
            }
        });
        Self::new(f)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn k(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_array(self) -> Array2<f64> {
        self.0
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.0.row(i)
    }

    /// `X = F F^T`.
    pub fn gram(&self) -> Array2<f64> {
        self.0.dot(&self.0.t())
    }

    /// Largest deviation of a row norm from 1.
    pub fn max_norm_error(&self) -> f64 {
        self.0
            .rows()
            .into_iter()
            .map(|r| (r.dot(&r).sqrt() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Outcome of repeated GW rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundingResult {
    pub best_x: SignVector,
    pub best_value: f64,
    pub trial_values: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl RoundingResult {
    pub fn mean(&self) -> f64 {
        self.trial_values.iter().sum::<f64>() / self.trials as f64
    }

    /// Sample standard deviation; 0 for a single trial.
    pub fn std_dev(&self) -> f64 {
        if self.trials < 2 {
            return 0.0;
        }
        let m = self.mean();
        let ss: f64 = self.trial_values.iter().map(|v| (v - m).powi(2)).sum();
        (ss / (self.trials - 1) as f64).sqrt()
    }

    pub fn standard_error(&self) -> f64 {
        self.std_dev() / (self.trials as f64).sqrt()
    }
}

fn check_pair(inst: &QuboInstance, f: &FactorMatrix) -> Result<()> {
    inst.require(Convention::PlusMinusOne)?;
    if f.n() != inst.n() {
        return Err(Error::DimensionMismatch {
            expected: inst.n(),
            found: f.n(),
        });
    }
    Ok(())
}

/// Sign vector of trial `trial`: `x = sgn(F psi)` with `psi ~ N(0, I_k)`
/// read from substream `trial` of `seed`.
pub fn gw_sample(f: &FactorMatrix, seed: u64, trial: u64) -> SignVector {
    let mut rng = rng::substream(seed, trial);
    let psi: Array1<f64> = (0..f.k())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    SignVector::from_signs(f.as_array().dot(&psi))
}

/// Draws `trials` GW samples and keeps the best.
///
/// Ties on the value are broken by the lexicographically smallest sign
/// vector, so the result does not depend on the order trials are evaluated.
pub fn gw_round(
    inst: &QuboInstance,
    f: &FactorMatrix,
    trials: usize,
    seed: u64,
) -> Result<RoundingResult> {
    check_pair(inst, f)?;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let q = inst.q();
    let mut trial_values = Vec::with_capacity(trials);
    let mut best: Option<(f64, SignVector)> = None;
    for t in 0..trials {
        let x = gw_sample(f, seed, t as u64);
        let value = sign_energy(q, x.as_slice());
        trial_values.push(value);
        let better = match &best {
            None => true,
            Some((bv, bx)) => value < *bv || (value == *bv && x < *bx),
        };
        if better {
            best = Some((value, x));
        }
    }
    let (best_value, best_x) = best.expect("at least one trial");
    Ok(RoundingResult {
        best_x,
        best_value,
        trial_values,
        trials,
        seed,
    })
}

/// `(2/pi) <Q, arcsin X>` with `X = F F^T`, the expected objective of GW
/// rounding.
///
/// Diagonal entries of `X` are exactly 1 on the factor manifold and
/// contribute `Q_ii`; off-diagonal entries are clamped to `[-1, 1]`.
pub fn expected_value(inst: &QuboInstance, f: &FactorMatrix) -> Result<f64> {
    check_pair(inst, f)?;
    Ok(expectation_unchecked(inst.q(), f.as_array()))
}

pub(crate) fn expectation_unchecked(q: &Array2<f64>, f: &Array2<f64>) -> f64 {
    let n = q.nrows();
    let x = f.dot(&f.t());
    let mut off = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let qij = q[[i, j]];
            if qij != 0.0 {
                off += qij * x[[i, j]].clamp(-1.0, 1.0).asin();
            }
        }
    }
    q.diag().sum() + 2.0 * FRAC_2_PI * off
}

/// Best sign pattern cut out of rank-2 rows by a line through the origin.
///
/// A line with normal angle `a` assigns `x_i = sgn cos(theta_i - a)`. As `a`
/// sweeps a half turn each point changes side exactly once, at
/// `theta_i + pi/2 (mod pi)`; patterns beyond a half turn are negations with
/// the same objective. The sweep sorts those critical angles (`O(n log n)`)
/// and updates the objective incrementally per flip (`O(n)`), visiting
/// every distinct pattern once.
pub fn hyperplane_partitions_rank2(
    f: &FactorMatrix,
    inst: &QuboInstance,
) -> Result<(SignVector, f64)> {
    check_pair(inst, f)?;
    if f.k() != 2 {
        return Err(Error::InvalidArgument(format!(
            "rank-2 enumeration needs k = 2, got {}",
            f.k()
        )));
    }
    let n = f.n();
    let q = inst.q();
    let theta: Vec<f64> = (0..n).map(|i| f.row(i)[1].atan2(f.row(i)[0])).collect();
    let mut order: Vec<(f64, usize)> = theta
        .iter()
        .enumerate()
        .map(|(i, &t)| ((t + PI / 2.0).rem_euclid(PI), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    // start inside the arc that wraps from the last critical angle to the first
    let first = order[0].0;
    let last = order[n - 1].0;
    let start = 0.5 * (last - PI + first);
    let mut x: Vec<i8> = theta.iter().map(|&t| sign_of((t - start).cos())).collect();
    let mut field = sign_field(q, &x);
    let mut value = sign_energy(q, &x);
    let mut best = (x.clone(), value);

    let mut idx = 0;
    while idx < n {
        let angle = order[idx].0;
        while idx < n && order[idx].0 == angle {
            let i = order[idx].1;
            let xi = f64::from(x[i]);
            value += -4.0 * xi * field[i] + 4.0 * q[[i, i]];
            for (j, h) in field.iter_mut().enumerate() {
                *h -= 2.0 * xi * q[[j, i]];
            }
            x[i] = -x[i];
            idx += 1;
        }
        if value < best.1 {
            best = (x.clone(), value);
        }
    }
    let exact = sign_energy(q, &best.0);
    Ok((SignVector::new(best.0)?, exact))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn two_spin() -> QuboInstance {
        QuboInstance::plus_minus_one(array![[0.0, 1.0], [1.0, 0.0]]).unwrap()
    }

    #[test]
    fn factor_invariants() {
        assert!(FactorMatrix::new(array![[1.0, 0.0], [0.5, 0.0]]).is_err());
        assert!(FactorMatrix::new(array![[1.0, 0.0, 0.0]]).is_err());
        assert!(FactorMatrix::normalized(array![[0.0, 0.0], [1.0, 0.0]]).is_err());
        let f = FactorMatrix::random(6, 3, 1).unwrap();
        assert!(f.max_norm_error() <= ROW_NORM_TOL);
    }

    #[test]
    fn coherent_rows_give_all_equal_signs() {
        let q = array![[1.0, -2.0, 0.5], [-2.0, 0.0, 1.0], [0.5, 1.0, 3.0]];
        let inst = QuboInstance::plus_minus_one(q).unwrap();
        let row = [0.6, 0.8];
        let f = FactorMatrix::new(Array2::from_shape_fn((3, 2), |(_, c)| row[c])).unwrap();
        let res = gw_round(&inst, &f, 50, 3).unwrap();
        for &v in &res.trial_values {
            assert_eq!(v, inst.total_sum());
        }
        let s = res.best_x.as_slice();
        assert!(s.iter().all(|&v| v == s[0]));
    }

    #[test]
    fn orthogonal_rows_have_zero_mean() {
        let inst = two_spin();
        let f = FactorMatrix::new(array![[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(expected_value(&inst, &f).unwrap(), 0.0);
        let res = gw_round(&inst, &f, 20_000, 9).unwrap();
        assert!(
            res.mean().abs() <= 3.0 * res.standard_error(),
            "mean {}",
            res.mean()
        );
    }

    #[test]
    fn rounding_is_deterministic() {
        let inst = crate::reductions::gen_random_gaussian(8, 2).unwrap();
        let f = FactorMatrix::random(8, 3, 5).unwrap();
        assert_eq!(
            gw_round(&inst, &f, 200, 4).unwrap(),
            gw_round(&inst, &f, 200, 4).unwrap()
        );
        assert!(gw_round(&inst, &f, 0, 4).is_err());
    }

    #[test]
    fn rounding_result_invariants() {
        let inst = crate::reductions::gen_random_gaussian(10, 7).unwrap();
        let f = FactorMatrix::random(10, 4, 1).unwrap();
        let res = gw_round(&inst, &f, 300, 8).unwrap();
        let min = res
            .trial_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert_eq!(res.best_value, min);
        assert_eq!(inst.evaluate(&res.best_x).unwrap(), res.best_value);
        let single = gw_round(&inst, &f, 1, 8).unwrap();
        assert_eq!(single.std_dev(), 0.0);
    }

    #[test]
    fn identity_expectation_is_trace() {
        let q = array![[2.0, 1.0, -1.0], [1.0, -3.0, 0.5], [-1.0, 0.5, 0.25]];
        let inst = QuboInstance::plus_minus_one(q).unwrap();
        let f = FactorMatrix::new(Array2::eye(3)).unwrap();
        assert_eq!(expected_value(&inst, &f).unwrap(), inst.trace());
    }

    #[test]
    fn rank_one_expectation_is_objective() {
        let inst = crate::reductions::gen_random_gaussian(7, 3).unwrap();
        let x = SignVector::new(vec![1, -1, -1, 1, 1, -1, 1]).unwrap();
        let f = FactorMatrix::from_signs(&x);
        let e = expected_value(&inst, &f).unwrap();
        assert!((e - inst.evaluate(&x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn rank2_identical_points() {
        let q = array![[0.0, 1.0, 1.0], [1.0, 0.0, -2.0], [1.0, -2.0, 0.0]];
        let inst = QuboInstance::plus_minus_one(q).unwrap();
        let f = FactorMatrix::from_angles(&[0.3, 0.3, 0.3]).unwrap();
        let (x, v) = hyperplane_partitions_rank2(&f, &inst).unwrap();
        assert_eq!(v, inst.total_sum());
        let s = x.as_slice();
        assert!(s.iter().all(|&e| e == s[0]));
    }

    #[test]
    fn rank2_requires_two_columns() {
        let inst = two_spin();
        let f = FactorMatrix::new(array![[1.0], [1.0]]).unwrap();
        assert!(hyperplane_partitions_rank2(&f, &inst).is_err());
    }
}
