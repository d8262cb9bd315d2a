//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use ndarray::Array2;
use qubo_dem::{QuboInstance, SignVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every sign vector of length `n`, in binary counting order.
pub fn all_signs(n: usize) -> impl Iterator<Item = Vec<i8>> {
    (0u64..1 << n).map(move |mask| {
        (0..n)
            .map(|i| if mask >> i & 1 == 1 { -1 } else { 1 })
            .collect()
    })
}

/// Plain double loop, deliberately not sharing code with the library.
pub fn naive_value(q: &Array2<f64>, x: &[i8]) -> f64 {
    let n = x.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            total += q[[i, j]] * f64::from(x[i]) * f64::from(x[j]);
        }
    }
    total
}

pub fn naive_minimum(inst: &QuboInstance) -> f64 {
    all_signs(inst.n())
        .map(|x| naive_value(inst.q(), &x))
        .fold(f64::INFINITY, f64::min)
}

pub fn signs(v: Vec<i8>) -> SignVector {
    SignVector::new(v).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric matrix with entries uniform in `[-1, 1]`.
pub fn uniform_symmetric(n: usize, seed: u64) -> Array2<f64> {
    let mut r = rng(seed);
    let mut q = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let v: f64 = r.random_range(-1.0..1.0);
            q[[i, j]] = v;
            q[[j, i]] = v;
        }
    }
    q
}

pub fn standard_normal(r: &mut ChaCha8Rng) -> f64 {
    // Box-Muller, independent of rand_distr
    let u1: f64 = 1.0 - r.random::<f64>();
    let u2: f64 = r.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Unit-row matrix with Gaussian rows.
pub fn random_unit_rows(n: usize, k: usize, seed: u64) -> Array2<f64> {
    let mut r = rng(seed);
    let mut f = Array2::from_shape_simple_fn((n, k), || standard_normal(&mut r));
    for mut row in f.rows_mut() {
        let norm = row.dot(&row).sqrt();
        row /= norm;
    }
    f
}

/// Random matrix whose rows are orthogonal to the rows of `f`, scaled to
/// unit Frobenius norm.
pub fn random_tangent(f: &Array2<f64>, seed: u64) -> Array2<f64> {
    let mut r = rng(seed);
    let mut d = Array2::from_shape_simple_fn(f.dim(), || standard_normal(&mut r));
    for (mut di, fi) in d.rows_mut().into_iter().zip(f.rows()) {
        let s = di.dot(&fi);
        di.scaled_add(-s, &fi);
    }
    let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    d / norm
}

pub fn renormalize(mut f: Array2<f64>) -> Array2<f64> {
    for mut row in f.rows_mut() {
        let norm = row.dot(&row).sqrt();
        row /= norm;
    }
    f
}

/// `(2/pi) sum_ij Q_ij asin(X_ij)` straight from the definition. The unit
/// diagonal is set exactly: `asin` near 1 would amplify the `1e-16` error of
/// `|f_i|^2` to `1e-8`.
pub fn naive_phi(q: &Array2<f64>, f: &Array2<f64>) -> f64 {
    let mut x = f.dot(&f.t());
    x.diag_mut().fill(1.0);
    let mut total = 0.0;
    for ((i, j), qij) in q.indexed_iter() {
        total += qij * x[[i, j]].clamp(-1.0, 1.0).asin();
    }
    total * 2.0 / std::f64::consts::PI
}

/// [`naive_phi`] through pair angles, `(2/pi) asin X_ij = 1 - 2 theta_ij / pi`
/// with `theta_ij = 2 atan2(|f_i - f_j|, |f_i + f_j|)`. Accurate near
/// `X_ij = +-1`, where `asin` itself loses half the digits.
pub fn stable_phi(q: &Array2<f64>, f: &Array2<f64>) -> f64 {
    let n = f.nrows();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let diff = &f.row(i) - &f.row(j);
            let sum = &f.row(i) + &f.row(j);
            let theta = 2.0 * diff.dot(&diff).sqrt().atan2(sum.dot(&sum).sqrt());
            total += q[[i, j]] * (1.0 - 2.0 * theta / std::f64::consts::PI);
        }
    }
    total
}
