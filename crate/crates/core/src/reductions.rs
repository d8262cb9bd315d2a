//! Reductions from combinatorial problems and random instance generation.

use std::collections::HashSet;

use ndarray::Array2;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::instance::{QuboInstance, SignVector, OFFSET_KEY, SCALE_KEY};
use crate::rng;

/// Simple undirected weighted graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    /// Builds a graph; each edge is normalized to `i < j`. Self-loops,
    /// duplicate pairs and out-of-range indices are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (a, b, w) in edges {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if j >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({a}, {b}) out of range for n = {n}"
                )));
            }
            if i == j {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {i}")));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidArgument(format!("duplicate edge ({i}, {j})")));
            }
            out.push((i, j, w));
        }
        Ok(WeightedGraph { n, edges: out })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    /// Weight of edges crossing the partition encoded by `x`.
    pub fn cut_weight(&self, x: &SignVector) -> f64 {
        let s = x.as_slice();
        self.edges
            .iter()
            .filter(|&&(i, j, _)| s[i] != s[j])
            .map(|e| e.2)
            .sum()
    }
}

/// MaxCut as a minimization QUBO with `Q = W/4`.
///
/// `cut_weight(x) = 1^T W 1 / 4 - x^T Q x`; the constant is stored as the
/// offset and the scale is `-1`, so [`QuboInstance::original_value`] returns
/// the cut weight.
pub fn from_maxcut(g: &WeightedGraph) -> Result<QuboInstance> {
    let n = g.n();
    let mut q = Array2::zeros((n, n));
    for &(i, j, w) in g.edges() {
        q[[i, j]] = w / 4.0;
        q[[j, i]] = w / 4.0;
    }
    let constant = g.total_weight() / 2.0;
    Ok(QuboInstance::plus_minus_one(q)?
        .with_name("maxcut")
        .with_metadata(OFFSET_KEY, constant.to_string())
        .with_metadata(SCALE_KEY, "-1"))
}

/// Subset-Sum partition as the rank-one QUBO `Q = w w^T`, whose objective is
/// `<w, x>^2`.
pub fn from_subset_sum(weights: &[u64]) -> Result<QuboInstance> {
    if weights.is_empty() {
        return Err(Error::InvalidArgument("weights must be non-empty".into()));
    }
    if weights.contains(&0) {
        return Err(Error::InvalidArgument("weights must be positive".into()));
    }
    let n = weights.len();
    let q = Array2::from_shape_fn((n, n), |(i, j)| weights[i] as f64 * weights[j] as f64);
    let label: Vec<String> = weights.iter().map(u64::to_string).collect();
    Ok(QuboInstance::plus_minus_one(q)?
        .with_name("subset_sum")
        .with_metadata("weights", label.join(",")))
}

/// Dense random instance: upper-triangle entries (diagonal included) drawn
/// i.i.d. from N(0, 1) in row-major order and mirrored.
pub fn gen_random_gaussian(n: usize, seed: u64) -> Result<QuboInstance> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let mut rng = rng::from_seed(seed);
    let mut q = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let v: f64 = StandardNormal.sample(&mut rng);
            q[[i, j]] = v;
            q[[j, i]] = v;
        }
    }
    Ok(QuboInstance::plus_minus_one(q)?
        .with_name(format!("random_n{n}_s{seed}"))
        .with_metadata("generator", "gaussian")
        .with_metadata("seed", seed.to_string()))
}
