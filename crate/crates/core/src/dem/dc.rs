//! Minimization of a difference of convex functions `g - h` by repeated
//! linearization of `h`.

use crate::error::{Error, Result};

/// A DC objective `g - h` with the oracles the iteration needs.
pub trait DcProblem {
    type Point: Clone;
    type Dual;

    fn g(&self, x: &Self::Point) -> f64;
    fn h(&self, x: &Self::Point) -> f64;
    /// Some `y` in the subdifferential of `h` at `x`.
    fn h_subgradient(&self, x: &Self::Point) -> Self::Dual;
    /// `argmin_x g(x) - <y, x>`.
    fn argmin_linearized(&self, y: &Self::Dual) -> Result<Self::Point>;

    fn value(&self, x: &Self::Point) -> f64 {
        self.g(x) - self.h(x)
    }
}

#[derive(Debug, Clone)]
pub struct DcOutcome<P> {
    pub x: P,
    /// `g - h` at `x_0, x_1, ..., x_N`.
    pub values: Vec<f64>,
}

/// Runs `iterations` steps of `y_k = dh(x_{k-1})`,
/// `x_k = argmin g - <y_k, .>` from `x0`.
pub fn dc_minimize<P: DcProblem>(
    problem: &P,
    x0: P::Point,
    iterations: usize,
) -> Result<DcOutcome<P::Point>> {
    let mut x = x0;
    let mut values = Vec::with_capacity(iterations + 1);
    values.push(problem.value(&x));
    for k in 1..=iterations {
        let y = problem.h_subgradient(&x);
        x = problem
            .argmin_linearized(&y)
            .map_err(|e| Error::AtIteration {
                iteration: k,
                source: Box::new(e),
            })?;
        values.push(problem.value(&x));
    }
    Ok(DcOutcome { x, values })
}
