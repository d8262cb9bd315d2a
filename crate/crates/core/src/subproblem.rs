//! Descent directions for exact DEM.
//!
//! At a factor `F` the one-sided directional derivative of `Phi` along a
//! tangent `D` is a sum over pairs `i < j` with `Q_ij != 0` (`a = (2/pi) Q_ij`):
//!
//! * interior pairs, `|X_ij| < 1 - eps`: `2 a (f_i.d_j + f_j.d_i) / sqrt(1 - X_ij^2)`;
//! * boundary pairs, `X_ij = s = +-1`: `-2 s a |d_i - s d_j|`, convex when
//!   `s = -sgn Q_ij` and concave otherwise.
//!
//! Concave pairs are replaced by the linear upper bound
//! `-2 s a <s_ij, d_i - s d_j>` with `s_ij` a subgradient of the norm at the
//! previous direction. What remains is
//!
//! ```text
//! min  <C, D> + sum_p c_p |d_i - s_p d_j|    s.t.  <f_i, d_i> = 0,  |D|_F <= 1
//! ```
//!
//! with `c_p > 0`, a second-order cone program whose interior epigraph
//! variables have been substituted into `C`.
//!
//! [`solve`] works on the dual `max_{|y_p| <= c_p} -|P_T(C + A^T y)|_F`,
//! where `P_T` projects rows onto the tangent spaces and `(A D)_p = d_i - s_p d_j`.
//! Accelerated projected gradient on `1/2 |P_T(C + A^T y)|^2` (with adaptive
//! restart) alternates projections onto the dual cone balls and the tangent
//! subspace; every iterate yields the feasible primal point
//! `D = -P_T(C + A^T y) / |P_T(C + A^T y)|` on the Frobenius sphere. The
//! difference between the best primal and dual values certifies optimality.

use std::f64::consts::FRAC_2_PI;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1};

use crate::dem::{check_tangent, directional_derivative};
use crate::error::{Error, Result};
use crate::instance::{Convention, QuboInstance};
use crate::rounding::FactorMatrix;

/// Distance of `|X_ij|` from 1 under which a pair counts as boundary.
pub const BOUNDARY_TOL: f64 = 1e-7;
pub const MAX_ITERATIONS: usize = 20_000;
/// Relative duality gap at which [`solve`] stops.
pub const GAP_TOL: f64 = 1e-7;

/// Smooth pair: contributes `2 alpha (f_i.d_j + f_j.d_i) / sqrt(1 - x^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorTerm {
    pub i: usize,
    pub j: usize,
    pub alpha: f64,
    pub x: f64,
}

impl InteriorTerm {
    pub fn weight(&self) -> f64 {
        2.0 * self.alpha / (1.0 - self.x * self.x).sqrt()
    }
}

/// Convex boundary pair: contributes `coefficient() * |d_i - sigma d_j|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeTerm {
    pub i: usize,
    pub j: usize,
    pub alpha: f64,
    pub sigma: f64,
}

impl ConeTerm {
    pub fn coefficient(&self) -> f64 {
        -2.0 * self.sigma * self.alpha
    }
}

/// Concave boundary pair, linearized: contributes
/// `coefficient() * <s, d_i - sigma d_j>`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedTerm {
    pub i: usize,
    pub j: usize,
    pub alpha: f64,
    pub sigma: f64,
    pub s: Array1<f64>,
}

impl LinearizedTerm {
    pub fn coefficient(&self) -> f64 {
        -2.0 * self.sigma * self.alpha
    }
}

/// The assembled direction-finding problem at one factor.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionProblem {
    pub n: usize,
    pub k: usize,
    pub factor: Array2<f64>,
    pub interior: Vec<InteriorTerm>,
    pub cones: Vec<ConeTerm>,
    pub linearized: Vec<LinearizedTerm>,
    /// Frobenius-norm bound on `D`.
    pub radius: f64,
}

/// A search direction: tangent rows, `|D|_F <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionMatrix(Array2<f64>);

impl DirectionMatrix {
    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_array(self) -> Array2<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        frobenius(&self.0)
    }
}

/// Stopping rules for [`solve_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub max_iterations: usize,
    /// Relative duality gap, scaled by `max(1, |lower bound|)`.
    pub gap_tol: f64,
    /// At the iteration cap, return the best primal point instead of failing.
    pub accept_inexact: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iterations: MAX_ITERATIONS,
            gap_tol: GAP_TOL,
            accept_inexact: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DirectionSolution {
    pub direction: DirectionMatrix,
    /// Surrogate objective at `direction`.
    pub objective: f64,
    /// Dual lower bound on the optimal value.
    pub lower_bound: f64,
    pub iterations: usize,
    /// The gap tolerance was met.
    pub converged: bool,
    /// Final dual iterate, one row per cone term.
    pub dual: Array2<f64>,
}

fn frobenius(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn diff_norm(a: ArrayView1<f64>, b: ArrayView1<f64>, sigma: f64) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - sigma * y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Classifies every pair with `Q_ij != 0` and builds the subproblem.
pub fn assemble(
    inst: &QuboInstance,
    f: &FactorMatrix,
    d_curr: &Array2<f64>,
    eps: f64,
) -> Result<DirectionProblem> {
    inst.require(Convention::PlusMinusOne)?;
    let (n, k) = (f.n(), f.k());
    if n != inst.n() {
        return Err(Error::DimensionMismatch {
            expected: inst.n(),
            found: n,
        });
    }
    if d_curr.dim() != (n, k) {
        return Err(Error::DimensionMismatch {
            expected: n * k,
            found: d_curr.len(),
        });
    }
    let x = f.gram();
    let q = inst.q();
    let mut interior = Vec::new();
    let mut cones = Vec::new();
    let mut linearized = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let qij = q[[i, j]];
            if qij == 0.0 {
                continue;
            }
            let alpha = FRAC_2_PI * qij;
            let xij = x[[i, j]];
            if xij.abs() < 1.0 - eps {
                interior.push(InteriorTerm {
                    i,
                    j,
                    alpha,
                    x: xij,
                });
                continue;
            }
            let sigma = xij.signum();
            if sigma == -qij.signum() {
                cones.push(ConeTerm { i, j, alpha, sigma });
            } else {
                let u = &d_curr.row(i) - &(&d_curr.row(j) * sigma);
                let norm = u.dot(&u).sqrt();
                let s = if norm > 0.0 {
                    u / norm
                } else {
                    Array1::zeros(k)
                };
                linearized.push(LinearizedTerm {
                    i,
                    j,
                    alpha,
                    sigma,
                    s,
                });
            }
        }
    }
    Ok(DirectionProblem {
        n,
        k,
        factor: f.as_array().clone(),
        interior,
        cones,
        linearized,
        radius: 1.0,
    })
}

impl DirectionProblem {
    /// `C` such that the linear part of the objective is `<C, D>`.
    pub fn linear_coefficients(&self) -> Array2<f64> {
        let f = &self.factor;
        let mut c = Array2::zeros((self.n, self.k));
        for t in &self.interior {
            let w = t.weight();
            c.row_mut(t.j).scaled_add(w, &f.row(t.i));
            c.row_mut(t.i).scaled_add(w, &f.row(t.j));
        }
        for t in &self.linearized {
            let w = t.coefficient();
            c.row_mut(t.i).scaled_add(w, &t.s);
            c.row_mut(t.j).scaled_add(-t.sigma * w, &t.s);
        }
        c
    }

    /// Surrogate objective at `d` (no feasibility check).
    pub fn objective(&self, d: &Array2<f64>) -> f64 {
        let c = self.linear_coefficients();
        self.objective_with(&c, d)
    }

    fn objective_with(&self, c: &Array2<f64>, d: &Array2<f64>) -> f64 {
        let linear: f64 = c.iter().zip(d.iter()).map(|(a, b)| a * b).sum();
        let conic: f64 = self
            .cones
            .iter()
            .map(|t| t.coefficient() * diff_norm(d.row(t.i), d.row(t.j), t.sigma))
            .sum();
        linear + conic
    }

    /// Row-wise projection onto the tangent spaces `<f_i, .> = 0`.
    pub fn project_tangent(&self, m: &Array2<f64>) -> Array2<f64> {
        let mut out = m.clone();
        for (mut o, fi) in out.rows_mut().into_iter().zip(self.factor.rows()) {
            let s = o.dot(&fi);
            o.scaled_add(-s, &fi);
        }
        out
    }

    pub fn is_feasible(&self, d: &Array2<f64>, tol: f64) -> bool {
        if d.dim() != (self.n, self.k) || frobenius(d) > self.radius + tol {
            return false;
        }
        self.factor
            .rows()
            .into_iter()
            .zip(d.rows())
            .all(|(fi, di)| fi.dot(&di).abs() <= tol)
    }

    /// Plain-text dump: a `direction_problem n k` header, the factor rows,
    /// then one line per term (`interior i j alpha x`, `cone i j alpha sigma`,
    /// `linearized i j alpha sigma s_1 .. s_k`).
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "direction_problem {} {}", self.n, self.k);
        for r in self.factor.rows() {
            let vals: Vec<String> = r.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(out, "factor {}", vals.join(" "));
        }
        for t in &self.interior {
            let _ = writeln!(
                out,
                "interior {} {} {:.16e} {:.16e}",
                t.i, t.j, t.alpha, t.x
            );
        }
        for t in &self.cones {
            let _ = writeln!(out, "cone {} {} {:.16e} {}", t.i, t.j, t.alpha, t.sigma);
        }
        for t in &self.linearized {
            let s: Vec<String> = t.s.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(
                out,
                "linearized {} {} {:.16e} {} {}",
                t.i,
                t.j,
                t.alpha,
                t.sigma,
                s.join(" ")
            );
        }
        out
    }

    pub fn write_dump(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.dump())
            .map_err(|e| Error::InvalidArgument(format!("dump failed: {e}")))
    }

    /// `C + A^T y`.
    fn dual_residual(&self, c: &Array2<f64>, y: &Array2<f64>) -> Array2<f64> {
        let mut m = c.clone();
        for (p, t) in self.cones.iter().enumerate() {
            m.row_mut(t.i).scaled_add(1.0, &y.row(p));
            m.row_mut(t.j).scaled_add(-t.sigma, &y.row(p));
        }
        m
    }

    /// `A R`: row `p` is `r_i - sigma_p r_j`.
    fn apply_a(&self, r: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros((self.cones.len(), self.k));
        for (p, t) in self.cones.iter().enumerate() {
            let mut row = out.row_mut(p);
            row.assign(&r.row(t.i));
            row.scaled_add(-t.sigma, &r.row(t.j));
        }
        out
    }

    /// Projects each dual row onto the ball of radius `c_p`.
    fn project_dual(&self, y: &mut Array2<f64>) {
        for (p, t) in self.cones.iter().enumerate() {
            let mut row = y.row_mut(p);
            let norm = row.dot(&row).sqrt();
            let cap = t.coefficient();
            if norm > cap {
                row.mapv_inplace(|v| v * cap / norm);
            }
        }
    }
}

/// Power-iteration estimate of the largest eigenvalue of `A P_T A^T`.
fn operator_norm_estimate(dp: &DirectionProblem) -> f64 {
    let zero = Array2::zeros((dp.n, dp.k));
    let mut v = Array2::from_shape_fn((dp.cones.len(), dp.k), |(p, c)| {
        1.0 + ((p * 7 + c * 3) % 5) as f64
    });
    let mut estimate = 0.0;
    for _ in 0..30 {
        let norm = frobenius(&v);
        if norm == 0.0 {
            return 0.0;
        }
        v /= norm;
        v = dp.apply_a(&dp.project_tangent(&dp.dual_residual(&zero, &v)));
        estimate = frobenius(&v);
    }
    estimate
}

/// Solves the direction subproblem to a relative duality gap of [`GAP_TOL`].
///
/// Returns `D = 0` when the dual bound shows no direction improves the
/// surrogate by more than the tolerance.
pub fn solve(dp: &DirectionProblem) -> Result<DirectionSolution> {
    solve_with(dp, &SolveOptions::default())
}

/// [`solve`] with explicit stopping rules.
pub fn solve_with(dp: &DirectionProblem, opts: &SolveOptions) -> Result<DirectionSolution> {
    solve_warm(dp, opts, None)
}

/// [`solve_with`] started from a dual point (projected onto the dual balls
/// first). `warm` must have one row per cone term.
pub fn solve_warm(
    dp: &DirectionProblem,
    opts: &SolveOptions,
    warm: Option<Array2<f64>>,
) -> Result<DirectionSolution> {
    let (n, k) = (dp.n, dp.k);
    let zero = || DirectionMatrix(Array2::zeros((n, k)));
    let c = dp.linear_coefficients();

    let m = dp.cones.len();
    let recover = |y: &Array2<f64>| -> (Array2<f64>, f64) {
        let r = dp.project_tangent(&dp.dual_residual(&c, y));
        let norm = frobenius(&r);
        (r, norm)
    };

    if m == 0 {
        let (r, norm) = recover(&Array2::zeros((0, k)));
        if norm <= opts.gap_tol {
            return Ok(DirectionSolution {
                direction: zero(),
                objective: 0.0,
                lower_bound: -norm,
                iterations: 0,
                converged: true,
                dual: Array2::zeros((0, k)),
            });
        }
        let d = r.mapv(|v| -v / norm);
        let objective = dp.objective_with(&c, &d);
        return Ok(DirectionSolution {
            direction: DirectionMatrix(d),
            objective,
            lower_bound: -norm,
            iterations: 0,
            converged: true,
            dual: Array2::zeros((0, k)),
        });
    }

    let mut lipschitz = operator_norm_estimate(dp).max(1e-12);
    let mut y = match warm {
        Some(w) if w.dim() == (m, k) => w,
        Some(w) => {
            return Err(Error::DimensionMismatch {
                expected: m * k,
                found: w.len(),
            })
        }
        None => Array2::zeros((m, k)),
    };
    dp.project_dual(&mut y);
    let mut z = y.clone();
    let mut momentum = 1.0f64;
    let mut best_primal = (0.0, Array2::zeros((n, k)));
    let mut best_dual = f64::NEG_INFINITY;

    for iter in 1..=opts.max_iterations {
        // projected gradient step from the extrapolated point, with L
        // doubled until the quadratic upper bound holds
        let (rz, nz) = recover(&z);
        let gz = dp.apply_a(&rz);
        let (y_next, r, norm) = loop {
            let mut cand = &z - &(&gz / lipschitz);
            dp.project_dual(&mut cand);
            let (r, norm) = recover(&cand);
            let diff = &cand - &z;
            let lin: f64 = gz.iter().zip(diff.iter()).map(|(a, b)| a * b).sum();
            let sq: f64 = diff.iter().map(|v| v * v).sum();
            let bound = 0.5 * nz * nz + lin + 0.5 * lipschitz * sq;
            if 0.5 * norm * norm <= bound + 1e-12 * (1.0 + bound.abs()) {
                break (cand, r, norm);
            }
            lipschitz *= 2.0;
        };

        let restart = {
            let a = &z - &y_next;
            let b = &y_next - &y;
            a.iter().zip(b.iter()).map(|(u, v)| u * v).sum::<f64>() > 0.0
        };
        let next_momentum = if restart {
            1.0
        } else {
            0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt())
        };
        z = if restart {
            y_next.clone()
        } else {
            &y_next + &((&y_next - &y) * ((momentum - 1.0) / next_momentum))
        };
        momentum = next_momentum;
        y = y_next;

        best_dual = best_dual.max(-norm);
        if norm > 0.0 {
            let d = r.mapv(|v| -v / norm);
            let value = dp.objective_with(&c, &d);
            if value < best_primal.0 {
                best_primal = (value, d);
            }
        }
        let tol = opts.gap_tol * best_dual.abs().max(1.0);
        if best_dual >= -tol {
            return Ok(DirectionSolution {
                direction: zero(),
                objective: 0.0,
                lower_bound: best_dual,
                iterations: iter,
                converged: true,
                dual: y,
            });
        }
        if best_primal.0 - best_dual <= tol {
            let (objective, d) = best_primal;
            return Ok(DirectionSolution {
                direction: DirectionMatrix(d),
                objective,
                lower_bound: best_dual,
                iterations: iter,
                converged: true,
                dual: y,
            });
        }
    }
    let gap = best_primal.0 - best_dual;
    if !opts.accept_inexact {
        return Err(Error::NotConverged {
            iterations: opts.max_iterations,
            gap,
        });
    }
    let (objective, d) = best_primal;
    Ok(DirectionSolution {
        direction: DirectionMatrix(d),
        objective,
        lower_bound: best_dual,
        iterations: opts.max_iterations,
        converged: false,
        dual: y,
    })
}

/// True iff `D` strictly decreases `Phi` to first order.
pub fn is_descent(inst: &QuboInstance, f: &FactorMatrix, d: &Array2<f64>) -> Result<bool> {
    check_tangent(f, d)?;
    Ok(directional_derivative(inst, f, d)? < 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn pm(q: Array2<f64>) -> QuboInstance {
        QuboInstance::plus_minus_one(q).unwrap()
    }

    #[test]
    fn interior_only_classification() {
        let inst = crate::reductions::gen_random_gaussian(5, 1).unwrap();
        // five directions 36 degrees apart, so every |X_ij| <= cos(pi/5)
        let angles: Vec<f64> = (0..5)
            .map(|i| i as f64 * std::f64::consts::PI / 5.0 + 0.3)
            .collect();
        let f = FactorMatrix::from_angles(&angles).unwrap();
        let dp = assemble(&inst, &f, &Array2::zeros((5, 2)), BOUNDARY_TOL).unwrap();
        assert_eq!(dp.interior.len(), 10);
        assert!(dp.cones.is_empty() && dp.linearized.is_empty());
    }

    #[test]
    fn boundary_classification() {
        let inst = pm(array![[0.0, -1.0], [-1.0, 0.0]]);
        let same = FactorMatrix::new(array![[1.0, 0.0], [1.0, 0.0]]).unwrap();
        let dp = assemble(&inst, &same, &Array2::zeros((2, 2)), BOUNDARY_TOL).unwrap();
        assert_eq!(dp.cones.len(), 1);
        assert_eq!(dp.cones[0].sigma, 1.0);
        assert!(dp.cones[0].coefficient() > 0.0);

        let opposite = FactorMatrix::new(array![[1.0, 0.0], [-1.0, 0.0]]).unwrap();
        let d_curr = array![[0.0, 1.0], [0.0, 1.0]];
        let dp = assemble(&inst, &opposite, &d_curr, BOUNDARY_TOL).unwrap();
        assert_eq!(dp.linearized.len(), 1);
        let t = &dp.linearized[0];
        assert_eq!(t.sigma, -1.0);
        assert_eq!(t.s, array![0.0, 1.0]);
        assert!(t.coefficient() < 0.0);
    }

    #[test]
    fn zero_subgradient_convention() {
        let inst = pm(array![[0.0, -1.0], [-1.0, 0.0]]);
        let opposite = FactorMatrix::new(array![[1.0, 0.0], [-1.0, 0.0]]).unwrap();
        let dp = assemble(&inst, &opposite, &Array2::zeros((2, 2)), BOUNDARY_TOL).unwrap();
        assert_eq!(dp.linearized[0].s, array![0.0, 0.0]);
    }

    #[test]
    fn zero_cost_gives_zero_direction() {
        let inst = pm(Array2::zeros((3, 3)));
        let f = FactorMatrix::random(3, 2, 1).unwrap();
        let dp = assemble(&inst, &f, &Array2::zeros((3, 2)), BOUNDARY_TOL).unwrap();
        let sol = solve(&dp).unwrap();
        assert_eq!(sol.objective, 0.0);
        assert_eq!(sol.direction.norm(), 0.0);
    }

    #[test]
    fn shape_mismatch() {
        let inst = pm(Array2::zeros((3, 3)));
        let f = FactorMatrix::random(3, 2, 1).unwrap();
        assert!(assemble(&inst, &f, &Array2::zeros((3, 3)), BOUNDARY_TOL).is_err());
    }

    #[test]
    fn convex_boundary_pair_alone_is_stationary() {
        // f1 = f2 with Q12 < 0 is a local minimum of that pair: no descent
        let inst = pm(array![[0.0, -1.0], [-1.0, 0.0]]);
        let f = FactorMatrix::new(array![[1.0, 0.0], [1.0, 0.0]]).unwrap();
        let dp = assemble(&inst, &f, &Array2::zeros((2, 2)), BOUNDARY_TOL).unwrap();
        let sol = solve(&dp).unwrap();
        assert_eq!(sol.direction.norm(), 0.0);
        assert!(!is_descent(&inst, &f, sol.direction.as_array()).unwrap());
    }

    #[test]
    fn dump_lists_every_term() {
        let inst = pm(array![[0.0, -1.0, 0.5], [-1.0, 0.0, 0.0], [0.5, 0.0, 0.0]]);
        let f = FactorMatrix::new(array![[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let dp = assemble(&inst, &f, &Array2::zeros((3, 2)), BOUNDARY_TOL).unwrap();
        let text = dp.dump();
        assert!(text.starts_with("direction_problem 3 2\n"));
        assert_eq!(text.lines().filter(|l| l.starts_with("cone ")).count(), 1);
        assert_eq!(
            text.lines().filter(|l| l.starts_with("interior ")).count(),
            1
        );
    }
}
