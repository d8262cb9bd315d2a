mod common;

use std::f64::consts::PI;

use common::{random_tangent, rng, uniform_symmetric};
use ndarray::Array2;
use qubo_dem::dem::directional_derivative;
use qubo_dem::subproblem::{
    self, assemble, is_descent, solve, solve_with, DirectionProblem, SolveOptions, BOUNDARY_TOL,
};
use qubo_dem::{Error, FactorMatrix, QuboInstance};
use rand::Rng;

fn inst(q: Array2<f64>) -> QuboInstance {
    QuboInstance::plus_minus_one(q).unwrap()
}

fn frob(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn inner(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Rank-2 factor with distinct angles kept apart (mod pi), so no pair is
/// near the boundary.
fn interior_factor(n: usize, seed: u64) -> FactorMatrix {
    let mut r = rng(seed);
    let step = PI / n as f64;
    let angles: Vec<f64> = (0..n)
        .map(|i| (i as f64 + 0.5) * step + (r.random::<f64>() - 0.5) * 0.4 * step)
        .collect();
    FactorMatrix::from_angles(&angles).unwrap()
}

/// Six rank-2 rows where rows 0,1 coincide and rows 2,3 are antipodal.
/// `Q_01 < 0` makes pair (0,1) convex; `Q_23 < 0` makes pair (2,3) concave.
fn boundary_case(seed: u64) -> (QuboInstance, FactorMatrix, Array2<f64>) {
    let mut r = rng(seed);
    let mut a: Vec<f64> = (0..6).map(|_| r.random_range(0.0..2.0 * PI)).collect();
    a[1] = a[0];
    a[3] = a[2] + PI;
    let f = FactorMatrix::from_angles(&a).unwrap();
    let mut q = uniform_symmetric(6, seed + 1000);
    for (i, j) in [(0, 1), (2, 3)] {
        let v = -q[[i, j]].abs().max(0.1);
        q[[i, j]] = v;
        q[[j, i]] = v;
    }
    let d_curr = random_tangent(f.as_array(), seed + 2000);
    (inst(q), f, d_curr)
}

/// Seven rank-3 rows with rows 0..4 coincident and negatively coupled (six
/// coupled cones) and rows 5,6 antipodal with a concave coupling.
fn clustered_case(seed: u64) -> (QuboInstance, FactorMatrix, Array2<f64>) {
    let mut f = common::random_unit_rows(7, 3, seed);
    for i in 1..4 {
        let r0 = f.row(0).to_owned();
        f.row_mut(i).assign(&r0);
    }
    let r5 = f.row(5).to_owned();
    f.row_mut(6).assign(&(-&r5));
    let f = FactorMatrix::new(f).unwrap();
    let mut q = uniform_symmetric(7, seed + 4000);
    for i in 0..4 {
        for j in (i + 1)..4 {
            let v = -q[[i, j]].abs().max(0.05);
            q[[i, j]] = v;
            q[[j, i]] = v;
        }
    }
    let v = -q[[5, 6]].abs().max(0.1);
    q[[5, 6]] = v;
    q[[6, 5]] = v;
    let d_curr = random_tangent(f.as_array(), seed + 5000);
    (inst(q), f, d_curr)
}

fn all_cases(seed: u64) -> [(QuboInstance, FactorMatrix, Array2<f64>); 2] {
    [boundary_case(seed), clustered_case(seed)]
}

/// Random point of the feasible set: tangent rows, Frobenius norm <= 1.
fn random_feasible(f: &Array2<f64>, seed: u64) -> Array2<f64> {
    let scale: f64 = rng(seed + 31).random_range(0.0..=1.0);
    random_tangent(f, seed) * scale
}

/// `C = (4/pi) (Q / sqrt(1 - X^2)) F` over off-diagonal entries, built
/// without the library's term lists.
fn reference_linear_part(q: &Array2<f64>, f: &Array2<f64>) -> Array2<f64> {
    let n = f.nrows();
    let x = f.dot(&f.t());
    let mut c = Array2::zeros(f.dim());
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let w = 4.0 / PI * q[[i, j]] / (1.0 - x[[i, j]] * x[[i, j]]).sqrt();
                c.row_mut(i).scaled_add(w, &f.row(j));
            }
        }
    }
    c
}

#[test]
fn boundary_cases_have_both_kinds_of_pair() {
    for seed in 0..10 {
        let (q, f, d) = boundary_case(seed);
        let dp = assemble(&q, &f, &d, BOUNDARY_TOL).unwrap();
        assert_eq!(dp.cones.len(), 1, "seed {seed}");
        assert_eq!(dp.linearized.len(), 1, "seed {seed}");
        assert_eq!(
            dp.interior.len() + 2,
            15 - q.q().iter().filter(|v| **v == 0.0).count() / 2
        );
        assert!(dp.cones.iter().all(|t| t.coefficient() > 0.0));
        assert!(dp.linearized.iter().all(|t| t.coefficient() < 0.0));
    }
}

#[test]
fn solution_is_feasible_and_dominates_random_feasible_points() {
    for (seed, (q, f, d)) in (0..10).flat_map(|s| all_cases(s).map(|c| (s, c))) {
        let dp = assemble(&q, &f, &d, BOUNDARY_TOL).unwrap();
        let sol = solve(&dp).unwrap();
        let dstar = sol.direction.as_array();
        assert!(dp.is_feasible(dstar, 1e-8), "seed {seed}");
        let best = dp.objective(dstar);
        assert!((best - sol.objective).abs() <= 1e-12 * best.abs().max(1.0));
        // certified gap
        assert!(sol.lower_bound <= sol.objective + 1e-12);
        assert!(
            sol.objective - sol.lower_bound
                <= subproblem::GAP_TOL * sol.lower_bound.abs().max(1.0) + 1e-15
        );
        for t in 0..100 {
            let other = random_feasible(f.as_array(), seed * 1000 + t);
            assert!(dp.is_feasible(&other, 1e-8));
            assert!(
                dp.objective(&other) >= best - 1e-6,
                "seed {seed} sample {t}"
            );
        }
    }
}

#[test]
fn interior_only_matches_closed_form() {
    for seed in 0..10 {
        let n = 4 + seed as usize % 5;
        let q = inst(uniform_symmetric(n, seed));
        let f = interior_factor(n, seed);
        let dp = assemble(&q, &f, &Array2::zeros((n, 2)), BOUNDARY_TOL).unwrap();
        assert!(dp.cones.is_empty() && dp.linearized.is_empty());
        let c = reference_linear_part(q.q(), f.as_array());
        let mut pc = c.clone();
        for (mut row, fi) in pc.rows_mut().into_iter().zip(f.as_array().rows()) {
            let s = row.dot(&fi);
            row.scaled_add(-s, &fi);
        }
        let expected = &pc / -frob(&pc);
        let sol = solve(&dp).unwrap();
        let got = sol.direction.as_array();
        let err = frob(&(got - &expected));
        assert!(err <= 1e-6, "seed {seed}: {err}");
        assert!((sol.objective + frob(&pc)).abs() <= 1e-8 * frob(&pc).max(1.0));
    }
}

#[test]
fn interior_objective_equals_directional_derivative() {
    for seed in 0..20 {
        let n = 3 + seed as usize % 6;
        let q = inst(uniform_symmetric(n, seed + 50));
        let f = interior_factor(n, seed + 50);
        let dp = assemble(&q, &f, &Array2::zeros((n, 2)), BOUNDARY_TOL).unwrap();
        let d = random_feasible(f.as_array(), seed);
        let lhs = dp.objective(&d);
        let rhs = directional_derivative(&q, &f, &d).unwrap();
        assert!(
            (lhs - rhs).abs() <= 1e-8 * rhs.abs().max(1.0),
            "seed {seed}: {lhs} vs {rhs}"
        );
    }
}

#[test]
fn surrogate_bounds_true_derivative_from_above() {
    for seed in 0..20 {
        for (q, f, d_curr) in all_cases(seed + 300) {
            let dp = assemble(&q, &f, &d_curr, BOUNDARY_TOL).unwrap();
            for t in 0..10 {
                let d = random_feasible(f.as_array(), seed * 100 + t);
                let surrogate = dp.objective(&d);
                let exact = directional_derivative(&q, &f, &d).unwrap();
                assert!(
                    surrogate >= exact - 1e-8,
                    "seed {seed}/{t}: {surrogate} < {exact}"
                );
            }
            // tight along the linearization point itself
            let exact = directional_derivative(&q, &f, &d_curr).unwrap();
            assert!((dp.objective(&d_curr) - exact).abs() <= 1e-8 * exact.abs().max(1.0));
        }
    }
}

#[test]
fn solved_interior_direction_is_descent() {
    for seed in 0..20 {
        let n = 3 + seed as usize % 7;
        let q = inst(uniform_symmetric(n, seed + 500));
        let f = interior_factor(n, seed + 500);
        let dp = assemble(&q, &f, &Array2::zeros((n, 2)), BOUNDARY_TOL).unwrap();
        let sol = solve(&dp).unwrap();
        assert!(sol.direction.norm() > 0.5);
        assert!(
            is_descent(&q, &f, sol.direction.as_array()).unwrap(),
            "seed {seed}"
        );
        assert!(!is_descent(&q, &f, &Array2::zeros((n, 2))).unwrap());
        // the negated direction ascends
        let up = sol.direction.as_array() * -1.0;
        assert!(!is_descent(&q, &f, &up).unwrap());
    }
}

#[test]
fn is_descent_rejects_non_tangent_directions() {
    let q = inst(uniform_symmetric(4, 1));
    let f = interior_factor(4, 1);
    let radial = f.as_array().clone();
    assert!(is_descent(&q, &f, &radial).is_err());
}

#[test]
fn strict_solve_reports_iteration_cap() {
    let mut hit = 0;
    for seed in 0..10 {
        let (q, f, d) = clustered_case(seed);
        let dp = assemble(&q, &f, &d, BOUNDARY_TOL).unwrap();
        assert_eq!(dp.cones.len(), 6);
        let strict = SolveOptions {
            max_iterations: 1,
            gap_tol: 1e-14,
            accept_inexact: false,
        };
        match solve_with(&dp, &strict) {
            Err(Error::NotConverged { iterations, gap }) => {
                assert_eq!(iterations, 1);
                assert!(gap > 0.0);
                hit += 1;
            }
            Ok(sol) => assert!(sol.converged),
            Err(e) => panic!("unexpected error {e}"),
        }
        let loose = SolveOptions {
            accept_inexact: true,
            ..strict
        };
        let sol = solve_with(&dp, &loose).unwrap();
        assert!(dp.is_feasible(sol.direction.as_array(), 1e-8));
    }
    assert!(hit > 0);
}

#[test]
fn zero_cost_problem_returns_zero_direction() {
    let q = inst(Array2::zeros((5, 5)));
    let f = interior_factor(5, 9);
    let dp: DirectionProblem = assemble(&q, &f, &Array2::zeros((5, 2)), BOUNDARY_TOL).unwrap();
    let sol = solve(&dp).unwrap();
    assert_eq!(sol.direction.norm(), 0.0);
    assert_eq!(sol.objective, 0.0);
}

#[test]
fn assemble_rejects_zero_one_instances() {
    let q = QuboInstance::zero_one(uniform_symmetric(3, 2), None).unwrap();
    let f = interior_factor(3, 2);
    assert!(assemble(&q, &f, &Array2::zeros((3, 2)), BOUNDARY_TOL).is_err());
}

#[test]
fn linear_part_matches_gradient_inner_product() {
    let q = inst(uniform_symmetric(6, 4));
    let f = interior_factor(6, 4);
    let dp = assemble(&q, &f, &Array2::zeros((6, 2)), BOUNDARY_TOL).unwrap();
    let c = dp.linear_coefficients();
    let reference = reference_linear_part(q.q(), f.as_array());
    let d = random_feasible(f.as_array(), 4);
    assert!((inner(&c, &d) - inner(&reference, &d)).abs() <= 1e-10);
}
