//! Direct Expectation Minimization.
//!
//! Both solvers minimize `Phi(F) = (2/pi) <Q, arcsin(F F^T)>` over factors
//! with unit-norm rows, i.e. the expected objective of GW rounding with
//! covariance `F F^T`:
//!
//! * [`dem_rc`] takes Riemannian gradient steps, clipping `X = F F^T` away
//!   from `+-1` so the `1/sqrt(1 - X^2)` factor stays finite.
//! * [`exact_dem`] moves along directions from the second-order cone
//!   subproblem in [`crate::subproblem`], which models the non-smooth pairs
//!   with `|X_ij| = 1` exactly.

pub mod dc;

use std::collections::HashMap;
use std::f64::consts::FRAC_2_PI;
use std::path::PathBuf;
use std::time::Instant;

use ndarray::Array2;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::instance::{Convention, QuboInstance};
use crate::rng::{self, tag};
use crate::rounding::{
    expectation_unchecked, expected_value, gw_round, FactorMatrix, RoundingResult,
};
use crate::subproblem::{self, SolveOptions, BOUNDARY_TOL};

pub use dc::{dc_minimize, DcOutcome, DcProblem};

/// `|<f_i, d_i>|` accepted as tangent.
pub const TANGENCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct DemRcParams {
    pub rank: usize,
    pub steps: usize,
    pub rounds: usize,
    pub step_size: f64,
    pub clip: f64,
    pub seed: u64,
}

impl Default for DemRcParams {
    fn default() -> Self {
        DemRcParams {
            rank: 10,
            steps: 500,
            rounds: 100,
            step_size: 0.05,
            clip: 1e-6,
            seed: 0,
        }
    }
}

impl DemRcParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.rank == 0 {
            return bad("rank must be positive");
        }
        if self.rounds == 0 {
            return bad("rounds must be positive");
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return bad("step size must be positive");
        }
        if !(self.clip > 0.0 && self.clip < 0.5) {
            return bad("clip must lie in (0, 0.5)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub phi: f64,
    /// Frobenius norm of the Riemannian gradient (DEM-RC) or direction (exact DEM).
    pub step_norm: f64,
    pub elapsed: f64,
}

/// Per-iteration history of a descent run. Iteration 0 is the start point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DescentTrace {
    records: Vec<TraceRecord>,
}

impl DescentTrace {
    pub fn push(&mut self, record: TraceRecord) {
        if let Some(last) = self.records.last() {
            assert!(
                record.iteration > last.iteration,
                "trace iterations must increase"
            );
        }
        self.records.push(record);
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn phi_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.phi).collect()
    }

    pub fn initial_phi(&self) -> Option<f64> {
        self.records.first().map(|r| r.phi)
    }

    pub fn final_phi(&self) -> Option<f64> {
        self.records.last().map(|r| r.phi)
    }

    /// First iteration whose value is within `rel` of the final value.
    pub fn iterations_to_within(&self, rel: f64) -> Option<usize> {
        let last = self.final_phi()?;
        let tol = rel * last.abs();
        self.records
            .iter()
            .find(|r| (r.phi - last).abs() <= tol)
            .map(|r| r.iteration)
    }
}

impl DescentTrace {
    /// First iteration from which every later value stays within `rel` of
    /// the final value.
    pub fn iterations_to_settle(&self, rel: f64) -> Option<usize> {
        let last = self.final_phi()?;
        let tol = rel * last.abs();
        let start = self
            .records
            .iter()
            .rposition(|r| (r.phi - last).abs() > tol)
            .map_or(0, |p| p + 1);
        Some(self.records[start].iteration)
    }
}

/// Expected rounded objective of `f`; same as [`expected_value`].
pub fn phi(inst: &QuboInstance, f: &FactorMatrix) -> Result<f64> {
    expected_value(inst, f)
}

fn check_factor(inst: &QuboInstance, f: &FactorMatrix) -> Result<()> {
    inst.require(Convention::PlusMinusOne)?;
    if f.n() != inst.n() {
        return Err(Error::DimensionMismatch {
            expected: inst.n(),
            found: f.n(),
        });
    }
    Ok(())
}

/// `(4/pi) (Q ./ sqrt(1 - X.^2)) F` with `X` clipped to `[-1+clip, 1-clip]`.
///
/// The factor 4/pi accounts for `(i, j)` and `(j, i)` in the symmetric sum.
/// Diagonal pairs are skipped: `X_ii` is fixed at 1 on the manifold and
/// their term would only add a component along `f_i`.
pub fn euclidean_gradient(inst: &QuboInstance, f: &FactorMatrix, clip: f64) -> Result<Array2<f64>> {
    check_factor(inst, f)?;
    if !(clip > 0.0 && clip < 0.5) {
        return Err(Error::InvalidArgument("clip must lie in (0, 0.5)".into()));
    }
    let x = f.gram();
    Ok(gradient_from_gram(inst.q(), f.as_array(), &x, clip))
}

fn gradient_from_gram(q: &Array2<f64>, f: &Array2<f64>, x: &Array2<f64>, clip: f64) -> Array2<f64> {
    let n = q.nrows();
    let hi = 1.0 - clip;
    let mut w = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let qij = q[[i, j]];
            if qij != 0.0 {
                let xij = x[[i, j]].clamp(-hi, hi);
                let v = qij / (1.0 - xij * xij).sqrt();
                w[[i, j]] = v;
                w[[j, i]] = v;
            }
        }
    }
    let mut g = w.dot(f);
    g *= 2.0 * FRAC_2_PI;
    g
}

/// Projects each row of `g` onto the tangent space at the matching row of
/// `f`: `g_i - <g_i, f_i> f_i`.
pub fn riemannian_project(f: &FactorMatrix, g: &Array2<f64>) -> Result<Array2<f64>> {
    if g.dim() != f.as_array().dim() {
        return Err(Error::DimensionMismatch {
            expected: f.n() * f.k(),
            found: g.len(),
        });
    }
    Ok(project_rows(f.as_array(), g))
}

fn project_rows(f: &Array2<f64>, g: &Array2<f64>) -> Array2<f64> {
    let mut out = g.clone();
    for (mut o, fi) in out.rows_mut().into_iter().zip(f.rows()) {
        let s = o.dot(&fi);
        o.scaled_add(-s, &fi);
    }
    out
}

/// Row-wise renormalization.
pub fn retract(f: Array2<f64>) -> Result<FactorMatrix> {
    FactorMatrix::normalized(f)
}

#[derive(Debug, Clone)]
pub struct DemRcOutput {
    pub factor: FactorMatrix,
    pub rounding: RoundingResult,
    pub trace: DescentTrace,
}

/// DEM-RC: Riemannian gradient descent on `Phi` with clipping, followed by
/// GW rounding of the final factor.
pub fn dem_rc(inst: &QuboInstance, params: &DemRcParams) -> Result<DemRcOutput> {
    params.validate()?;
    inst.require(Convention::PlusMinusOne)?;
    let n = inst.n();
    let start = FactorMatrix::random(n, params.rank, rng::derive_seed(params.seed, tag::INIT))?;
    let (factor, trace) =
        riemannian_descent(inst, start, params.steps, params.step_size, params.clip)?;
    let rounding = gw_round(
        inst,
        &factor,
        params.rounds,
        rng::derive_seed(params.seed, tag::ROUNDING),
    )?;
    Ok(DemRcOutput {
        factor,
        rounding,
        trace,
    })
}

/// The descent half of DEM-RC from a given start.
pub fn riemannian_descent(
    inst: &QuboInstance,
    start: FactorMatrix,
    steps: usize,
    step_size: f64,
    clip: f64,
) -> Result<(FactorMatrix, DescentTrace)> {
    check_factor(inst, &start)?;
    let clock = Instant::now();
    let q = inst.q();
    let mut f = start.into_array();
    let mut trace = DescentTrace::default();
    let mut last_norm = 0.0;
    for t in 0..=steps {
        let x = f.dot(&f.t());
        trace.push(TraceRecord {
            iteration: t,
            phi: phi_from_gram(q, &x),
            step_norm: last_norm,
            elapsed: clock.elapsed().as_secs_f64(),
        });
        if t == steps {
            break;
        }
        let g = project_rows(&f, &gradient_from_gram(q, &f, &x, clip));
        last_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        f.scaled_add(-step_size, &g);
        normalize_rows(&mut f);
    }
    Ok((FactorMatrix::new(f)?, trace))
}

fn normalize_rows(f: &mut Array2<f64>) {
    for mut r in f.rows_mut() {
        let norm = r.dot(&r).sqrt();
        r.mapv_inplace(|v| v / norm);
    }
}

fn phi_from_gram(q: &Array2<f64>, x: &Array2<f64>) -> f64 {
    let n = q.nrows();
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

/// One-sided derivative of `Phi(retract(F + t D))` at `t = 0+`.
///
/// Pairs with `|X_ij| < 1 - BOUNDARY_TOL` contribute the smooth term
/// `2 a_ij (f_i.d_j + f_j.d_i) / sqrt(1 - X_ij^2)`; pairs at `X_ij = s = +-1`
/// contribute `-2 s a_ij |d_i - s d_j|`, where `a_ij = (2/pi) Q_ij`.
pub fn directional_derivative(
    inst: &QuboInstance,
    f: &FactorMatrix,
    d: &Array2<f64>,
) -> Result<f64> {
    check_factor(inst, f)?;
    if d.dim() != f.as_array().dim() {
        return Err(Error::DimensionMismatch {
            expected: f.n() * f.k(),
            found: d.len(),
        });
    }
    check_tangent(f, d)?;
    let x = f.gram();
    let q = inst.q();
    let n = inst.n();
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let qij = q[[i, j]];
            if qij == 0.0 {
                continue;
            }
            let alpha = FRAC_2_PI * qij;
            let xij = x[[i, j]];
            if xij.abs() < 1.0 - BOUNDARY_TOL {
                let lin = f.row(i).dot(&d.row(j)) + f.row(j).dot(&d.row(i));
                total += 2.0 * alpha * lin / (1.0 - xij * xij).sqrt();
            } else {
                let sigma = xij.signum();
                let diff = &d.row(i) - &(&d.row(j) * sigma);
                total += -2.0 * sigma * alpha * diff.dot(&diff).sqrt();
            }
        }
    }
    Ok(total)
}

pub(crate) fn check_tangent(f: &FactorMatrix, d: &Array2<f64>) -> Result<()> {
    for (row, (fi, di)) in f.as_array().rows().into_iter().zip(d.rows()).enumerate() {
        let inner = fi.dot(&di);
        let scale = di.dot(&di).sqrt().max(1.0);
        if inner.abs() > TANGENCY_TOL * scale {
            return Err(Error::NotTangent { row, inner });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactDemParams {
    pub step_size: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Halve the step (at most 20 times) while `Phi` increases.
    pub backtracking: bool,
    /// Seeds the random initial linearization direction.
    pub seed: u64,
    /// Writes every assembled subproblem to this directory.
    pub dump_dir: Option<PathBuf>,
    /// Direction solver settings. The default gap tolerance is looser than
    /// [`subproblem::GAP_TOL`] and inexact directions are accepted; the
    /// descent check still guards every step.
    pub solver: SolveOptions,
}

impl Default for ExactDemParams {
    fn default() -> Self {
        ExactDemParams {
            step_size: 0.5,
            tol: 1e-6,
            max_iter: 200,
            backtracking: false,
            seed: 0,
            dump_dir: None,
            solver: SolveOptions {
                gap_tol: 1e-5,
                accept_inexact: true,
                ..SolveOptions::default()
            },
        }
    }
}

pub const MAX_HALVINGS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// `|D|_F < tol`.
    Converged,
    MaxIterations,
    /// The direction failed the descent check.
    NoDescent,
    /// Backtracking exhausted its halvings without decreasing `Phi`.
    StepRejected,
}

#[derive(Debug, Clone)]
pub struct ExactDemOutput {
    pub factor: FactorMatrix,
    pub trace: DescentTrace,
    pub stop: StopReason,
    pub iterations: usize,
    /// Directions returned at the solver's iteration cap.
    pub inexact_solves: usize,
}

/// Exact DEM: solve the cone subproblem for `D`, step `F + eta D`, retract.
pub fn exact_dem(
    inst: &QuboInstance,
    f0: FactorMatrix,
    params: &ExactDemParams,
) -> Result<ExactDemOutput> {
    check_factor(inst, &f0)?;
    if !(params.step_size > 0.0 && params.tol > 0.0) {
        return Err(Error::InvalidArgument(
            "step size and tolerance must be positive".into(),
        ));
    }
    let clock = Instant::now();
    let (n, k) = (f0.n(), f0.k());
    let mut rng = rng::from_seed(rng::derive_seed(params.seed, tag::DIRECTION));
    let mut d_curr = Array2::from_shape_simple_fn((n, k), || StandardNormal.sample(&mut rng));
    let norm = d_curr.iter().map(|v| v * v).sum::<f64>().sqrt();
    d_curr.mapv_inplace(|v| v / norm);

    let mut f = f0;
    let mut value = expectation_unchecked(inst.q(), f.as_array());
    let mut trace = DescentTrace::default();
    trace.push(TraceRecord {
        iteration: 0,
        phi: value,
        step_norm: 0.0,
        elapsed: 0.0,
    });
    let mut stop = StopReason::MaxIterations;
    let mut iterations = 0;
    let mut inexact_solves = 0;
    // dual iterates keyed by pair, reused when a cone persists
    let mut duals: HashMap<(usize, usize), Vec<f64>> = HashMap::new();

    for t in 1..=params.max_iter {
        iterations = t;
        let at = |e: Error| Error::AtIteration {
            iteration: t,
            source: Box::new(e),
        };
        let problem = subproblem::assemble(inst, &f, &d_curr, BOUNDARY_TOL).map_err(at)?;
        if let Some(dir) = &params.dump_dir {
            problem
                .write_dump(dir.join(format!("subproblem_{t:05}.txt")))
                .map_err(at)?;
        }
        let warm = Array2::from_shape_fn((problem.cones.len(), k), |(p, c)| {
            let t = &problem.cones[p];
            duals.get(&(t.i, t.j)).map_or(0.0, |row| row[c])
        });
        let solution = subproblem::solve_warm(&problem, &params.solver, Some(warm)).map_err(at)?;
        duals = problem
            .cones
            .iter()
            .zip(solution.dual.rows())
            .map(|(t, row)| ((t.i, t.j), row.to_vec()))
            .collect();
        inexact_solves += usize::from(!solution.converged);
        let d = solution.direction.into_array();
        let d_norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if d_norm < params.tol {
            stop = StopReason::Converged;
            break;
        }
        if !subproblem::is_descent(inst, &f, &d).map_err(at)? {
            stop = StopReason::NoDescent;
            break;
        }
        let mut eta = params.step_size;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let mut moved = f.as_array().clone();
            moved.scaled_add(eta, &d);
            let candidate = retract(moved).map_err(at)?;
            let cand_value = expectation_unchecked(inst.q(), candidate.as_array());
            if !params.backtracking || cand_value <= value {
                accepted = Some((candidate, cand_value));
                break;
            }
            eta *= 0.5;
        }
        let Some((next, next_value)) = accepted else {
            stop = StopReason::StepRejected;
            break;
        };
        f = next;
        value = next_value;
        d_curr = d;
        trace.push(TraceRecord {
            iteration: t,
            phi: value,
            step_norm: d_norm,
            elapsed: clock.elapsed().as_secs_f64(),
        });
    }
    Ok(ExactDemOutput {
        factor: f,
        trace,
        stop,
        iterations,
        inexact_solves,
    })
}
