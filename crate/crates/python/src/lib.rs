//! Python bindings. Matrices cross the boundary as nested lists of floats,
//! sign vectors as lists of `+1`/`-1` integers.

use ndarray::Array2;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use qubo_dem::baselines::{self, SaParams, SbParams, TabuParams};
use qubo_dem::dem::{self, DemRcParams, ExactDemParams, StopReason};
use qubo_dem::subproblem::{self, BOUNDARY_TOL};
use qubo_dem::{exhaustive, io, reductions, rounding, Error, SignVector, WeightedGraph};

fn err(e: Error) -> PyErr {
    match e {
        Error::Format(f) => match f {
            qubo_dem::FormatError::Io(_) => PyIOError::new_err(f.to_string()),
            other => PyValueError::new_err(other.to_string()),
        },
        e @ (Error::NotConverged { .. } | Error::AtIteration { .. }) => {
            PyRuntimeError::new_err(e.to_string())
        }
        e => PyValueError::new_err(e.to_string()),
    }
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Array2<f64>> {
    let n = rows.len();
    let k = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != k) {
        return Err(PyValueError::new_err("rows must have equal length"));
    }
    Array2::from_shape_vec((n, k), rows.into_iter().flatten().collect())
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

fn rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn signs(x: Vec<i8>) -> PyResult<SignVector> {
    SignVector::new(x).map_err(err)
}

/// A QUBO instance, `min x^T Q x` over `{-1, 1}^n` or `{0, 1}^n`.
#[pyclass(name = "QuboInstance", module = "qubodem", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyInstance(qubo_dem::QuboInstance);

#[pymethods]
impl PyInstance {
    /// Instance over `{-1, 1}^n` from a symmetric matrix.
    #[staticmethod]
    fn plus_minus_one(q: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(PyInstance(
            qubo_dem::QuboInstance::plus_minus_one(matrix(q)?).map_err(err)?,
        ))
    }

    /// Instance over `{0, 1}^n`, with an optional linear term.
    #[staticmethod]
    #[pyo3(signature = (q, linear=None))]
    fn zero_one(q: Vec<Vec<f64>>, linear: Option<Vec<f64>>) -> PyResult<Self> {
        let linear = linear.map(ndarray::Array1::from);
        Ok(PyInstance(
            qubo_dem::QuboInstance::zero_one(matrix(q)?, linear).map_err(err)?,
        ))
    }

    /// Symmetric matrix with i.i.d. standard normal entries.
    #[staticmethod]
    fn random(n: usize, seed: u64) -> PyResult<Self> {
        Ok(PyInstance(
            reductions::gen_random_gaussian(n, seed).map_err(err)?,
        ))
    }

    /// MaxCut on `n` vertices; `edges` holds 0-based `(i, j, weight)`.
    #[staticmethod]
    fn maxcut(n: usize, edges: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        let g = WeightedGraph::new(n, edges).map_err(err)?;
        Ok(PyInstance(reductions::from_maxcut(&g).map_err(err)?))
    }

    #[staticmethod]
    fn subset_sum(weights: Vec<u64>) -> PyResult<Self> {
        Ok(PyInstance(
            reductions::from_subset_sum(&weights).map_err(err)?,
        ))
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyInstance(
            io::parse_instance(text).map_err(|e| err(e.into()))?,
        ))
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        Ok(PyInstance(
            io::read_instance(path).map_err(|e| err(e.into()))?,
        ))
    }

    fn write(&self, path: &str) -> PyResult<()> {
        io::write_instance(&self.0, path).map_err(|e| err(e.into()))
    }

    fn format(&self) -> String {
        io::format_instance(&self.0)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name().to_string()
    }

    /// `"plus_minus_one"` or `"zero_one"`.
    #[getter]
    fn convention(&self) -> &'static str {
        self.0.convention().as_str()
    }

    #[getter]
    fn offset(&self) -> f64 {
        self.0.offset()
    }

    fn q(&self) -> Vec<Vec<f64>> {
        rows(self.0.q())
    }

    fn evaluate(&self, x: Vec<i8>) -> PyResult<f64> {
        self.0.evaluate(&signs(x)?).map_err(err)
    }

    /// Objective value mapped back to the problem the instance came from.
    fn original_value(&self, objective: f64) -> f64 {
        self.0.original_value(objective)
    }

    /// The equivalent ±1 instance (bordered with one extra variable for 0/1).
    fn to_plus_minus_one(&self) -> PyResult<Self> {
        Ok(PyInstance(self.0.to_plus_minus_one().map_err(err)?))
    }

    /// Exact minimum by enumeration, as `(x, value)`.
    fn brute_force(&self) -> PyResult<(Vec<i8>, f64)> {
        let (x, v) = exhaustive::brute_force_minimum(&self.0).map_err(err)?;
        Ok((x.as_slice().to_vec(), v))
    }

    fn __repr__(&self) -> String {
        format!(
            "QuboInstance(name={:?}, n={}, convention={})",
            self.0.name(),
            self.0.n(),
            self.0.convention().as_str()
        )
    }
}

/// `n x k` factor with unit-norm rows.
#[pyclass(name = "FactorMatrix", module = "qubodem", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyFactor(qubo_dem::FactorMatrix);

#[pymethods]
impl PyFactor {
    /// Rows must already have unit norm.
    #[new]
    fn new(f: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(PyFactor(
            qubo_dem::FactorMatrix::new(matrix(f)?).map_err(err)?,
        ))
    }

    #[staticmethod]
    fn normalized(f: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(PyFactor(
            qubo_dem::FactorMatrix::normalized(matrix(f)?).map_err(err)?,
        ))
    }

    #[staticmethod]
    fn random(n: usize, k: usize, seed: u64) -> PyResult<Self> {
        Ok(PyFactor(
            qubo_dem::FactorMatrix::random(n, k, seed).map_err(err)?,
        ))
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.0.k()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        rows(self.0.as_array())
    }

    fn gram(&self) -> Vec<Vec<f64>> {
        rows(&self.0.gram())
    }

    fn __repr__(&self) -> String {
        format!("FactorMatrix(n={}, k={})", self.0.n(), self.0.k())
    }
}

/// `(2/pi) <Q, arcsin(F F^T)>`, the expected value of GW rounding.
#[pyfunction]
fn expected_value(inst: &PyInstance, f: &PyFactor) -> PyResult<f64> {
    rounding::expected_value(&inst.0, &f.0).map_err(err)
}

/// Best of `trials` GW samples: `{"x", "value", "trial_values"}`.
#[pyfunction]
fn gw_round<'py>(
    py: Python<'py>,
    inst: &PyInstance,
    f: &PyFactor,
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = rounding::gw_round(&inst.0, &f.0, trials, seed).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("x", r.best_x.as_slice().to_vec())?;
    d.set_item("value", r.best_value)?;
    d.set_item("trial_values", r.trial_values)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (inst, f, clip=1e-6))]
fn euclidean_gradient(inst: &PyInstance, f: &PyFactor, clip: f64) -> PyResult<Vec<Vec<f64>>> {
    Ok(rows(
        &dem::euclidean_gradient(&inst.0, &f.0, clip).map_err(err)?,
    ))
}

/// One-sided derivative of `Phi` along a tangent direction.
#[pyfunction]
fn directional_derivative(inst: &PyInstance, f: &PyFactor, d: Vec<Vec<f64>>) -> PyResult<f64> {
    dem::directional_derivative(&inst.0, &f.0, &matrix(d)?).map_err(err)
}

/// Cone-subproblem descent direction at `f`, linearizing concave pairs at
/// `d_curr`: `{"direction", "objective", "lower_bound", "converged"}`.
#[pyfunction]
fn descent_direction<'py>(
    py: Python<'py>,
    inst: &PyInstance,
    f: &PyFactor,
    d_curr: Vec<Vec<f64>>,
) -> PyResult<Bound<'py, PyDict>> {
    let dp = subproblem::assemble(&inst.0, &f.0, &matrix(d_curr)?, BOUNDARY_TOL).map_err(err)?;
    let sol = subproblem::solve(&dp).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("direction", rows(sol.direction.as_array()))?;
    d.set_item("objective", sol.objective)?;
    d.set_item("lower_bound", sol.lower_bound)?;
    d.set_item("converged", sol.converged)?;
    Ok(d)
}

fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::Converged => "converged",
        StopReason::MaxIterations => "max_iterations",
        StopReason::NoDescent => "no_descent",
        StopReason::StepRejected => "step_rejected",
    }
}

/// DEM-RC: `{"x", "value", "expected_value", "factor", "phi"}`.
#[pyfunction]
#[pyo3(signature = (inst, rank=10, steps=500, rounds=100, eta=0.05, clip=1e-6, seed=0))]
#[allow(clippy::too_many_arguments)]
fn dem_rc<'py>(
    py: Python<'py>,
    inst: &PyInstance,
    rank: usize,
    steps: usize,
    rounds: usize,
    eta: f64,
    clip: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let p = DemRcParams {
        rank,
        steps,
        rounds,
        step_size: eta,
        clip,
        seed,
    };
    let out = py.detach(|| dem::dem_rc(&inst.0, &p)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("x", out.rounding.best_x.as_slice().to_vec())?;
    d.set_item("value", out.rounding.best_value)?;
    d.set_item(
        "expected_value",
        rounding::expected_value(&inst.0, &out.factor).map_err(err)?,
    )?;
    d.set_item("factor", PyFactor(out.factor))?;
    d.set_item("phi", out.trace.phi_values())?;
    Ok(d)
}

/// Exact DEM from `f0`: `{"factor", "phi", "stop", "iterations"}`.
#[pyfunction]
#[pyo3(signature = (inst, f0, eta=0.5, tol=1e-6, max_iter=200, backtracking=false, seed=0))]
#[allow(clippy::too_many_arguments)]
fn exact_dem<'py>(
    py: Python<'py>,
    inst: &PyInstance,
    f0: &PyFactor,
    eta: f64,
    tol: f64,
    max_iter: usize,
    backtracking: bool,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let p = ExactDemParams {
        step_size: eta,
        tol,
        max_iter,
        backtracking,
        seed,
        ..ExactDemParams::default()
    };
    let out = py
        .detach(|| dem::exact_dem(&inst.0, f0.0.clone(), &p))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("factor", PyFactor(out.factor))?;
    d.set_item("phi", out.trace.phi_values())?;
    d.set_item("stop", stop_name(out.stop))?;
    d.set_item("iterations", out.iterations)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (inst, sweeps=1000, seed=0))]
fn simulated_annealing(
    py: Python<'_>,
    inst: &PyInstance,
    sweeps: usize,
    seed: u64,
) -> PyResult<(Vec<i8>, f64)> {
    let p = SaParams::for_instance(&inst.0, sweeps, seed);
    let (x, v, _) = py
        .detach(|| baselines::simulated_annealing(&inst.0, &p))
        .map_err(err)?;
    Ok((x.as_slice().to_vec(), v))
}

#[pyfunction]
#[pyo3(signature = (inst, iterations=1000, seed=0))]
fn tabu_search(
    py: Python<'_>,
    inst: &PyInstance,
    iterations: usize,
    seed: u64,
) -> PyResult<(Vec<i8>, f64)> {
    let p = TabuParams::for_instance(&inst.0, iterations, seed);
    let (x, v, _) = py
        .detach(|| baselines::tabu_search(&inst.0, &p))
        .map_err(err)?;
    Ok((x.as_slice().to_vec(), v))
}

#[pyfunction]
#[pyo3(signature = (inst, steps=1000, dt=None, seed=0))]
fn simulated_bifurcation(
    py: Python<'_>,
    inst: &PyInstance,
    steps: usize,
    dt: Option<f64>,
    seed: u64,
) -> PyResult<(Vec<i8>, f64)> {
    let p = SbParams {
        steps,
        dt,
        seed,
        ..SbParams::default()
    };
    let (x, v, _) = py
        .detach(|| baselines::simulated_bifurcation(&inst.0, &p))
        .map_err(err)?;
    Ok((x.as_slice().to_vec(), v))
}

#[pyfunction]
#[pyo3(signature = (inst, restarts=10, seed=0))]
fn burer2(
    py: Python<'_>,
    inst: &PyInstance,
    restarts: usize,
    seed: u64,
) -> PyResult<(Vec<i8>, f64)> {
    let (x, v, _) = py
        .detach(|| baselines::burer2(&inst.0, restarts, seed))
        .map_err(err)?;
    Ok((x.as_slice().to_vec(), v))
}

#[pyfunction]
#[pyo3(signature = (inst, rank=None, steps=1000, trials=100, seed=0))]
fn gw_sdp_surrogate(
    py: Python<'_>,
    inst: &PyInstance,
    rank: Option<usize>,
    steps: usize,
    trials: usize,
    seed: u64,
) -> PyResult<(Vec<i8>, f64)> {
    let (x, v, _) = py
        .detach(|| baselines::gw_sdp_surrogate(&inst.0, rank, steps, trials, seed))
        .map_err(err)?;
    Ok((x.as_slice().to_vec(), v))
}

#[pymodule]
fn qubodem(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PyFactor>()?;
    m.add_function(wrap_pyfunction!(expected_value, m)?)?;
    m.add_function(wrap_pyfunction!(gw_round, m)?)?;
    m.add_function(wrap_pyfunction!(euclidean_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(directional_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(descent_direction, m)?)?;
    m.add_function(wrap_pyfunction!(dem_rc, m)?)?;
    m.add_function(wrap_pyfunction!(exact_dem, m)?)?;
    m.add_function(wrap_pyfunction!(simulated_annealing, m)?)?;
    m.add_function(wrap_pyfunction!(tabu_search, m)?)?;
    m.add_function(wrap_pyfunction!(simulated_bifurcation, m)?)?;
    m.add_function(wrap_pyfunction!(burer2, m)?)?;
    m.add_function(wrap_pyfunction!(gw_sdp_surrogate, m)?)?;
    Ok(())
}
