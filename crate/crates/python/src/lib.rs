//! Python bindings: run configs, reports, single-ray repair and the
//! reference oracles.

use hmga::oracle;
use hmga::problem::benchmarks::{self, PRESETS};
use hmga::{HmgaError, ProblemSpec, RepairConfig, RepairOutcome, Repairer, RunConfig, RunReport};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(pyhmga, SurfaceNotFoundError, PyRuntimeError);

fn to_py(e: HmgaError) -> PyErr {
    match e {
        HmgaError::SurfaceNotFound { .. } | HmgaError::NoFailureSurface => {
            SurfaceNotFoundError::new_err(e.to_string())
        }
        HmgaError::DegenerateProblem { .. } => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn problem_spec(problem: &str) -> PyResult<ProblemSpec> {
    // a bare preset name or a JSON benchmark description
    if problem.trim_start().starts_with('{') {
        let v: serde_json::Value =
            serde_json::from_str(problem).map_err(|e| PyValueError::new_err(e.to_string()))?;
        ProblemSpec::from_value(v).map_err(to_py)
    } else {
        Ok(ProblemSpec::Named(problem.to_string()))
    }
}

/// Solver settings; every field has a default.
#[pyclass(name = "RunConfig", module = "pyhmga", skip_from_py_object)]
#[derive(Clone)]
pub struct PyRunConfig {
    inner: RunConfig,
}

#[pymethods]
impl PyRunConfig {
    #[new]
    #[pyo3(signature = (problem = "linear-2d", seed = 0))]
    fn new(problem: &str, seed: u64) -> PyResult<Self> {
        let inner = RunConfig {
            problem: problem_spec(problem)?,
            seed,
            ..RunConfig::default()
        };
        Ok(PyRunConfig { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        RunConfig::from_json(text)
            .map(|inner| PyRunConfig { inner })
            .map_err(to_py)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[setter]
    fn set_seed(&mut self, seed: u64) {
        self.inner.seed = seed;
    }

    #[getter]
    fn max_generations(&self) -> usize {
        self.inner.max_generations
    }

    #[setter]
    fn set_max_generations(&mut self, n: usize) {
        self.inner.max_generations = n;
    }

    fn __repr__(&self) -> String {
        format!("RunConfig(seed={})", self.inner.seed)
    }
}

#[pyclass(name = "RunReport", module = "pyhmga", frozen)]
pub struct PyRunReport {
    inner: RunReport,
}

#[pymethods]
impl PyRunReport {
    #[getter]
    fn beta_hl(&self) -> f64 {
        self.inner.beta_hl
    }

    #[getter]
    fn p_f(&self) -> f64 {
        self.inner.p_f
    }

    #[getter]
    fn direction(&self) -> Vec<f64> {
        self.inner.direction.clone()
    }

    #[getter]
    fn mpp_standard(&self) -> Vec<f64> {
        self.inner.mpp_standard.clone()
    }

    #[getter]
    fn mpp_physical(&self) -> Vec<f64> {
        self.inner.mpp_physical.clone()
    }

    #[getter]
    fn generations(&self) -> usize {
        self.inner.generations
    }

    #[getter]
    fn evaluations(&self) -> usize {
        self.inner.evaluations
    }

    /// `(t1, diversity_end, t_final)`; the first two may be `None`.
    #[getter]
    fn stage_boundaries(&self) -> (Option<usize>, Option<usize>, usize) {
        let s = &self.inner.stage_boundaries;
        (s.t1, s.diversity_end, s.t_final)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn history_csv(&self) -> String {
        self.inner.history_csv()
    }

    fn regions_json(&self) -> String {
        self.inner.regions_json()
    }

    fn __repr__(&self) -> String {
        format!(
            "RunReport(problem={:?}, beta_hl={}, p_f={:e})",
            self.inner.problem, self.inner.beta_hl, self.inner.p_f
        )
    }
}

#[pyclass(name = "RepairOutcome", module = "pyhmga", frozen)]
pub struct PyRepairOutcome {
    inner: RepairOutcome,
}

fn enum_name<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

#[pymethods]
impl PyRepairOutcome {
    #[getter]
    fn final_beta(&self) -> f64 {
        self.inner.final_beta
    }

    #[getter]
    fn final_g(&self) -> f64 {
        self.inner.final_g
    }

    #[getter]
    fn status(&self) -> String {
        enum_name(&self.inner.status)
    }

    #[getter]
    fn mode(&self) -> String {
        enum_name(&self.inner.mode)
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    /// Rows `(k, beta, g, delta_beta, delta_max)`.
    #[getter]
    fn trace(&self) -> Vec<(usize, f64, f64, f64, f64)> {
        self.inner
            .trace
            .iter()
            .map(|t| (t.k, t.beta, t.g, t.delta_beta, t.delta_max))
            .collect()
    }

    fn trace_csv(&self) -> String {
        self.inner.trace_csv()
    }
}

/// Runs the solver. The GIL is released while it works.
#[pyfunction]
fn run(py: Python<'_>, config: &PyRunConfig) -> PyResult<PyRunReport> {
    let cfg = config.inner.clone();
    py.detach(move || hmga::run(&cfg))
        .map(|inner| PyRunReport { inner })
        .map_err(to_py)
}

#[pyfunction]
fn probability_of_failure(beta: f64) -> f64 {
    hmga::probability_of_failure(beta)
}

/// Repairs the ray `β a` from `beta0` on a preset or JSON-described problem.
#[pyfunction]
#[pyo3(signature = (problem, direction, beta0 = 0.0, alpha = None, beta_ref = None, eta = None, beta_max = 8.0))]
fn repair_ray(
    problem: &str,
    direction: Vec<f64>,
    beta0: f64,
    alpha: Option<f64>,
    beta_ref: Option<f64>,
    eta: Option<f64>,
    beta_max: f64,
) -> PyResult<PyRepairOutcome> {
    let p = problem_spec(problem)?.build().map_err(to_py)?;
    let g0 = p.g0();
    let d = RepairConfig::default();
    let cfg = RepairConfig {
        alpha: alpha.unwrap_or(d.alpha),
        beta_ref: beta_ref.unwrap_or(d.beta_ref),
        ..d
    }
    .with_eta(eta.unwrap_or(1e-3 * g0.abs()));
    let repairer = Repairer::with_g0(&p, cfg, beta_max, g0).map_err(to_py)?;
    repairer
        .repair_ray(beta0, &direction)
        .map(|inner| PyRepairOutcome { inner })
        .map_err(to_py)
}

/// Brute-force minimum distance to the surface, `(beta, direction)`.
#[pyfunction]
#[pyo3(signature = (problem, resolution = None, beta_cap = 16.0))]
fn brute_force_mpp(
    py: Python<'_>,
    problem: &str,
    resolution: Option<usize>,
    beta_cap: f64,
) -> PyResult<(f64, Vec<f64>)> {
    let p = problem_spec(problem)?.build().map_err(to_py)?;
    let res = resolution.unwrap_or(if p.dimension() == 2 {
        oracle::DEFAULT_ANGLES_2D
    } else {
        oracle::DEFAULT_DIRECTIONS_ND
    });
    let r = py
        .detach(|| oracle::brute_force_mpp(&p, res, beta_cap))
        .map_err(to_py)?;
    Ok((r.beta, r.direction))
}

/// HL-RF from `y0` (origin by default); `None` when it does not settle.
#[pyfunction]
#[pyo3(signature = (problem, y0 = None, max_iter = 100, tol = 1e-10, beta_cap = 16.0))]
fn hlrf(
    problem: &str,
    y0: Option<Vec<f64>>,
    max_iter: usize,
    tol: f64,
    beta_cap: f64,
) -> PyResult<Option<(f64, Vec<f64>)>> {
    let p = problem_spec(problem)?.build().map_err(to_py)?;
    let y0 = y0.unwrap_or_else(|| vec![0.0; p.dimension()]);
    let r = oracle::hlrf(&p, &y0, max_iter, tol, beta_cap).map_err(to_py)?;
    Ok(r.map(|r| (r.beta, r.direction)))
}

#[pyfunction]
fn benchmark_names() -> Vec<&'static str> {
    PRESETS.to_vec()
}

/// Closed-form reliability index of a preset, when one is registered.
#[pyfunction]
fn known_beta(problem: &str) -> PyResult<Option<f64>> {
    Ok(benchmarks::by_name(problem).map_err(to_py)?.known_beta())
}

#[pymodule]
fn pyhmga(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRunConfig>()?;
    m.add_class::<PyRunReport>()?;
    m.add_class::<PyRepairOutcome>()?;
    m.add(
        "SurfaceNotFoundError",
        m.py().get_type::<SurfaceNotFoundError>(),
    )?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(probability_of_failure, m)?)?;
    m.add_function(wrap_pyfunction!(repair_ray, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_mpp, m)?)?;
    m.add_function(wrap_pyfunction!(hlrf, m)?)?;
    m.add_function(wrap_pyfunction!(benchmark_names, m)?)?;
    m.add_function(wrap_pyfunction!(known_beta, m)?)?;
    Ok(())
}
