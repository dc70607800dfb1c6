//! Python bindings: scenario configuration, Monte-Carlo sweeps, single AO
//! runs, the baseband solvers and the worst-case/chance-constraint helpers.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use pass_robust_core::baseband::{solve_baseband as core_solve_baseband, SOLVER_TOLERANCE};
use pass_robust_core::channel::{estimated_channel_los, BlockResponse};
use pass_robust_core::driver::{alternating_optimize, AoOptions, RobustProblem, RobustSolution};
use pass_robust_core::experiments::{self, ScenarioConfig, SweepAxis, SweepRow, ValidationSuite};
use pass_robust_core::robust;
use pass_robust_core::scene::{build_geometry, candidate_sets, PinchingLayout};
use pass_robust_core::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config { .. }
        | Error::Discretization(_)
        | Error::Infeasible(_)
        | Error::DegenerateChannel(_)
        | Error::NotLossless { .. }
        | Error::UnboundedErrorBound(_)
        | Error::Parse(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// A scenario: geometry, radio constants, activation grid, uncertainty model.
#[pyclass(name = "ScenarioConfig", module = "pass_robust", from_py_object)]
#[derive(Clone)]
struct PyScenarioConfig {
    inner: ScenarioConfig,
}

#[pymethods]
impl PyScenarioConfig {
    /// Defaults, optionally overridden by a TOML document.
    #[new]
    #[pyo3(signature = (toml = None))]
    fn new(toml: Option<&str>) -> PyResult<Self> {
        let inner = match toml {
            Some(text) => ScenarioConfig::from_toml_str(text).map_err(to_py)?,
            None => ScenarioConfig::default(),
        };
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ScenarioConfig::from_file(path).map_err(to_py)?,
        })
    }

    fn to_toml(&self) -> PyResult<String> {
        toml::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(to_py)
    }

    /// Copy with one sweepable parameter replaced.
    fn with_axis(&self, axis: &str, value: f64) -> PyResult<Self> {
        let axis: SweepAxis = axis.parse().map_err(to_py)?;
        Ok(Self {
            inner: self.inner.with_axis(axis, value),
        })
    }

    #[getter]
    fn trials(&self) -> usize {
        self.inner.trials
    }

    #[setter]
    fn set_trials(&mut self, trials: usize) {
        self.inner.trials = trials;
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[setter]
    fn set_seed(&mut self, seed: u64) {
        self.inner.seed = seed;
    }

    fn __repr__(&self) -> String {
        format!("ScenarioConfig(trials={}, seed={})", self.inner.trials, self.inner.seed)
    }
}

/// Result of one alternating-optimization run.
#[pyclass(name = "RobustSolution", module = "pass_robust", frozen)]
struct PyRobustSolution {
    inner: RobustSolution,
    noise_power: f64,
}

#[pymethods]
impl PyRobustSolution {
    #[getter]
    fn w(&self) -> Vec<Complex64> {
        self.inner.w.clone()
    }

    /// PA x-coordinates, one list per waveguide.
    #[getter]
    fn layout(&self) -> Vec<Vec<f64>> {
        self.inner.layout.rows()
    }

    #[getter]
    fn worst_case_amplitude(&self) -> f64 {
        self.inner.value.worst_case_amplitude
    }

    #[getter]
    fn worst_case_ar(&self) -> f64 {
        self.inner.value.worst_case_ar
    }

    #[getter]
    fn perfect_ar(&self) -> f64 {
        self.inner.value.perfect_ar(self.noise_power)
    }

    /// `(iteration, after_w, after_p)` per AO iteration; `after_p` may be None.
    #[getter]
    fn trace(&self) -> Vec<(usize, f64, Option<f64>)> {
        self.inner
            .trace
            .iter()
            .map(|t| (t.iteration, t.after_w, t.after_p))
            .collect()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }
}

fn row_dict<'py>(py: Python<'py>, row: &SweepRow) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("axis_value", row.axis_value)?;
    d.set_item("pass_lossy_wc_ar", row.pass_lossy_wc_ar)?;
    d.set_item("pass_lossy_perfect_ar", row.pass_lossy_perfect_ar)?;
    d.set_item("pass_lossless_wc_ar", row.pass_lossless_wc_ar)?;
    d.set_item("baseline_wc_ar", row.baseline_wc_ar)?;
    d.set_item("baseline_perfect_ar", row.baseline_perfect_ar)?;
    d.set_item("nonoutage_ar", row.nonoutage_ar)?;
    d.set_item("trials", row.trials)?;
    d.set_item("seed", row.seed)?;
    Ok(d)
}

/// Runs every trial of a scenario and returns the mean metrics.
#[pyfunction]
fn run_scenario<'py>(py: Python<'py>, config: &PyScenarioConfig) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config.inner.clone();
    let run = py.detach(move || experiments::run_scenario(&cfg)).map_err(to_py)?;
    row_dict(py, &run.row)
}

/// One row per value of `axis`, all sharing the scenario seed.
#[pyfunction]
fn run_sweep<'py>(
    py: Python<'py>,
    config: &PyScenarioConfig,
    axis: &str,
    values: Vec<f64>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let axis: SweepAxis = axis.parse().map_err(to_py)?;
    let cfg = config.inner.clone();
    let result = py
        .detach(move || experiments::run_sweep(&cfg, axis, &values))
        .map_err(to_py)?;
    result.rows().iter().map(|r| row_dict(py, r)).collect()
}

/// Optimizes one user. `layout` defaults to a random feasible one drawn
/// from `seed`; `delta` defaults to the scenario's normalized bound
/// evaluated at that layout.
#[pyfunction]
#[pyo3(signature = (config, user, layout = None, delta = None, seed = 0))]
fn optimize(
    py: Python<'_>,
    config: &PyScenarioConfig,
    user: [f64; 3],
    layout: Option<Vec<Vec<f64>>>,
    delta: Option<f64>,
    seed: u64,
) -> PyResult<PyRobustSolution> {
    use pass_robust_core::experiments::UncertaintyConfig;
    use rand::SeedableRng;

    let cfg = &config.inner;
    cfg.validate().map_err(to_py)?;
    let (geometry, constants) = build_geometry(cfg).map_err(to_py)?;
    let init = match layout {
        Some(rows) => {
            if rows.len() != geometry.waveguides
                || rows.iter().any(|r| r.len() != geometry.pas_per_waveguide)
            {
                return Err(PyValueError::new_err(format!(
                    "layout must be {} rows of {} positions",
                    geometry.waveguides, geometry.pas_per_waveguide
                )));
            }
            PinchingLayout::from_rows(rows)
        }
        None => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            pass_robust_core::scene::random_initial_layout(&geometry, constants.min_spacing, &mut rng)
                .map_err(to_py)?
        }
    };
    let delta = match delta {
        Some(d) => d,
        None => {
            let scale = estimated_channel_los(user, &init, &geometry, &constants).norm();
            match cfg.uncertainty {
                UncertaintyConfig::NormBounded { delta_bar } => delta_bar * scale,
                UncertaintyConfig::Probabilistic { epsilon_bar, rho } => {
                    robust::delta_from_probabilistic(epsilon_bar * scale, rho).map_err(to_py)?
                }
            }
        }
    };
    let noise_power = constants.noise_power;
    let problem = RobustProblem {
        candidates: candidate_sets(&geometry, cfg.activation).map_err(to_py)?,
        geometry,
        constants,
        user,
        delta,
    };
    let opts: AoOptions = cfg.optimizer.into();
    let inner = py
        .detach(move || alternating_optimize(&problem, &init, &opts))
        .map_err(to_py)?;
    Ok(PyRobustSolution { inner, noise_power })
}

fn blocks(g: Vec<Vec<Complex64>>) -> BlockResponse {
    BlockResponse { blocks: g }
}

/// Baseband beamformer for fixed positions. `g` lists the per-waveguide
/// columns of the block-diagonal response; `h` is the stacked channel.
#[pyfunction]
#[pyo3(signature = (h, g, delta, power, lossless = false, tol = SOLVER_TOLERANCE))]
fn solve_baseband<'py>(
    py: Python<'py>,
    h: Vec<Complex64>,
    g: Vec<Vec<Complex64>>,
    delta: f64,
    power: f64,
    lossless: bool,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let g = blocks(g);
    let sol = core_solve_baseband(&h, &g, delta, power, lossless, tol).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("w", sol.beamformer.w.clone())?;
    d.set_item("objective", sol.objective)?;
    d.set_item("worst_case_positive", sol.worst_case_positive)?;
    d.set_item("iterations", sol.iterations)?;
    d.set_item("power_residual", sol.certificate.power_residual)?;
    d.set_item("phase_residual", sol.certificate.phase_residual)?;
    Ok(d)
}

/// `max(0, |h̄ᴴGw| − δ‖Gw‖₂)`.
#[pyfunction]
fn worst_case_amplitude(h: Vec<Complex64>, g: Vec<Vec<Complex64>>, w: Vec<Complex64>, delta: f64) -> f64 {
    robust::worst_case_amplitude(&h, &blocks(g), &w, delta, 1.0).worst_case_amplitude
}

/// The minimizing error of the norm ball and the attained `|(h̄+e)ᴴGw|`.
#[pyfunction]
fn adversarial_error(
    h: Vec<Complex64>,
    g: Vec<Vec<Complex64>>,
    w: Vec<Complex64>,
    delta: f64,
) -> PyResult<(Vec<Complex64>, f64)> {
    let e = robust::adversarial_error(&h, &blocks(g), &w, delta).map_err(to_py)?;
    Ok((e.error.vector, e.value))
}

/// `δ = ε√(−ln(1−ρ))`.
#[pyfunction]
fn delta_from_probabilistic(epsilon: f64, rho: f64) -> PyResult<f64> {
    robust::delta_from_probabilistic(epsilon, rho).map_err(to_py)
}

/// Runs a self-check suite and returns its report.
#[pyfunction]
#[pyo3(signature = (suite, seed = 1))]
fn validate<'py>(py: Python<'py>, suite: &str, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let suite: ValidationSuite = suite.parse().map_err(to_py)?;
    let report = py.detach(move || experiments::validate(suite, seed)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("suite", report.suite)?;
    d.set_item("passed", report.passed())?;
    let checks = report
        .checks
        .iter()
        .map(|c| {
            let item = PyDict::new(py);
            item.set_item("name", &c.name)?;
            item.set_item("measured", c.measured)?;
            item.set_item("bound", c.bound)?;
            item.set_item("passed", c.passed)?;
            Ok(item)
        })
        .collect::<PyResult<Vec<_>>>()?;
    d.set_item("checks", checks)?;
    Ok(d)
}

#[pymodule]
fn pass_robust(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", pass_robust_core::VERSION)?;
    m.add_class::<PyScenarioConfig>()?;
    m.add_class::<PyRobustSolution>()?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(solve_baseband, m)?)?;
    m.add_function(wrap_pyfunction!(worst_case_amplitude, m)?)?;
    m.add_function(wrap_pyfunction!(adversarial_error, m)?)?;
    m.add_function(wrap_pyfunction!(delta_from_probabilistic, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
