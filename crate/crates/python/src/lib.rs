//! Python bindings for the zener-beam solver.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use zener_beam::fractional_kernel::{self as fk, FractionalKernel, GammaRule, MlParams, MollifierSpec};
use zener_beam::harness::{self, RunConfig, Scenario, SolverMode};

create_exception!(pyzener, ZenerError, PyException);

fn err(e: zener_beam::Error) -> PyErr {
    ZenerError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| ZenerError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_rule(rule: &str) -> PyResult<GammaRule> {
    match rule.split_once(':') {
        None if rule == "log" => Ok(GammaRule::log()),
        Some(("power", e)) => e
            .parse()
            .map(GammaRule::power)
            .map_err(|_| ZenerError::new_err(format!("bad exponent in rule {rule:?}"))),
        _ => Err(ZenerError::new_err(format!(
            "rule must be \"log\" or \"power:<exponent>\", got {rule:?}"
        ))),
    }
}

fn parse_mode(mode: &str) -> PyResult<SolverMode> {
    match mode {
        "direct" => Ok(SolverMode::Direct),
        "picard" => Ok(SolverMode::Picard),
        _ => Err(ZenerError::new_err(format!(
            "mode must be \"direct\" or \"picard\", got {mode:?}"
        ))),
    }
}

/// The sampled operator `L = (1/θ) Id + l_α ∗` on a uniform grid.
#[pyclass(name = "Kernel", module = "pyzener", frozen)]
struct PyKernel {
    inner: FractionalKernel,
}

#[pymethods]
impl PyKernel {
    #[new]
    fn new(alpha: f64, theta: f64, horizon: f64, dt: f64) -> PyResult<Self> {
        FractionalKernel::build(alpha, theta, horizon, dt)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    /// Kernel mollified in time with a causal bump; `rule` is `"log"` or `"power:<e>"`.
    #[staticmethod]
    #[pyo3(signature = (alpha, theta, horizon, dt, eps, rule = "power:1"))]
    fn mollified(alpha: f64, theta: f64, horizon: f64, dt: f64, eps: f64, rule: &str) -> PyResult<Self> {
        let spec = MollifierSpec::causal(parse_rule(rule)?);
        FractionalKernel::build_mollified(alpha, theta, horizon, dt, &spec, eps)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta()
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt()
    }

    #[getter]
    fn n_steps(&self) -> usize {
        self.inner.n_steps()
    }

    #[getter]
    fn atom(&self) -> f64 {
        self.inner.atom()
    }

    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn l1_norm(&self) -> f64 {
        self.inner.l1_norm()
    }

    fn convolve(&self, u: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.convolve_scalar(&u).map_err(err)
    }

    fn laplace_symbol(&self, s: f64) -> PyResult<f64> {
        self.inner.laplace_symbol(s).map_err(err)
    }

    fn laplace_symbol_exact(&self, s: f64) -> f64 {
        self.inner.laplace_symbol_exact(s)
    }

    /// The constants `C_L` as a dict with keys `young`, `l2_form`, `classical_l1`.
    fn c_l<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let c = self.inner.c_l().map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("young", c.young)?;
        d.set_item("l2_form", c.l2_form)?;
        d.set_item("classical_l1", c.classical_l1)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "Kernel(alpha={}, theta={}, horizon={}, dt={})",
            self.inner.alpha(),
            self.inner.theta(),
            self.inner.horizon(),
            self.inner.dt()
        )
    }
}

/// A complete run configuration.
#[pyclass(name = "RunConfig", module = "pyzener")]
struct PyRunConfig {
    inner: RunConfig,
}

#[pymethods]
impl PyRunConfig {
    /// Defaults of a scenario: `free_vibration`, `moving_load`, `axial_impulse`, `eps_sweep`.
    #[staticmethod]
    fn preset(scenario: &str) -> PyResult<Self> {
        let scenario = match scenario {
            "free_vibration" => Scenario::FreeVibration,
            "moving_load" => Scenario::MovingLoad,
            "axial_impulse" => Scenario::AxialImpulse,
            "eps_sweep" => Scenario::EpsSweep,
            _ => return Err(ZenerError::new_err(format!("unknown scenario {scenario:?}"))),
        };
        Ok(Self {
            inner: RunConfig::preset(scenario),
        })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        RunConfig::from_toml_str(text).map(|inner| Self { inner }).map_err(err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        harness::load_config(&path).map(|inner| Self { inner }).map_err(err)
    }

    fn to_toml(&self) -> PyResult<String> {
        self.inner.to_toml_string().map_err(err)
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(err)
    }

    #[getter]
    fn scenario(&self) -> &'static str {
        self.inner.scenario.name()
    }

    #[getter]
    fn eps(&self) -> Vec<f64> {
        self.inner.regularization.eps.clone()
    }

    #[getter]
    fn t_end(&self) -> f64 {
        self.inner.time.t_end
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.time.dt()
    }

    fn __repr__(&self) -> String {
        format!("RunConfig(scenario={:?})", self.inner.scenario.name())
    }
}

/// Trajectory, energy ledger and verdict of one ε-member.
#[pyclass(name = "MemberRun", module = "pyzener", frozen)]
struct PyMemberRun {
    inner: harness::MemberRun,
}

#[pymethods]
impl PyMemberRun {
    #[getter]
    fn eps(&self) -> f64 {
        self.inner.eps
    }

    #[getter]
    fn holds(&self) -> bool {
        self.inner.verdict.holds
    }

    #[getter]
    fn worst_margin(&self) -> f64 {
        self.inner.verdict.worst_margin
    }

    fn times(&self) -> Vec<f64> {
        self.inner.trajectory.times()
    }

    /// Displacement at `x` for every time level.
    #[pyo3(signature = (x = 0.5))]
    fn displacement(&self, x: f64) -> Vec<f64> {
        let mesh = self.inner.system.mesh();
        self.inner.trajectory.u.iter().map(|u| mesh.evaluate(u, x, 0)).collect()
    }

    /// Energy ledger rows `(t, normV_u, normH_v, bound, margin)`.
    fn ledger(&self) -> Vec<(f64, f64, f64, f64, f64)> {
        self.inner
            .ledger
            .rows
            .iter()
            .map(|r| (r.t, r.norm_v_u, r.norm_h_v, r.bound, r.margin))
            .collect()
    }

    fn constants<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.ledger.constants)
    }

    fn picard<'py>(&self, py: Python<'py>) -> PyResult<Option<Bound<'py, PyAny>>> {
        self.inner.picard.as_ref().map(|d| to_py(py, d)).transpose()
    }
}

#[pyfunction]
#[pyo3(signature = (config, eps, speed = None, mode = "direct"))]
fn run_member(py: Python<'_>, config: &PyRunConfig, eps: f64, speed: Option<f64>, mode: &str) -> PyResult<PyMemberRun> {
    let mode = parse_mode(mode)?;
    let cfg = config.inner.clone();
    py.detach(move || harness::run_member(&cfg, eps, speed, mode))
        .map(|inner| PyMemberRun { inner })
        .map_err(err)
}

/// Runs every member and writes the artifacts into `out_dir`; returns the summary.
#[pyfunction]
fn run_scenario<'py>(py: Python<'py>, config: &PyRunConfig, out_dir: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config.inner.clone();
    let report = py.detach(move || harness::run_scenario(&cfg, &out_dir)).map_err(err)?;
    to_py(py, &report)
}

#[pyfunction]
fn compare_modes<'py>(py: Python<'py>, config: &PyRunConfig) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config.inner.clone();
    let report = py.detach(move || harness::compare_modes(&cfg)).map_err(err)?;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (alpha, z, beta = 1.0))]
fn mittag_leffler(alpha: f64, z: f64, beta: f64) -> PyResult<f64> {
    let params = MlParams::new(alpha, beta).map_err(err)?;
    fk::mittag_leffler(params, z).map_err(err)
}

/// Relaxation function `E_α(−λ t^α)`.
#[pyfunction]
fn e_alpha(t: f64, lam: f64, alpha: f64) -> PyResult<f64> {
    fk::e_alpha(t, lam, alpha).map_err(err)
}

#[pyfunction]
fn zener_kernel(t: f64, alpha: f64, theta: f64) -> PyResult<f64> {
    fk::zener_kernel(t, alpha, theta).map_err(err)
}

#[pyfunction]
fn riemann_liouville(alpha: f64, u: Vec<f64>, dt: f64) -> PyResult<Vec<f64>> {
    fk::riemann_liouville(alpha, &u, dt).map_err(err)
}

/// Largest residual of `D^α u + u = θ D^α g + g` on the grid.
#[pyfunction]
fn verify_zener(u: Vec<f64>, g: Vec<f64>, alpha: f64, theta: f64, dt: f64) -> PyResult<f64> {
    fk::verify_zener(&u, &g, alpha, theta, dt).map_err(err)
}

#[pymodule]
fn pyzener(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ZenerError", m.py().get_type::<ZenerError>())?;
    m.add_class::<PyKernel>()?;
    m.add_class::<PyRunConfig>()?;
    m.add_class::<PyMemberRun>()?;
    m.add_function(wrap_pyfunction!(run_member, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(compare_modes, m)?)?;
    m.add_function(wrap_pyfunction!(mittag_leffler, m)?)?;
    m.add_function(wrap_pyfunction!(e_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(zener_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(riemann_liouville, m)?)?;
    m.add_function(wrap_pyfunction!(verify_zener, m)?)?;
    Ok(())
}
