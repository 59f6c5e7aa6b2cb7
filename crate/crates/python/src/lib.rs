//! Python module `stacool`: protocols, scenario configs, runs and sweeps.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use stacool_core::harness::{self, HarnessError, ScenarioConfig};
use stacool_core::protocols::{Family, ProtocolError, ProtocolParams};
use stacool_core::scenarios;

create_exception!(stacool, StacoolError, PyException);
create_exception!(stacool, ConfigError, StacoolError);
create_exception!(stacool, IntegrationError, StacoolError);

fn harness_err(e: HarnessError) -> PyErr {
    match e.exit_code() {
        2 => ConfigError::new_err(e.to_string()),
        3 => IntegrationError::new_err(e.to_string()),
        _ => StacoolError::new_err(e.to_string()),
    }
}

fn protocol_err(e: ProtocolError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Pulse family with its width, peak coupling and time window.
#[pyclass(name = "Protocol", module = "stacool", frozen, from_py_object)]
#[derive(Clone)]
struct PyProtocol(ProtocolParams);

#[pymethods]
impl PyProtocol {
    #[new]
    #[pyo3(signature = (family, width, peak = 0.1))]
    fn new(family: &str, width: f64, peak: f64) -> PyResult<Self> {
        let family: Family = family.parse().map_err(protocol_err)?;
        ProtocolParams::with_defaults(family, peak, width)
            .map(Self)
            .map_err(protocol_err)
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.0.family.name()
    }

    #[getter]
    fn width(&self) -> f64 {
        self.0.width
    }

    #[getter]
    fn peak(&self) -> f64 {
        self.0.peak
    }

    #[getter]
    fn window(&self) -> (f64, f64) {
        (self.0.t_start, self.0.t_end)
    }

    /// `(J, G2)` at time `t`.
    fn couplings(&self, t: f64) -> PyResult<(f64, f64)> {
        self.0.pulse_pair(t).map_err(protocol_err)
    }

    fn theta(&self, t: f64) -> PyResult<f64> {
        self.0.mixing_theta(t).map_err(protocol_err)
    }

    fn theta_dot(&self, t: f64) -> PyResult<f64> {
        self.0.theta_dot(t).map_err(protocol_err)
    }

    fn coupling_ratio(&self, t: f64) -> f64 {
        self.0.coupling_ratio(t)
    }

    #[pyo3(signature = (t, delta = 0.0))]
    fn adiabatic_ratio(&self, t: f64, delta: f64) -> PyResult<f64> {
        self.0.adiabatic_ratio(t, delta).map_err(protocol_err)
    }

    fn max_theta_dot(&self) -> f64 {
        self.0.max_theta_dot()
    }

    #[pyo3(signature = (delta = 0.0))]
    fn max_adiabatic_ratio(&self, delta: f64) -> f64 {
        self.0.max_adiabatic_ratio(delta)
    }

    fn __repr__(&self) -> String {
        format!(
            "Protocol('{}', width={}, peak={}, window=({}, {}))",
            self.0.family, self.0.width, self.0.peak, self.0.t_start, self.0.t_end
        )
    }
}

/// A validated scenario, as read from a `key=value` config file.
#[pyclass(name = "Config", module = "stacool", frozen, from_py_object)]
#[derive(Clone)]
struct PyConfig(ScenarioConfig);

#[pymethods]
impl PyConfig {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        ScenarioConfig::parse(text).map(Self).map_err(harness_err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        ScenarioConfig::load(&path).map(Self).map_err(harness_err)
    }

    /// One of the names listed by `presets()`.
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        scenarios::by_name(name)
            .map(Self)
            .ok_or_else(|| ConfigError::new_err(format!("unknown preset '{name}'")))
    }

    fn serialize(&self) -> String {
        self.0.serialize()
    }

    #[getter]
    fn label(&self) -> String {
        self.0.label()
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.0.mode.name()
    }

    #[getter]
    fn window(&self) -> (f64, f64) {
        self.0.window()
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.0.system.delta
    }

    #[getter]
    fn protocol(&self) -> PyProtocol {
        PyProtocol(self.0.protocol)
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.0.warnings.clone()
    }

    fn with_delta(&self, delta: f64) -> Self {
        Self(self.0.with_delta(delta))
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("Config('{}')", self.0.label())
    }
}

fn to_python<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| StacoolError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Integrates one scenario. Returns a dict with the summary and the sampled
/// occupations; `drives=True` adds the reconstructed drive amplitudes.
#[pyfunction]
#[pyo3(signature = (config, drives = false))]
fn run<'py>(py: Python<'py>, config: &PyConfig, drives: bool) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config.0.clone();
    let outcome = py
        .detach(move || harness::run(&cfg, drives))
        .map_err(harness_err)?;
    let out = PyDict::new(py);
    out.set_item("summary", to_python(py, &outcome.summary)?)?;
    let r = &outcome.result;
    out.set_item("t", &r.times)?;
    out.set_item("P1", &r.p1)?;
    out.set_item("P2", &r.p2)?;
    out.set_item("Pb", &r.pb)?;
    if let Some(pair) = &outcome.drives {
        let d = PyDict::new(py);
        d.set_item("t", &pair.times)?;
        d.set_item("omega1", &pair.omega1)?;
        d.set_item("omega2", &pair.omega2)?;
        d.set_item("beta", &pair.beta)?;
        out.set_item("drives", d)?;
    }
    Ok(out)
}

/// Evaluates every config at every detuning. Returns
/// `{"delta": [...], "series": {label: {"pb_final": [...], "pb_min": [...]}}}`.
#[pyfunction]
#[pyo3(signature = (configs, deltas, workers = None))]
fn sweep<'py>(
    py: Python<'py>,
    configs: Vec<PyConfig>,
    deltas: Vec<f64>,
    workers: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfgs: Vec<ScenarioConfig> = configs.into_iter().map(|c| c.0).collect();
    let result = py
        .detach(|| harness::sweep_detuning(&cfgs, &deltas, workers))
        .map_err(harness_err)?;
    let series = PyDict::new(py);
    for s in &result.series {
        let d = PyDict::new(py);
        d.set_item("pb_final", &s.pb_final)?;
        d.set_item("pb_min", &s.pb_min)?;
        series.set_item(&s.label, d)?;
    }
    let out = PyDict::new(py);
    out.set_item("delta", &result.deltas)?;
    out.set_item("series", series)?;
    Ok(out)
}

/// Evenly spaced detunings, endpoints included.
#[pyfunction]
fn detunings(min: f64, max: f64, steps: usize) -> Vec<f64> {
    harness::default_deltas(min, max, steps)
}

/// Static diagnostics for a config without integrating it.
#[pyfunction]
fn check(config: &PyConfig) -> String {
    harness::check(&config.0).to_text()
}

#[pyfunction]
fn presets() -> Vec<String> {
    scenarios::names()
}

#[pymodule]
fn stacool(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyProtocol>()?;
    m.add_class::<PyConfig>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(detunings, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add("StacoolError", py.get_type::<StacoolError>())?;
    m.add("ConfigError", py.get_type::<ConfigError>())?;
    m.add("IntegrationError", py.get_type::<IntegrationError>())?;
    m.add(
        "FAMILIES",
        PyList::new(py, Family::ALL.iter().map(|f| f.name()))?,
    )?;
    Ok(())
}
