//! Python module `nitsche_bem`: quadrature kernels, marking and the convergence studies.

use nitsche_bem::adapt::{self, StudyConfig};
use nitsche_bem::cli::parse_decomposition;
use nitsche_bem::estimator::{ConvergenceRecord, MeshKind, CSV_HEADER};
use nitsche_bem::quad::{self, QuadConfig, QuadProfile};
use nitsche_bem::{Error, Point};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn triangle(t: [(f64, f64); 3]) -> [Point; 3] {
    t.map(|(x, y)| Point::new(x, y))
}

fn profile(name: &str) -> PyResult<QuadConfig> {
    match name {
        "fast" => Ok(QuadConfig::from_profile(QuadProfile::Fast)),
        "accurate" => Ok(QuadConfig::from_profile(QuadProfile::Accurate)),
        _ => Err(PyValueError::new_err(format!("profile must be 'fast' or 'accurate', got '{name}'"))),
    }
}

/// One row of a convergence history.
#[pyclass(get_all, frozen, module = "nitsche_bem")]
#[derive(Clone)]
pub struct Record {
    step: usize,
    kind: String,
    n: usize,
    energy: f64,
    error1: f64,
    error2: f64,
    estim1: f64,
    estim2: f64,
    theta: f64,
    total_error: f64,
}

impl From<&ConvergenceRecord> for Record {
    fn from(r: &ConvergenceRecord) -> Self {
        Self {
            step: r.step,
            kind: r.kind.to_string(),
            n: r.n,
            energy: r.energy,
            error1: r.error1,
            error2: r.error2,
            estim1: r.estim1,
            estim2: r.estim2,
            theta: r.theta,
            total_error: r.total_error,
        }
    }
}

#[pymethods]
impl Record {
    fn __repr__(&self) -> String {
        format!("Record(step={}, kind='{}', N={}, energy={:.10}, theta={:.4e})", self.step, self.kind, self.n, self.energy, self.theta)
    }
}

/// `(1/4pi) int_T |x - y|^{-1} dy`.
#[pyfunction]
fn newton_potential(t: [(f64, f64); 3], x: (f64, f64)) -> PyResult<f64> {
    quad::newton_potential_triangle(&triangle(t), Point::new(x.0, x.1)).map_err(py_err)
}

/// `(1/4pi) int_T int_S |x - y|^{-1} dy dx`.
#[pyfunction]
#[pyo3(signature = (t, s, profile_name = "fast"))]
fn pair_potential(t: [(f64, f64); 3], s: [(f64, f64); 3], profile_name: &str) -> PyResult<f64> {
    quad::pair_potential(&triangle(t), &triangle(s), &profile(profile_name)?).map_err(py_err)
}

/// Minimal Dörfler set for squared indicators, in marking order.
#[pyfunction]
fn doerfler_mark(theta_sq: Vec<f64>, delta: f64) -> PyResult<Vec<usize>> {
    adapt::doerfler_mark(&theta_sq, delta).map_err(py_err)
}

/// Run a uniform or adaptive study and return its records.
#[pyfunction]
#[pyo3(signature = (mode = "uniform", nu = 100.0, delta = 0.5, max_steps = None, n0 = 2, decomposition = "four-square", reference_energy = None, profile_name = "fast"))]
#[allow(clippy::too_many_arguments)]
fn run_study(
    py: Python<'_>,
    mode: &str,
    nu: f64,
    delta: f64,
    max_steps: Option<usize>,
    n0: usize,
    decomposition: &str,
    reference_energy: Option<f64>,
    profile_name: &str,
) -> PyResult<Vec<Record>> {
    let kind: MeshKind = mode.parse().map_err(py_err)?;
    let mut cfg = StudyConfig::new(kind);
    cfg.nu = nu;
    cfg.delta = delta;
    cfg.n0 = n0;
    cfg.decomposition = parse_decomposition(decomposition).map_err(py_err)?;
    cfg.reference_energy = reference_energy;
    cfg.quad_profile = if profile_name == "accurate" { QuadProfile::Accurate } else { profile(profile_name).map(|_| QuadProfile::Fast)? };
    if let Some(k) = max_steps {
        cfg.max_steps = k;
    }
    let outcome = py.detach(|| adapt::run_study(&cfg)).into_result().map_err(py_err)?;
    Ok(outcome.records.iter().map(Record::from).collect())
}

#[pymodule]
#[pyo3(name = "nitsche_bem")]
fn nitsche_bem_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CSV_HEADER", CSV_HEADER)?;
    m.add_class::<Record>()?;
    m.add_function(wrap_pyfunction!(newton_potential, m)?)?;
    m.add_function(wrap_pyfunction!(pair_potential, m)?)?;
    m.add_function(wrap_pyfunction!(doerfler_mark, m)?)?;
    m.add_function(wrap_pyfunction!(run_study, m)?)?;
    Ok(())
}
