//! Python bindings: parameter points, mean-field and exact ground states,
//! critical lines, transition scans and sweeps.

use cavity_dicke::exact::{converge_cutoff_with, CutoffOptions, ExactSolution};
use cavity_dicke::model::{estimate_from_trap, ParamAxis, TrapSpec};
use cavity_dicke::phases::{self, DetectorConfig, Observable, TransitionRecord};
use cavity_dicke::sweep::{run_sweep, SweepConfig};
use cavity_dicke::{DickeError, MeanFieldSolution, ModelParams};
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(pydicke, ModelError, PyValueError);

fn to_py(err: DickeError) -> PyErr {
    match err {
        DickeError::Io(e) => PyOSError::new_err(e.to_string()),
        other => ModelError::new_err(other.to_string()),
    }
}

fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> PyResult<T> {
    serde_json::from_str(text).map_err(|e| ModelError::new_err(format!("invalid configuration: {e}")))
}

/// One point in parameter space. Energies share the unit of `omega`.
#[pyclass(name = "Params", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyParams(ModelParams);

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (omega=1.0, lambda_=1.0, delta=0.0, omega_rabi=0.0, v=0.0, n_atoms=1))]
    fn new(omega: f64, lambda_: f64, delta: f64, omega_rabi: f64, v: f64, n_atoms: u64) -> PyResult<Self> {
        ModelParams::new(omega, lambda_, delta, omega_rabi, v, n_atoms)
            .validate()
            .map(Self)
            .map_err(to_py)
    }

    /// Units with omega = 1, so that lambda = sqrt(u).
    #[staticmethod]
    #[pyo3(signature = (u, delta=0.0, omega_rabi=0.0, v=0.0, n_atoms=1))]
    fn dimensionless(u: f64, delta: f64, omega_rabi: f64, v: f64, n_atoms: u64) -> PyResult<Self> {
        if !(u >= 0.0) {
            return Err(ModelError::new_err("u must be nonnegative"));
        }
        let p = ModelParams { n_atoms, ..ModelParams::dimensionless(u, delta, omega_rabi, v) };
        p.validate().map(Self).map_err(to_py)
    }

    /// Copy with one field replaced; `axis` is a column name such as "delta".
    fn replace(&self, axis: &str, value: f64) -> PyResult<Self> {
        let axis: ParamAxis = axis.parse().map_err(to_py)?;
        self.0.with(axis, value).validate().map(Self).map_err(to_py)
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.0.omega
    }
    #[getter]
    fn lambda_(&self) -> f64 {
        self.0.lambda
    }
    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta
    }
    #[getter]
    fn omega_rabi(&self) -> f64 {
        self.0.omega_rabi
    }
    #[getter]
    fn v(&self) -> f64 {
        self.0.v
    }
    #[getter]
    fn n_atoms(&self) -> u64 {
        self.0.n_atoms
    }
    #[getter]
    fn u(&self) -> f64 {
        self.0.u()
    }

    fn __repr__(&self) -> String {
        let p = &self.0;
        format!(
            "Params(omega={}, lambda_={}, delta={}, omega_rabi={}, v={}, n_atoms={})",
            p.omega, p.lambda, p.delta, p.omega_rabi, p.v, p.n_atoms
        )
    }
}

#[pyclass(name = "MeanField", frozen, get_all)]
struct PyMeanField {
    s_x: f64,
    s_z: f64,
    eta: f64,
    alpha: f64,
    energy_per_atom: f64,
    m_over_n: f64,
    photon_density: f64,
    residual: f64,
    degenerate: bool,
    flat: bool,
    local_minima: usize,
    phase: &'static str,
}

impl PyMeanField {
    fn new(sol: MeanFieldSolution, phase: &'static str) -> Self {
        Self {
            s_x: sol.point.s_x,
            s_z: sol.point.s_z,
            eta: sol.eta,
            alpha: sol.alpha,
            energy_per_atom: sol.energy_per_atom,
            m_over_n: sol.m_over_n,
            photon_density: sol.photon_density,
            residual: sol.residual,
            degenerate: sol.degenerate,
            flat: sol.flat,
            local_minima: sol.local_minima,
            phase,
        }
    }
}

#[pymethods]
impl PyMeanField {
    fn __repr__(&self) -> String {
        format!(
            "MeanField(phase={}, m_over_n={}, photon_density={}, energy_per_atom={})",
            self.phase, self.m_over_n, self.photon_density, self.energy_per_atom
        )
    }
}

#[pyclass(name = "ExactResult", frozen, get_all)]
struct PyExact {
    energy: f64,
    energy_per_atom: f64,
    photon_number: f64,
    photon_density: f64,
    m_over_n: f64,
    jz: f64,
    jx: f64,
    parity: f64,
    gap: f64,
    n_max: usize,
    dimension: usize,
    converged: bool,
}

impl From<ExactSolution> for PyExact {
    fn from(s: ExactSolution) -> Self {
        Self {
            energy: s.energy,
            energy_per_atom: s.energy_per_atom,
            photon_number: s.photon_number,
            photon_density: s.photon_density(),
            m_over_n: s.m_over_n(),
            jz: s.jz,
            jx: s.jx,
            parity: s.parity,
            gap: s.gap,
            n_max: s.n_max_used,
            dimension: s.dimension,
            converged: s.converged,
        }
    }
}

#[pyclass(name = "Transition", frozen, get_all)]
struct PyTransition {
    location: f64,
    order: &'static str,
    observable: &'static str,
    jump: f64,
    kink: f64,
}

impl From<TransitionRecord> for PyTransition {
    fn from(r: TransitionRecord) -> Self {
        Self {
            location: r.location,
            order: r.order.name(),
            observable: r.observable.name(),
            jump: r.jump,
            kink: r.kink,
        }
    }
}

#[pymethods]
impl PyTransition {
    fn __repr__(&self) -> String {
        format!("Transition(location={}, order={}, jump={})", self.location, self.order, self.jump)
    }
}

/// Mean-field ground state with its phase label.
#[pyfunction]
fn solve(py: Python<'_>, params: PyParams) -> PyResult<PyMeanField> {
    let (sol, label) = py.detach(|| phases::solve_and_classify(&params.0)).map_err(to_py)?;
    Ok(PyMeanField::new(sol, label.name()))
}

/// Exact ground state at the atom number stored in `params`, doubling the
/// photon cutoff until the energy settles.
#[pyfunction]
#[pyo3(signature = (params, eps=1e-10, n_max_start=4, dimension_budget=None))]
fn exact(py: Python<'_>, params: PyParams, eps: f64, n_max_start: usize, dimension_budget: Option<usize>) -> PyResult<PyExact> {
    let mut opts = CutoffOptions { eps, n_max_start, ..CutoffOptions::default() };
    if let Some(b) = dimension_budget {
        opts.dimension_budget = b;
    }
    py.detach(|| converge_cutoff_with(&params.0, &opts)).map(PyExact::from).map_err(to_py)
}

/// Detunings (lower, upper) bounding the superradiant lobe at zero drive.
#[pyfunction]
fn delta_critical(u: f64, v: f64) -> PyResult<(f64, f64)> {
    phases::delta_critical(u, v).map_err(to_py)
}

/// Interaction strength at which the superfluid region begins.
#[pyfunction]
fn v_critical(u: f64, delta: f64, omega_rabi: f64) -> f64 {
    phases::v_critical(u, delta, omega_rabi)
}

/// Half-width in detuning of the Mott window, if there is one.
#[pyfunction]
fn mott_boundary_delta(u: f64, v: f64, omega_rabi: f64) -> Option<f64> {
    phases::mott_boundary_delta(u, v, omega_rabi)
}

/// Transitions of `observable` while `axis` runs from `start` to `end`.
#[pyfunction]
#[pyo3(signature = (params, axis, start, end, observable="m_over_n"))]
fn scan(py: Python<'_>, params: PyParams, axis: &str, start: f64, end: f64, observable: &str) -> PyResult<Vec<PyTransition>> {
    let axis: ParamAxis = axis.parse().map_err(to_py)?;
    let observable: Observable = observable.parse().map_err(to_py)?;
    let path = phases::axis_path(params.0, axis);
    let records = py
        .detach(|| phases::detect_transitions(&path, (start, end), observable, &DetectorConfig::default()))
        .map_err(to_py)?;
    Ok(records.into_iter().map(PyTransition::from).collect())
}

/// Couplings estimated from a trap description given as JSON; the bundled
/// rubidium example when omitted.
#[pyfunction]
#[pyo3(signature = (trap_json=None))]
fn estimate<'py>(py: Python<'py>, trap_json: Option<&str>) -> PyResult<Bound<'py, PyDict>> {
    let spec = match trap_json {
        Some(text) => from_json::<TrapSpec>(text)?,
        None => TrapSpec::rb87_example(),
    };
    let e = estimate_from_trap(&spec).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("v", e.v)?;
    d.set_item("v_printed", e.v_printed)?;
    d.set_item("lambda", e.lambda)?;
    d.set_item("u", e.u)?;
    d.set_item("n_crit", e.n_crit)?;
    d.set_item("omega_critical", e.omega_critical)?;
    d.set_item("oscillator_lengths", e.oscillator_lengths.to_vec())?;
    Ok(d)
}

/// Runs a sweep described by a JSON config and returns the table as CSV or JSON text.
#[pyfunction]
#[pyo3(signature = (config_json, format="csv"))]
fn sweep(py: Python<'_>, config_json: &str, format: &str) -> PyResult<String> {
    let config: SweepConfig = from_json(config_json)?;
    let data = py.detach(|| run_sweep(&config)).map_err(to_py)?;
    match format {
        "csv" => data.to_csv(),
        "json" => data.to_json(),
        other => return Err(ModelError::new_err(format!("unknown format `{other}`"))),
    }
    .map_err(to_py)
}

#[pymodule]
fn pydicke(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ModelError", m.py().get_type::<ModelError>())?;
    m.add_class::<PyParams>()?;
    m.add_class::<PyMeanField>()?;
    m.add_class::<PyExact>()?;
    m.add_class::<PyTransition>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(exact, m)?)?;
    m.add_function(wrap_pyfunction!(delta_critical, m)?)?;
    m.add_function(wrap_pyfunction!(v_critical, m)?)?;
    m.add_function(wrap_pyfunction!(mott_boundary_delta, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}
