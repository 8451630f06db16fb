use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use topocal::deform::{run, DeformationSeed, RunOptions};
use topocal::hodge::HodgeSystem;
use topocal::orbits::{analyze, check_elliptic, model_calibration, CalibrationSpec, Kind, Params};
use topocal::scalar::C64;
use topocal::torus::identities::{identity_suite, IdentityOptions};
use topocal::torus::EndoField;
use topocal::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_)
        | Error::DimensionMismatch(_)
        | Error::Json(_)
        | Error::WrongKind(_)
        | Error::Reality { .. }
        | Error::SeedNotClosed(_) => PyValueError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Serializes through JSON so Python gets plain dicts and lists.
fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn spec(structure: &str, dim: Option<usize>, complex_dim: Option<usize>, m: Option<usize>) -> PyResult<CalibrationSpec> {
    let kind: Kind = structure.parse().map_err(py_err)?;
    model_calibration(kind, &Params { dim, complex_dim, m }).map_err(py_err)
}

/// Isotropy, E^k dimensions, metrical and elliptic verdicts.
#[pyfunction]
#[pyo3(signature = (structure, *, dim=None, complex_dim=None, m=None, trials=32, seed=0))]
fn info(
    py: Python<'_>,
    structure: &str,
    dim: Option<usize>,
    complex_dim: Option<usize>,
    m: Option<usize>,
    trials: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let s = spec(structure, dim, complex_dim, m)?;
    to_py(py, &analyze(&s, trials, seed).report())
}

#[pyfunction]
#[pyo3(signature = (structure, seed, *, dim=None, complex_dim=None, m=None, trials=32))]
fn elliptic(
    py: Python<'_>,
    structure: &str,
    seed: u64,
    dim: Option<usize>,
    complex_dim: Option<usize>,
    m: Option<usize>,
    trials: usize,
) -> PyResult<Py<PyAny>> {
    let s = spec(structure, dim, complex_dim, m)?;
    to_py(py, &check_elliptic(&s, trials, seed))
}

/// The randomized operator identities on trig fields.
#[pyfunction]
#[pyo3(signature = (seed, *, trials=100, max_freq=2, rational=false))]
fn verify(py: Python<'_>, seed: u64, trials: usize, max_freq: i32, rational: bool) -> PyResult<Py<PyAny>> {
    let report = identity_suite(&IdentityOptions { trials, seed, max_freq, rational }).map_err(py_err)?;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (structure, *, freq=1, dim=None, complex_dim=None, m=None))]
fn cohomology(
    py: Python<'_>,
    structure: &str,
    freq: i32,
    dim: Option<usize>,
    complex_dim: Option<usize>,
    m: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let s = spec(structure, dim, complex_dim, m)?;
    let sys = HodgeSystem::build(&s, s.dim, freq).map_err(py_err)?;
    to_py(py, &sys.cohomology())
}

/// Runs the deformation series from a seed field given as EndoField JSON.
#[pyfunction]
#[pyo3(signature = (structure, seed_json, order, *, dim=None, complex_dim=None, m=None, tol=1e-9))]
#[allow(clippy::too_many_arguments)]
fn deform(
    py: Python<'_>,
    structure: &str,
    seed_json: &str,
    order: usize,
    dim: Option<usize>,
    complex_dim: Option<usize>,
    m: Option<usize>,
    tol: f64,
) -> PyResult<Py<PyAny>> {
    let s = spec(structure, dim, complex_dim, m)?;
    let sys = HodgeSystem::build(&s, s.dim, 1).map_err(py_err)?;
    let a1 = EndoField::<C64>::from_json_str(seed_json).map_err(py_err)?;
    let seed = DeformationSeed::new(&sys, a1, false).map_err(py_err)?;
    let opts = RunOptions { tol, ..RunOptions::default() };
    let result = run(&sys, &seed, order, &opts).map_err(py_err)?;
    to_py(py, &result.report())
}

#[pymodule]
fn topocal_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(info, m)?)?;
    m.add_function(wrap_pyfunction!(elliptic, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(cohomology, m)?)?;
    m.add_function(wrap_pyfunction!(deform, m)?)?;
    Ok(())
}
