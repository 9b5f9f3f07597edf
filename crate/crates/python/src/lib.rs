use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use wiretap_core::capacity::{solve_csi, solve_no_csi_lower, SolverOptions};
use wiretap_core::channel::parse_family;
use wiretap_core::protocol::{run_protocol, ProtocolParams};
use wiretap_core::Error;

fn to_py(e: Error) -> PyErr {
    let code = e.exit_code();
    match e {
        Error::Validation { .. } | Error::Parse { .. } | Error::Degenerate(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(format!("{other} (exit code {code})")),
    }
}

/// Run a `wiretap-lab` command line and return the rendered report.
#[pyfunction]
fn run_cli(args: Vec<String>) -> PyResult<String> {
    let argv = std::iter::once("wiretap-lab".to_string()).chain(args);
    wiretap_core::cli::run_to_string(argv).map_err(to_py)
}

/// Capacity value for a family document; `mode` is `csi` or `no-csi`.
#[pyfunction]
#[pyo3(signature = (family_json, mode = "csi", seed = 0))]
fn capacity(family_json: &str, mode: &str, seed: u64) -> PyResult<f64> {
    let family = parse_family(family_json).map_err(to_py)?;
    let options = SolverOptions { seed, ..Default::default() };
    let report = match mode {
        "csi" => solve_csi(&family, &options),
        "no-csi" => solve_no_csi_lower(&family, &options),
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    report.map(|r| r.value).map_err(to_py)
}

/// Two-phase protocol transcript as JSON.
#[pyfunction]
#[pyo3(signature = (family_json, n, seed, trials = 10_000, lambda_ = 0.1, c_prime = 8.0))]
fn protocol(family_json: &str, n: usize, seed: u64, trials: u64, lambda_: f64, c_prime: f64) -> PyResult<String> {
    let family = parse_family(family_json).map_err(to_py)?;
    let params = ProtocolParams::new(lambda_, c_prime, n, seed);
    let report = run_protocol(&family, &params, trials).map_err(to_py)?;
    serde_json::to_string(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pyfunction]
fn binary_entropy(p: f64) -> f64 {
    wiretap_core::info::h2(p)
}

#[pymodule]
pub fn wiretap_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    m.add_function(wrap_pyfunction!(capacity, m)?)?;
    m.add_function(wrap_pyfunction!(protocol, m)?)?;
    m.add_function(wrap_pyfunction!(binary_entropy, m)?)?;
    Ok(())
}
