//! Python bindings over the runner: configs travel as `key = value` text,
//! circuits in the circuit-file format.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qagents::analysis::general_qft_circuit;
use qagents::dump::{circuit_file, parse_circuits, write_circuits};
use qagents::runner::{self, RunConfig, RunError, TaskName};
use qagents::tasks::coinflip::honest_statistics;

fn py_err(e: RunError) -> PyErr {
    match e {
        RunError::Config { .. } | RunError::Value { .. } | RunError::Mismatch(_) => PyValueError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

fn config(text: &str, overrides: Option<&Bound<'_, PyDict>>) -> PyResult<RunConfig> {
    let mut cfg = RunConfig::parse(text).map_err(py_err)?;
    if let Some(d) = overrides {
        for (k, v) in d.iter() {
            let k: String = k.extract()?;
            let v = v.str()?.to_string();
            let v = match v.as_str() {
                "True" => "true".to_string(),
                "False" => "false".to_string(),
                _ => v,
            };
            cfg.set(&k, &v).map_err(py_err)?;
        }
        cfg.validate().map_err(py_err)?;
    }
    Ok(cfg)
}

/// Default config text for `task`.
#[pyfunction]
fn defaults(task: &str) -> PyResult<String> {
    let t: TaskName = task.parse().map_err(PyValueError::new_err)?;
    Ok(RunConfig::for_task(t).to_text())
}

/// Trains from config text plus optional overrides. Returns a dict with the
/// final reward, per-epoch rewards and the trained circuits as text.
#[pyfunction]
#[pyo3(signature = (config_text, overrides=None))]
fn train<'py>(py: Python<'py>, config_text: &str, overrides: Option<&Bound<'py, PyDict>>) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config(config_text, overrides)?;
    let out = py.allow_threads(|| runner::run(&cfg)).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("task", cfg.stem())?;
    d.set_item("reward", out.record.final_reward)?;
    d.set_item("optimal", out.row.optimal)?;
    d.set_item("rewards", out.record.rewards.clone())?;
    d.set_item("log", out.record.log_text())?;
    d.set_item("circuits", write_circuits(&out.circuits))?;
    if let Some((fa, fb)) = out.payoffs {
        d.set_item("f_a", fa)?;
        d.set_item("f_b", fb)?;
    }
    Ok(d)
}

/// Scores circuit-file text under a config without training.
#[pyfunction]
fn evaluate(config_text: &str, circuits_text: &str) -> PyResult<f64> {
    let cfg = config(config_text, None)?;
    let items = parse_circuits(circuits_text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    runner::evaluate(&cfg, &items).map_err(py_err)
}

/// Circuit-file text of the nearest-neighbor QFT on `n` qubits.
#[pyfunction]
fn qft_circuit(n: usize) -> PyResult<String> {
    let c = general_qft_circuit(n).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(circuit_file(&c, &[], Some("qft")))
}

/// `(P(c=0), P(c=1), P(abort))` for the honest coin-flipping protocol.
#[pyfunction]
fn honest_coinflip() -> PyResult<(f64, f64, f64)> {
    let h = honest_statistics().map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok((h.outcome[0], h.outcome[1], h.abort))
}

/// Summary table from the records in `dir`.
#[pyfunction]
fn report(dir: &str) -> PyResult<String> {
    let rows = runner::collect_report(std::path::Path::new(dir)).map_err(py_err)?;
    Ok(runner::render_report(&rows))
}

#[pymodule]
fn qagents_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(defaults, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(qft_circuit, m)?)?;
    m.add_function(wrap_pyfunction!(honest_coinflip, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    Ok(())
}
