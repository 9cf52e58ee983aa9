//! Python bindings. Weight sequences are passed as strings (`"constant"`,
//! `"power:0.5"`, `"geometric:2"`) or as lists of floats; structured results
//! come back as plain dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyString;
use serde::Serialize;

use hardy_cert::carleman::{bound_comparison, OptimizeOptions};
use hardy_cert::cli::config::{parse_config, MethodChoice};
use hardy_cert::cli::report::{render, Format};
use hardy_cert::conditions::{self, ConditionKind};
use hardy_cert::norms::{self, NormMethod};
use hardy_cert::recurrences;
use hardy_cert::weights::{WeightSequence, WeightSpec};
use hardy_cert::wirtinger;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_dict<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(value_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn sequence(w: &Bound<'_, PyAny>, len: usize) -> PyResult<WeightSequence> {
    if let Ok(s) = w.cast::<PyString>() {
        let spec: WeightSpec = s.to_str()?.parse().map_err(value_err)?;
        return WeightSequence::new(&spec, len).map_err(value_err);
    }
    let vals: Vec<f64> = w.extract()?;
    WeightSequence::explicit(vals).map_err(value_err)
}

/// First `n` weights `lambda_1..lambda_n`.
#[pyfunction]
fn weights(w: &Bound<'_, PyAny>, n: usize) -> PyResult<Vec<f64>> {
    Ok(sequence(w, n)?.lambdas()[..n].to_vec())
}

/// Ratios `x_k = Lambda_k / lambda_k` for `k <= n`.
#[pyfunction]
fn ratios(w: &Bound<'_, PyAny>, n: usize) -> PyResult<Vec<f64>> {
    sequence(w, n)?.ratios(n).map_err(value_err)
}

/// `l^p` norm of the `n x n` weighted mean matrix. `method` is `auto`, `eigen`,
/// `power` or `eta`; `auto` picks `eigen` at `p = 2`.
#[pyfunction]
#[pyo3(signature = (w, p, n, method = "auto", tol = 1e-12))]
fn norm<'py>(
    py: Python<'py>,
    w: &Bound<'py, PyAny>,
    p: f64,
    n: usize,
    method: &str,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let seq = sequence(w, n)?;
    let m = match method {
        "auto" => MethodChoice::Auto.resolve(p),
        other => other.parse::<NormMethod>().map_err(value_err)?,
    };
    let est = norms::estimate(&seq, p, n, m, tol).map_err(value_err)?;
    to_dict(py, &est)
}

/// Checks one increment condition on the prefix `n`. Several conditions read
/// `lambda_{n+1}`, so `n + 1` weights are built.
#[pyfunction]
#[pyo3(signature = (kind, w = None, n = 1000, p = None, l = None, alpha = None))]
fn condition<'py>(
    py: Python<'py>,
    kind: &str,
    w: Option<&Bound<'py, PyAny>>,
    n: usize,
    p: Option<f64>,
    l: Option<f64>,
    alpha: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let kind: ConditionKind = kind.parse().map_err(value_err)?;
    let need = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| PyValueError::new_err(format!("`{name}` is required for {kind}")))
    };
    let seq = || -> PyResult<WeightSequence> {
        match w {
            Some(w) => sequence(w, n + 1),
            None => Ok(WeightSequence::constant(n + 1)),
        }
    };
    let report = match kind {
        ConditionKind::Cartlidge => conditions::cartlidge_l(&seq()?, n, p),
        ConditionKind::Thm13 => {
            conditions::thm13_condition(&seq()?, need(p, "p")?, need(l, "l")?, n)
        }
        ConditionKind::Cor14 => {
            conditions::cor14_condition(&seq()?, need(p, "p")?, need(l, "l")?, n)
        }
        ConditionKind::CarlemanM => conditions::carleman_m(&seq()?, n, l),
        ConditionKind::BennettE => conditions::bennett_e(&seq()?, n, l),
        ConditionKind::ReversedLs => {
            conditions::reversed_condition_check(&seq()?, need(p, "p")?, need(l, "l")?, n)
        }
        ConditionKind::Thm61 => conditions::thm61_checks(need(alpha, "alpha")?, need(p, "p")?, n),
    }
    .map_err(value_err)?;
    let out = to_dict(py, &report)?;
    out.set_item("holds", report.verdict.holds())?;
    out.set_item("verdict_text", report.verdict.to_string())?;
    Ok(out)
}

/// `eta_k(mu)` for `k <= n`, optionally checked against the barrier for `l`.
#[pyfunction]
#[pyo3(signature = (w, p, mu, n, l = None))]
fn eta_trace<'py>(
    py: Python<'py>,
    w: &Bound<'py, PyAny>,
    p: f64,
    mu: f64,
    n: usize,
    l: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let seq = sequence(w, n)?;
    let mut tr = recurrences::eta_trace(&seq, p, mu, n).map_err(value_err)?;
    if let Some(l) = l {
        tr = recurrences::barrier_check(&tr, p, l).map_err(value_err)?;
    }
    to_dict(py, &tr)
}

/// Best Carleman ratio found for the first `n` weights, with its upper bounds.
#[pyfunction]
#[pyo3(signature = (w, n, restarts = 8, seed = 0))]
fn carleman<'py>(
    py: Python<'py>,
    w: &Bound<'py, PyAny>,
    n: usize,
    restarts: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let seq = sequence(w, n + 1)?;
    let opts = OptimizeOptions {
        restarts,
        seed,
        ..OptimizeOptions::default()
    };
    let est = py
        .detach(|| bound_comparison(&seq, n, opts))
        .map_err(value_err)?;
    to_dict(py, &est)
}

/// Closed-form and numeric spectrum of the `(a, b)` tridiagonal form.
#[pyfunction]
fn tridiag_spectrum<'py>(py: Python<'py>, a: f64, b: f64, n: usize) -> PyResult<Bound<'py, PyAny>> {
    to_dict(
        py,
        &wirtinger::tridiag_spectrum(a, b, n).map_err(value_err)?,
    )
}

#[pyfunction]
fn ls_counterexample<'py>(py: Python<'py>, p: f64) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &conditions::ls_counterexample(p).map_err(value_err)?)
}

/// Runs a config text exactly as the command-line tool would. Returns
/// `(ok, rendered_report)`; `format` overrides the config's own.
#[pyfunction]
#[pyo3(signature = (text, format = None))]
fn run_config(py: Python<'_>, text: &str, format: Option<&str>) -> PyResult<(bool, String)> {
    let cfg = parse_config(text).map_err(value_err)?;
    let fmt = match format {
        Some(f) => f.parse::<Format>().map_err(value_err)?,
        None => cfg.format,
    };
    let report = py.detach(|| hardy_cert::cli::run(&cfg));
    Ok((report.ok(), render(&report, fmt)))
}

#[pymodule]
fn hardy_cert_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(weights, m)?)?;
    m.add_function(wrap_pyfunction!(ratios, m)?)?;
    m.add_function(wrap_pyfunction!(norm, m)?)?;
    m.add_function(wrap_pyfunction!(condition, m)?)?;
    m.add_function(wrap_pyfunction!(eta_trace, m)?)?;
    m.add_function(wrap_pyfunction!(carleman, m)?)?;
    m.add_function(wrap_pyfunction!(tridiag_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(ls_counterexample, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
