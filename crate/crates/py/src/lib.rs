//! Python bindings: chemistry helpers, metrics and the run pipeline.

use std::path::Path;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use uqmol::chem::{self, circular_fingerprint, parse_smiles, Molecule};
use uqmol::estimators::{PredictionSet, Semantics};
use uqmol::eval;
use uqmol::pipeline::{self, Config, PipelineError, RunOptions};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn pipeline_err(e: PipelineError) -> PyErr {
    match e {
        PipelineError::Io { .. } => PyOSError::new_err(e.to_string()),
        e if e.is_config() => PyValueError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

fn molecule(smiles: &str) -> PyResult<Molecule> {
    parse_smiles(smiles).map_err(value_err)
}

fn prediction_set(
    predictions: Vec<f64>,
    uncertainties: Vec<f64>,
    truths: Vec<f64>,
    relative: bool,
) -> PyResult<PredictionSet> {
    let semantics = if relative {
        Semantics::Relative
    } else {
        Semantics::VarianceLike
    };
    PredictionSet::from_vectors(predictions, uncertainties, truths, semantics).map_err(value_err)
}

#[pyfunction]
fn canonical_smiles(smiles: &str) -> PyResult<String> {
    Ok(chem::canonical_smiles(&molecule(smiles)?))
}

/// Murcko scaffold as canonical SMILES; "" for acyclic molecules.
#[pyfunction]
fn murcko_scaffold(smiles: &str) -> PyResult<String> {
    Ok(chem::murcko_scaffold(&molecule(smiles)?))
}

#[pyfunction]
fn heuristic_logp(smiles: &str) -> PyResult<f64> {
    chem::heuristic_logp(&molecule(smiles)?).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (a, b, length = 2048, radius = 3))]
fn tanimoto_distance(a: &str, b: &str, length: usize, radius: usize) -> PyResult<f64> {
    let fa = circular_fingerprint(&molecule(a)?, length, radius).map_err(value_err)?;
    let fb = circular_fingerprint(&molecule(b)?, length, radius).map_err(value_err)?;
    chem::tanimoto_distance(&fa, &fb).map_err(value_err)
}

#[pyfunction]
fn spearman_rho(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    eval::spearman_rho(&a, &b).map_err(value_err)
}

#[pyfunction]
fn nll(predictions: Vec<f64>, variances: Vec<f64>, truths: Vec<f64>) -> PyResult<f64> {
    eval::nll(&prediction_set(predictions, variances, truths, false)?).map_err(value_err)
}

#[pyfunction]
fn miscalibration_area(
    predictions: Vec<f64>,
    variances: Vec<f64>,
    truths: Vec<f64>,
) -> PyResult<f64> {
    eval::miscalibration_area(&prediction_set(predictions, variances, truths, false)?)
        .map_err(value_err)
}

/// Fit `a*U + b` on a validation set; returns `(a, b)`.
#[pyfunction]
#[pyo3(signature = (predictions, uncertainties, truths, relative = false))]
fn fit_calibration(
    predictions: Vec<f64>,
    uncertainties: Vec<f64>,
    truths: Vec<f64>,
    relative: bool,
) -> PyResult<(f64, f64)> {
    let c = eval::fit_calibration(&prediction_set(
        predictions,
        uncertainties,
        truths,
        relative,
    )?)
    .map_err(value_err)?;
    Ok((c.a, c.b))
}

/// Full metric report as a JSON string. `test` and `validation` are
/// `(predictions, uncertainties, truths)` triples.
#[pyfunction]
#[pyo3(signature = (test, validation, relative = false, name = "python"))]
fn evaluate(
    test: (Vec<f64>, Vec<f64>, Vec<f64>),
    validation: (Vec<f64>, Vec<f64>, Vec<f64>),
    relative: bool,
    name: &str,
) -> PyResult<String> {
    let t = prediction_set(test.0, test.1, test.2, relative)?;
    let v = prediction_set(validation.0, validation.1, validation.2, relative)?;
    Ok(eval::evaluate(name, &t, &v).to_json())
}

/// Run a config into an archive; returns `(completed, skipped, failed)`.
#[pyfunction]
#[pyo3(signature = (config, out, workers = 1))]
fn run(py: Python<'_>, config: &str, out: &str, workers: usize) -> PyResult<(usize, usize, usize)> {
    let path = Path::new(config);
    let cfg = Config::load(path).map_err(pipeline_err)?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let opts = RunOptions {
        workers,
        ..Default::default()
    };
    let s = py
        .detach(|| pipeline::run(&cfg, &base, Path::new(out), &opts))
        .map_err(pipeline_err)?;
    Ok((s.completed, s.skipped, s.failures.len()))
}

/// Write report tables for an archive; returns the written paths.
#[pyfunction]
fn report(archive: &str) -> PyResult<Vec<String>> {
    let files = pipeline::report(Path::new(archive)).map_err(pipeline_err)?;
    Ok(files.iter().map(|p| p.display().to_string()).collect())
}

#[pymodule]
fn uqmol_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(canonical_smiles, m)?)?;
    m.add_function(wrap_pyfunction!(murcko_scaffold, m)?)?;
    m.add_function(wrap_pyfunction!(heuristic_logp, m)?)?;
    m.add_function(wrap_pyfunction!(tanimoto_distance, m)?)?;
    m.add_function(wrap_pyfunction!(spearman_rho, m)?)?;
    m.add_function(wrap_pyfunction!(nll, m)?)?;
    m.add_function(wrap_pyfunction!(miscalibration_area, m)?)?;
    m.add_function(wrap_pyfunction!(fit_calibration, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    Ok(())
}
