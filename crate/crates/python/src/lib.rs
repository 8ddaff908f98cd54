//! Python bindings: corpus generation, the text kernels and the pipeline
//! commands. Every library error surfaces as `EmbedvalError`.

use std::path::PathBuf;

use embedval::config::RunConfig;
use embedval::corpus::{SurveyQuestion, Taxonomy, TemplateTable};
use embedval::pipeline::{self, Command};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(embedval_py, EmbedvalError, PyException);

fn to_py(e: embedval::Error) -> PyErr {
    EmbedvalError::new_err(e.to_string())
}

fn question_dict<'py>(py: Python<'py>, q: &SurveyQuestion) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("id", &q.id)?;
    d.set_item("text", &q.text)?;
    d.set_item("basic", q.basic.as_str())?;
    d.set_item("concrete_id", &q.concrete_id)?;
    d.set_item("triad_id", &q.triad_id)?;
    d.set_item("role", q.role.as_str())?;
    d.set_item("formulation", q.formulation.as_str())?;
    d.set_item("template_id", &q.template_id)?;
    d.set_item("n_tokens", q.n_tokens)?;
    d.set_item("length_bin", q.length_bin.as_str())?;
    Ok(d)
}

/// Lowercased, punctuation-stripped tokens of `text`.
#[pyfunction]
fn tokenize(text: &str) -> PyResult<Vec<String>> {
    embedval::corpus::tokenize(text).map_err(to_py)
}

#[pyfunction]
fn cosine(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    embedval::embed::cosine_slices(&a, &b).map_err(to_py)
}

/// Jaccard similarity of the token sets of two texts.
#[pyfunction]
fn jaccard(a: &str, b: &str) -> PyResult<f64> {
    embedval::embed::jaccard(a, b).map_err(to_py)
}

/// The shipped corpus as a list of dicts, one per question.
#[pyfunction]
#[pyo3(signature = (seed = 0))]
fn generate_corpus(py: Python<'_>, seed: u64) -> PyResult<Vec<Bound<'_, PyDict>>> {
    let corpus = py
        .detach(|| embedval::corpus::generate_corpus(&Taxonomy::shipped(), &TemplateTable::shipped(), seed))
        .map_err(to_py)?;
    corpus.iter().map(|q| question_dict(py, q)).collect()
}

/// Runs a pipeline command like the CLI does and returns the run metadata.
#[pyfunction]
#[pyo3(signature = (command, config = None, seed = None, out_dir = None, reps = None))]
fn run<'py>(
    py: Python<'py>,
    command: &str,
    config: Option<PathBuf>,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
    reps: Option<Vec<String>>,
) -> PyResult<Bound<'py, PyDict>> {
    let command = match command {
        "gen-corpus" => Command::GenCorpus,
        "probe" => Command::Probe,
        "simdiff" => Command::Simdiff,
        "predict" => Command::Predict,
        "all" => Command::All,
        other => return Err(PyValueError::new_err(format!("unknown command {other:?}"))),
    };
    let report = py
        .detach(|| {
            let mut cfg = match &config {
                Some(path) => RunConfig::load(path)?,
                None => RunConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(dir) = out_dir {
                cfg.out_dir = dir;
            }
            if let Some(reps) = &reps {
                cfg.retain_representations(reps)?;
            }
            pipeline::run(command, &cfg)
        })
        .map_err(to_py)?;
    let m = &report.metadata;
    let d = PyDict::new(py);
    d.set_item("tool", &m.tool)?;
    d.set_item("version", &m.version)?;
    d.set_item("command", &m.command)?;
    d.set_item("seed", m.seed)?;
    d.set_item("config_sha256", &m.config_sha256)?;
    d.set_item("representations", &m.representations)?;
    Ok(d)
}

#[pymodule]
fn embedval_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("EmbedvalError", m.py().get_type::<EmbedvalError>())?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(cosine, m)?)?;
    m.add_function(wrap_pyfunction!(jaccard, m)?)?;
    m.add_function(wrap_pyfunction!(generate_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
