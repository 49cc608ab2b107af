//! Python bindings: models, Betti numbers, elliptic enumeration, the fiber
//! sequences and the obstruction reports.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sullivan_core::cohomology::{betti, is_coboundary, BettiTable};
use sullivan_core::dsl::{parse_model as parse_text, print_model};
use sullivan_core::ellipticity::{self, RankVector, SearchOptions};
use sullivan_core::fibration;
use sullivan_core::gca::SullivanModel;
use sullivan_core::pipeline::{self, AnalyzeOptions, Target};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(value_error)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A catalog name or an inline rank vector such as `2:1,5:1`.
fn ranks(spec: &str) -> PyResult<RankVector> {
    if let Some(e) = pipeline::lookup(spec) {
        return Ok(e.ranks);
    }
    spec.parse::<RankVector>()
        .map_err(|e| value_error(format!("`{spec}` is neither a catalog name nor a rank vector: {e}")))
}

#[pyclass(name = "Model", module = "sullivan", frozen)]
struct PyModel {
    inner: SullivanModel,
    notes: Vec<String>,
}

#[pymethods]
impl PyModel {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        let parsed = parse_text(text).map_err(value_error)?;
        Ok(PyModel {
            inner: parsed.model,
            notes: parsed.notes,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    /// `(name, degree)` pairs in generator order.
    #[getter]
    fn generators(&self) -> Vec<(String, u32)> {
        self.inner
            .generators()
            .iter()
            .map(|g| (g.name.clone(), g.degree))
            .collect()
    }

    #[getter]
    fn notes(&self) -> Vec<String> {
        self.notes.clone()
    }

    #[getter]
    fn ranks(&self) -> String {
        pipeline::catalog::ranks_of(&self.inner).to_string()
    }

    fn differential(&self, generator: &str) -> PyResult<String> {
        let i = self
            .inner
            .index_of(generator)
            .ok_or_else(|| value_error(format!("no generator `{generator}`")))?;
        Ok(self.inner.format_element(self.inner.d_generator(i)))
    }

    /// Betti numbers `b_0 ..= b_max_degree`.
    fn betti(&self, max_degree: u32) -> Vec<usize> {
        betti(&self.inner, max_degree).values().to_vec()
    }

    /// Whether `d^2 = 0` holds up to `max_degree`.
    fn is_valid(&self, max_degree: u32) -> bool {
        self.inner.validate(max_degree).is_valid()
    }

    fn is_coboundary(&self, expression: &str) -> PyResult<bool> {
        let a = self.inner.parse_element(expression).map_err(value_error)?;
        Ok(is_coboundary(&self.inner, &a).map_err(value_error)?.is_coboundary())
    }

    fn __str__(&self) -> String {
        print_model(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Model({:?}, {} generators)", self.inner.name(), self.inner.len())
    }
}

#[pyfunction]
fn parse_model(text: &str) -> PyResult<PyModel> {
    PyModel::new(text)
}

#[pyfunction]
fn formal_dimension(ranks_spec: &str) -> PyResult<i64> {
    Ok(ellipticity::formal_dimension(&ranks(ranks_spec)?))
}

/// Rank vectors of simply connected elliptic spaces of dimension `dim`.
#[pyfunction]
#[pyo3(signature = (dim, prune = true))]
fn enumerate_elliptic(py: Python<'_>, dim: u32, prune: bool) -> PyResult<Vec<String>> {
    let found = py
        .detach(|| ellipticity::enumerate_candidates(dim, prune, &SearchOptions::default()))
        .map_err(value_error)?;
    Ok(found.iter().map(|f| f.to_string()).collect())
}

/// Fiber rank vectors allowed by the homotopy sequence.
#[pyfunction]
fn fiber_ranks(total: &str, base: &str) -> PyResult<Vec<String>> {
    let found = fibration::fiber_rank_vectors(&ranks(total)?, &ranks(base)?);
    Ok(found.iter().map(|f| f.to_string()).collect())
}

/// Fiber Betti tables consistent with the sequence of a fibration over
/// `S^sphere_dim`.
#[pyfunction]
#[pyo3(signature = (sphere_dim, total_betti, fiber_dim, known = None))]
fn wang_fiber_betti(
    sphere_dim: u32,
    total_betti: Vec<usize>,
    fiber_dim: u32,
    known: Option<BTreeMap<u32, usize>>,
) -> PyResult<Vec<Vec<usize>>> {
    let tables = fibration::wang_fiber_betti(
        sphere_dim,
        &BettiTable::new(total_betti),
        fiber_dim,
        &known.unwrap_or_default(),
    )
    .map_err(value_error)?;
    Ok(tables.iter().map(|t| t.values().to_vec()).collect())
}

/// Catalog entry as a dict, or `None`.
#[pyfunction]
fn lookup<'py>(py: Python<'py>, name: &str) -> PyResult<Option<Bound<'py, PyDict>>> {
    let Some(e) = pipeline::lookup(name) else {
        return Ok(None);
    };
    let d = PyDict::new(py);
    d.set_item("name", &e.name)?;
    d.set_item("ranks", e.ranks.to_string())?;
    d.set_item("dim", e.dim)?;
    d.set_item("betti", e.betti_up_to(e.dim).map(|b| b.values().to_vec()))?;
    Ok(Some(d))
}

/// Obstruction report for a catalog total space as nested dicts.
#[pyfunction]
fn analyze<'py>(py: Python<'py>, total: &str, max_base_dim: u32) -> PyResult<Bound<'py, PyAny>> {
    let entry = pipeline::lookup(total).ok_or_else(|| value_error(format!("catalog has no entry `{total}`")))?;
    let report = py
        .detach(|| pipeline::analyze(&entry, max_base_dim, &AnalyzeOptions::default()))
        .map_err(value_error)?;
    json_to_py(py, &serde_json::to_value(&report).map_err(value_error)?)
}

/// A canned reproduction, as nested dicts (`tree`) or report text (`text`).
#[pyfunction]
#[pyo3(signature = (target, format = "tree"))]
fn reproduce<'py>(py: Python<'py>, target: &str, format: &str) -> PyResult<Bound<'py, PyAny>> {
    let t = Target::parse(target).ok_or_else(|| value_error(format!("unknown target `{target}`")))?;
    let out = py.detach(|| pipeline::reproduce(t)).map_err(value_error)?;
    match format {
        "tree" => json_to_py(py, &out.tree),
        "text" => Ok(out.text.into_pyobject(py)?.into_any()),
        other => Err(value_error(format!("unknown format `{other}`"))),
    }
}

#[pymodule]
fn sullivan(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(parse_model, m)?)?;
    m.add_function(wrap_pyfunction!(formal_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_elliptic, m)?)?;
    m.add_function(wrap_pyfunction!(fiber_ranks, m)?)?;
    m.add_function(wrap_pyfunction!(wang_fiber_betti, m)?)?;
    m.add_function(wrap_pyfunction!(lookup, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce, m)?)?;
    Ok(())
}
