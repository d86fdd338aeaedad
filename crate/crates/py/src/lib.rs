//! Python bindings: the repository type plus the family-synthesis and
//! sequence-merge helpers, packaged as the `splforge_py` extension
//! module. Library errors surface as `ValueError`.

use std::collections::{BTreeMap, BTreeSet};

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use splforge_core::artefact::{self, ArtefactId};
use splforge_core::codegen::{
    generate_product_by_artefacts, generate_product_by_features, generate_spl, simplify, SplMode,
};
use splforge_core::corpus;
use splforge_core::integration::{self, store, Product, SplRepository};
use splforge_core::minilang::SourceFile;
use splforge_core::validation;
use splforge_core::variability::{build_avm, build_fvm, export_dot, VariabilityModel};
use splforge_core::SplError;

fn err(e: SplError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_mode(mode: &str) -> PyResult<SplMode> {
    match mode {
        "features" => Ok(SplMode::Features),
        "groups" => Ok(SplMode::ArtefactGroups),
        "ids" => Ok(SplMode::ArtefactIds),
        other => Err(PyValueError::new_err(format!(
            "unknown mode {other:?}; expected 'features', 'groups', or 'ids'"
        ))),
    }
}

fn build_model(repo: &SplRepository, level: &str) -> PyResult<VariabilityModel> {
    match level {
        "artefact" => build_avm(repo).map_err(err),
        "feature" => build_fvm(repo).map_err(err),
        other => Err(PyValueError::new_err(format!(
            "unknown level {other:?}; expected 'artefact' or 'feature'"
        ))),
    }
}

/// An incrementally grown product line, same semantics as the CLI's
/// on-disk repositories (and interchangeable with them via open/save).
#[pyclass]
struct Repository {
    inner: SplRepository,
}

#[pymethods]
impl Repository {
    #[new]
    fn new(name: &str) -> Self {
        Repository {
            inner: SplRepository::new(name),
        }
    }

    /// Load a repository directory written by `save` or the CLI.
    #[staticmethod]
    fn open(dir: &str) -> PyResult<Self> {
        Ok(Repository {
            inner: store::load(std::path::Path::new(dir)).map_err(err)?,
        })
    }

    /// Persist into `dir` (created as needed).
    fn save(&self, dir: &str) -> PyResult<()> {
        store::save(&self.inner, std::path::Path::new(dir)).map_err(err)
    }

    /// Integrate one product; `files` maps source paths to text.
    /// Returns the new iteration number.
    fn integrate(
        &mut self,
        name: &str,
        features: Vec<String>,
        files: BTreeMap<String, String>,
    ) -> PyResult<u32> {
        let files: Vec<SourceFile> = files
            .into_iter()
            .map(|(path, text)| SourceFile { path, text })
            .collect();
        let product = Product::new(name, features, files);
        self.inner.integrate(&product).map_err(err)?;
        Ok(self.inner.iteration)
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn iteration(&self) -> u32 {
        self.inner.iteration
    }

    fn product_names(&self) -> Vec<String> {
        self.inner.products.iter().map(|p| p.name.clone()).collect()
    }

    fn feature_names(&self) -> Vec<String> {
        self.inner.feature_names().into_iter().collect()
    }

    fn paths(&self) -> Vec<String> {
        self.inner.paths().into_iter().map(str::to_string).collect()
    }

    fn artefact_count(&self) -> usize {
        self.inner.artefact_count()
    }

    fn artefact_ids(&self) -> Vec<String> {
        self.inner.artefact_ids().into_iter().collect()
    }

    /// The rendered ids of every artefact a product consists of.
    fn artefact_configuration(&self, product: &str) -> PyResult<Vec<String>> {
        self.inner
            .product(product)
            .map(|p| p.configuration.iter().cloned().collect())
            .ok_or_else(|| PyValueError::new_err(format!("unknown product: {product}")))
    }

    /// Annotated platform code: `(files, warnings)`, files mapping path
    /// to text.
    #[pyo3(signature = (mode = "features", simplified = true))]
    fn generate_spl(
        &self,
        mode: &str,
        simplified: bool,
    ) -> PyResult<(BTreeMap<String, String>, Vec<String>)> {
        let spl = generate_spl(&self.inner, parse_mode(mode)?);
        let files = spl
            .files
            .iter()
            .map(|file| {
                let file = if simplified { simplify(file) } else { file.clone() };
                (file.path.clone(), file.render())
            })
            .collect();
        Ok((files, spl.warnings))
    }

    /// Generate the product selecting exactly `features`:
    /// `(files, warnings)`.
    fn generate_product(
        &self,
        features: Vec<String>,
    ) -> PyResult<(BTreeMap<String, String>, Vec<String>)> {
        let product = generate_product_by_features(&self.inner, &features).map_err(err)?;
        let files = product
            .files
            .into_iter()
            .map(|f| (f.path, f.text))
            .collect();
        Ok((files, product.warnings))
    }

    /// Generate the product containing exactly the given artefact ids.
    fn generate_product_by_ids(&self, ids: Vec<String>) -> PyResult<BTreeMap<String, String>> {
        let config: BTreeSet<String> = ids.into_iter().collect();
        let files = generate_product_by_artefacts(&self.inner, &config).map_err(err)?;
        Ok(files.into_iter().map(|f| (f.path, f.text)).collect())
    }

    /// Effective feature traces: artefact group name to feature
    /// conjunction, manual overrides already applied.
    fn traces(&self) -> PyResult<BTreeMap<String, Vec<String>>> {
        Ok(self
            .inner
            .effective_traces()
            .map_err(err)?
            .entries
            .into_iter()
            .map(|(group, features)| (group, features.into_iter().collect()))
            .collect())
    }

    /// Override the feature trace of the given groups.
    fn apply_traces(&mut self, overrides: BTreeMap<String, Vec<String>>) -> PyResult<()> {
        self.inner.apply_traces(&overrides).map_err(err)
    }

    /// The variability model at `level` ('artefact' or 'feature') as a
    /// dict: common attributes, nodes, implications, mutual exclusions.
    fn variability<'py>(&self, py: Python<'py>, level: &str) -> PyResult<Bound<'py, PyDict>> {
        let model = build_model(&self.inner, level)?;
        let constraints = &model.constraints;
        let out = PyDict::new(py);
        out.set_item("level", level)?;
        out.set_item(
            "common",
            constraints.common_attributes().into_iter().collect::<Vec<_>>(),
        )?;
        let nodes = PyList::empty(py);
        for node in &constraints.nodes {
            let entry = PyDict::new(py);
            entry.set_item("name", &node.name)?;
            entry.set_item("attributes", node.attributes.iter().collect::<Vec<_>>())?;
            entry.set_item("extent", node.extent.iter().collect::<Vec<_>>())?;
            entry.set_item("common", node.is_common)?;
            nodes.append(entry)?;
        }
        out.set_item("nodes", nodes)?;
        out.set_item("implications", constraints.implications.clone())?;
        out.set_item("mutualExclusions", constraints.mutual_exclusions.clone())?;
        Ok(out)
    }

    /// DOT rendering of the variability model at `level`.
    fn export_dot(&self, level: &str) -> PyResult<String> {
        Ok(export_dot(&build_model(&self.inner, level)?))
    }

    fn __repr__(&self) -> String {
        format!(
            "Repository(name={:?}, iteration={}, products={}, artefacts={})",
            self.inner.name,
            self.inner.iteration,
            self.inner.products.len(),
            self.inner.artefact_count()
        )
    }
}

/// Content hash of a byte string, as used in artefact ids.
#[pyfunction]
fn content_hash(text: &str) -> u64 {
    artefact::content_hash(text.as_bytes())
}

/// Merge two sequences of rendered artefact ids into their minimal
/// common super-sequence, duplicates minted; returns rendered ids.
#[pyfunction]
fn super_sequence(s1: Vec<String>, s2: Vec<String>) -> PyResult<Vec<String>> {
    let parse_all = |ids: &[String]| -> PyResult<Vec<ArtefactId>> {
        ids.iter()
            .map(|id| {
                ArtefactId::parse(id)
                    .ok_or_else(|| PyValueError::new_err(format!("malformed artefact id: {id}")))
            })
            .collect()
    };
    let merged = integration::super_sequence(&parse_all(&s1)?, &parse_all(&s2)?);
    Ok(integration::mint_duplicates(&merged)
        .iter()
        .map(ArtefactId::rendered)
        .collect())
}

/// Names of the bundled example families.
#[pyfunction]
fn builtin_families() -> Vec<String> {
    corpus::builtin_families()
        .iter()
        .map(|spec| spec.name.clone())
        .collect()
}

/// The JSON text of a bundled family specification.
#[pyfunction]
fn builtin_family(name: &str) -> PyResult<String> {
    let spec = corpus::builtin_family(name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown builtin family: {name}")))?;
    serde_json::to_string_pretty(&spec).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Synthesize the products of a family specification (JSON text):
/// a list of dicts with name, features, and files.
#[pyfunction]
#[pyo3(signature = (spec_json, seed = 0))]
fn synthesize_family(py: Python<'_>, spec_json: &str, seed: u64) -> PyResult<Py<PyList>> {
    let spec = corpus::FamilySpec::from_json(spec_json).map_err(err)?;
    let products = corpus::synthesize(&spec, seed).map_err(err)?;
    let list = PyList::empty(py);
    for product in products {
        let entry = PyDict::new(py);
        entry.set_item("name", product.name)?;
        entry.set_item("features", product.features)?;
        let files = PyDict::new(py);
        for file in product.files {
            files.set_item(file.path, file.text)?;
        }
        entry.set_item("files", files)?;
        list.append(entry)?;
    }
    Ok(list.into())
}

/// Synthesize a family, integrate it, regenerate every product, and
/// report each diff: a list of dicts with name, repErr, and counts.
#[pyfunction]
#[pyo3(signature = (spec_json, seed = 0))]
fn round_trip_family(py: Python<'_>, spec_json: &str, seed: u64) -> PyResult<Py<PyList>> {
    let spec = corpus::FamilySpec::from_json(spec_json).map_err(err)?;
    let products = corpus::synthesize(&spec, seed).map_err(err)?;
    let entries = validation::round_trip(&products).map_err(err)?;
    let list = PyList::empty(py);
    for entry in entries {
        let row = PyDict::new(py);
        row.set_item("name", entry.name)?;
        row.set_item("repErr", entry.rep_err)?;
        row.set_item("insertions", entry.report.insertions)?;
        row.set_item("deletions", entry.report.deletions)?;
        row.set_item("updates", entry.report.updates)?;
        row.set_item("statementMoves", entry.report.statement_moves)?;
        row.set_item("modifiedLoc", entry.report.modified_loc)?;
        row.set_item("totalLoc", entry.report.total_loc_original)?;
        list.append(row)?;
    }
    Ok(list.into())
}

#[pymodule]
fn splforge_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Repository>()?;
    m.add_function(wrap_pyfunction!(content_hash, m)?)?;
    m.add_function(wrap_pyfunction!(super_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_families, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_family, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize_family, m)?)?;
    m.add_function(wrap_pyfunction!(round_trip_family, m)?)?;
    Ok(())
}
