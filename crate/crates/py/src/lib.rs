use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyTuple;

use finstat_core::document::{self, DocError};
use finstat_core::harness;
use finstat_core::randgen::{GenConfig, Generator};
use finstat_core::{ExtReal, FinSet, LogBase};

fn err(e: finstat_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn doc_err(e: DocError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn set(labels: Vec<String>) -> PyResult<FinSet> {
    FinSet::new(labels).map_err(err)
}

fn base(name: &str) -> PyResult<LogBase> {
    match name {
        "e" => Ok(LogBase::E),
        "2" => Ok(LogBase::Two),
        other => Err(PyValueError::new_err(format!("base must be \"e\" or \"2\", got {other:?}"))),
    }
}

fn value(v: ExtReal, b: &str) -> PyResult<f64> {
    Ok(base(b)?.convert(v).to_f64())
}

fn config(seed: u64, max_size: usize, sparse: bool) -> PyResult<GenConfig> {
    if max_size == 0 {
        return Err(PyValueError::new_err("max_size must be positive"));
    }
    Ok(GenConfig {
        seed,
        max_size,
        full_support: !sparse,
        dirichlet_like: true,
    })
}

#[pyclass(frozen, skip_from_py_object, module = "finstat")]
#[derive(Clone)]
struct Dist(finstat_core::Dist);

#[pymethods]
impl Dist {
    #[new]
    fn new(labels: Vec<String>, probs: Vec<f64>) -> PyResult<Self> {
        finstat_core::Dist::new(set(labels)?, probs).map(Dist).map_err(err)
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.0.space().labels().to_vec()
    }

    #[getter]
    fn probs(&self) -> Vec<f64> {
        self.0.probs().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("Dist({:?}, {:?})", self.0.space().labels(), self.0.probs())
    }
}

/// Row `x` of `rows` is the output distribution for input `x`.
#[pyclass(frozen, skip_from_py_object, module = "finstat")]
#[derive(Clone)]
struct Channel(finstat_core::Channel);

#[pymethods]
impl Channel {
    #[new]
    fn new(dom: Vec<String>, cod: Vec<String>, rows: Vec<Vec<f64>>) -> PyResult<Self> {
        finstat_core::Channel::new(set(dom)?, set(cod)?, rows)
            .map(Channel)
            .map_err(err)
    }

    #[getter]
    fn rows(&self) -> Vec<Vec<f64>> {
        self.0.rows().map(|r| r.to_vec()).collect()
    }

    /// `self∘first`.
    fn compose(&self, first: &Channel) -> PyResult<Channel> {
        self.0.compose(&first.0).map(Channel).map_err(err)
    }

    fn apply(&self, p: &Dist) -> PyResult<Dist> {
        self.0.apply(&p.0).map(Dist).map_err(err)
    }
}

#[pyclass(frozen, skip_from_py_object, module = "finstat")]
#[derive(Clone)]
struct StatMorphism(finstat_core::StatMorphism);

#[pymethods]
impl StatMorphism {
    /// `f[i]` is the index in `target` of the image of `source[i]`; `s` has
    /// one row per target element.
    #[new]
    fn new(
        source: Vec<String>,
        target: Vec<String>,
        f: Vec<usize>,
        p: Vec<f64>,
        s: Vec<Vec<f64>>,
    ) -> PyResult<Self> {
        let (x, y) = (set(source)?, set(target)?);
        let map = finstat_core::DetMap::new(x.clone(), y.clone(), f).map_err(err)?;
        let p = finstat_core::Dist::new(x.clone(), p).map_err(err)?;
        let s = finstat_core::Channel::new(y, x, s).map_err(err)?;
        finstat_core::StatMorphism::new(map, p, s)
            .map(StatMorphism)
            .map_err(err)
    }

    /// The morphism with `s` replaced by the Bayes inverse of `f` under `p`.
    fn optimal(&self) -> PyResult<StatMorphism> {
        let m = &self.0;
        let s = finstat_core::bayes_inverse(m.f(), m.p()).map_err(err)?;
        finstat_core::StatMorphism::new(m.f().clone(), m.p().clone(), s)
            .map(StatMorphism)
            .map_err(err)
    }

    #[pyo3(signature = (base = "e"))]
    fn re(&self, base: &str) -> PyResult<f64> {
        value(self.0.relative_entropy(), base)
    }

    #[pyo3(signature = (tol = finstat_core::EPS_EQ))]
    fn is_optimal(&self, tol: f64) -> bool {
        self.0.is_optimal(tol)
    }

    /// `self∘first`.
    fn compose(&self, first: &StatMorphism) -> PyResult<StatMorphism> {
        self.0.compose(&first.0).map(StatMorphism).map_err(err)
    }

    #[getter]
    fn p(&self) -> Dist {
        Dist(self.0.p().clone())
    }

    #[getter]
    fn q(&self) -> Dist {
        Dist(self.0.q().clone())
    }

    #[getter]
    fn r(&self) -> Dist {
        Dist(self.0.r().clone())
    }
}

#[pyclass(frozen, skip_from_py_object, module = "finstat")]
#[derive(Clone)]
struct TwoMorphism(finstat_core::TwoMorphism);

#[pymethods]
impl TwoMorphism {
    #[new]
    fn new(dom: &StatMorphism, cod: &StatMorphism, f: &Channel, fp: &Channel) -> PyResult<Self> {
        finstat_core::TwoMorphism::new(dom.0.clone(), cod.0.clone(), f.0.clone(), fp.0.clone())
            .map(TwoMorphism)
            .map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (seed = 42, max_size = 6, sparse = false))]
    fn random(seed: u64, max_size: usize, sparse: bool) -> PyResult<TwoMorphism> {
        Ok(TwoMorphism(Generator::new(config(seed, max_size, sparse)?).random_two_morphism()))
    }

    /// `(spade, club)` with `club` stacked below `spade`.
    #[staticmethod]
    #[pyo3(signature = (seed = 42, max_size = 6, sparse = false))]
    fn stacked_pair(seed: u64, max_size: usize, sparse: bool) -> PyResult<(TwoMorphism, TwoMorphism)> {
        let (spade, club) = Generator::new(config(seed, max_size, sparse)?).stacked_pair();
        Ok((TwoMorphism(spade), TwoMorphism(club)))
    }

    #[getter]
    fn dom(&self) -> StatMorphism {
        StatMorphism(self.0.dom().clone())
    }

    #[getter]
    fn cod(&self) -> StatMorphism {
        StatMorphism(self.0.cod().clone())
    }

    #[pyo3(signature = (base = "e"))]
    fn ce(&self, base: &str) -> PyResult<f64> {
        value(self.0.conditional_relative_entropy(), base)
    }

    #[pyo3(signature = (base = "e"))]
    fn ce_closed_form(&self, base: &str) -> PyResult<f64> {
        value(self.0.conditional_relative_entropy_closed_form(), base)
    }

    #[pyo3(signature = (base = "e"))]
    fn re2(&self, base: &str) -> PyResult<f64> {
        value(self.0.two_relative_entropy(), base)
    }

    #[pyo3(signature = (tol = finstat_core::EPS_EQ))]
    fn is_two_optimal(&self, tol: f64) -> bool {
        self.0.is_two_optimal(tol)
    }

    /// `(holds, max violation)` of the fiberwise marginal identity.
    #[pyo3(signature = (tol = 1e-10))]
    fn marginal_check(&self, tol: f64) -> (bool, f64) {
        self.0.marginal_check(tol)
    }

    /// `self` stacked below `spade`.
    fn vcompose(&self, spade: &TwoMorphism) -> PyResult<TwoMorphism> {
        self.0.vcompose(&spade.0).map(TwoMorphism).map_err(err)
    }

    /// `self` pasted after `spade`.
    fn hcompose(&self, spade: &TwoMorphism) -> PyResult<TwoMorphism> {
        self.0.hcompose(&spade.0).map(TwoMorphism).map_err(err)
    }
}

#[pyclass(frozen, module = "finstat")]
struct Document(document::Document);

#[pymethods]
impl Document {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Document> {
        document::parse(text).map(Document).map_err(doc_err)
    }

    fn dist(&self, name: &str) -> PyResult<Dist> {
        self.0.dist(name).map(Dist).map_err(doc_err)
    }

    fn channel(&self, name: &str) -> PyResult<Channel> {
        self.0.channel(name).map(Channel).map_err(doc_err)
    }

    fn morphism(&self, name: &str) -> PyResult<StatMorphism> {
        self.0.morphism(name).map(StatMorphism).map_err(doc_err)
    }

    fn two_morphism(&self, name: &str) -> PyResult<TwoMorphism> {
        self.0.two_morphism(name).map(TwoMorphism).map_err(doc_err)
    }

    fn to_json(&self) -> String {
        self.0.to_canonical_string()
    }
}

#[pyfunction]
#[pyo3(signature = (p, q, base = "e"))]
fn kl(p: &Dist, q: &Dist, base: &str) -> PyResult<f64> {
    value(finstat_core::kl(&p.0, &q.0).map_err(err)?, base)
}

/// Runs a named suite and returns its report as a dict.
#[pyfunction]
#[pyo3(signature = (name, trials = 1000, seed = 42, max_size = 6, tol = 1e-8, sparse = false))]
fn run_suite<'py>(
    py: Python<'py>,
    name: &str,
    trials: usize,
    seed: u64,
    max_size: usize,
    tol: f64,
    sparse: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config(seed, max_size, sparse)?;
    let report = py
        .detach(|| harness::run_suite(name, trials, cfg, tol))
        .map_err(err)?;
    let json = py.import("json")?;
    json.call_method1("loads", PyTuple::new(py, [report.to_json(false)])?)
}

#[pyfunction]
fn suites() -> Vec<&'static str> {
    harness::SUITES.to_vec()
}

#[pymodule]
fn finstat(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dist>()?;
    m.add_class::<Channel>()?;
    m.add_class::<StatMorphism>()?;
    m.add_class::<TwoMorphism>()?;
    m.add_class::<Document>()?;
    m.add_function(wrap_pyfunction!(kl, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(suites, m)?)?;
    Ok(())
}
