//! Python bindings. The module is importable as `freefisher`.

use num_complex::Complex64;
use pyo3::exceptions::{PyMemoryError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;

use freefisher::engine::{DynFunctional, Word};
use freefisher::functionals::{self as fx, BoundInput, FisherConstant, TheoremId};
use freefisher::measures::MeasureDescriptor;
use freefisher::rmt::{self, KdeOptions, TrialSeeds};
use freefisher::suites::{run_suite, Suite, SuiteOptions};
use freefisher::{CompactMeasure, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Input(_) | Error::UnknownGenerator(_) | Error::MissingWord(_) => PyValueError::new_err(e.to_string()),
        Error::Resource(_) => PyMemoryError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn kappa(k: Option<f64>) -> PyResult<FisherConstant> {
    k.map(FisherConstant::new).transpose().map(Option::unwrap_or_default).map_err(py_err)
}

fn json_to_py<'py>(py: Python<'py>, v: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A compactly supported probability measure on the real line.
#[pyclass(module = "freefisher", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Measure {
    inner: CompactMeasure,
}

fn wrap(r: freefisher::Result<CompactMeasure>) -> PyResult<Measure> {
    r.map(|inner| Measure { inner }).map_err(py_err)
}

#[pymethods]
impl Measure {
    /// Built-in measure by name, e.g. `"quartercircle(4)"` or `"uniform(0,1)"`.
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        wrap(CompactMeasure::from_name(name))
    }

    /// Measure from a JSON descriptor string.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        wrap(MeasureDescriptor::from_json(text))
    }

    #[staticmethod]
    fn beta(a: f64, b: f64, lo: f64, hi: f64) -> PyResult<Self> {
        wrap(CompactMeasure::beta(a, b, lo, hi))
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label().to_string()
    }

    #[getter]
    fn support(&self) -> (f64, f64) {
        self.inner.support()
    }

    #[getter]
    fn atoms(&self) -> Vec<(f64, f64)> {
        self.inner.atoms().to_vec()
    }

    fn sqrt(&self) -> PyResult<Self> {
        wrap(self.inner.symmetric_square_root())
    }

    fn square(&self) -> PyResult<Self> {
        wrap(self.inner.push_square())
    }

    fn dilate(&self, factor: f64) -> PyResult<Self> {
        wrap(self.inner.dilate(factor))
    }

    fn moment(&self, k: usize) -> PyResult<f64> {
        self.inner.moment(k).map_err(py_err)
    }

    /// Moments `0..=upto` as exact fraction strings, or `None` when the
    /// measure has no rational moment sequence.
    fn exact_moments(&self, upto: usize) -> Option<Vec<String>> {
        self.inner.exact_moments(upto).map(|v| v.iter().map(|m| m.to_string()).collect())
    }

    fn density(&self, x: f64) -> f64 {
        self.inner.density(x)
    }

    fn cdf(&self, x: f64) -> f64 {
        self.inner.cdf(x)
    }

    fn quantile(&self, q: f64) -> f64 {
        self.inner.quantile(q)
    }

    fn __repr__(&self) -> String {
        format!("Measure('{}')", self.inner.label())
    }
}

#[pyfunction]
#[pyo3(signature = (measure, kappa=None))]
fn fisher(measure: &Measure, kappa: Option<f64>) -> PyResult<f64> {
    fx::fisher_of_measure(&measure.inner, self::kappa(kappa)?).map_err(py_err)
}

#[pyfunction]
fn entropy(measure: &Measure) -> PyResult<f64> {
    fx::entropy_of_measure(&measure.inner).map_err(py_err)
}

#[pyfunction]
fn log_energy(measure: &Measure) -> PyResult<f64> {
    fx::log_energy(&measure.inner).map_err(py_err)
}

/// Right-hand side of a theorem bound. Pass `measure` for T11/T13/T14 and
/// either for the others.
#[pyfunction]
#[pyo3(signature = (theorem, measure=None, value=None, d=1, kappa=None))]
fn bound(theorem: &str, measure: Option<&Measure>, value: Option<f64>, d: u32, kappa: Option<f64>) -> PyResult<f64> {
    let id: TheoremId = theorem.parse().map_err(py_err)?;
    let inp = match (measure, value) {
        (Some(m), None) => BoundInput::Measure(m.inner.clone()),
        (None, Some(v)) => BoundInput::Value(v),
        _ => return Err(PyValueError::new_err("give exactly one of measure and value")),
    };
    fx::theorem_bound(id, &inp, d, self::kappa(kappa)?).map(|b| b.value).map_err(py_err)
}

/// φ(word) for an R-diagonal `a` with `a*a ~ nu` (default quartercircle(4),
/// i.e. circular). Returns an exact fraction string when available,
/// otherwise a complex number.
#[pyfunction]
#[pyo3(signature = (word, nu=None, exact=true))]
fn star_moment<'py>(py: Python<'py>, word: &str, nu: Option<&Measure>, exact: bool) -> PyResult<Bound<'py, PyAny>> {
    let nu = match nu {
        Some(m) => m.inner.clone(),
        None => CompactMeasure::quartercircle(4.0).map_err(py_err)?,
    };
    let w = Word::parse(word).map_err(py_err)?;
    if let Some(l) = w.letters().iter().find(|l| l.gen.name() != "a") {
        return Err(py_err(Error::UnknownGenerator(l.gen.name().to_string())));
    }
    let f = DynFunctional::rdiagonal(&nu, exact).map_err(py_err)?;
    match f.evaluate_exact_string(&w).map_err(py_err)? {
        Some(s) => Ok(s.into_pyobject(py)?.into_any()),
        None => {
            let v: Complex64 = f.evaluate(&w).map_err(py_err)?;
            Ok(num_complex_to_py(py, v)?)
        }
    }
}

fn num_complex_to_py(py: Python<'_>, v: Complex64) -> PyResult<Bound<'_, PyAny>> {
    py.import("builtins")?.getattr("complex")?.call1((v.re, v.im))
}

/// Run a verification suite and return its report as a dict.
#[pyfunction]
#[pyo3(signature = (suite, degree=None, nu=None, exact=true))]
fn verify<'py>(py: Python<'py>, suite: &str, degree: Option<usize>, nu: Option<&Measure>, exact: bool) -> PyResult<Bound<'py, PyAny>> {
    let suite: Suite = suite.parse().map_err(py_err)?;
    let opts = SuiteOptions { degree, nu: nu.map(|m| m.inner.clone()), exact, ..Default::default() };
    let report = py.detach(|| run_suite(suite, &opts)).map_err(py_err)?;
    json_to_py(py, &report)
}

/// One Monte Carlo trial of `A = U·P`: KS distance, empirical Fisher
/// information and log energy of the block-embedding spectrum.
#[pyfunction]
#[pyo3(signature = (nu, n, seed=0, max_len=4))]
fn rdiagonal_trial<'py>(py: Python<'py>, nu: &Measure, n: usize, seed: u64, max_len: usize) -> PyResult<Bound<'py, PyAny>> {
    let nu = nu.inner.clone();
    let t = py.detach(|| rmt::rdiagonal_trial(&nu, n, seed, max_len, &KdeOptions::default())).map_err(py_err)?;
    json_to_py(py, &t)
}

/// Spectrum of the Hermitian block embedding of one `A = U·P` sample.
#[pyfunction]
#[pyo3(signature = (nu, n, seed=0))]
fn block_embedding_spectrum(py: Python<'_>, nu: &Measure, n: usize, seed: u64) -> PyResult<Vec<f64>> {
    let nu = nu.inner.clone();
    py.detach(|| {
        let (a, _) = rmt::rdiagonal_matrix(n, &nu, seed)?;
        Ok(rmt::embedded_spectrum(&a.matrix)?.values)
    })
    .map_err(py_err)
}

/// Per-trial seeds derived from a master seed.
#[pyfunction]
fn trial_seeds(master: u64, count: usize) -> Vec<u64> {
    TrialSeeds { master, count }.seeds()
}

#[pymodule]
#[pyo3(name = "freefisher")]
fn freefisher_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Measure>()?;
    m.add_function(wrap_pyfunction!(fisher, m)?)?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(log_energy, m)?)?;
    m.add_function(wrap_pyfunction!(bound, m)?)?;
    m.add_function(wrap_pyfunction!(star_moment, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(rdiagonal_trial, m)?)?;
    m.add_function(wrap_pyfunction!(block_embedding_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(trial_seeds, m)?)?;
    m.add("KAPPA", FisherConstant::default().kappa)?;
    Ok(())
}
