//! Python bindings: density matrices, Kraus channels, the distinguishability
//! measures, faithfulness bounds and purifiability verdicts.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use qpurify_core::channels::{self, KrausChannel};
use qpurify_core::linalg::{tol, CMatrix};
use qpurify_core::purification::{self, PAIR_TEST_TOL};
use qpurify_core::states::{self, Ensemble};
use qpurify_core::{metrics, suites, sweep, Error};

type Rows = Vec<Vec<Complex64>>;

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_rows(m: &CMatrix) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(rows: Rows) -> PyResult<CMatrix> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("ragged matrix rows"));
    }
    Ok(CMatrix::from_fn(n, cols, |i, j| rows[i][j]))
}

/// Serializes through JSON so Python receives plain dicts and lists.
fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

#[pyclass(name = "DensityMatrix", module = "qpurify", frozen)]
struct PyDensityMatrix {
    inner: states::DensityMatrix,
}

#[pymethods]
impl PyDensityMatrix {
    /// Build from a nested list of (complex) numbers.
    #[new]
    fn new(rows: Rows) -> PyResult<Self> {
        let inner = states::DensityMatrix::new(from_rows(rows)?).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_pure(amplitudes: Vec<Complex64>) -> PyResult<Self> {
        let v = states::PureStateVector::normalized(amplitudes.into()).map_err(err)?;
        Ok(Self {
            inner: v.to_density(),
        })
    }

    #[staticmethod]
    fn maximally_mixed(dim: usize) -> Self {
        Self {
            inner: states::DensityMatrix::maximally_mixed(dim),
        }
    }

    #[staticmethod]
    #[pyo3(signature = (dim, rank, seed=0))]
    fn random(dim: usize, rank: usize, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: states::random_mixed(dim, rank, seed).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("state serializes")
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn to_list(&self) -> Rows {
        to_rows(self.inner.matrix())
    }

    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    #[pyo3(signature = (rank_tol=tol::RANK))]
    fn rank(&self, rank_tol: f64) -> usize {
        self.inner.rank(rank_tol)
    }

    fn spectrum(&self) -> Vec<f64> {
        self.inner.spectrum()
    }

    fn tensor(&self, other: &PyDensityMatrix) -> Self {
        Self {
            inner: self.inner.tensor(&other.inner),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "DensityMatrix(dim={}, purity={:.6})",
            self.inner.dim(),
            self.inner.purity()
        )
    }
}

#[pyclass(name = "KrausChannel", module = "qpurify", frozen)]
struct PyKrausChannel {
    inner: KrausChannel,
}

#[pymethods]
impl PyKrausChannel {
    #[new]
    fn new(kraus: Vec<Rows>) -> PyResult<Self> {
        let ops = kraus
            .into_iter()
            .map(from_rows)
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self {
            inner: KrausChannel::new(ops).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (in_dim, out_dim, count, seed=0))]
    fn random(in_dim: usize, out_dim: usize, count: usize, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: channels::random_channel(in_dim, out_dim, count, seed).map_err(err)?,
        })
    }

    #[getter]
    fn in_dim(&self) -> usize {
        self.inner.in_dim()
    }

    #[getter]
    fn out_dim(&self) -> usize {
        self.inner.out_dim()
    }

    fn kraus(&self) -> Vec<Rows> {
        self.inner.kraus().iter().map(to_rows).collect()
    }

    fn tp_defect(&self) -> f64 {
        self.inner.tp_defect()
    }

    fn apply(&self, rho: &PyDensityMatrix) -> PyResult<PyDensityMatrix> {
        Ok(PyDensityMatrix {
            inner: self.inner.apply(&rho.inner).map_err(err)?,
        })
    }

    /// `self` after `first`.
    fn compose(&self, first: &PyKrausChannel) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.compose(&first.inner).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "KrausChannel(in_dim={}, out_dim={}, kraus={})",
            self.inner.in_dim(),
            self.inner.out_dim(),
            self.inner.kraus().len()
        )
    }
}

#[pyfunction]
fn trace_distance(a: &PyDensityMatrix, b: &PyDensityMatrix) -> PyResult<f64> {
    metrics::trace_distance(&a.inner, &b.inner).map_err(err)
}

#[pyfunction]
fn fidelity(a: &PyDensityMatrix, b: &PyDensityMatrix) -> PyResult<f64> {
    metrics::fidelity(&a.inner, &b.inner).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (a, b, rank_tol=tol::RANK))]
fn wcd(a: &PyDensityMatrix, b: &PyDensityMatrix, rank_tol: f64) -> PyResult<f64> {
    metrics::wcd(&a.inner, &b.inner, rank_tol).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (a, b, rank_tol=tol::RANK))]
fn canonical_angles(a: &PyDensityMatrix, b: &PyDensityMatrix, rank_tol: f64) -> PyResult<Vec<f64>> {
    Ok(metrics::canonical_angles(&a.inner, &b.inner, rank_tol)
        .map_err(err)?
        .angles)
}

#[pyfunction]
#[pyo3(signature = (a, b, eta=0.5))]
fn delta_bounds(
    py: Python<'_>,
    a: &PyDensityMatrix,
    b: &PyDensityMatrix,
    eta: f64,
) -> PyResult<Py<PyAny>> {
    let bounds = purification::delta_bounds(&a.inner, &b.inner, eta, 1.0 - eta).map_err(err)?;
    to_py(py, &bounds)
}

#[pyfunction]
fn max_purification_overlap(a: &PyDensityMatrix, b: &PyDensityMatrix) -> PyResult<f64> {
    purification::max_purification_overlap(&a.inner, &b.inner).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (a, b, tol=PAIR_TEST_TOL))]
fn can_purify_perfectly(
    py: Python<'_>,
    a: &PyDensityMatrix,
    b: &PyDensityMatrix,
    tol: f64,
) -> PyResult<Py<PyAny>> {
    let v = purification::can_purify_perfectly(&a.inner, &b.inner, tol).map_err(err)?;
    to_py(py, &v)
}

#[pyfunction]
#[pyo3(signature = (states, tol=PAIR_TEST_TOL))]
fn analyze_set(
    py: Python<'_>,
    states: Vec<PyRef<'_, PyDensityMatrix>>,
    tol: f64,
) -> PyResult<Py<PyAny>> {
    let list = states.iter().map(|s| s.inner.clone()).collect();
    let ensemble = Ensemble::uniform(list).map_err(err)?;
    to_py(py, &purification::analyze_set(&ensemble, tol).map_err(err)?)
}

/// Returns `(amplitudes, aux_dim)` of a purification on `system (x) aux`.
#[pyfunction]
#[pyo3(signature = (rho, rank_tol=tol::RANK))]
fn purify_state(rho: &PyDensityMatrix, rank_tol: f64) -> (Vec<Complex64>, usize) {
    let p = purification::purify_state(&rho.inner, rank_tol);
    (p.state.amplitudes().iter().copied().collect(), p.aux_dim)
}

#[pyfunction]
fn figure_example(theta: f64) -> PyResult<(PyDensityMatrix, PyDensityMatrix)> {
    let e = states::figure_example(theta).map_err(err)?;
    let [a, b] = [&e.states()[0], &e.states()[1]].map(|s| PyDensityMatrix { inner: s.clone() });
    Ok((a, b))
}

#[pyfunction]
#[pyo3(name = "sweep")]
fn sweep_rows(py: Python<'_>, theta_min: f64, theta_max: f64, steps: usize) -> PyResult<Py<PyAny>> {
    to_py(py, &sweep::sweep(theta_min, theta_max, steps).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (name, trials=100, seed=0))]
fn run_suite(py: Python<'_>, name: &str, trials: usize, seed: u64) -> PyResult<Py<PyAny>> {
    to_py(py, &suites::run_suite(name, trials, seed).map_err(err)?)
}

#[pymodule]
fn qpurify(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyKrausChannel>()?;
    m.add_function(wrap_pyfunction!(trace_distance, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(wcd, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_angles, m)?)?;
    m.add_function(wrap_pyfunction!(delta_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(max_purification_overlap, m)?)?;
    m.add_function(wrap_pyfunction!(can_purify_perfectly, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_set, m)?)?;
    m.add_function(wrap_pyfunction!(purify_state, m)?)?;
    m.add_function(wrap_pyfunction!(figure_example, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_rows, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
