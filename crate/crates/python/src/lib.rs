//! Python bindings: Chebyshev series, commuting pairs, tuning and the renormalization orbit.

use std::cell::RefCell;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use renorm_core::analysis;
use renorm_core::chebapprox::{ChebSeries, TryMap};
use renorm_core::circle_maps::{self, CircleLift, ExtractOptions, RigidRotation};
use renorm_core::combinatorics::{self, CfWord};
use renorm_core::pairs::CommutingPair;
use renorm_core::renorm::{self, OrbitOptions, RenormStep};
use renorm_core::Error;

create_exception!(renorm_py, RenormError, PyException);

fn err(e: Error) -> PyErr {
    RenormError::new_err(format!("{}: {e}", e.kind()))
}

fn word(cf: &str) -> PyResult<CfWord> {
    cf.parse::<CfWord>().map_err(err)
}

#[pyclass(name = "ChebSeries", module = "renorm_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySeries(ChebSeries);

#[pymethods]
impl PySeries {
    /// Interpolates the Python callable `f` at Chebyshev-Lobatto nodes of `[lo, hi]`.
    #[staticmethod]
    #[pyo3(signature = (f, lo, hi, degree = 64))]
    fn fit(f: &Bound<'_, PyAny>, lo: f64, hi: f64, degree: usize) -> PyResult<Self> {
        let raised: RefCell<Option<PyErr>> = RefCell::new(None);
        let map = TryMap(|x: f64| {
            f.call1((x,)).and_then(|v| v.extract::<f64>()).map_err(|e| {
                raised.borrow_mut().get_or_insert(e);
                Error::Fit { node: x, value: f64::NAN }
            })
        });
        let fitted = ChebSeries::fit_map(&map, lo, hi, degree);
        if let Some(e) = raised.into_inner() {
            return Err(e);
        }
        fitted.map(PySeries).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(PySeries).map_err(|e| err(e.into()))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| err(e.into()))
    }

    fn __call__(&self, x: f64) -> PyResult<f64> {
        self.0.eval(x).map_err(err)
    }

    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.0.coeffs().to_vec()
    }

    #[getter]
    fn domain(&self) -> (f64, f64) {
        (self.0.lo(), self.0.hi())
    }

    fn derivative(&self) -> Self {
        PySeries(self.0.derivative())
    }

    /// `(rate, sentinel)`; `sentinel` marks an exactly polynomial series.
    fn decay_rate(&self) -> PyResult<(f64, bool)> {
        self.0.decay_rate().map(|d| (d.rate, d.sentinel)).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("ChebSeries(degree={}, domain=({}, {}))", self.0.degree(), self.0.lo(), self.0.hi())
    }
}

#[pyclass(name = "CommutingPair", module = "renorm_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPair(CommutingPair);

fn step_dict<'py>(py: Python<'py>, s: &RenormStep) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("height", s.height)?;
    d.set_item("scale", s.scale)?;
    d.set_item("residual_after", s.residual_after)?;
    d.set_item("decay_after", s.decay_after)?;
    d.set_item("eta0_after", s.eta0_after)?;
    Ok(d)
}

#[pymethods]
impl PyPair {
    /// Pair `eta(x) = x - s`, `xi(x) = x + 1`.
    #[staticmethod]
    fn translation(s: f64) -> PyResult<Self> {
        CommutingPair::translation(s).map(PyPair).map_err(err)
    }

    #[staticmethod]
    fn affine(a: f64, b: f64) -> PyResult<Self> {
        CommutingPair::affine(a, b).map(PyPair).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        CommutingPair::from_json(text).map(PyPair).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(err)
    }

    #[getter]
    fn a(&self) -> f64 {
        self.0.a()
    }

    #[getter]
    fn b(&self) -> f64 {
        self.0.b()
    }

    #[getter]
    fn is_affine(&self) -> bool {
        self.0.is_affine()
    }

    #[getter]
    fn normalized(&self) -> bool {
        self.0.normalized
    }

    #[getter]
    fn heights(&self) -> Vec<u32> {
        self.0.meta.heights.clone()
    }

    fn eta(&self, x: f64) -> PyResult<f64> {
        self.0.eta.eval(x).map_err(err)
    }

    fn xi(&self, x: f64) -> PyResult<f64> {
        self.0.xi.eval(x).map_err(err)
    }

    fn normalize(&self) -> PyResult<Self> {
        self.0.normalize().map(PyPair).map_err(err)
    }

    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = self.0.validate();
        let d = PyDict::new(py);
        d.set_item("valid", r.is_valid())?;
        d.set_item("residual", r.residual)?;
        d.set_item("monotone_ok", r.monotone_ok)?;
        d.set_item("critical_ok", r.critical_ok)?;
        d.set_item("structure_ok", r.structure_ok)?;
        Ok(d)
    }

    fn decay(&self) -> f64 {
        self.0.decay()
    }

    #[pyo3(signature = (n_max = circle_maps::DEFAULT_N_MAX))]
    fn height(&self, n_max: usize) -> PyResult<usize> {
        renorm::height(&self.0, n_max).map_err(err)
    }

    fn renormalize<'py>(&self, py: Python<'py>) -> PyResult<(Self, Bound<'py, PyDict>)> {
        let (p, s) = renorm::renormalize(&self.0).map_err(err)?;
        Ok((PyPair(p), step_dict(py, &s)?))
    }

    /// `(value, accuracy)` of the glued circle's rotation number.
    #[pyo3(signature = (iterations = 100_000))]
    fn glued_rotation_number(&self, iterations: u64) -> PyResult<(f64, f64)> {
        self.0.glued_rotation_number(iterations).map(|r| (r.value, r.accuracy)).map_err(err)
    }

    fn __repr__(&self) -> String {
        let kind = if self.0.is_affine() { "affine" } else { "cubic" };
        format!("CommutingPair({kind}, a={}, b={})", self.0.a(), self.0.b())
    }
}

/// Rotation number of `F(x) = x + omega + ...` from the critical family.
#[pyfunction]
#[pyo3(signature = (omega, c, tol = 1e-10))]
fn rotation_number(omega: f64, c: f64, tol: f64) -> PyResult<f64> {
    let lift = CircleLift::new(omega, c).map_err(err)?;
    circle_maps::rotation_number(&lift, tol).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (theta, tol = 1e-12))]
fn rigid_rotation_number(theta: f64, tol: f64) -> PyResult<f64> {
    circle_maps::rotation_number(&RigidRotation { theta }, tol).map_err(err)
}

/// `(omega, bisections)` with the lift's rotation number equal to the word `cf`.
#[pyfunction]
#[pyo3(signature = (c, cf, tol = 1e-11))]
fn tune_omega(c: f64, cf: &str, tol: f64) -> PyResult<(f64, usize)> {
    let t = circle_maps::tune_omega(c, &word(cf)?, tol).map_err(err)?;
    Ok((t.omega, t.bisections))
}

#[pyfunction]
#[pyo3(signature = (omega, c, degree = 64, n_max = circle_maps::DEFAULT_N_MAX))]
fn extract_pair(omega: f64, c: f64, degree: usize, n_max: usize) -> PyResult<PyPair> {
    let lift = CircleLift::new(omega, c).map_err(err)?;
    circle_maps::extract_pair(&lift, &ExtractOptions { degree, n_max }).map(PyPair).map_err(err)
}

/// `(pairs, steps, stop_reason)` for up to `n` renormalizations.
#[pyfunction]
fn renorm_orbit<'py>(
    py: Python<'py>,
    pair: &PyPair,
    n: usize,
) -> PyResult<(Vec<PyPair>, Vec<Bound<'py, PyDict>>, String)> {
    let rec = renorm::renorm_orbit(&pair.0, n, &OrbitOptions::default());
    let steps = rec.steps.iter().map(|s| step_dict(py, s)).collect::<PyResult<Vec<_>>>()?;
    Ok((rec.pairs.into_iter().map(PyPair).collect(), steps, rec.stop.label().to_string()))
}

#[pyfunction]
fn gauss(x: f64) -> PyResult<f64> {
    combinatorics::gauss(x).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (x, depth = 20))]
fn cf_expand(x: f64, depth: usize) -> PyResult<Vec<u32>> {
    combinatorics::cf_expand(x, depth).map(|e| e.entries).map_err(err)
}

#[pyfunction]
fn quadratic_irrational(period: Vec<u32>) -> PyResult<f64> {
    combinatorics::quadratic_irrational(&period).map_err(err)
}

#[pyfunction]
fn dist_c0(p: &PyPair, q: &PyPair) -> PyResult<f64> {
    analysis::dist_c0(&p.0, &q.0).map_err(err)
}

#[pyfunction]
fn dist_ck(p: &PyPair, q: &PyPair, k: usize) -> PyResult<f64> {
    analysis::dist_ck(&p.0, &q.0, k).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (p, q, ellipse = analysis::DEFAULT_ELLIPSE))]
fn dist_analytic(p: &PyPair, q: &PyPair, ellipse: f64) -> PyResult<f64> {
    analysis::dist_analytic(&p.0, &q.0, ellipse).map_err(err)
}

/// `(lambda, r2)` of `d_n ~ C lambda^n`.
#[pyfunction]
fn fit_contraction_rate(d: Vec<f64>) -> PyResult<(f64, f64)> {
    analysis::fit_contraction_rate(&d).map_err(err)
}

#[pymodule]
fn renorm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("RenormError", m.py().get_type::<RenormError>())?;
    m.add_class::<PySeries>()?;
    m.add_class::<PyPair>()?;
    m.add_function(wrap_pyfunction!(rotation_number, m)?)?;
    m.add_function(wrap_pyfunction!(rigid_rotation_number, m)?)?;
    m.add_function(wrap_pyfunction!(tune_omega, m)?)?;
    m.add_function(wrap_pyfunction!(extract_pair, m)?)?;
    m.add_function(wrap_pyfunction!(renorm_orbit, m)?)?;
    m.add_function(wrap_pyfunction!(gauss, m)?)?;
    m.add_function(wrap_pyfunction!(cf_expand, m)?)?;
    m.add_function(wrap_pyfunction!(quadratic_irrational, m)?)?;
    m.add_function(wrap_pyfunction!(dist_c0, m)?)?;
    m.add_function(wrap_pyfunction!(dist_ck, m)?)?;
    m.add_function(wrap_pyfunction!(dist_analytic, m)?)?;
    m.add_function(wrap_pyfunction!(fit_contraction_rate, m)?)?;
    Ok(())
}
