//! Python module `multitrace_py`.

use multitrace::campaign;
use multitrace::combinatorics;
use multitrace::frechet;
use multitrace::inequalities as ineq;
use multitrace::linalg::{self, ComplexMatrix};
use multitrace::quadrature::{self, QuadratureRule};
use multitrace::{PosDefMatrix, TrialReport};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn py_err(e: multitrace::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_matrix(rows: Vec<Vec<Complex64>>) -> PyResult<ComplexMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn to_rows(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Positive definite matrix.
#[pyclass(name = "PosDef", frozen, from_py_object)]
#[derive(Clone)]
struct PyPosDef(PosDefMatrix);

#[pymethods]
impl PyPosDef {
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        PosDefMatrix::new(to_matrix(rows)?)
            .map(Self)
            .map_err(py_err)
    }

    /// Random matrix with log-uniform spectrum in `[lo, hi]` and Haar eigenvectors.
    #[staticmethod]
    #[pyo3(signature = (dim, seed, lo = 0.1, hi = 10.0))]
    fn random(dim: usize, seed: u64, lo: f64, hi: f64) -> PyResult<Self> {
        linalg::random_posdef(dim, seed, (lo, hi))
            .map(Self)
            .map_err(py_err)
    }

    #[staticmethod]
    fn identity(dim: usize) -> Self {
        Self(PosDefMatrix::identity(dim))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.0.eigenvalues().to_vec()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        to_rows(self.0.matrix())
    }

    fn __repr__(&self) -> String {
        format!("PosDef(dim={})", self.0.dim())
    }
}

/// Verdict of one check.
#[pyclass(name = "Report", frozen, get_all)]
struct PyReport {
    check_id: String,
    lhs: f64,
    rhs: f64,
    abs_gap: f64,
    rel_gap: f64,
    passed: bool,
    json: String,
}

impl From<TrialReport> for PyReport {
    fn from(r: TrialReport) -> Self {
        Self {
            json: serde_json::to_string(&r).unwrap_or_default(),
            check_id: r.check_id,
            lhs: r.lhs,
            rhs: r.rhs,
            abs_gap: r.abs_gap,
            rel_gap: r.rel_gap,
            passed: r.pass,
        }
    }
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!(
            "Report({}, lhs={:.6e}, rhs={:.6e}, rel_gap={:.2e}, passed={})",
            self.check_id, self.lhs, self.rhs, self.rel_gap, self.passed
        )
    }
}

fn unwrap(list: &[PyPosDef]) -> Vec<PosDefMatrix> {
    list.iter().map(|m| m.0.clone()).collect()
}

fn real_line(half_width: f64, nodes: usize) -> PyResult<QuadratureRule> {
    QuadratureRule::real_line(half_width, nodes).map_err(py_err)
}

#[pyfunction]
fn beta_density(t: f64) -> f64 {
    quadrature::beta_density(t)
}

#[pyfunction]
fn thue_morse(k: usize) -> PyResult<u8> {
    if k < 2 {
        return Err(PyValueError::new_err("index starts at 2"));
    }
    Ok(combinatorics::thue_morse(k))
}

#[pyfunction]
fn thue_morse_prefix(len: usize) -> Vec<u32> {
    combinatorics::thue_morse_prefix(len)
        .into_iter()
        .map(u32::from)
        .collect()
}

/// `(n', rho)`.
#[pyfunction]
fn shape_params(n: usize) -> PyResult<(u32, usize)> {
    if n < 3 {
        return Err(PyValueError::new_err("n must be at least 3"));
    }
    let s = combinatorics::shape_params(n);
    Ok((s.n_prime, s.rho))
}

/// `[π(2), …, π(n-1)]`.
#[pyfunction]
fn build_permutation(n: usize) -> PyResult<Vec<usize>> {
    if n < 3 {
        return Err(PyValueError::new_err("n must be at least 3"));
    }
    Ok(combinatorics::build_permutation(n).map)
}

#[pyfunction]
fn t_closed_form(x: &PyPosDef, y: Vec<Vec<Complex64>>) -> PyResult<Vec<Vec<Complex64>>> {
    let t = frechet::t_closed_form(&x.0, &to_matrix(y)?).map_err(py_err)?;
    Ok(to_rows(&t.value))
}

#[pyfunction]
fn lhs_exp_sum_log(a: Vec<PyPosDef>) -> PyResult<f64> {
    ineq::lhs_exp_sum_log(&unwrap(&a)).map_err(py_err)
}

#[pyfunction]
fn rhs_gt(a1: &PyPosDef, a2: &PyPosDef) -> PyResult<f64> {
    ineq::rhs_gt(&a1.0, &a2.0).map_err(py_err)
}

#[pyfunction]
fn rhs_lieb3(a1: &PyPosDef, a2: &PyPosDef, a3: &PyPosDef) -> PyResult<f64> {
    ineq::rhs_lieb3(&a1.0, &a2.0, &a3.0).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (a, half_width = 12.0, nodes = 400))]
fn rhs_complex_powers(a: Vec<PyPosDef>, half_width: f64, nodes: usize) -> PyResult<f64> {
    ineq::rhs_complex_powers(&unwrap(&a), &real_line(half_width, nodes)?).map_err(py_err)
}

#[pyfunction]
fn rhs_resolvent(a: Vec<PyPosDef>) -> PyResult<f64> {
    ineq::rhs_resolvent(&unwrap(&a)).map_err(py_err)
}

/// Pointwise tensor identity at `t`, with the permutation built for `len(x)`.
#[pyfunction]
fn tensor_identity_check(x: Vec<PyPosDef>, t: f64) -> PyResult<PyReport> {
    if x.len() < 3 {
        return Err(PyValueError::new_err("need at least three matrices"));
    }
    let perm = combinatorics::build_permutation(x.len());
    ineq::tensor_identity_check(&unwrap(&x), t, &perm)
        .map(Into::into)
        .map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (check, n = None))]
fn explain(check: &str, n: Option<usize>) -> PyResult<String> {
    campaign::explain(check, n).map_err(py_err)
}

#[pymodule]
fn multitrace_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPosDef>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(beta_density, m)?)?;
    m.add_function(wrap_pyfunction!(thue_morse, m)?)?;
    m.add_function(wrap_pyfunction!(thue_morse_prefix, m)?)?;
    m.add_function(wrap_pyfunction!(shape_params, m)?)?;
    m.add_function(wrap_pyfunction!(build_permutation, m)?)?;
    m.add_function(wrap_pyfunction!(t_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(lhs_exp_sum_log, m)?)?;
    m.add_function(wrap_pyfunction!(rhs_gt, m)?)?;
    m.add_function(wrap_pyfunction!(rhs_lieb3, m)?)?;
    m.add_function(wrap_pyfunction!(rhs_complex_powers, m)?)?;
    m.add_function(wrap_pyfunction!(rhs_resolvent, m)?)?;
    m.add_function(wrap_pyfunction!(tensor_identity_check, m)?)?;
    m.add_function(wrap_pyfunction!(explain, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
