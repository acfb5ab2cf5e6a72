//! Python bindings. Matrices cross the boundary as dicts with the keys
//! `n`, `r`, `ring` and `rows`, the same layout the CLI reads and writes.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use swd_core::construct::{self, Assignment};
use swd_core::diagram::Diagram;
use swd_core::gibson::{self, GibsonBasis};
use swd_core::invariant;
use swd_core::pattern::{build_d, build_f, Basis, FreePattern, Policy};
use swd_core::ring::RingDescriptor;
use swd_core::tensor::{Limits, TensorMatrix};
use swd_core::verify;

create_exception!(swd, SwdError, PyException);

fn err(e: swd_core::Error) -> PyErr {
    SwdError::new_err(e.to_string())
}

fn to_value(obj: &Bound<'_, PyAny>) -> PyResult<Value> {
    let py = obj.py();
    let json = py.import("json")?;
    // numpy arrays and scalars become plain lists and ints
    let obj = if obj.hasattr("tolist")? { obj.call_method0("tolist")? } else { obj.clone() };
    let kwargs = pyo3::types::PyDict::new(py);
    kwargs.set_item("default", py.import("builtins")?.getattr("str")?)?;
    let text: String = json.call_method("dumps", (obj,), Some(&kwargs))?.extract()?;
    serde_json::from_str(&text).map_err(|e| SwdError::new_err(e.to_string()))
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn ring_of(s: &str) -> PyResult<RingDescriptor> {
    s.parse().map_err(err)
}

fn limits(unsafe_large: bool) -> Limits {
    if unsafe_large {
        Limits::unbounded()
    } else {
        Limits::default()
    }
}

fn matrix_of(obj: &Bound<'_, PyAny>) -> PyResult<TensorMatrix> {
    TensorMatrix::from_json(&to_value(obj)?).map_err(err)
}

fn pattern(kind: &str, n: usize, r: usize, basis: &str, policy: &str) -> PyResult<FreePattern> {
    let basis = Basis::parse(n, basis).map_err(err)?;
    let policy: Policy = policy.parse().map_err(err)?;
    match kind {
        "f" => build_f(n, r, basis, policy),
        "d" => build_d(n, r, basis, policy),
        other => return Err(SwdError::new_err(format!("unknown pattern kind {other:?}"))),
    }
    .map_err(err)
}

fn assignment(
    p: &FreePattern,
    ring: RingDescriptor,
    given: Option<&Bound<'_, PyAny>>,
    seed: Option<u64>,
) -> PyResult<Assignment> {
    if let Some(obj) = given {
        return Assignment::from_json(&to_value(obj)?).map_err(err);
    }
    Ok(match seed {
        Some(s) => Assignment::random(p, ring, &mut ChaCha8Rng::seed_from_u64(s)),
        None => Assignment::zeros(p, ring),
    })
}

/// Builds a matrix dict from nested rows of integers or strings.
#[pyfunction]
#[pyo3(signature = (rows, n, r, ring = "z"))]
fn matrix<'py>(py: Python<'py>, rows: &Bound<'py, PyAny>, n: usize, r: usize, ring: &str) -> PyResult<Bound<'py, PyAny>> {
    let v = json!({"n": n, "r": r, "ring": ring_of(ring)?, "rows": to_value(rows)?});
    let m = TensorMatrix::from_json(&v).map_err(err)?;
    to_py(py, &m.to_json())
}

#[pyfunction]
#[pyo3(signature = (n, r, ring = "q", unsafe_large = false))]
fn centraliser_dimension(n: usize, r: usize, ring: &str, unsafe_large: bool) -> PyResult<usize> {
    verify::centraliser_dimension(n, r, ring_of(ring)?, &limits(unsafe_large)).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, r, ring = "q", unsafe_large = false))]
fn span_dimension_w(n: usize, r: usize, ring: &str, unsafe_large: bool) -> PyResult<usize> {
    verify::span_dimension_w(n, r, ring_of(ring)?, verify::Subgroup::Full, &limits(unsafe_large)).map_err(err)
}

/// The verification report as a dict.
#[pyfunction]
#[pyo3(signature = (n, r, ring = "q", half = false, seed = 0, unsafe_large = false))]
fn verify_duality<'py>(
    py: Python<'py>,
    n: usize,
    r: usize,
    ring: &str,
    half: bool,
    seed: u64,
    unsafe_large: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let (ring, lim) = (ring_of(ring)?, limits(unsafe_large));
    let rep = if half { verify::verify_half(n, r, ring, &lim) } else { verify::verify_duality(n, r, ring, seed, &lim) };
    to_py(py, &serde_json::to_value(rep.map_err(err)?).map_err(|e| SwdError::new_err(e.to_string()))?)
}

#[pyfunction]
#[pyo3(signature = (n, r, kind = "f", basis = "last-row", policy = "largest"))]
fn free_pattern<'py>(
    py: Python<'py>,
    n: usize,
    r: usize,
    kind: &str,
    basis: &str,
    policy: &str,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &pattern(kind, n, r, basis, policy)?.to_json())
}

/// Extends an invariant by one degree. Free values come from `assignment`,
/// else are random from `seed`, else zero.
#[pyfunction]
#[pyo3(signature = (b, assignment = None, seed = None, basis = "last-row", policy = "largest", unsafe_large = false))]
fn extend<'py>(
    py: Python<'py>,
    b: &Bound<'py, PyAny>,
    assignment: Option<&Bound<'py, PyAny>>,
    seed: Option<u64>,
    basis: &str,
    policy: &str,
    unsafe_large: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let b = matrix_of(b)?;
    let p = pattern("f", b.n(), b.r() + 1, basis, policy)?;
    let f = self::assignment(&p, b.ring(), assignment, seed)?;
    let a = construct::extend(&b, &f, &limits(unsafe_large)).map_err(err)?;
    to_py(py, &a.to_json())
}

#[pyfunction]
fn restrict<'py>(py: Python<'py>, a: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &invariant::restrict(&matrix_of(a)?).map_err(err)?.to_json())
}

/// Special summands as a list of dicts with keys `i`, `j` and `matrix`.
#[pyfunction]
#[pyo3(signature = (a, assignment = None, seed = None, basis = "last-row", policy = "largest"))]
fn decompose<'py>(
    py: Python<'py>,
    a: &Bound<'py, PyAny>,
    assignment: Option<&Bound<'py, PyAny>>,
    seed: Option<u64>,
    basis: &str,
    policy: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let a = matrix_of(a)?;
    let p = pattern("d", a.n(), a.r(), basis, policy)?;
    let f = self::assignment(&p, a.ring(), assignment, seed)?;
    let parts = construct::decompose(&a, &f).map_err(err)?;
    let v: Vec<Value> =
        parts.iter().map(|s| json!({"i": s.row_value, "j": s.col_value, "matrix": s.matrix.to_json()})).collect();
    to_py(py, &Value::Array(v))
}

#[pyfunction]
fn check_membership<'py>(py: Python<'py>, a: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let rep = invariant::check_membership(&matrix_of(a)?);
    to_py(py, &serde_json::to_value(rep).map_err(|e| SwdError::new_err(e.to_string()))?)
}

/// Pairs (permutation in one-line notation, coefficient) with A = Σ x_w Φ(w).
#[pyfunction]
fn express_in_permutation_span(a: &Bound<'_, PyAny>) -> PyResult<Vec<(String, String)>> {
    let coeffs = construct::express_in_permutation_span(&matrix_of(a)?).map_err(err)?;
    Ok(coeffs.into_iter().map(|(w, x)| (w.to_string(), x.to_string())).collect())
}

/// (label, permutation) pairs of the permutation basis of E(n,1).
#[pyfunction]
fn gibson_basis(n: usize) -> PyResult<Vec<(String, String)>> {
    let b = GibsonBasis::new(n).map_err(err)?;
    Ok(b.elements.into_iter().map(|e| (e.label, e.permutation)).collect())
}

#[pyfunction]
fn gibson_decompose(a: &Bound<'_, PyAny>) -> PyResult<Vec<(String, String)>> {
    let coeffs = gibson::gibson_decompose(&matrix_of(a)?).map_err(err)?;
    Ok(coeffs.into_iter().map(|(l, x)| (l, x.to_string())).collect())
}

#[pyfunction]
fn enumerate_diagrams(r: usize) -> Vec<String> {
    Diagram::enumerate(r).iter().map(|d| d.to_string()).collect()
}

#[pymodule]
fn swd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SwdError", m.py().get_type::<SwdError>())?;
    m.add_function(wrap_pyfunction!(matrix, m)?)?;
    m.add_function(wrap_pyfunction!(centraliser_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(span_dimension_w, m)?)?;
    m.add_function(wrap_pyfunction!(verify_duality, m)?)?;
    m.add_function(wrap_pyfunction!(free_pattern, m)?)?;
    m.add_function(wrap_pyfunction!(extend, m)?)?;
    m.add_function(wrap_pyfunction!(restrict, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(check_membership, m)?)?;
    m.add_function(wrap_pyfunction!(express_in_permutation_span, m)?)?;
    m.add_function(wrap_pyfunction!(gibson_basis, m)?)?;
    m.add_function(wrap_pyfunction!(gibson_decompose, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_diagrams, m)?)?;
    Ok(())
}
