//! Python bindings.
//!
//! States and pairs cross the boundary as JSON strings in the same format the
//! CLI reads. Pmfs are lists of rows. Infinite exponents come back as
//! `float("inf")`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use steinlab::exponents::{self, Family};
use steinlab::marginal::{self, MarginalConstraint};
use steinlab::protocol::{self, TypicalityMode, TypicalityRule};
use steinlab::{blowup, io, presets, ExtReal, JointPmf};

fn py_err(e: steinlab::Error) -> PyErr {
    if e.is_input_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn ext(v: ExtReal) -> f64 {
    v.to_f64()
}

fn pmf(rows: Vec<Vec<f64>>) -> PyResult<JointPmf> {
    JointPmf::from_rows(&rows).map_err(py_err)
}

fn pair_from_json(text: &str) -> PyResult<steinlab::BipartitePair> {
    let v = io::parse_json(text).map_err(py_err)?;
    io::parse_pair(&v, "$").map_err(py_err)
}

/// One point of an exact error curve.
#[pyclass(frozen, get_all)]
struct CurvePoint {
    n: usize,
    alpha: f64,
    beta: f64,
    exponent: f64,
}

#[pymethods]
impl CurvePoint {
    fn __repr__(&self) -> String {
        format!(
            "CurvePoint(n={}, alpha={}, beta={}, exponent={})",
            self.n, self.alpha, self.beta, self.exponent
        )
    }
}

/// The geometric-mean gap of the built-in classical-quantum instance.
#[pyfunction]
fn kappa_gap() -> PyResult<f64> {
    let (psi, r0, r1) = presets::kappa_instance().map_err(py_err)?;
    exponents::kappa_gap(&psi, &r0, &r1).map_err(py_err)
}

/// Closed-form upper bound for the isotropic or Werner family.
#[pyfunction]
fn iso_werner_bound(family: &str, p: f64, d: usize) -> PyResult<f64> {
    let family = match family {
        "isotropic" => Family::Isotropic,
        "werner" => Family::Werner,
        other => return Err(PyValueError::new_err(format!("unknown family {other:?}"))),
    };
    Ok(ext(exponents::iso_werner_bounds(family, p, d).map_err(py_err)?.value))
}

#[pyfunction]
fn theta_zrc(p: Vec<Vec<f64>>, q: Vec<Vec<f64>>) -> PyResult<f64> {
    Ok(ext(exponents::theta_zrc(&pmf(p)?, &pmf(q)?).map_err(py_err)?.value))
}

#[pyfunction]
#[pyo3(signature = (pair_json, tol = 1e-10))]
fn theta_sl(pair_json: &str, tol: f64) -> PyResult<f64> {
    let pair = pair_from_json(pair_json)?;
    Ok(ext(exponents::theta_sl(&pair, tol).map_err(py_err)?.value))
}

#[pyfunction]
fn theta_product_alt(pair_json: &str) -> PyResult<f64> {
    let pair = pair_from_json(pair_json)?;
    Ok(ext(exponents::theta_product_alt(&pair).map_err(py_err)?.value))
}

/// Minimizer rows and objective of the classical I-projection.
#[pyfunction]
#[pyo3(signature = (q, px, py, tol = 1e-10))]
fn iproject(q: Vec<Vec<f64>>, px: Vec<f64>, py: Vec<f64>, tol: f64) -> PyResult<(Vec<Vec<f64>>, f64)> {
    let c = MarginalConstraint::new(px, py).map_err(py_err)?;
    let (p, diag) = marginal::iproject(&pmf(q)?, &c, tol).map_err(py_err)?;
    Ok((p.to_rows(), diag.objective))
}

/// Exact errors of the one-bit typicality scheme.
#[pyfunction]
#[pyo3(signature = (p, q, delta, ns, mode = "robust"))]
fn one_bit_exact(
    p: Vec<Vec<f64>>,
    q: Vec<Vec<f64>>,
    delta: f64,
    ns: Vec<usize>,
    mode: &str,
) -> PyResult<Vec<CurvePoint>> {
    let mode = match mode {
        "robust" => TypicalityMode::Robust,
        "interval" => TypicalityMode::Interval,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    let rule = TypicalityRule::new(delta, mode).map_err(py_err)?;
    let curve = protocol::one_bit_exact(&pmf(p)?, &pmf(q)?, rule, &ns).map_err(py_err)?;
    Ok(curve
        .points
        .into_iter()
        .map(|pt| CurvePoint {
            n: pt.n,
            alpha: pt.alpha,
            beta: pt.beta,
            exponent: ext(pt.minus_log_beta_over_n),
        })
        .collect())
}

/// `(1/n) ln γ_n` along the zero-rate schedule.
#[pyfunction]
fn normalized_log_gamma(n: usize, epsilon: f64, message_size: f64, d: usize, mu_min: f64) -> PyResult<f64> {
    let p = blowup::BlowupParams::zero_rate_schedule(n, epsilon, message_size).map_err(py_err)?;
    Ok(ext(blowup::normalized_log_gamma(&p, d, mu_min).map_err(py_err)?))
}

/// JSON for a named preset pair, ready for the pair-taking functions.
#[pyfunction]
#[pyo3(signature = (name, params = Vec::new(), d = 2))]
fn preset_pair_json(name: &str, params: Vec<f64>, d: usize) -> PyResult<String> {
    let pair = presets::preset(name, &params, d)
        .and_then(|p| p.into_pair())
        .map_err(py_err)?;
    let v = serde_json::json!({
        "d_a": pair.d_a,
        "d_b": pair.d_b,
        "null": io::state_to_json(&pair.null_state),
        "alt": io::state_to_json(&pair.alt_state),
    });
    Ok(v.to_string())
}

#[pymodule]
fn pysteinlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<CurvePoint>()?;
    m.add_function(wrap_pyfunction!(kappa_gap, m)?)?;
    m.add_function(wrap_pyfunction!(iso_werner_bound, m)?)?;
    m.add_function(wrap_pyfunction!(theta_zrc, m)?)?;
    m.add_function(wrap_pyfunction!(theta_sl, m)?)?;
    m.add_function(wrap_pyfunction!(theta_product_alt, m)?)?;
    m.add_function(wrap_pyfunction!(iproject, m)?)?;
    m.add_function(wrap_pyfunction!(one_bit_exact, m)?)?;
    m.add_function(wrap_pyfunction!(normalized_log_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(preset_pair_json, m)?)?;
    Ok(())
}
