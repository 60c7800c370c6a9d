//! Python bindings: the main types and operations of the da-perturb
//! library as plain functions plus a `FrameVector` class.
//!
//! Complex scalars cross the boundary as Python `complex`; error values
//! surface as `ValueError` with the library's diagnostic text.

use num::complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use da_perturb::frames::{self, ChainIndex, FrameKind, TruncationSpec};
use da_perturb::general::{self, GmChainStart};
use da_perturb::series;
use da_perturb::sobolev;
use da_perturb::toeplitz::{self, ShiftOp};
use da_perturb::transport;
use da_perturb::verify;

fn err(e: da_perturb::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_op(op: &str) -> PyResult<ShiftOp> {
    match op {
        "t1" => Ok(ShiftOp::T1),
        "t1adj" => Ok(ShiftOp::T1Adj),
        "t2" => Ok(ShiftOp::T2),
        "t2adj" => Ok(ShiftOp::T2Adj),
        other => Err(PyValueError::new_err(format!(
            "unknown shift op {other:?}; expected t1, t1adj, t2 or t2adj"
        ))),
    }
}

fn parse_kind(kind: &str) -> PyResult<FrameKind> {
    match kind {
        "alpha" => Ok(FrameKind::Alpha),
        "beta" => Ok(FrameKind::Beta),
        "gamma" => Ok(FrameKind::Gamma),
        other => Err(PyValueError::new_err(format!(
            "unknown frame kind {other:?}; expected alpha, beta or gamma"
        ))),
    }
}

#[pyfunction]
fn binomial_weight(m: u64, n: u64) -> PyResult<f64> {
    series::binomial_weight(m, n).map_err(err)
}

#[pyfunction]
fn closed_sum(k: u32, e: Complex64, r: u32, n: u32, l: u32) -> PyResult<Complex64> {
    series::closed_sum(k, e, r, n, l).map_err(err)
}

/// Direct summation; returns (value, q_used, tail_bound).
#[pyfunction]
#[pyo3(signature = (k, e, r, n, l, tol=1e-15))]
fn series_sum(k: u32, e: Complex64, r: u32, n: u32, l: u32, tol: f64) -> PyResult<(Complex64, usize, f64)> {
    let s = series::series_sum(k, e, r, n, l, tol).map_err(err)?;
    Ok((s.value, s.q_used, s.tail_bound))
}

#[pyfunction]
fn alpha_norm_sq(k: u32, epsilon: f64, r: u32, n: u32) -> PyResult<f64> {
    frames::alpha_norm_sq(k, epsilon, r, n).map_err(err)
}

#[pyfunction]
fn frequency(k: u32, epsilon: f64, r: u32, n: u32) -> PyResult<f64> {
    transport::frequency(k, epsilon, r, n).map_err(err)
}

#[pyfunction]
fn frequency_asymptote(k: u32, epsilon: f64, r: u32, n: u32) -> PyResult<f64> {
    transport::frequency_asymptote(k, epsilon, r, n).map_err(err)
}

/// Monodromy phases e^{2πi f} as a list of ((r, n), phase).
#[pyfunction]
fn monodromy_phases(k: u32, epsilon: f64, n_max: u32) -> PyResult<Vec<((u32, u32), Complex64)>> {
    let diag = transport::monodromy_diagonal(k, epsilon, n_max).map_err(err)?;
    Ok(diag
        .phases
        .into_iter()
        .map(|(ix, p)| ((ix.r, ix.n), p))
        .collect())
}

#[pyfunction]
fn shift_weight(k: u32, epsilon: f64, op: &str, r: u32, n: u32) -> PyResult<Complex64> {
    toeplitz::shift_weight(k, epsilon, parse_op(op)?, r, n).map_err(err)
}

#[pyfunction]
fn compactness_profile(k: u32, epsilon: f64, op: &str, n_max: u32) -> PyResult<Vec<f64>> {
    toeplitz::compactness_profile(k, epsilon, parse_op(op)?, n_max).map_err(err)
}

#[pyfunction]
fn besov_weight(s: f64, m: u64, n: u64) -> PyResult<f64> {
    sobolev::besov_weight(s, m, n).map_err(err)
}

#[pyfunction]
fn smoothing_factor(s: f64, n: u64) -> PyResult<f64> {
    sobolev::smoothing_factor(s, n).map_err(err)
}

/// Dispersion of the chain position; returns (three_term, central).
#[pyfunction]
fn nonsmooth_ratio(k: u32, epsilon: f64, r: u32, n: u32) -> PyResult<(f64, f64)> {
    let v = sobolev::nonsmooth_ratio(k, epsilon, r, n).map_err(err)?;
    Ok((v.three_term, v.central))
}

/// Log-log slope fit of the dispersion; returns (slope, ci95).
#[pyfunction]
fn nonsmooth_slope(
    k: u32,
    epsilon: f64,
    r: u32,
    n_lo: u32,
    n_hi: u32,
    samples: usize,
) -> PyResult<(f64, f64)> {
    let fit = sobolev::nonsmooth_slope(k, epsilon, r, n_lo, n_hi, samples).map_err(err)?;
    Ok((fit.slope, fit.ci95))
}

/// Hilbert-Schmidt ladder rows (n, increment, partial_sum).
#[pyfunction]
#[pyo3(signature = (k, epsilon, s_target, j, n_max, rel_tol=1e-12))]
fn hs_ladder(
    k: u32,
    epsilon: f64,
    s_target: f64,
    j: u32,
    n_max: u32,
    rel_tol: f64,
) -> PyResult<Vec<(u32, f64, f64)>> {
    let rows = sobolev::hs_ladder(k, epsilon, s_target, j, n_max, rel_tol).map_err(err)?;
    Ok(rows
        .into_iter()
        .map(|row| (row.n, row.increment, row.partial_sum))
        .collect())
}

#[pyfunction]
#[pyo3(signature = (k, epsilon, t, h, s_target, j, n_max=250, rel_tol=1e-10))]
#[allow(clippy::too_many_arguments)]
fn taylor_remainder(
    k: u32,
    epsilon: f64,
    t: f64,
    h: f64,
    s_target: f64,
    j: u32,
    n_max: u32,
    rel_tol: f64,
) -> PyResult<f64> {
    sobolev::taylor_remainder(k, epsilon, t, h, s_target, j, n_max, rel_tol).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (k, l, epsilon, m0, n0, tol=1e-12))]
fn gm_frequency(k: u32, l: u32, epsilon: f64, m0: u64, n0: u64, tol: f64) -> PyResult<f64> {
    general::gm_frequency(k, l, epsilon, GmChainStart { m: m0, n: n0 }, tol).map_err(err)
}

#[pyfunction]
fn z1z2_frequency_closed(epsilon: f64, d: i64) -> PyResult<f64> {
    general::z1z2_frequency_closed(epsilon, d).map_err(err)
}

/// The (k, l) phase report as a JSON string.
#[pyfunction]
fn phase_report_json(k: u32, l: u32, epsilon: f64, d_max: u64) -> PyResult<String> {
    let report = general::phase_report(k, l, epsilon, d_max).map_err(err)?;
    serde_json::to_string_pretty(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// One truncated frame element on its coefficient chain.
#[pyclass(name = "FrameVector")]
struct PyFrameVector {
    inner: frames::FrameVector,
}

#[pymethods]
impl PyFrameVector {
    #[new]
    #[pyo3(signature = (k, epsilon, t, r, n, kind="beta", tail_tol=1e-14))]
    fn new(k: u32, epsilon: f64, t: f64, r: u32, n: u32, kind: &str, tail_tol: f64) -> PyResult<Self> {
        let spec = TruncationSpec {
            tail_tol,
            ..TruncationSpec::default()
        };
        let inner = match parse_kind(kind)? {
            FrameKind::Alpha => frames::alpha(k, epsilon, t, r, n, &spec),
            FrameKind::Beta => frames::beta(k, epsilon, t, r, n, &spec),
            FrameKind::Gamma => frames::gamma(k, epsilon, t, r, n, &spec),
        }
        .map_err(err)?;
        Ok(PyFrameVector { inner })
    }

    /// Coefficients as (m, n, value) triples over the stored chain.
    fn coeffs(&self) -> Vec<(u64, u32, Complex64)> {
        self.inner
            .coeffs
            .iter()
            .enumerate()
            .map(|(q, c)| {
                let (m, n) = self.inner.monomial(q as u32);
                (m, n, *c)
            })
            .collect()
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn tail_bound(&self) -> f64 {
        self.inner.tail_bound
    }

    fn q_max(&self) -> u32 {
        self.inner.q_max()
    }

    fn inner_product(&self, other: &PyFrameVector) -> Complex64 {
        self.inner.inner(&other.inner)
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "FrameVector(k={}, epsilon={}, t={}, r={}, n={}, q_max={})",
            self.inner.k,
            self.inner.epsilon,
            self.inner.t,
            self.inner.index.r,
            self.inner.index.n,
            self.inner.q_max()
        )
    }
}

/// Flatness residual of one frame section (gamma is the flat one).
#[pyfunction]
#[pyo3(signature = (k, epsilon, t, r, n, kind="gamma"))]
fn flatness_residual(k: u32, epsilon: f64, t: f64, r: u32, n: u32, kind: &str) -> PyResult<f64> {
    transport::flatness_residual(
        k,
        epsilon,
        t,
        r,
        n,
        parse_kind(kind)?,
        &TruncationSpec::default(),
    )
    .map_err(err)
}

/// Exact membership residual numerator/denominator as strings (t = 0,
/// epsilon = p/q); "0" certifies the cancellation.
#[pyfunction]
fn membership_residual_exact(
    k: u32,
    eps_num: i64,
    eps_den: i64,
    r: u32,
    n: u32,
    m_exp: u64,
    n_exp: u32,
) -> PyResult<String> {
    use num::{BigInt, BigRational};
    if eps_den == 0 {
        return Err(PyValueError::new_err("zero denominator"));
    }
    let eps = BigRational::new(BigInt::from(eps_num), BigInt::from(eps_den));
    let res = frames::membership_residual_exact(k, &eps, r, n, m_exp, n_exp).map_err(err)?;
    Ok(res.to_string())
}

/// Gram deviation from the identity over the window {r < k, n <= n_max}.
#[pyfunction]
fn gram_deviation(k: u32, epsilon: f64, t: f64, n_max: u32) -> PyResult<f64> {
    let spec = TruncationSpec::default();
    let mut indices = Vec::new();
    for r in 0..k {
        for n in 0..=n_max {
            indices.push(ChainIndex::new(r, n));
        }
    }
    let gram = frames::gram(k, epsilon, t, &indices, &spec).map_err(err)?;
    let mut max_dev = 0.0f64;
    for (i, row) in gram.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            max_dev = max_dev.max((v - Complex64::new(expect, 0.0)).norm());
        }
    }
    Ok(max_dev)
}

/// Run the cross-validation suite; returns (id, name, passed, details) rows.
#[pyfunction]
fn run_verify() -> Vec<(u32, String, bool, String)> {
    verify::run_all()
        .into_iter()
        .map(|r| (r.id, r.name.to_string(), r.passed, r.details))
        .collect()
}

#[pymodule]
fn daperturb(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(binomial_weight, m)?)?;
    m.add_function(wrap_pyfunction!(closed_sum, m)?)?;
    m.add_function(wrap_pyfunction!(series_sum, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_norm_sq, m)?)?;
    m.add_function(wrap_pyfunction!(frequency, m)?)?;
    m.add_function(wrap_pyfunction!(frequency_asymptote, m)?)?;
    m.add_function(wrap_pyfunction!(monodromy_phases, m)?)?;
    m.add_function(wrap_pyfunction!(shift_weight, m)?)?;
    m.add_function(wrap_pyfunction!(compactness_profile, m)?)?;
    m.add_function(wrap_pyfunction!(besov_weight, m)?)?;
    m.add_function(wrap_pyfunction!(smoothing_factor, m)?)?;
    m.add_function(wrap_pyfunction!(nonsmooth_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(nonsmooth_slope, m)?)?;
    m.add_function(wrap_pyfunction!(hs_ladder, m)?)?;
    m.add_function(wrap_pyfunction!(taylor_remainder, m)?)?;
    m.add_function(wrap_pyfunction!(gm_frequency, m)?)?;
    m.add_function(wrap_pyfunction!(z1z2_frequency_closed, m)?)?;
    m.add_function(wrap_pyfunction!(phase_report_json, m)?)?;
    m.add_function(wrap_pyfunction!(flatness_residual, m)?)?;
    m.add_function(wrap_pyfunction!(membership_residual_exact, m)?)?;
    m.add_function(wrap_pyfunction!(gram_deviation, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    m.add_class::<PyFrameVector>()?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
