//! Python bindings for `sievelab`.
//!
//! Rationals cross the boundary as `(numerator, denominator)` tuples.

use num_rational::Rational64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sievelab::main_term::{asymptotic_lower_bound, asymptotic_lower_bound_quadrature, exact_main_term, main_term_primes};
use sievelab::mean_square::{bridge_identity_check, gamma_dh, ksum_closed_form};
use sievelab::partition::{partition_sum, sigma};
use sievelab::scanner::{run_scan, ScanConfig};
use sievelab::weights::{combined_lower, combined_upper, lambda_weights, rho_weights, verify_sandwiches};
use sievelab::{arith, Error, PartitionIndexSet, Sign, VarianceDecomposition, WeightLabel};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::BudgetExceeded { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_sign(side: &str) -> PyResult<Sign> {
    side.parse::<Sign>().map_err(py_err)
}

fn ratio(r: Rational64) -> (i64, i64) {
    (*r.numer(), *r.denom())
}

/// Parameters (w, z, D, y, E, β) of the combined sieve.
#[pyclass(name = "SieveParams", module = "pysievelab", frozen)]
struct PySieveParams {
    inner: sievelab::SieveParams,
}

#[pymethods]
impl PySieveParams {
    #[new]
    #[pyo3(signature = (w, z, d, e=2.0, beta=30, y=None))]
    fn new(w: f64, z: f64, d: f64, e: f64, beta: u32, y: Option<f64>) -> PyResult<Self> {
        let mut inner = sievelab::SieveParams::reduced(w, z, d, e, beta).map_err(py_err)?;
        if let Some(y) = y {
            inner = inner.with_y(y);
        }
        Ok(PySieveParams { inner })
    }

    /// Parameters derived from X and δ.
    #[staticmethod]
    fn from_scale(x: f64, delta: f64) -> PyResult<Self> {
        Ok(PySieveParams { inner: sievelab::SieveParams::from_scale(x, delta).map_err(py_err)? })
    }

    #[getter]
    fn w(&self) -> f64 {
        self.inner.w
    }
    #[getter]
    fn z(&self) -> f64 {
        self.inner.z
    }
    #[getter(D)]
    fn d_level(&self) -> f64 {
        self.inner.d_level
    }
    #[getter]
    fn y(&self) -> f64 {
        self.inner.y
    }
    #[getter(E)]
    fn e_level(&self) -> f64 {
        self.inner.e_level
    }
    #[getter]
    fn beta(&self) -> u32 {
        self.inner.beta
    }
    #[getter(X)]
    fn x(&self) -> f64 {
        self.inner.x
    }

    fn level_at(&self, a: i64) -> f64 {
        self.inner.level_at(a)
    }

    /// Inclusive bounds of the partition index set.
    fn index_set(&self) -> (i64, i64) {
        let s = PartitionIndexSet::from_params(&self.inner);
        (s.lower, s.upper)
    }

    fn __repr__(&self) -> String {
        format!("SieveParams({})", self.inner.describe())
    }
}

/// A finitely supported weight sequence with exact rational values.
#[pyclass(name = "WeightSequence", module = "pysievelab", frozen)]
struct PyWeightSequence {
    inner: sievelab::WeightSequence,
}

#[pymethods]
impl PyWeightSequence {
    /// λ± of the linear sieve.
    #[staticmethod]
    #[pyo3(signature = (params, side="+"))]
    fn linear(params: &PySieveParams, side: &str) -> PyResult<Self> {
        Ok(PyWeightSequence { inner: lambda_weights(&params.inner, parse_sign(side)?) })
    }

    /// ρ± of the β-sieve.
    #[staticmethod]
    #[pyo3(signature = (params, side="+"))]
    fn beta(params: &PySieveParams, side: &str) -> PyResult<Self> {
        Ok(PyWeightSequence { inner: rho_weights(&params.inner, parse_sign(side)?) })
    }

    /// α⁻ = λ⁺ρ⁻ + λ⁻ρ⁺ − λ⁺ρ⁺.
    #[staticmethod]
    fn combined_lower(params: &PySieveParams) -> Self {
        PyWeightSequence { inner: combined_lower(&params.inner) }
    }

    /// α⁺ at level index a.
    #[staticmethod]
    fn combined_upper(params: &PySieveParams, a: i64) -> Self {
        PyWeightSequence { inner: combined_upper(&params.inner, a) }
    }

    /// Builds a sequence from `{d: value}` with integer or `(num, den)` values.
    #[staticmethod]
    #[pyo3(signature = (entries, label="custom"))]
    fn from_dict(entries: &Bound<'_, PyDict>, label: &str) -> PyResult<Self> {
        let mut pairs = Vec::new();
        for (k, v) in entries.iter() {
            let d: u64 = k.extract()?;
            let r = if let Ok(n) = v.extract::<i64>() {
                Rational64::from_integer(n)
            } else {
                let (n, m): (i64, i64) = v.extract()?;
                if m == 0 {
                    return Err(PyValueError::new_err("zero denominator"));
                }
                Rational64::new(n, m)
            };
            pairs.push((d, r));
        }
        let level = pairs.iter().map(|p| p.0).max().unwrap_or(1) as f64;
        Ok(PyWeightSequence {
            inner: sievelab::WeightSequence::new(WeightLabel::Custom(label.to_string()), level, "", pairs),
        })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyWeightSequence { inner: sievelab::WeightSequence::from_text(text).map_err(py_err)? })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label().to_string()
    }

    #[getter]
    fn level(&self) -> f64 {
        self.inner.level()
    }

    fn support(&self) -> Vec<u64> {
        self.inner.support().collect()
    }

    fn items(&self) -> Vec<(u64, (i64, i64))> {
        self.inner.iter().map(|(d, v)| (d, ratio(v))).collect()
    }

    fn get(&self, d: u64) -> (i64, i64) {
        ratio(self.inner.get(d))
    }

    /// Σ_{d|n} λ_d as `(num, den)`.
    fn divisor_sum(&self, n: u64) -> (i64, i64) {
        ratio(self.inner.divisor_sum(n))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("WeightSequence({}, level={}, len={})", self.inner.label(), self.inner.level(), self.inner.len())
    }
}

#[pyfunction]
fn primes(limit: u64) -> PyResult<Vec<u64>> {
    Ok(arith::sieve_primes(limit).map_err(py_err)?.primes().to_vec())
}

/// Prime factorization as `[(p, e), ...]`.
#[pyfunction]
fn factor(n: u64) -> PyResult<Vec<(u64, u32)>> {
    if n == 0 {
        return Err(PyValueError::new_err("cannot factor 0"));
    }
    Ok(arith::factor_trial(n).factors)
}

#[pyfunction]
fn mobius(n: u64) -> i8 {
    arith::mobius(n)
}

#[pyfunction]
fn von_mangoldt(n: u64) -> f64 {
    arith::von_mangoldt(n)
}

#[pyfunction]
fn is_rough(n: u64, z: f64) -> bool {
    arith::is_rough(n, z)
}

#[pyfunction(name = "sigma")]
fn py_sigma(x: f64) -> f64 {
    sigma(x)
}

#[pyfunction(name = "partition_sum")]
fn py_partition_sum(x: f64, lower: i64, upper: i64) -> PyResult<f64> {
    partition_sum(x, lower, upper).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (eps_prime=0.0))]
fn lower_bound_constant(eps_prime: f64) -> (f64, f64) {
    (asymptotic_lower_bound(eps_prime), asymptotic_lower_bound_quadrature(eps_prime))
}

/// M(z, y) and its parts for reduced parameters.
#[pyfunction]
#[pyo3(signature = (params, eps_prime=0.0, budget=1_000_000))]
fn main_term<'py>(py: Python<'py>, params: &PySieveParams, eps_prime: f64, budget: usize) -> PyResult<Bound<'py, PyDict>> {
    let p = &params.inner;
    let table = main_term_primes(p).map_err(py_err)?;
    let r = exact_main_term(p, &PartitionIndexSet::from_params(p), &table, eps_prime, budget).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("first_sum_exact", r.first_sum_exact)?;
    d.set_item("first_sum", r.first_sum)?;
    d.set_item("second_sum", r.second_sum)?;
    d.set_item("per_level", r.per_level)?;
    d.set_item("M", r.m_value)?;
    d.set_item("asymptotic_bound", r.asymptotic_bound)?;
    Ok(d)
}

/// Sandwich checks up to `nmax` as `[(name, first_violation or None), ...]`.
#[pyfunction]
fn sandwich_check(params: &PySieveParams, nmax: u64) -> Vec<(String, Option<u64>)> {
    let levels = PartitionIndexSet::from_params(&params.inner).to_vec();
    verify_sandwiches(&params.inner, &levels, nmax).into_iter().map(|o| (o.name, o.first_violation)).collect()
}

#[pyfunction]
#[pyo3(signature = (d, h, tol=1e-9))]
fn gamma(d: u64, h: f64, tol: f64) -> PyResult<f64> {
    if d == 0 || !(h > 0.0) || !(tol > 0.0) {
        return Err(PyValueError::new_err("need d >= 1, H > 0, tol > 0"));
    }
    Ok(gamma_dh(d, h, tol).value)
}

/// Closed form and direct enumeration of the k-sum at H = num/den.
#[pyfunction]
fn ksum(c: u64, num: i64, den: i64) -> PyResult<((i64, i64), (i64, i64))> {
    if c == 0 || den <= 0 || num <= 0 {
        return Err(PyValueError::new_err("need c >= 1 and H > 0"));
    }
    let (a, b) = ksum_closed_form(c, Rational64::new(num, den));
    Ok((ratio(a), ratio(b)))
}

/// (Σ_{d|c} γ_{d,H}, c²θ(1−θ)/2).
#[pyfunction]
#[pyo3(signature = (c, h, tol=1e-10))]
fn bridge_check(c: u64, h: f64, tol: f64) -> PyResult<(f64, f64)> {
    if c == 0 || !(h > 0.0) {
        return Err(PyValueError::new_err("need c >= 1 and H > 0"));
    }
    let b = bridge_identity_check(c, h, tol);
    Ok((b.lhs, b.rhs))
}

/// Direct variance against S1 + S2 + S3.
#[pyfunction]
#[pyo3(signature = (weights, h, x, d0=None))]
fn variance_decomposition<'py>(
    py: Python<'py>,
    weights: &PyWeightSequence,
    h: f64,
    x: f64,
    d0: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let ws = &weights.inner;
    let d0 = d0.unwrap_or_else(|| ws.max_support().unwrap_or(1));
    let v = py.detach(|| VarianceDecomposition::compute(ws, &ws.label().to_string(), d0, h, x)).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("S", v.s_direct)?;
    d.set_item("S1", v.s1)?;
    d.set_item("S2", v.s2)?;
    d.set_item("S3", v.s3)?;
    d.set_item("residual", v.residual)?;
    d.set_item("residual_ratio", v.residual_ratio())?;
    Ok(d)
}

/// Short-interval scan; returns the summary and the `(x, count, weighted_sum)` rows.
#[pyfunction]
#[pyo3(signature = (x, h, stride=1, theta_r=0.125))]
fn scan<'py>(py: Python<'py>, x: u64, h: f64, stride: u64, theta_r: f64) -> PyResult<(Bound<'py, PyDict>, Vec<(u64, u64, f64)>)> {
    let cfg = ScanConfig { theta_r, ..ScanConfig::new(x, h).with_stride(stride) };
    let r = py.detach(|| run_scan(&cfg)).map_err(py_err)?;
    let s = &r.summary;
    let d = PyDict::new(py);
    d.set_item("grid_size", s.grid_size)?;
    d.set_item("mean_count", s.mean_count)?;
    d.set_item("std_count", s.std_count)?;
    d.set_item("mean_over_h", s.mean_over_h)?;
    d.set_item("exceptional_fraction", s.exceptional_fraction)?;
    d.set_item("min_count", s.min_count)?;
    d.set_item("max_count", s.max_count)?;
    d.set_item("histogram", s.histogram.clone())?;
    Ok((d, r.rows.iter().map(|r| (r.x, r.count, r.weighted_sum)).collect()))
}

#[pymodule]
fn pysievelab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySieveParams>()?;
    m.add_class::<PyWeightSequence>()?;
    m.add_function(wrap_pyfunction!(primes, m)?)?;
    m.add_function(wrap_pyfunction!(factor, m)?)?;
    m.add_function(wrap_pyfunction!(mobius, m)?)?;
    m.add_function(wrap_pyfunction!(von_mangoldt, m)?)?;
    m.add_function(wrap_pyfunction!(is_rough, m)?)?;
    m.add_function(wrap_pyfunction!(py_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(py_partition_sum, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound_constant, m)?)?;
    m.add_function(wrap_pyfunction!(main_term, m)?)?;
    m.add_function(wrap_pyfunction!(sandwich_check, m)?)?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(ksum, m)?)?;
    m.add_function(wrap_pyfunction!(bridge_check, m)?)?;
    m.add_function(wrap_pyfunction!(variance_decomposition, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    Ok(())
}
