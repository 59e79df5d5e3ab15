//! Python bindings for usvp-core.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use usvp::charfn::{self, SchemeSpec};
use usvp::error::Error;
use usvp::rates::{self, db_to_linear, RateParams};
use usvp::replica::{self, Assumption, SolverOptions, SystemParams, DEFAULT_TOL};
use usvp::selection;
use usvp::sim::{self, ChannelMatrix, SimConfig, Strategy};
use usvp::special::{Quadrature, RngStream};
use usvp::sweep::{Command, SweepConfig};
use usvp::validation::{self, Suite};

fn err(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::InvalidParams(_) | Error::Config(_) | Error::SingularChannel(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn scheme(s: &str) -> PyResult<SchemeSpec> {
    s.parse().map_err(err)
}

fn assumption(s: &str) -> PyResult<Assumption> {
    s.parse().map_err(err)
}

fn system(alpha: f64, kappa: f64, t: usize, s: &str) -> PyResult<SystemParams> {
    SystemParams::new(alpha, kappa, t, scheme(s)?).map_err(err)
}

/// Law of the per-user energy E for one scheme, block length and q.
#[pyclass(name = "EnergyCdf", module = "usvp")]
struct PyEnergyCdf {
    inner: charfn::EnergyCdf,
}

#[pymethods]
impl PyEnergyCdf {
    #[new]
    fn new(scheme_name: &str, t: usize, q: f64) -> PyResult<Self> {
        let inner = charfn::EnergyCdf::new(scheme(scheme_name)?, t, q, Quadrature::default()).map_err(err)?;
        Ok(Self { inner })
    }

    fn cdf(&self, x: f64) -> f64 {
        self.inner.cdf(x)
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    fn quantile(&self, kappa: f64) -> PyResult<f64> {
        self.inner.quantile(kappa).map_err(err)
    }

    /// (ξ, μ, σ²) at κ.
    fn order_stats(&self, kappa: f64) -> PyResult<(f64, f64, f64)> {
        let o = self.inner.order_stats(kappa).map_err(err)?;
        Ok((o.xi, o.mean, o.variance))
    }
}

/// Selection law at a fixed order parameter.
#[pyclass(name = "SelectionModel", module = "usvp")]
struct PySelectionModel {
    inner: selection::SelectionModel,
}

#[pymethods]
impl PySelectionModel {
    #[new]
    fn new(scheme_name: &str, t: usize, q: f64, kappa: f64) -> PyResult<Self> {
        let inner = selection::SelectionModel::from_params(scheme(scheme_name)?, t, q, kappa, Quadrature::default()).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn xi(&self) -> f64 {
        self.inner.xi()
    }

    fn marginal_probability(&self) -> f64 {
        selection::marginal_selection_probability(&self.inner)
    }

    fn selection_given_symbols(&self, symbols: Vec<Complex64>) -> PyResult<f64> {
        selection::dd_us_selection_given_symbols(&self.inner, &symbols).map_err(err)
    }

    fn output_pdf(&self, snr: f64, y_magnitude: f64) -> PyResult<f64> {
        selection::conditional_output_pdf_gaussian(&self.inner, snr, y_magnitude).map_err(err)
    }

    /// I(x; y | s = 1) in bits at linear SNR.
    fn mutual_information(&self, snr: f64) -> PyResult<f64> {
        rates::mi_selected(&self.inner, snr).map_err(err)
    }
}

/// RS fixed point: dict with q0, penalty_per_user, residual.
#[pyfunction]
#[pyo3(signature = (alpha, kappa, t, scheme_name = "dd-us-gaussian"))]
fn solve_rs<'py>(py: Python<'py>, alpha: f64, kappa: f64, t: usize, scheme_name: &str) -> PyResult<Bound<'py, PyDict>> {
    let s = replica::solve_rs(&system(alpha, kappa, t, scheme_name)?, DEFAULT_TOL).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("q0", s.q0)?;
    d.set_item("penalty_per_user", s.penalty_per_user)?;
    d.set_item("residual", s.residual)?;
    Ok(d)
}

/// 1RSB fixed point: dict with q1, chi, penalty_per_user and both residuals.
#[pyfunction]
#[pyo3(signature = (alpha, kappa, t, scheme_name = "dd-us-gaussian"))]
fn solve_1rsb<'py>(py: Python<'py>, alpha: f64, kappa: f64, t: usize, scheme_name: &str) -> PyResult<Bound<'py, PyDict>> {
    let s = replica::solve_1rsb(&system(alpha, kappa, t, scheme_name)?, DEFAULT_TOL).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("q1", s.q1)?;
    d.set_item("chi", s.chi)?;
    d.set_item("penalty_per_user", s.penalty_per_user)?;
    d.set_item("residual_42", s.residual_42)?;
    d.set_item("residual_43", s.residual_43)?;
    Ok(d)
}

/// (q0, penalty_per_user) in the T → ∞ limit.
#[pyfunction]
fn solve_rs_t_inf(scheme_name: &str, alpha: f64, kappa: f64) -> PyResult<(f64, f64)> {
    let s = replica::solve_rs_t_inf(scheme(scheme_name)?, alpha, kappa, DEFAULT_TOL).map_err(err)?;
    Ok((s.q0, s.penalty_per_user))
}

#[pyfunction]
fn one_rsb_onset_ratio(alpha: f64, kappa: f64, t: usize, scheme_name: &str) -> PyResult<f64> {
    replica::one_rsb_onset_ratio(&system(alpha, kappa, t, scheme_name)?, DEFAULT_TOL, &SolverOptions::default()).map_err(err)
}

#[pyfunction]
fn qpsk_mi(snr_eff: f64) -> f64 {
    rates::qpsk_mi(snr_eff)
}

/// DD-US sum-rate bound at `snr_db`: (bound, mi_selected, q).
#[pyfunction]
#[pyo3(signature = (alpha, kappa, t, scheme_name, snr_db, assumption_name = "rs"))]
fn sum_rate_bound(alpha: f64, kappa: f64, t: usize, scheme_name: &str, snr_db: f64, assumption_name: &str) -> PyResult<(f64, f64, f64)> {
    let rp = RateParams::new(system(alpha, kappa, t, scheme_name)?, db_to_linear(snr_db), assumption(assumption_name)?).map_err(err)?;
    let r = rates::sum_rate_bound_dd_us(&rp).map_err(err)?;
    Ok((r.bound, r.mi_selected, r.q_used))
}

/// Bound maximized over κ: (bound, kappa, q).
#[pyfunction]
#[pyo3(signature = (alpha, t, scheme_name, snr_db, assumption_name = "rs", grid_size = 32))]
fn optimize_kappa(alpha: f64, t: usize, scheme_name: &str, snr_db: f64, assumption_name: &str, grid_size: usize) -> PyResult<(f64, f64, f64)> {
    let r = rates::optimize_kappa(alpha, t, scheme(scheme_name)?, db_to_linear(snr_db), assumption(assumption_name)?, grid_size).map_err(err)?;
    Ok((r.bound, r.kappa_used, r.q_used))
}

/// CVP-RUS reference rate at `snr_db`: (rate, q).
#[pyfunction]
fn cvp_rus_rate(alpha: f64, kappa: f64, snr_db: f64) -> PyResult<(f64, f64)> {
    let r = rates::cvp_rus_rate(alpha, kappa, db_to_linear(snr_db)).map_err(err)?;
    Ok((r.bound, r.q_used))
}

/// Monte-Carlo per-selected-user penalty: dict with mean, std_error,
/// trials, failed, seed.
#[pyfunction]
#[pyo3(signature = (n, k, k_tilde, t, scheme_name, trials, seed, strategy = "greedy-dd-us"))]
#[allow(clippy::too_many_arguments)]
fn empirical_penalty<'py>(
    py: Python<'py>,
    n: usize,
    k: usize,
    k_tilde: usize,
    t: usize,
    scheme_name: &str,
    trials: usize,
    seed: u64,
    strategy: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = SimConfig::new(n, k, k_tilde, t, scheme(scheme_name)?, trials, seed).map_err(err)?;
    let strategy: Strategy = strategy.parse().map_err(err)?;
    let r = py.detach(|| sim::empirical_penalty(&cfg, strategy)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("mean", r.mean)?;
    d.set_item("std_error", r.std_error)?;
    d.set_item("trials", r.trials)?;
    d.set_item("failed", r.failed)?;
    d.set_item("seed", r.seed)?;
    Ok(d)
}

/// Simulated trimmed-sum statistics: ((mean, se), (K·var, se), (E_(K̃), se)).
#[pyfunction]
#[allow(clippy::type_complexity)]
fn order_stat_oracle(
    scheme_name: &str,
    q: f64,
    kappa: f64,
    t: usize,
    k: usize,
    trials: usize,
    seed: u64,
) -> PyResult<((f64, f64), (f64, f64), (f64, f64))> {
    let r = sim::order_stat_oracle(scheme(scheme_name)?, q, kappa, t, k, trials, &RngStream::new(seed, 0)).map_err(err)?;
    Ok((
        (r.mean.value, r.mean.std_error),
        (r.k_variance.value, r.k_variance.std_error),
        (r.quantile.value, r.quantile.std_error),
    ))
}

fn matrix(rows: &[Vec<Complex64>]) -> PyResult<nalgebra::DMatrix<Complex64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|x| x.len() != c) {
        return Err(PyValueError::new_err("expected a nonempty rectangular list of rows"));
    }
    Ok(nalgebra::DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

/// Greedy DD-US on a K×N channel and T×K symbol block: (users, penalty).
#[pyfunction]
fn greedy_dd_us(channel: Vec<Vec<Complex64>>, symbols: Vec<Vec<Complex64>>, k_tilde: usize) -> PyResult<(Vec<usize>, f64)> {
    let h = ChannelMatrix { entries: matrix(&channel)? };
    sim::greedy_dd_us(&h, &matrix(&symbols)?, k_tilde).map_err(err)
}

/// Convex vector precoding of QPSK symbols for the selected rows.
#[pyfunction]
#[pyo3(signature = (channel, symbols, tol = 1e-9))]
fn cvp_solve(channel: Vec<Vec<Complex64>>, symbols: Vec<Complex64>, tol: f64) -> PyResult<Vec<Complex64>> {
    let h = ChannelMatrix { entries: matrix(&channel)? };
    sim::cvp_solve(&h, &symbols, tol).map_err(err)
}

/// Runs a sweep command with flag-style options and returns the CSV text.
#[pyfunction]
#[pyo3(signature = (command, **options))]
fn run_sweep(py: Python<'_>, command: &str, options: Option<&Bound<'_, PyDict>>) -> PyResult<String> {
    let command: Command = command.parse().map_err(err)?;
    let mut pairs = Vec::new();
    if let Some(opts) = options {
        for (k, v) in opts.iter() {
            let key: String = k.extract()?;
            pairs.push((key.replace('_', "-"), v.str()?.to_string()));
        }
    }
    let cfg = SweepConfig::from_pairs(command, &pairs).map_err(err)?;
    py.detach(|| usvp::sweep::run_sweep(&cfg).and_then(|o| o.to_csv_string())).map_err(err)
}

/// Runs an oracle suite: list of (id, outcome, detail).
#[pyfunction]
#[pyo3(signature = (suite = "math"))]
fn validate(py: Python<'_>, suite: &str) -> PyResult<Vec<(String, String, String)>> {
    let suite: Suite = suite.parse().map_err(err)?;
    let checks = py.detach(|| validation::run_suite(suite));
    Ok(checks
        .into_iter()
        .map(|c| (c.id, format!("{:?}", c.outcome).to_uppercase(), c.detail))
        .collect())
}

#[pymodule]
fn usvp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEnergyCdf>()?;
    m.add_class::<PySelectionModel>()?;
    m.add_function(wrap_pyfunction!(solve_rs, m)?)?;
    m.add_function(wrap_pyfunction!(solve_1rsb, m)?)?;
    m.add_function(wrap_pyfunction!(solve_rs_t_inf, m)?)?;
    m.add_function(wrap_pyfunction!(one_rsb_onset_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(qpsk_mi, m)?)?;
    m.add_function(wrap_pyfunction!(sum_rate_bound, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_kappa, m)?)?;
    m.add_function(wrap_pyfunction!(cvp_rus_rate, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_penalty, m)?)?;
    m.add_function(wrap_pyfunction!(order_stat_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(greedy_dd_us, m)?)?;
    m.add_function(wrap_pyfunction!(cvp_solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
