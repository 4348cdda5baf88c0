//! Python bindings for the pilot-assisted MIMO capacity simulator.
//!
//! The module mirrors the Rust API at the granularity a notebook wants:
//! covariance models, water-filling, the closed-form power factors, the
//! Monte-Carlo capacity bounds, and the design-parameter optimizers.
//! Build with `cargo build -p psam-mimo-py --release`; the smoke test in
//! `python/smoke_test.py` shows how to load the resulting shared library.

// The pyfunction macro expands to PyErr conversions clippy objects to.
#![allow(clippy::useless_conversion)]

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use psam_mimo::capacity::{self, MonteCarlo, Scheme, SchemeConfig};
use psam_mimo::channel;
use psam_mimo::error::Error;
use psam_mimo::optimize;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Io(inner) => PyIOError::new_err(inner.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Transmit covariance model with cached eigen-data.
#[pyclass(name = "CovarianceSpec", frozen)]
struct PyCovarianceSpec {
    inner: channel::CovarianceSpec,
}

#[pymethods]
impl PyCovarianceSpec {
    /// Exponential correlation model: entry (i, j) is rho^|i-j|.
    #[staticmethod]
    fn exponential(num_tx: usize, rho: f64) -> PyResult<Self> {
        Ok(PyCovarianceSpec {
            inner: channel::CovarianceSpec::exponential(num_tx, rho).map_err(to_py_err)?,
        })
    }

    /// Spatially independent channels.
    #[staticmethod]
    fn identity(num_tx: usize) -> Self {
        PyCovarianceSpec {
            inner: channel::CovarianceSpec::identity(num_tx),
        }
    }

    /// Eigenvalues in descending order.
    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __repr__(&self) -> String {
        format!("CovarianceSpec(dim={})", self.inner.dim())
    }
}

/// Monte-Carlo capacity estimate in bits per channel use.
#[pyclass(name = "CapacityEstimate", frozen)]
#[derive(Clone)]
struct PyCapacityEstimate {
    #[pyo3(get)]
    mean: f64,
    #[pyo3(get)]
    stderr: f64,
    #[pyo3(get)]
    trials: usize,
}

#[pymethods]
impl PyCapacityEstimate {
    fn __repr__(&self) -> String {
        format!(
            "CapacityEstimate(mean={:.6}, stderr={:.6}, trials={})",
            self.mean, self.stderr, self.trials
        )
    }
}

impl From<capacity::CapacityEstimate> for PyCapacityEstimate {
    fn from(e: capacity::CapacityEstimate) -> Self {
        PyCapacityEstimate {
            mean: e.mean,
            stderr: e.stderr,
            trials: e.trials,
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn build_config(
    scheme: &str,
    num_tx: usize,
    num_rx: usize,
    block_len: usize,
    train_len: usize,
    snr_db: f64,
    alpha: Option<f64>,
    rho: f64,
    delay: usize,
    phi: Option<f64>,
) -> PyResult<SchemeConfig> {
    let scheme = match scheme {
        "nonfeedback" => Scheme::NonFeedback,
        "cgf" if delay == 0 => Scheme::CgfDelayless,
        "cgf" => {
            let data_len = block_len.saturating_sub(train_len);
            let beta = delay as f64 / data_len.max(1) as f64;
            Scheme::CgfDelayed {
                delay,
                phi: phi.unwrap_or(beta),
            }
        }
        "ccf" => Scheme::Ccf(channel::CovarianceSpec::exponential(num_tx, rho).map_err(to_py_err)?),
        "beamforming" => Scheme::Beamforming(
            channel::CovarianceSpec::exponential(num_tx, rho).map_err(to_py_err)?,
        ),
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown scheme `{other}` (expected nonfeedback, cgf, ccf, or beamforming)"
            )))
        }
    };
    let power = db_to_linear(snr_db);
    let probe = SchemeConfig::new(
        num_tx,
        num_rx,
        block_len,
        train_len,
        power,
        0.5,
        scheme.clone(),
    )
    .map_err(to_py_err)?;
    let alpha = match alpha {
        Some(a) => a,
        None => optimize::closed_form_alpha(&probe).map_err(to_py_err)?,
    };
    SchemeConfig::new(num_tx, num_rx, block_len, train_len, power, alpha, scheme).map_err(to_py_err)
}

/// Per-block average capacity lower bound of a scheme configuration.
/// `alpha=None` resolves the closed-form optimum for the scheme.
#[pyfunction]
#[pyo3(signature = (scheme, num_tx, num_rx, block_len, train_len, snr_db,
                    alpha=None, rho=0.0, delay=0, phi=None, trials=10_000, seed=42))]
#[allow(clippy::too_many_arguments)]
fn evaluate(
    scheme: &str,
    num_tx: usize,
    num_rx: usize,
    block_len: usize,
    train_len: usize,
    snr_db: f64,
    alpha: Option<f64>,
    rho: f64,
    delay: usize,
    phi: Option<f64>,
    trials: usize,
    seed: u64,
) -> PyResult<PyCapacityEstimate> {
    let cfg = build_config(
        scheme, num_tx, num_rx, block_len, train_len, snr_db, alpha, rho, delay, phi,
    )?;
    let est = capacity::evaluate(&cfg, &MonteCarlo::new(trials, seed)).map_err(to_py_err)?;
    Ok(est.into())
}

/// Capacity lower/upper bounds and their relative gap, as a
/// `(lower, upper, gap_ratio)` tuple.
#[pyfunction]
#[pyo3(signature = (scheme, num_tx, num_rx, block_len, train_len, snr_db,
                    alpha=None, rho=0.0, delay=0, phi=None, trials=10_000, seed=42))]
#[allow(clippy::too_many_arguments)]
fn gap_estimate(
    scheme: &str,
    num_tx: usize,
    num_rx: usize,
    block_len: usize,
    train_len: usize,
    snr_db: f64,
    alpha: Option<f64>,
    rho: f64,
    delay: usize,
    phi: Option<f64>,
    trials: usize,
    seed: u64,
) -> PyResult<(PyCapacityEstimate, PyCapacityEstimate, f64)> {
    let cfg = build_config(
        scheme, num_tx, num_rx, block_len, train_len, snr_db, alpha, rho, delay, phi,
    )?;
    let g = capacity::gap_estimate(&cfg, &MonteCarlo::new(trials, seed)).map_err(to_py_err)?;
    Ok((g.lower.into(), g.upper.into(), g.gap_ratio))
}

/// Water-fill a power budget over descending positive channel gains.
/// Returns `(alloc, level, active)`.
#[pyfunction]
fn waterfill(gains: Vec<f64>, budget: f64) -> PyResult<(Vec<f64>, f64, usize)> {
    let r = psam_mimo::waterfill::waterfill(&gains, budget).map_err(to_py_err)?;
    Ok((r.alloc, r.level, r.active))
}

/// Closed-form optimal power factor for the non-feedback and delayless
/// gain-feedback schemes.
#[pyfunction]
fn alpha_star_nonfeedback(
    num_tx: usize,
    snr_db: f64,
    block_len: usize,
    data_len: usize,
) -> PyResult<f64> {
    let regime = optimize::gamma_nonfeedback(num_tx, db_to_linear(snr_db), block_len, data_len)
        .map_err(to_py_err)?;
    optimize::alpha_star(&regime).map_err(to_py_err)
}

/// Closed-form optimal power factor for the covariance-feedback scheme.
#[pyfunction]
fn alpha_star_ccf(data_len: usize, train_len: usize) -> PyResult<f64> {
    let regime = optimize::gamma_ccf(data_len, train_len).map_err(to_py_err)?;
    optimize::alpha_star(&regime).map_err(to_py_err)
}

/// Closed-form optimal power factor for beamforming.
#[pyfunction]
fn alpha_star_beamforming(g_max: f64, snr_db: f64, block_len: usize) -> PyResult<f64> {
    let regime =
        optimize::gamma_beamforming(g_max, db_to_linear(snr_db), block_len).map_err(to_py_err)?;
    optimize::alpha_star(&regime).map_err(to_py_err)
}

/// Optimal division of data energy between non-adaptive and adaptive
/// sub-blocks under perfect channel knowledge. Returns `(phi_star,
/// residual)`.
#[pyfunction]
#[pyo3(signature = (num_tx, num_rx, beta, data_snr_db, trials=10_000, seed=42))]
fn phi_star_perfect_csi(
    num_tx: usize,
    num_rx: usize,
    beta: f64,
    data_snr_db: f64,
    trials: usize,
    seed: u64,
) -> PyResult<(f64, f64)> {
    let sol = optimize::phi_star_perfect_csi(
        num_tx,
        num_rx,
        beta,
        db_to_linear(data_snr_db),
        &MonteCarlo::new(trials, seed),
    )
    .map_err(to_py_err)?;
    Ok((sol.phi_star, sol.residual))
}

/// Row of the training-length table: `(lp, alpha, mean, stderr,
/// effective_lp)`.
type PilotLengthEntry = (usize, f64, f64, f64, usize);

/// Optimal covariance-feedback training length. Returns
/// `(lp_star, table)` where each table row is
/// `(lp, alpha, mean, stderr, effective_lp)`.
#[pyfunction]
#[pyo3(signature = (num_tx, num_rx, block_len, snr_db, rho, trials=10_000, seed=42))]
fn optimal_pilot_length(
    num_tx: usize,
    num_rx: usize,
    block_len: usize,
    snr_db: f64,
    rho: f64,
    trials: usize,
    seed: u64,
) -> PyResult<(usize, Vec<PilotLengthEntry>)> {
    let cov = channel::CovarianceSpec::exponential(num_tx, rho).map_err(to_py_err)?;
    let (best, rows) = optimize::optimal_pilot_length(
        &cov,
        num_rx,
        block_len,
        db_to_linear(snr_db),
        &MonteCarlo::new(trials, seed),
    )
    .map_err(to_py_err)?;
    let table = rows
        .into_iter()
        .map(|r| {
            (
                r.train_len,
                r.alpha,
                r.estimate.mean,
                r.estimate.stderr,
                r.effective_len,
            )
        })
        .collect();
    Ok((best, table))
}

/// Majorization test between equal-sum spectra: true when `a` is majorized
/// by (less spread than) `b`.
#[pyfunction]
fn majorizes(a: Vec<f64>, b: Vec<f64>) -> PyResult<bool> {
    channel::majorizes(&a, &b).map_err(to_py_err)
}

#[pymodule]
#[pyo3(name = "psam_mimo")]
fn psam_mimo_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCovarianceSpec>()?;
    m.add_class::<PyCapacityEstimate>()?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(gap_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(waterfill, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_star_nonfeedback, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_star_ccf, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_star_beamforming, m)?)?;
    m.add_function(wrap_pyfunction!(phi_star_perfect_csi, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_pilot_length, m)?)?;
    m.add_function(wrap_pyfunction!(majorizes, m)?)?;
    Ok(())
}
