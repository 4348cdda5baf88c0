//! Closed-form and numerical optimizers for the pilot/data power factor
//! `alpha`, the data power division `phi`, and the training length.
//!
//! The closed form for the optimal power factor is shared by every scheme
//! that admits one; only the constant `gamma` changes:
//!
//! ```text
//! alpha* = gamma - sqrt(gamma (gamma - 1))   data sub-block longer
//!        = 1/2                               equal lengths
//!        = gamma + sqrt(gamma (gamma - 1))   data sub-block shorter
//! ```
//!
//! * no feedback / delayless gain feedback:
//!   `gamma = (Nt + P L) / (P L (1 - Nt/Ld))`, comparing `Ld` with `Nt`;
//! * covariance feedback: `gamma = Ld / (Ld - Lp)`, comparing `Ld` with
//!   `Lp`, valid when `P L >> sum of 1/g_i` over the trained channels;
//! * beamforming: `gamma = (1 + gmax P L) / (gmax P L (L-2)/(L-1))`.
//!
//! Numerical searches use common random numbers: the Monte-Carlo objective
//! is evaluated with a fixed seed at every candidate, which turns a noisy
//! search into a smooth deterministic one and lets golden section converge
//! to sub-percent tolerances.

use rayon::prelude::*;

use crate::capacity::{evaluate, CapacityEstimate, MonteCarlo, Scheme, SchemeConfig};
use crate::channel::CovarianceSpec;
use crate::error::{Error, Result};
use crate::linalg::hermitian_eig;
use crate::rng::{sample_zmcscg, RandomStream};
use crate::stats::pairwise_sum;
use crate::waterfill::waterfill;

/// Search interval for the numeric power-factor optimizer.
const ALPHA_MIN: f64 = 0.01;
const ALPHA_MAX: f64 = 0.99;

/// Ratio `P L / sum(1/g_i)` below which the covariance-feedback closed form
/// is flagged as operating outside its validity condition.
pub const CCF_VALIDITY_THRESHOLD: f64 = 10.0;

/// Which root of the stationarity quadratic applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeBranch {
    /// Data sub-block longer than the trained dimension count.
    DataLonger,
    /// Equal lengths; the optimum splits energy evenly.
    Equal,
    /// Data sub-block shorter than the trained dimension count.
    DataShorter,
}

/// Inputs of the closed-form power factor.
#[derive(Debug, Clone, Copy)]
pub struct AlphaRegime {
    pub gamma: f64,
    pub branch: RegimeBranch,
}

/// Closed-form optimal power factor for a regime.
///
/// On the long-data branch `gamma` must exceed one (the result then lies in
/// `(1/2, 1)`); on the short-data branch `gamma` is negative and the result
/// lies in `(0, 1/2)`.
pub fn alpha_star(regime: &AlphaRegime) -> Result<f64> {
    match regime.branch {
        RegimeBranch::Equal => Ok(0.5),
        RegimeBranch::DataLonger => {
            let g = regime.gamma;
            if !(g > 1.0) {
                return Err(Error::domain(format!(
                    "long-data regime requires gamma > 1, got {g}"
                )));
            }
            Ok(g - (g * (g - 1.0)).sqrt())
        }
        RegimeBranch::DataShorter => {
            let g = regime.gamma;
            if !(g < 0.0) {
                return Err(Error::domain(format!(
                    "short-data regime requires gamma < 0, got {g}"
                )));
            }
            Ok(g + (g * (g - 1.0)).sqrt())
        }
    }
}

/// Regime of the non-feedback (and delayless gain-feedback) schemes:
/// `gamma = (Nt + P L) / (P L (1 - Nt/Ld))`.
pub fn gamma_nonfeedback(
    num_tx: usize,
    avg_power: f64,
    block_len: usize,
    data_len: usize,
) -> Result<AlphaRegime> {
    if num_tx == 0 || data_len == 0 || block_len == 0 {
        return Err(Error::domain("antenna count and lengths must be positive"));
    }
    if !(avg_power > 0.0) {
        return Err(Error::domain("average power must be positive"));
    }
    if data_len == num_tx {
        return Ok(AlphaRegime {
            gamma: f64::NAN,
            branch: RegimeBranch::Equal,
        });
    }
    let pl = avg_power * block_len as f64;
    let gamma = (num_tx as f64 + pl) / (pl * (1.0 - num_tx as f64 / data_len as f64));
    let branch = if data_len > num_tx {
        RegimeBranch::DataLonger
    } else {
        RegimeBranch::DataShorter
    };
    Ok(AlphaRegime { gamma, branch })
}

/// Regime of the covariance-feedback scheme: `gamma = Ld / (Ld - Lp)`,
/// independent of the channel correlation. Valid when
/// `P L >> sum(1/g_i)` over the trained channels; see
/// [`ccf_validity_ratio`].
pub fn gamma_ccf(data_len: usize, train_len: usize) -> Result<AlphaRegime> {
    if data_len == 0 || train_len == 0 {
        return Err(Error::domain("lengths must be positive"));
    }
    if data_len == train_len {
        return Ok(AlphaRegime {
            gamma: f64::NAN,
            branch: RegimeBranch::Equal,
        });
    }
    let gamma = data_len as f64 / (data_len as f64 - train_len as f64);
    let branch = if data_len > train_len {
        RegimeBranch::DataLonger
    } else {
        RegimeBranch::DataShorter
    };
    Ok(AlphaRegime { gamma, branch })
}

/// Validity ratio `P L / sum_{i<=Lp} 1/g_i` of the covariance-feedback
/// closed form; values below [`CCF_VALIDITY_THRESHOLD`] mean the closed
/// form may sit away from the numeric optimum.
pub fn ccf_validity_ratio(
    cov: &CovarianceSpec,
    train_len: usize,
    avg_power: f64,
    block_len: usize,
) -> Result<f64> {
    if train_len == 0 || train_len > cov.dim() {
        return Err(Error::domain(format!(
            "training length must be in 1..={}, got {train_len}",
            cov.dim()
        )));
    }
    let inv_sum: f64 = cov.eigenvalues()[..train_len]
        .iter()
        .map(|&g| 1.0 / g)
        .sum();
    Ok(avg_power * block_len as f64 / inv_sum)
}

/// Regime of the beamforming scheme:
/// `gamma = (1 + gmax P L) / (gmax P L (L-2)/(L-1))`, requiring `L >= 3`.
/// `gamma` decreases toward `(L-1)/(L-2)` as `gmax P L` grows, so the
/// optimal factor rises with channel correlation.
pub fn gamma_beamforming(g_max: f64, avg_power: f64, block_len: usize) -> Result<AlphaRegime> {
    if block_len < 3 {
        return Err(Error::domain(format!(
            "beamforming regime needs a block of at least 3 symbols, got {block_len}"
        )));
    }
    if !(g_max > 0.0) || !(avg_power > 0.0) {
        return Err(Error::domain("gain and power must be positive"));
    }
    let x = g_max * avg_power * block_len as f64;
    let l = block_len as f64;
    let gamma = (1.0 + x) / (x * (l - 2.0) / (l - 1.0));
    Ok(AlphaRegime {
        gamma,
        branch: RegimeBranch::DataLonger,
    })
}

/// Closed-form power factor appropriate for a scheme configuration, when
/// one exists.
pub fn closed_form_alpha(cfg: &SchemeConfig) -> Result<f64> {
    let regime = match cfg.scheme() {
        Scheme::NonFeedback | Scheme::CgfDelayless | Scheme::CgfDelayed { .. } => {
            gamma_nonfeedback(
                cfg.num_tx(),
                cfg.avg_power(),
                cfg.block_len(),
                cfg.data_len(),
            )?
        }
        Scheme::Ccf(_) => gamma_ccf(cfg.data_len(), cfg.train_len())?,
        Scheme::Beamforming(cov) => {
            gamma_beamforming(cov.eigenvalues()[0], cfg.avg_power(), cfg.block_len())?
        }
    };
    alpha_star(&regime)
}

/// Result of the numeric power-factor search.
#[derive(Debug, Clone, Copy)]
pub struct AlphaSearch {
    pub alpha: f64,
    pub value: f64,
    /// Set when the three-point unimodality probe failed and the search fell
    /// back to a grid scan.
    pub grid_fallback: bool,
}

/// Seeded-objective argmax of the capacity estimate over the power factor.
///
/// The capacity estimate with a fixed seed is a continuous function of
/// `alpha` (water-filling allocations vary continuously with the budget), so
/// golden section applies; a three-point sanity probe falls back to a grid
/// scan if the samples do not look unimodal. `tol` must be at least `1e-3`,
/// the Monte-Carlo noise floor.
pub fn numeric_alpha(cfg: &SchemeConfig, mc: &MonteCarlo, tol: f64) -> Result<AlphaSearch> {
    if tol < 1e-3 {
        return Err(Error::domain(format!(
            "alpha tolerance below the Monte-Carlo noise floor 1e-3: {tol}"
        )));
    }
    let objective = |alpha: f64| -> Result<f64> { Ok(evaluate(&cfg.with_alpha(alpha)?, mc)?.mean) };

    let probes = [
        ALPHA_MIN + 0.25 * (ALPHA_MAX - ALPHA_MIN),
        ALPHA_MIN + 0.50 * (ALPHA_MAX - ALPHA_MIN),
        ALPHA_MIN + 0.75 * (ALPHA_MAX - ALPHA_MIN),
    ];
    let f_lo = objective(probes[0])?;
    let f_mid = objective(probes[1])?;
    let f_hi = objective(probes[2])?;
    if f_mid < f_lo && f_mid < f_hi {
        // A dip in the middle cannot happen for a unimodal objective.
        let mut best = (ALPHA_MIN, objective(ALPHA_MIN)?);
        let mut alpha = ALPHA_MIN + tol;
        while alpha < ALPHA_MAX {
            let v = objective(alpha)?;
            if v > best.1 {
                best = (alpha, v);
            }
            alpha += tol;
        }
        return Ok(AlphaSearch {
            alpha: best.0,
            value: best.1,
            grid_fallback: true,
        });
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (ALPHA_MIN, ALPHA_MAX);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = objective(x1)?;
    let mut f2 = objective(x2)?;
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = objective(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = objective(x1)?;
        }
    }
    let (alpha, value) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    Ok(AlphaSearch {
        alpha,
        value,
        grid_fallback: false,
    })
}

/// Solution of the data power division optimization under perfect channel
/// knowledge.
#[derive(Debug, Clone, Copy)]
pub struct PhiSolution {
    pub phi_star: f64,
    /// Stationarity residual at the solution (zero at an interior optimum,
    /// the one-sided derivative sign at a boundary).
    pub residual: f64,
    /// Set when the stationarity condition did not bracket a root and the
    /// solver returned the nearest boundary.
    pub at_boundary: bool,
}

/// Optimal division of data energy between the non-adaptive and adaptive
/// sub-blocks under perfect channel knowledge (no training overhead).
///
/// The objective derivative, up to a positive factor, is
/// `S(phi) = E{ beta sum_i lambda_i / (beta Nt + phi lambda_i Pd) - 1/nu }`
/// with `nu` the water level of the adaptive budget
/// `(1 - phi) Pd / (1 - beta)`. The KKT solution is `phi* = 0` when the
/// derivative is already non-positive there (low SNR); otherwise `S` is
/// decreasing and the root is found by bisection over a fixed pool of
/// sampled eigenvalue vectors, which makes `S` continuous in `phi`.
pub fn phi_star_perfect_csi(
    num_tx: usize,
    num_rx: usize,
    beta: f64,
    data_power: f64,
    mc: &MonteCarlo,
) -> Result<PhiSolution> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!(
            "beta must lie strictly inside (0, 1), got {beta}"
        )));
    }
    if !(data_power > 0.0) {
        return Err(Error::domain("data power must be positive"));
    }
    if mc.trials == 0 {
        return Err(Error::InsufficientSampling { trials: 0, min: 1 });
    }

    // Fixed eigenvalue pool, one vector per trial substream.
    let pool: Vec<Vec<f64>> = (0..mc.trials)
        .into_par_iter()
        .map(|t| {
            let mut stream = RandomStream::substream(mc.seed, t as u64);
            let h0 = sample_zmcscg(num_rx, num_tx, &mut stream);
            let w = h0.adjoint().mul(&h0);
            hermitian_eig(&w)
                .expect("sampled Gram is Hermitian")
                .values
                .into_iter()
                .map(|l| l.max(0.0))
                .collect()
        })
        .collect();

    let stationarity = |phi: f64| -> f64 {
        let budget = (1.0 - phi) * data_power / (1.0 - beta);
        let terms: Vec<f64> = pool
            .iter()
            .map(|lambda| {
                let sum: f64 = lambda
                    .iter()
                    .map(|&l| beta * l / (beta * num_tx as f64 + phi * l * data_power))
                    .sum();
                let positive: Vec<f64> = lambda
                    .iter()
                    .copied()
                    .filter(|&l| l > lambda[0] * 1e-12)
                    .collect();
                let level = waterfill(&positive, budget)
                    .expect("positive sorted gains")
                    .level;
                sum - 1.0 / level
            })
            .collect();
        pairwise_sum(&terms) / terms.len() as f64
    };

    let s0 = stationarity(0.0);
    if s0 <= 0.0 {
        // First KKT case: mean eigenvalue does not exceed E{1/nu} at phi = 0.
        return Ok(PhiSolution {
            phi_star: 0.0,
            residual: s0,
            at_boundary: false,
        });
    }
    let s1 = stationarity(1.0);
    if s1 >= 0.0 {
        return Ok(PhiSolution {
            phi_star: 1.0,
            residual: s1,
            at_boundary: true,
        });
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut mid = 0.5;
    let mut s_mid = stationarity(mid);
    for _ in 0..60 {
        if s_mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        mid = 0.5 * (lo + hi);
        s_mid = stationarity(mid);
        if hi - lo < 1e-9 {
            break;
        }
    }
    Ok(PhiSolution {
        phi_star: mid,
        residual: s_mid,
        at_boundary: false,
    })
}

/// Grid argmax of the delayed-feedback capacity over the data power
/// division, with common random numbers. The bound is not globally concave
/// in `phi` when estimation errors are large, so no unimodality is assumed.
pub fn grid_optimal_phi(
    cfg: &SchemeConfig,
    step: f64,
    mc: &MonteCarlo,
) -> Result<(f64, CapacityEstimate)> {
    let (delay, _) = match cfg.scheme() {
        Scheme::CgfDelayed { delay, phi } => (*delay, *phi),
        _ => {
            return Err(Error::config(
                "scheme",
                "phi optimization applies to the delayed gain-feedback scheme",
            ))
        }
    };
    if !(step > 0.0 && step < 1.0) {
        return Err(Error::domain(format!(
            "grid step must be in (0,1), got {step}"
        )));
    }
    if delay == 0 || delay == cfg.data_len() {
        return Err(Error::domain(
            "phi is fixed at the delay boundaries; nothing to optimize",
        ));
    }
    let mut best: Option<(f64, CapacityEstimate)> = None;
    let steps = (1.0 / step).round() as usize;
    for k in 0..=steps {
        let phi = (k as f64 * step).min(1.0);
        let cand = SchemeConfig::new(
            cfg.num_tx(),
            cfg.num_rx(),
            cfg.block_len(),
            cfg.train_len(),
            cfg.avg_power(),
            cfg.alpha(),
            Scheme::CgfDelayed { delay, phi },
        )?;
        let est = evaluate(&cand, mc)?;
        if best.as_ref().is_none_or(|(_, b)| est.mean > b.mean) {
            best = Some((phi, est));
        }
    }
    Ok(best.expect("grid is non-empty"))
}

/// One row of the training-length search table.
#[derive(Debug, Clone)]
pub struct PilotLengthRow {
    pub train_len: usize,
    pub alpha: f64,
    pub estimate: CapacityEstimate,
    /// Eigen-channels actually trained (smaller than `train_len` when
    /// water-filling deactivated some).
    pub effective_len: usize,
    /// Validity ratio of the closed-form alpha at this training length.
    pub validity_ratio: f64,
}

/// Optimal covariance-feedback training length: evaluate every
/// `Lp in 1..=Nt` at its own closed-form power factor and keep the argmax
/// (ties resolved toward the shorter training length). Designs whose
/// water-filling trains fewer channels than requested are evaluated as the
/// reduced design.
pub fn optimal_pilot_length(
    cov: &CovarianceSpec,
    num_rx: usize,
    block_len: usize,
    avg_power: f64,
    mc: &MonteCarlo,
) -> Result<(usize, Vec<PilotLengthRow>)> {
    let num_tx = cov.dim();
    let mut rows = Vec::with_capacity(num_tx);
    let mut best: Option<(usize, f64)> = None;
    for lp in 1..=num_tx {
        let data_len = block_len - lp;
        let alpha = alpha_star(&gamma_ccf(data_len, lp)?)?;
        let cfg = SchemeConfig::new(
            num_tx,
            num_rx,
            block_len,
            lp,
            avg_power,
            alpha,
            Scheme::Ccf(cov.clone()),
        )?;
        let pilots = crate::estimation::ccf_pilots(cov, cfg.pilot_power(), lp)?;
        let estimate = evaluate(&cfg, mc)?;
        rows.push(PilotLengthRow {
            train_len: lp,
            alpha,
            estimate,
            effective_len: pilots.effective_len(),
            validity_ratio: ccf_validity_ratio(cov, lp, avg_power, block_len)?,
        });
        if best.is_none_or(|(_, b)| estimate.mean > b) {
            best = Some((lp, estimate.mean));
        }
    }
    Ok((best.expect("at least one candidate").0, rows))
}
