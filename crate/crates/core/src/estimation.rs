//! Pilot design and LMMSE channel estimation statistics.
//!
//! A pilot design is represented by the eigen-powers `p` of its Gram matrix
//! `Xp Xp^H = U diag(p) U^H` in the covariance eigenbasis `U`; the capacity
//! bounds depend on the Gram only. Two constructions are provided:
//!
//! * orthogonal equal-power pilots, the minimax-robust choice when training
//!   at least as many symbols as transmit antennas, and
//! * covariance-adapted pilots that water-fill the pilot energy over the
//!   strongest eigen-channels when the training length is at most the
//!   antenna count.
//!
//! LMMSE estimation with Gram `G` and covariance `R` leaves an error
//! covariance `(R^{-1} + G)^{-1}` and, by the orthogonality principle, an
//! estimate covariance `R - (R^{-1} + G)^{-1}`.

use num_complex::Complex64;

use crate::channel::CovarianceSpec;
use crate::error::{Error, Result};
use crate::linalg::{psd_inverse, ComplexMatrix, HermitianEig};
use crate::waterfill::waterfill;

/// Pilot Gram matrix expressed by its eigen-powers over a unitary basis.
#[derive(Debug, Clone)]
pub struct PilotDesign {
    basis: ComplexMatrix,
    powers: Vec<f64>,
    train_len: usize,
    effective_len: usize,
    pilot_power: f64,
    water_level: Option<f64>,
    reduced: bool,
}

impl PilotDesign {
    /// Build a design from explicit eigen-powers. Powers must be
    /// non-negative, sorted in descending order, and sum to the pilot energy
    /// `Pp * Lp`.
    pub fn from_eigen_powers(
        basis: ComplexMatrix,
        powers: Vec<f64>,
        train_len: usize,
        pilot_power: f64,
    ) -> Result<Self> {
        if basis.rows() != basis.cols() || basis.rows() != powers.len() {
            return Err(Error::domain(
                "pilot basis must be square and match the power vector length",
            ));
        }
        for (k, &p) in powers.iter().enumerate() {
            if p < 0.0 || !p.is_finite() {
                return Err(Error::domain(format!("pilot power {p} at index {k}")));
            }
            if k > 0 && p > powers[k - 1] + 1e-12 {
                return Err(Error::domain("pilot powers must be sorted descending"));
            }
        }
        let total: f64 = powers.iter().sum();
        let energy = pilot_power * train_len as f64;
        if (total - energy).abs() > 1e-9 * energy.max(1.0) {
            return Err(Error::domain(format!(
                "pilot powers sum to {total}, expected Pp*Lp = {energy}"
            )));
        }
        let effective_len = powers.iter().filter(|&&p| p > 0.0).count();
        Ok(PilotDesign {
            basis,
            powers,
            train_len,
            effective_len,
            pilot_power,
            water_level: None,
            reduced: false,
        })
    }

    /// Number of transmit antennas this design covers.
    pub fn dim(&self) -> usize {
        self.powers.len()
    }

    /// Training length in symbols.
    pub fn train_len(&self) -> usize {
        self.train_len
    }

    /// Number of eigen-channels that actually receive pilot power.
    pub fn effective_len(&self) -> usize {
        self.effective_len
    }

    /// Pilot power per transmission.
    pub fn pilot_power(&self) -> f64 {
        self.pilot_power
    }

    /// Per-eigenchannel pilot energies, descending.
    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    /// Water level of a covariance-adapted design, when applicable.
    pub fn water_level(&self) -> Option<f64> {
        self.water_level
    }

    /// True when water-filling activated fewer eigen-channels than the
    /// requested training length.
    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    /// Gram matrix `U diag(p) U^H`.
    pub fn gram(&self) -> ComplexMatrix {
        HermitianEig {
            values: self.powers.clone(),
            vectors: self.basis.clone(),
        }
        .assemble(|p| p)
    }

    /// An explicit `Nt x Lp` pilot matrix realizing the Gram: column `j`
    /// carries `sqrt(p_j) u_j`, remaining columns are zero. The right
    /// unitary factor is fixed to identity; any other choice leaves the Gram
    /// and every bound unchanged.
    pub fn explicit_matrix(&self) -> ComplexMatrix {
        let nt = self.dim();
        let lp = self.train_len;
        let mut xp = ComplexMatrix::zeros(nt, lp);
        for j in 0..nt.min(lp) {
            let w = self.powers[j].sqrt();
            if w == 0.0 {
                continue;
            }
            for i in 0..nt {
                xp[(i, j)] = self.basis[(i, j)] * w;
            }
        }
        xp
    }
}

/// Orthogonal pilots with equal power across antennas:
/// `Xp Xp^H = (Pp Lp / Nt) I`. Requires `Lp >= Nt`; this is the worst-case
/// optimal (minimax MSE) training when the transmitter does not know the
/// channel correlation.
pub fn iid_orthogonal_pilots(nt: usize, pilot_power: f64, train_len: usize) -> Result<PilotDesign> {
    if nt == 0 {
        return Err(Error::domain("antenna count must be positive"));
    }
    if !(pilot_power > 0.0) {
        return Err(Error::domain(format!(
            "pilot power must be positive, got {pilot_power}"
        )));
    }
    if train_len < nt {
        return Err(Error::InsufficientTraining {
            needed: nt,
            got: train_len,
        });
    }
    let per_channel = pilot_power * train_len as f64 / nt as f64;
    Ok(PilotDesign {
        basis: ComplexMatrix::identity(nt),
        powers: vec![per_channel; nt],
        train_len,
        effective_len: nt,
        pilot_power,
        water_level: None,
        reduced: false,
    })
}

/// Covariance-adapted pilots: water-fill the pilot energy `Pp * Lp` over the
/// `Lp` strongest eigen-channels of the covariance (`1 <= Lp <= Nt`).
///
/// If the water level cannot reach all `Lp` requested channels, the design
/// is returned with a reduced effective length and flagged rather than
/// rejected; a transmitter would shorten the training length accordingly.
pub fn ccf_pilots(cov: &CovarianceSpec, pilot_power: f64, train_len: usize) -> Result<PilotDesign> {
    let nt = cov.dim();
    if train_len == 0 || train_len > nt {
        return Err(Error::domain(format!(
            "training length must be in 1..={nt}, got {train_len}"
        )));
    }
    if !(pilot_power > 0.0) {
        return Err(Error::domain(format!(
            "pilot power must be positive, got {pilot_power}"
        )));
    }
    let energy = pilot_power * train_len as f64;
    let gains = &cov.eigenvalues()[..train_len];
    let wf = waterfill(gains, energy)?;
    let mut powers = vec![0.0; nt];
    powers[..train_len].copy_from_slice(&wf.alloc);
    Ok(PilotDesign {
        basis: cov.basis().clone(),
        powers,
        train_len,
        effective_len: wf.active,
        pilot_power,
        water_level: Some(wf.level),
        reduced: wf.active < train_len,
    })
}

/// Second-order statistics of the LMMSE channel estimate induced by a pilot
/// design.
#[derive(Debug, Clone)]
pub struct EstimationModel {
    /// Estimation error covariance `(R^{-1} + Xp Xp^H)^{-1}`.
    pub error_cov: ComplexMatrix,
    /// Estimate covariance `R - error_cov` (orthogonality principle).
    pub estimate_cov: ComplexMatrix,
    /// Eigenvalues of the error covariance in the shared basis.
    pub tilde_eig: Vec<f64>,
    /// Eigenvalues of the estimate covariance in the shared basis.
    pub hat_eig: Vec<f64>,
}

fn basis_matches(pilot: &PilotDesign, cov: &CovarianceSpec) -> bool {
    // An equal-power Gram is a multiple of identity and is diagonal in any
    // basis; otherwise the design must share the covariance eigenbasis.
    let p = pilot.powers();
    let equal_power = p.iter().all(|&x| (x - p[0]).abs() <= 1e-12 * p[0].max(1.0));
    if equal_power {
        return true;
    }
    pilot.basis().sub(cov.basis()).max_abs() < 1e-12
}

/// Error and estimate covariances for a (covariance, pilot design) pair.
///
/// Computed eigenvalue-wise in the shared basis: each eigen-channel with
/// prior gain `g_i` and pilot energy `p_i` leaves error `1/(1/g_i + p_i)`.
pub fn estimation_stats(cov: &CovarianceSpec, pilot: &PilotDesign) -> Result<EstimationModel> {
    if pilot.dim() != cov.dim() {
        return Err(Error::config(
            "pilot",
            format!(
                "pilot design covers {} antennas, covariance has {}",
                pilot.dim(),
                cov.dim()
            ),
        ));
    }
    if !basis_matches(pilot, cov) {
        return Err(Error::config(
            "pilot",
            "pilot basis does not match the covariance eigenbasis",
        ));
    }
    let g = cov.eigenvalues();
    let tilde_eig: Vec<f64> = g
        .iter()
        .zip(pilot.powers())
        .map(|(&gi, &pi)| 1.0 / (1.0 / gi + pi))
        .collect();
    let hat_eig: Vec<f64> = g
        .iter()
        .zip(&tilde_eig)
        .map(|(&gi, &ti)| (gi - ti).max(0.0))
        .collect();
    let basis = cov.basis().clone();
    let error_cov = HermitianEig {
        values: tilde_eig.clone(),
        vectors: basis.clone(),
    }
    .assemble(|x| x);
    let estimate_cov = HermitianEig {
        values: hat_eig.clone(),
        vectors: basis,
    }
    .assemble(|x| x);
    Ok(EstimationModel {
        error_cov,
        estimate_cov,
        tilde_eig,
        hat_eig,
    })
}

/// LMMSE channel estimate from a block of pilot observations:
/// `Hhat = Y (Xp^H R Xp + I)^{-1} Xp^H R`.
///
/// `y` is `Nr x Lp`, `xp` is `Nt x Lp`. Used to cross-validate the
/// closed-form statistics against simulated pilot observations.
pub fn lmmse_estimate(
    y: &ComplexMatrix,
    xp: &ComplexMatrix,
    cov: &CovarianceSpec,
) -> Result<ComplexMatrix> {
    let nt = cov.dim();
    if xp.rows() != nt {
        return Err(Error::domain(format!(
            "pilot matrix has {} rows, expected {nt}",
            xp.rows()
        )));
    }
    if y.cols() != xp.cols() {
        return Err(Error::domain(format!(
            "observation block has {} columns, pilot matrix has {}",
            y.cols(),
            xp.cols()
        )));
    }
    let r = cov.matrix();
    let rxp = r.mul(xp);
    let mut inner = xp.adjoint().mul(&rxp);
    for i in 0..inner.rows() {
        inner[(i, i)] += Complex64::new(1.0, 0.0);
    }
    let inv = psd_inverse(&inner)?;
    Ok(y.mul(&inv).mul(&rxp.adjoint()))
}

/// Worst-case estimation MSE of a pilot Gram over a set of candidate
/// transmit correlations: `max_R tr((R^{-1} + G)^{-1})`.
///
/// The supremum over all trace-constrained correlations is attained at the
/// identity for equal-power Grams; evaluating over a sampled set (which
/// should include the identity) certifies the minimax property numerically.
pub fn worst_case_mse(pilot_gram: &ComplexMatrix, corr_samples: &[CovarianceSpec]) -> Result<f64> {
    if corr_samples.is_empty() {
        return Err(Error::domain("worst-case MSE needs a non-empty sample set"));
    }
    if !pilot_gram.is_square() {
        return Err(Error::domain("pilot Gram must be square"));
    }
    let mut worst = f64::NEG_INFINITY;
    for cov in corr_samples {
        if cov.dim() != pilot_gram.rows() {
            return Err(Error::domain(
                "correlation sample dimension does not match the Gram",
            ));
        }
        let m = cov.inverse().add(pilot_gram);
        let mse = psd_inverse(&m)?.trace().re;
        worst = worst.max(mse);
    }
    Ok(worst)
}
