//! Transmit-side spatial correlation and channel sampling.
//!
//! The channel is block flat-fading: `H = H0 R^{1/2}` with `H0` i.i.d.
//! ZMCSCG and `R` the transmit covariance, so `E{H^H H}/Nr = R`. Only
//! transmit-side correlation is modelled. Correlation strength is ordered by
//! majorization of the covariance spectra: a spectrum majorized by another
//! belongs to the *less* correlated channel.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, psd_sqrt, ComplexMatrix};
use crate::rng::{sample_zmcscg, RandomStream};

/// Transmit covariance matrix with cached eigen-data and Hermitian square
/// root. Immutable after construction.
#[derive(Debug, Clone)]
pub struct CovarianceSpec {
    matrix: ComplexMatrix,
    eigenvalues: Vec<f64>,
    basis: ComplexMatrix,
    sqrt: ComplexMatrix,
}

impl CovarianceSpec {
    /// Spatially independent channels (`R = I`).
    pub fn identity(n: usize) -> Self {
        CovarianceSpec {
            matrix: ComplexMatrix::identity(n),
            eigenvalues: vec![1.0; n],
            basis: ComplexMatrix::identity(n),
            sqrt: ComplexMatrix::identity(n),
        }
    }

    /// Validate and cache an arbitrary Hermitian positive-definite matrix.
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        let eig = hermitian_eig(&matrix)?;
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min <= 1e-12 {
            return Err(Error::Singular {
                min_eigenvalue: min,
            });
        }
        let sqrt = psd_sqrt(&matrix)?;
        Ok(CovarianceSpec {
            matrix,
            eigenvalues: eig.values,
            basis: eig.vectors,
            sqrt,
        })
    }

    /// Exponential correlation model: entry `(i, j)` is `rho^|i-j|`.
    ///
    /// `rho = 0` gives i.i.d. channels; `rho -> 1` approaches the fully
    /// correlated (singular) limit, which is rejected because the model
    /// requires a positive-definite covariance.
    pub fn exponential(n: usize, rho: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("antenna count must be positive"));
        }
        if rho < 0.0 || !rho.is_finite() {
            return Err(Error::domain(format!(
                "correlation factor must lie in [0, 1), got {rho}"
            )));
        }
        if rho >= 1.0 {
            return Err(Error::Singular {
                min_eigenvalue: 0.0,
            });
        }
        if rho == 0.0 {
            return Ok(Self::identity(n));
        }
        let matrix = ComplexMatrix::from_fn(n, n, |i, j| {
            Complex64::new(rho.powi((i as i32 - j as i32).abs()), 0.0)
        });
        Self::from_matrix(matrix)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Eigenvalues in descending order. All positive and summing to the
    /// trace (= n for the exponential model).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unitary eigenbasis, columns matching `eigenvalues()`.
    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    /// Cached Hermitian square root of the covariance.
    pub fn sqrt_matrix(&self) -> &ComplexMatrix {
        &self.sqrt
    }

    /// Inverse in closed form from the cached eigen-data.
    pub fn inverse(&self) -> ComplexMatrix {
        let n = self.dim();
        let eig = crate::linalg::HermitianEig {
            values: self.eigenvalues.clone(),
            vectors: self.basis.clone(),
        };
        let _ = n;
        eig.assemble(|g| 1.0 / g)
    }

    /// True when every eigenvalue equals one (the i.i.d. case).
    pub fn is_identity(&self) -> bool {
        self.eigenvalues.iter().all(|&g| (g - 1.0).abs() < 1e-12)
    }
}

/// One realization of the channel gain matrix.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// `Nr x Nt` channel gains.
    pub gains: ComplexMatrix,
}

/// Draw `H = H0 R^{1/2}` with `H0` i.i.d. ZMCSCG of unit variance.
pub fn sample_channel(
    cov: &CovarianceSpec,
    num_rx: usize,
    stream: &mut RandomStream,
) -> ChannelRealization {
    let h0 = sample_zmcscg(num_rx, cov.dim(), stream);
    ChannelRealization {
        gains: h0.mul(cov.sqrt_matrix()),
    }
}

/// Majorization test: `a` is majorized by `b` (`a` less spread out) when
/// every descending prefix sum of `a` is at most the matching prefix sum of
/// `b`, with equal totals.
///
/// Vectors are sorted internally; totals must agree to `1e-9` or the vectors
/// are not comparable.
pub fn majorizes(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::domain(format!(
            "majorization needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::domain("majorization of empty vectors is undefined"));
    }
    let mut sa: Vec<f64> = a.to_vec();
    let mut sb: Vec<f64> = b.to_vec();
    sa.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sb.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let sum_a: f64 = sa.iter().sum();
    let sum_b: f64 = sb.iter().sum();
    if (sum_a - sum_b).abs() > 1e-9 {
        return Err(Error::NotComparable { sum_a, sum_b });
    }
    // Prefix comparisons carry a small slack to absorb eigensolver rounding.
    let slack = 1e-12 * sum_a.abs().max(1.0);
    let mut pa = 0.0;
    let mut pb = 0.0;
    for k in 0..sa.len() - 1 {
        pa += sa[k];
        pb += sb[k];
        if pa > pb + slack {
            return Ok(false);
        }
    }
    Ok(true)
}
