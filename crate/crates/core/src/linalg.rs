//! Small dense complex-matrix kernel.
//!
//! Everything in this crate works on transmit-side covariance matrices and
//! channel realizations with at most a handful of antennas, so the kernel is
//! deliberately minimal: a row-major `Vec<Complex64>` matrix, a cyclic Jacobi
//! eigensolver for Hermitian matrices, and the PSD square root / inverse
//! built on top of it. The Jacobi method converges unconditionally and is
//! highly accurate at these sizes (n <= 16), which is exactly what the
//! estimation and capacity code needs.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Maximum dimension accepted by the eigensolver. The simulator never needs
/// more; anything larger is almost certainly a caller bug.
pub const MAX_EIG_DIM: usize = 16;

const JACOBI_MAX_SWEEPS: usize = 64;

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Diagonal matrix from real entries.
    pub fn diagonal(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &d) in entries.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Build from a closure over (row, col).
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Build from real entries (imaginary parts zero).
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must be rows*cols");
        ComplexMatrix {
            rows,
            cols,
            data: entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    /// Entry-wise sum.
    pub fn add(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + rhs[(i, j)])
    }

    /// Entry-wise difference.
    pub fn sub(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - rhs[(i, j)])
    }

    /// Scalar multiple.
    pub fn scale(&self, s: f64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// Trace (sum of diagonal entries).
    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace requires a square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest deviation from Hermitian symmetry, `max |a_ij - conj(a_ji)|`.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Column `j` as a vector of entries.
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Sub-matrix consisting of the first `k` columns.
    pub fn leading_columns(&self, k: usize) -> ComplexMatrix {
        assert!(k <= self.cols);
        ComplexMatrix::from_fn(self.rows, k, |i, j| self[(i, j)])
    }

    /// Determinant via LU decomposition with partial pivoting.
    pub fn det(&self) -> Complex64 {
        assert!(self.is_square(), "determinant requires a square matrix");
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for k in 0..n {
            // Partial pivot on the largest remaining entry in column k.
            let mut pivot = k;
            let mut best = a[k * n + k].norm();
            for r in (k + 1)..n {
                let mag = a[r * n + k].norm();
                if mag > best {
                    best = mag;
                    pivot = r;
                }
            }
            if best == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            if pivot != k {
                for c in 0..n {
                    a.swap(k * n + c, pivot * n + c);
                }
                det = -det;
            }
            let pk = a[k * n + k];
            det *= pk;
            for r in (k + 1)..n {
                let factor = a[r * n + k] / pk;
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in (k + 1)..n {
                    let sub = factor * a[k * n + c];
                    a[r * n + c] -= sub;
                }
            }
        }
        det
    }

    fn check_hermitian(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::domain(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let tol = 1e-10 * self.max_abs().max(1.0);
        let asym = self.hermitian_asymmetry();
        if asym > tol {
            return Err(Error::NotHermitian {
                max_asymmetry: asym,
            });
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigen-decomposition of a Hermitian matrix: `A = U diag(values) U^H`.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Real eigenvalues sorted in descending order.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: ComplexMatrix,
}

/// Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Each sweep annihilates every off-diagonal entry once using a complex
/// plane rotation: the 2x2 pivot block is first de-phased so the coupling
/// becomes real, then rotated with the classic symmetric Jacobi angle.
/// Eigenvalues are returned in descending order; exact ties keep the entry
/// with the larger diagonal index first so the output is deterministic.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<HermitianEig> {
    a.check_hermitian()?;
    let n = a.rows();
    if n == 0 {
        return Err(Error::domain("cannot decompose an empty matrix"));
    }
    if n > MAX_EIG_DIM {
        return Err(Error::domain(format!(
            "eigensolver supports dimensions up to {MAX_EIG_DIM}, got {n}"
        )));
    }

    let mut w = a.clone();
    // Force an exactly Hermitian working copy so rotations preserve symmetry.
    for i in 0..n {
        w[(i, i)] = Complex64::new(w[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (w[(i, j)] + w[(j, i)].conj()) * 0.5;
            w[(i, j)] = avg;
            w[(j, i)] = avg.conj();
        }
    }
    let mut u = ComplexMatrix::identity(n);
    let scale = w.max_abs().max(f64::MIN_POSITIVE);
    let stop = 1e-15 * scale;

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(w[(p, q)].norm());
            }
        }
        if off <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = w[(p, q)];
                let mag = apq.norm();
                if mag <= stop {
                    continue;
                }
                // Phase that makes the coupling real, then the real Jacobi angle.
                let phase = apq / mag;
                let app = w[(p, p)].re;
                let aqq = w[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Columns of the rotation: G[:,p] = c e_p - s conj(phase) e_q,
                // G[:,q] = s phase e_p + c e_q, unitary by construction.
                let gpp = Complex64::new(c, 0.0);
                let gqp = -phase.conj() * s;
                let gpq = phase * s;
                let gqq = Complex64::new(c, 0.0);

                // w <- G^H w G, applied as row then column updates.
                for j in 0..n {
                    let wpj = w[(p, j)];
                    let wqj = w[(q, j)];
                    w[(p, j)] = gpp.conj() * wpj + gqp.conj() * wqj;
                    w[(q, j)] = gpq.conj() * wpj + gqq.conj() * wqj;
                }
                for i in 0..n {
                    let wip = w[(i, p)];
                    let wiq = w[(i, q)];
                    w[(i, p)] = wip * gpp + wiq * gqp;
                    w[(i, q)] = wip * gpq + wiq * gqq;
                }
                // Keep the pivot block exactly Hermitian against drift.
                w[(p, p)] = Complex64::new(w[(p, p)].re, 0.0);
                w[(q, q)] = Complex64::new(w[(q, q)].re, 0.0);
                let avg = (w[(p, q)] + w[(q, p)].conj()) * 0.5;
                w[(p, q)] = avg;
                w[(q, p)] = avg.conj();

                // u <- u G accumulates the eigenvectors.
                for i in 0..n {
                    let uip = u[(i, p)];
                    let uiq = u[(i, q)];
                    u[(i, p)] = uip * gpp + uiq * gqp;
                    u[(i, q)] = uip * gpq + uiq * gqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let (vi, vj) = (w[(i, i)].re, w[(j, j)].re);
        vj.partial_cmp(&vi)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(j.cmp(&i))
    });

    let values: Vec<f64> = order.iter().map(|&i| w[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| u[(i, order[j])]);
    Ok(HermitianEig { values, vectors })
}

impl HermitianEig {
    /// Reassemble `U diag(f(values)) U^H`.
    pub fn assemble(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for k in 0..n {
            let lam = f(self.values[k]);
            if lam == 0.0 {
                continue;
            }
            for i in 0..n {
                let uik = self.vectors[(i, k)];
                for j in 0..n {
                    out[(i, j)] += uik * self.vectors[(j, k)].conj() * lam;
                }
            }
        }
        // The sum of Hermitian rank-1 terms is Hermitian; enforce it exactly.
        for i in 0..n {
            out[(i, i)] = Complex64::new(out[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let avg = (out[(i, j)] + out[(j, i)].conj()) * 0.5;
                out[(i, j)] = avg;
                out[(j, i)] = avg.conj();
            }
        }
        out
    }
}

/// Hermitian square root of a PSD matrix: returns `S` with `S S = A`.
///
/// Eigenvalues in `[-1e-10, 0)` are treated as rounding noise and clamped to
/// zero; anything more negative is rejected.
pub fn psd_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(a)?;
    let min = eig.values.last().copied().unwrap_or(0.0);
    if min < -1e-10 {
        return Err(Error::NotPositiveSemiDefinite {
            min_eigenvalue: min,
        });
    }
    Ok(eig.assemble(|lam| lam.max(0.0).sqrt()))
}

/// Inverse of a Hermitian positive-definite matrix.
///
/// Rejects inputs whose smallest eigenvalue is at or below `1e-12`, reporting
/// that eigenvalue in the error.
pub fn psd_inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(a)?;
    let min = eig.values.last().copied().unwrap_or(0.0);
    if min <= 1e-12 {
        return Err(Error::Singular {
            min_eigenvalue: min,
        });
    }
    Ok(eig.assemble(|lam| 1.0 / lam))
}
