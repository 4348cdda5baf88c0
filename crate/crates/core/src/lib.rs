//! Capacity simulation and resource optimization for pilot-assisted
//! block-fading MIMO links.
//!
//! Each transmission block of `L` symbols spends `Lp` symbols on pilots for
//! LMMSE channel estimation and the remaining `Ld = L - Lp` on data. The
//! figure of merit is an ergodic-capacity lower bound that accounts for the
//! channel estimation error, averaged per block. On top of the Monte-Carlo
//! evaluator the crate provides the matching optimizers: the pilot/data
//! power split `alpha`, the data power division `phi` under feedback delay,
//! and the training length `Lp`, in closed form where a closed form exists
//! and numerically elsewhere.
//!
//! Modules:
//! * [`linalg`]: small dense complex matrices, Jacobi eigensolver, PSD
//!   square root and inverse.
//! * [`rng`]: deterministic counter-based random streams, ZMCSCG sampling.
//! * [`channel`]: transmit-side correlation models, majorization ordering,
//!   channel realization sampling.
//! * [`waterfill`]: exact water-filling solver.
//! * [`estimation`]: pilot designs and LMMSE estimation statistics.
//! * [`capacity`]: Monte-Carlo capacity lower/upper bounds for all
//!   supported feedback schemes.
//! * [`optimize`]: closed-form and numerical optimizers for `alpha`,
//!   `phi`, and the training length.
//! * [`experiment`]: config-file driven sweeps with CSV output.

// `!(x > 0.0)` is used deliberately throughout to reject NaN along with
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod channel;
pub mod error;
pub mod estimation;
pub mod experiment;
pub mod linalg;
pub mod optimize;
pub mod rng;
mod stats;
pub mod waterfill;

pub use capacity::{evaluate, gap_estimate, CapacityEstimate, MonteCarlo, Scheme, SchemeConfig};
pub use channel::{majorizes, sample_channel, ChannelRealization, CovarianceSpec};
pub use error::{Error, Result};
pub use estimation::{
    ccf_pilots, estimation_stats, iid_orthogonal_pilots, lmmse_estimate, worst_case_mse,
    EstimationModel, PilotDesign,
};
pub use linalg::{hermitian_eig, psd_inverse, psd_sqrt, ComplexMatrix, HermitianEig};
pub use optimize::{alpha_star, AlphaRegime, RegimeBranch};
pub use rng::{sample_zmcscg, RandomStream};
pub use waterfill::{waterfill, WaterfillResult};
