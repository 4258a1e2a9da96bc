//! Channel estimation for RIS-aided MIMO uplinks.
//!
//! The cascaded user → RIS → BS channel is recovered from `L` training
//! configurations of the surface. Observations are reduced to the bilinear
//! model `Y = Φ S + W` with `S = (Hᵀ ⊙ G)ᵀ`, rotated by the left singular
//! vectors of `Φ`, and then fed to a message-passing estimator that couples a
//! unitary AMP stage (for the linear mixing through `Φ`) with per-element
//! rank-one factor updates (for the Khatri-Rao structure of `S`).
//!
//! Besides the estimator the crate provides the synthetic data generator,
//! the Cramér-Rao lower bound, two reference estimators and the
//! ambiguity-free NMSE metric used to score all of them.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod crlb;
mod dims;
mod error;
mod estimate;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod uamp;

pub use dims::SystemDims;
pub use error::{Error, Result};
pub use estimate::ChannelEstimate;
pub use linalg::{CMat, RMat, C64};
pub use model::{ChannelPair, PhaseKind, RisPhaseMatrix, TransformedModel};
