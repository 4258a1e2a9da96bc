//! Synthetic data for the RIS uplink and the reduced bilinear model.
//!
//! Layout conventions used across the crate:
//!
//! * `H` is `N×K` (RIS → users), so `h_n` (column `n` of `Hᵀ`) is row `n` of `H`.
//! * `G` is `M×N` (BS ← RIS), so `g_n` is column `n` of `G`.
//! * `S` is `N×J` with row `n` equal to `(h_n ⊗ g_n)ᵀ`, and entry
//!   `j = k·M + m` (zero-based, `k` outer) holds `h_{k,n}·g_{m,n}`.
//! * `Y = Φ S + W` is `L×J`.

mod channels;
mod observe;
mod phase;
mod structure;
mod transform;

pub use channels::{generate_channels, ChannelPair};
pub use observe::{noise_precision_for_snr, simulate_observations, snr_to_noise_variance};
pub use phase::{generate_phase_matrix, PhaseKind, RisPhaseMatrix};
pub use structure::{build_signal_matrix, khatri_rao_column, vectorized_model_oracle};
pub use transform::{unitary_transform, TransformedModel};
