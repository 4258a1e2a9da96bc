use super::ChannelPair;
use crate::linalg::{CMat, C64};
use nalgebra::DVector;

/// `h ⊗ g` with entry `k·M + m` equal to `h[k]·g[m]`.
pub fn khatri_rao_column(h: &[C64], g: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(h.len() * g.len());
    for hk in h {
        out.extend(g.iter().map(|gm| hk * gm));
    }
    out
}

/// `S = (Hᵀ ⊙ G)ᵀ`, an `N×J` matrix whose row `n` is `(h_n ⊗ g_n)ᵀ`.
pub fn build_signal_matrix(channels: &ChannelPair) -> CMat {
    let (h, g) = (channels.h(), channels.g());
    let (n, k, m) = (channels.n(), channels.k(), channels.m());
    let mut s = CMat::zeros(n, k * m);
    for row in 0..n {
        for kk in 0..k {
            let hk = h[(row, kk)];
            for mm in 0..m {
                s[(row, kk * m + mm)] = hk * g[(mm, row)];
            }
        }
    }
    s
}

/// Literal `(Hᵀ ⊗ G)·vec(Diag(φ))` without exploiting the sparsity of the
/// diagonal. Quadratic in `N`; only meant as a cross-check of the reduced
/// model `Sᵀ·φ`.
pub fn vectorized_model_oracle(channels: &ChannelPair, phi_row: &[C64]) -> Vec<C64> {
    let n = channels.n();
    assert_eq!(phi_row.len(), n, "phase row must have N entries");
    let kron = channels.h().transpose().kronecker(channels.g());
    let mut vec_diag = DVector::<C64>::zeros(n * n);
    for (idx, phi) in phi_row.iter().enumerate() {
        // column-major vec: entry (a, b) lives at b·N + a
        vec_diag[idx * n + idx] = *phi;
    }
    (kron * vec_diag).iter().copied().collect()
}
