//! Fisher information and Cramér-Rao lower bounds for `H` and `G`.
//!
//! The parameter vector stacks `h_1, …, h_N` and then `g_1, …, g_N`
//! (`h_{k,n}` at position `n·K + k`, `g_{m,n}` at `N·K + n·M + m`). Only the
//! non-conjugate half `P` of the augmented FIM is formed; the conjugate half
//! is `P*` and adds nothing to the bounds.
//!
//! `P` is always singular: every `(c·h_n, g_n/c)` leaves the likelihood
//! unchanged. The bounds therefore use pseudo-inverses and measure the error
//! on the complement of those directions, which is what the
//! ambiguity-removed NMSE measures as well.

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::model::{build_signal_matrix, ChannelPair};
use nalgebra::{DVector, SymmetricEigen};

/// Relative eigenvalue cutoff of the pseudo-inverses.
pub const PINV_RCOND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThetaLayout {
    pub k: usize,
    pub m: usize,
    pub n: usize,
}

impl ThetaLayout {
    pub fn of(channels: &ChannelPair) -> Self {
        Self {
            k: channels.k(),
            m: channels.m(),
            n: channels.n(),
        }
    }

    pub fn h_index(&self, k: usize, n: usize) -> usize {
        n * self.k + k
    }

    pub fn g_index(&self, m: usize, n: usize) -> usize {
        self.n * self.k + n * self.m + m
    }

    pub fn len(&self) -> usize {
        self.n * (self.k + self.m)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Blocks of `P = E{(∂f/∂θ)(∂f/∂θ)ᴴ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FimBlocks {
    pub p_hh: CMat,
    pub p_gg: CMat,
    pub p_hg: CMat,
    pub sigma2: f64,
    pub layout: ThetaLayout,
}

impl FimBlocks {
    /// `[[P_HH, P_HG], [P_HGᴴ, P_GG]]`.
    pub fn full(&self) -> CMat {
        let kn = self.p_hh.nrows();
        let mn = self.p_gg.nrows();
        let mut p = CMat::zeros(kn + mn, kn + mn);
        p.view_mut((0, 0), (kn, kn)).copy_from(&self.p_hh);
        p.view_mut((kn, kn), (mn, mn)).copy_from(&self.p_gg);
        p.view_mut((0, kn), (kn, mn)).copy_from(&self.p_hg);
        p.view_mut((kn, 0), (mn, kn))
            .copy_from(&self.p_hg.adjoint());
        p
    }
}

fn check_inputs(channels: &ChannelPair, phase: &CMat, sigma2: f64) -> Result<()> {
    if phase.ncols() != channels.n() {
        return Err(Error::Shape {
            what: "phase matrix (L×N)",
            expected: (phase.nrows(), channels.n()),
            actual: phase.shape(),
        });
    }
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "noise variance must be positive, got {sigma2}"
        )));
    }
    Ok(())
}

fn residual(channels: &ChannelPair, phase: &CMat, y: &CMat) -> Result<CMat> {
    let mean = phase * build_signal_matrix(channels);
    if y.shape() != mean.shape() {
        return Err(Error::Shape {
            what: "observations Y (L×J)",
            expected: mean.shape(),
            actual: y.shape(),
        });
    }
    Ok(y - mean)
}

/// Log-likelihood of `Y` (`L×J`, the transpose of `Ỹ`) at `(H, G)`.
pub fn log_likelihood(channels: &ChannelPair, phase: &CMat, sigma2: f64, y: &CMat) -> Result<f64> {
    check_inputs(channels, phase, sigma2)?;
    let e = residual(channels, phase, y)?;
    let count = (y.nrows() * y.ncols()) as f64;
    let sq: f64 = e.iter().map(|z| z.norm_sqr()).sum();
    Ok(-count * (std::f64::consts::PI * sigma2).ln() - sq / sigma2)
}

/// Wirtinger derivatives `∂f/∂h_{k,n}` and `∂f/∂g_{m,n}` of the
/// log-likelihood, in θ order.
pub fn score_gradients(
    channels: &ChannelPair,
    phase: &CMat,
    sigma2: f64,
    y: &CMat,
) -> Result<DVector<C64>> {
    check_inputs(channels, phase, sigma2)?;
    let e = residual(channels, phase, y)?;
    let layout = ThetaLayout::of(channels);
    let (k_len, m_len, n_len) = (layout.k, layout.m, layout.n);
    // t[n, j] = Σ_l φ_{l,n} · conj(e_{l,j})
    let t = phase.transpose() * e.map(|z| z.conj());
    let (h, g) = (channels.h(), channels.g());
    let mut score = DVector::zeros(layout.len());
    let inv = 1.0 / sigma2;
    for n in 0..n_len {
        for k in 0..k_len {
            let mut acc = C64::new(0.0, 0.0);
            for m in 0..m_len {
                acc += g[(m, n)] * t[(n, k * m_len + m)];
            }
            score[layout.h_index(k, n)] = acc * inv;
        }
        for m in 0..m_len {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..k_len {
                acc += h[(n, k)] * t[(n, k * m_len + m)];
            }
            score[layout.g_index(m, n)] = acc * inv;
        }
    }
    Ok(score)
}

/// Closed-form `P`. With `J_{i,a} = ∂μ_i/∂θ_a` the Jacobian of the noiseless
/// observations, `P_{a,b} = σ⁻² Σ_i J_{i,a}·conj(J_{i,b})`.
pub fn build_fim(channels: &ChannelPair, phase: &CMat, sigma2: f64) -> Result<FimBlocks> {
    check_inputs(channels, phase, sigma2)?;
    let layout = ThetaLayout::of(channels);
    let (k_len, m_len, n_len) = (layout.k, layout.m, layout.n);
    let (h, g) = (channels.h(), channels.g());
    let inv = 1.0 / sigma2;

    // a[n, n'] = Σ_l φ_{l,n} conj(φ_{l,n'})
    let a = phase.transpose() * phase.map(|z| z.conj());
    // b[n, n'] = Σ_m g_{m,n} conj(g_{m,n'})
    let b = g.transpose() * g.map(|z| z.conj());
    // c[n, n'] = Σ_k h_{k,n} conj(h_{k,n'})
    let c = h * h.adjoint();

    let mut p_hh = CMat::zeros(k_len * n_len, k_len * n_len);
    let mut p_gg = CMat::zeros(m_len * n_len, m_len * n_len);
    let mut p_hg = CMat::zeros(k_len * n_len, m_len * n_len);
    for n in 0..n_len {
        for n2 in 0..n_len {
            let ab = a[(n, n2)] * b[(n, n2)] * inv;
            for k in 0..k_len {
                p_hh[(n * k_len + k, n2 * k_len + k)] = ab;
            }
            let ac = a[(n, n2)] * c[(n, n2)] * inv;
            for m in 0..m_len {
                p_gg[(n * m_len + m, n2 * m_len + m)] = ac;
            }
            for k in 0..k_len {
                let hc = h[(n2, k)].conj();
                for m in 0..m_len {
                    p_hg[(n * k_len + k, n2 * m_len + m)] = a[(n, n2)] * g[(m, n)] * hc * inv;
                }
            }
        }
    }
    Ok(FimBlocks {
        p_hh,
        p_gg,
        p_hg,
        sigma2,
        layout,
    })
}

/// Result of [`crlb_bounds`].
#[derive(Debug, Clone, PartialEq)]
pub struct CrlbReport {
    /// `trace(Ω_H) / (K·N)`.
    pub crlb_h: f64,
    /// `trace(Ω_G) / (M·N)`.
    pub crlb_g: f64,
    /// Numerical rank of the Schur complement behind `Ω_H`, out of `K·N`.
    pub rank_h: usize,
    pub rank_g: usize,
    /// Largest over smallest retained eigenvalue of each Schur complement.
    pub condition_h: f64,
    pub condition_g: f64,
    /// Whether any of the inversions dropped a null space.
    pub pseudo_inverse: bool,
}

struct Spectrum {
    values: DVector<f64>,
    vectors: CMat,
    kept: Vec<bool>,
}

impl Spectrum {
    fn of(m: &CMat) -> Self {
        let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(herm);
        let top = eig
            .eigenvalues
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        let cutoff = PINV_RCOND * top;
        let kept = eig
            .eigenvalues
            .iter()
            .map(|v| v.abs() > cutoff && top > 0.0)
            .collect();
        Self {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
            kept,
        }
    }

    fn rank(&self) -> usize {
        self.kept.iter().filter(|&&k| k).count()
    }

    fn pinv(&self) -> CMat {
        let dim = self.values.len();
        let mut scaled = self.vectors.clone();
        for (idx, mut col) in scaled.column_iter_mut().enumerate() {
            let w = if self.kept[idx] {
                1.0 / self.values[idx]
            } else {
                0.0
            };
            col *= C64::new(w, 0.0);
        }
        let out = scaled * self.vectors.adjoint();
        debug_assert_eq!(out.shape(), (dim, dim));
        out
    }

    fn pinv_trace(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.kept)
            .filter(|(_, &k)| k)
            .map(|(v, _)| 1.0 / v)
            .sum()
    }

    fn condition(&self) -> f64 {
        let kept: Vec<f64> = self
            .values
            .iter()
            .zip(&self.kept)
            .filter(|(_, &k)| k)
            .map(|(v, _)| v.abs())
            .collect();
        let hi = kept.iter().copied().fold(0.0, f64::max);
        let lo = kept.iter().copied().fold(f64::INFINITY, f64::min);
        if kept.is_empty() {
            f64::INFINITY
        } else {
            hi / lo
        }
    }
}

/// `Ω_H = (P_HH − P_HG P_GG⁻¹ P_HGᴴ)⁻¹`, `Ω_G = (P_GG − P_HGᴴ P_HH⁻¹ P_HG)⁻¹`
/// and their normalised traces.
pub fn crlb_bounds(fim: &FimBlocks) -> Result<CrlbReport> {
    let kn = fim.p_hh.nrows();
    let mn = fim.p_gg.nrows();
    if kn == 0 || mn == 0 {
        return Err(Error::InvalidDims("empty Fisher information".into()));
    }
    let hh = Spectrum::of(&fim.p_hh);
    let gg = Spectrum::of(&fim.p_gg);
    let schur_h = &fim.p_hh - &fim.p_hg * gg.pinv() * fim.p_hg.adjoint();
    let schur_g = &fim.p_gg - fim.p_hg.adjoint() * hh.pinv() * &fim.p_hg;
    let sh = Spectrum::of(&schur_h);
    let sg = Spectrum::of(&schur_g);
    let pseudo_inverse = hh.rank() < kn || gg.rank() < mn || sh.rank() < kn || sg.rank() < mn;
    Ok(CrlbReport {
        crlb_h: sh.pinv_trace() / kn as f64,
        crlb_g: sg.pinv_trace() / mn as f64,
        rank_h: sh.rank(),
        rank_g: sg.rank(),
        condition_h: sh.condition(),
        condition_g: sg.condition(),
        pseudo_inverse,
    })
}

/// Convenience wrapper: FIM and bounds for one realisation.
pub fn crlb_for(channels: &ChannelPair, phase: &CMat, sigma2: f64) -> Result<CrlbReport> {
    crlb_bounds(&build_fim(channels, phase, sigma2)?)
}
