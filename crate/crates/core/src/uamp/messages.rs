//! The individual update rules of one estimator iteration.
//!
//! All Gaussian messages on scalar variables are circular complex Gaussians
//! parameterised by a complex mean and a real variance.

use super::{EstimatorConfig, EstimatorState};
use crate::linalg::{CMat, C64};
use crate::model::TransformedModel;

/// Below this fraction of the belief precision an extrinsic precision is
/// treated as zero.
const EXTRINSIC_REL_EPS: f64 = 1e-12;

/// Product of two Gaussian messages (precision-weighted average).
pub fn gaussian_product(m1: C64, v1: f64, m2: C64, v2: f64) -> (C64, f64) {
    let prec = 1.0 / v1 + 1.0 / v2;
    let var = 1.0 / prec;
    (var * (m1 / v1 + m2 / v2), var)
}

/// Divides a belief by one of its incoming messages.
///
/// When the remaining precision is not positive the result is replaced by a
/// flat message: the belief mean with variance `cap`.
pub fn gaussian_quotient(
    belief: C64,
    belief_var: f64,
    incoming: C64,
    incoming_var: f64,
    cap: f64,
) -> (C64, f64) {
    let bp = 1.0 / belief_var;
    let ip = 1.0 / incoming_var;
    let ext = bp - ip;
    if !(ext > EXTRINSIC_REL_EPS * bp) {
        return (belief, cap);
    }
    let var = (1.0 / ext).min(cap);
    (var * (belief * bp - incoming * ip), var)
}

/// Posterior of a message under a `CN(0, ρ)` prior; `ρ = +∞` is flat.
pub fn apply_prior(mean: C64, var: f64, rho: f64) -> (C64, f64) {
    if rho.is_infinite() {
        return (mean, var);
    }
    let w = rho / (rho + var);
    (mean * w, var * w)
}

#[inline]
fn clamp_var(v: f64, cfg: &EstimatorConfig) -> f64 {
    if v.is_nan() {
        return cfg.variance_cap;
    }
    v.clamp(cfg.variance_floor, cfg.variance_cap)
}

/// `β̂ = L·J / Σ_j (‖r_j − ẑ_j‖² + 1ᵀν_{z_j})`, capped at `cfg.beta_cap`.
pub fn update_noise_precision(state: &mut EstimatorState, r: &CMat, cfg: &EstimatorConfig) -> f64 {
    let count = (r.nrows() * r.ncols()) as f64;
    let residual: f64 = r
        .iter()
        .zip(state.z_hat.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    let spread: f64 = state.z_var.iter().sum();
    let denom = residual + spread;
    let beta = if denom > 0.0 {
        count / denom
    } else {
        f64::INFINITY
    };
    state.beta_hat = beta.min(cfg.beta_cap);
    state.beta_hat
}

/// Unitary AMP forward recursion producing the messages `(q_j, ν_{q_j})`
/// on every column of `S`.
pub fn uamp_forward_step(
    state: &mut EstimatorState,
    model: &TransformedModel,
    cfg: &EstimatorConfig,
) {
    let rows = state.shape.rows;
    let j = state.shape.j();
    let noise_var = 1.0 / state.beta_hat;

    for col in 0..j {
        let vs = state.s_var[col];
        for l in 0..rows {
            state.p_var[(l, col)] = clamp_var(model.psi_power[l] * vs, cfg);
        }
    }

    let mut p = &model.psi * &state.s_hat;
    for (pv, (v, mu)) in p.iter_mut().zip(state.p_var.iter().zip(state.mu.iter())) {
        *pv -= mu * *v;
    }
    state.p = p;

    for idx in 0..rows * j {
        let v_mu = 1.0 / (state.p_var[idx] + noise_var);
        state.mu_var[idx] = clamp_var(v_mu, cfg);
        state.mu[idx] = (model.r[idx] - state.p[idx]) * v_mu;
    }

    // |Ψᴴ|²·ν_μ
    let precision = model.psi_abs2.tr_mul(&state.mu_var);
    let back = model.psi.ad_mul(&state.mu);
    for idx in 0..state.q.len() {
        let v_q = clamp_var(1.0 / precision[idx], cfg);
        state.q_var[idx] = v_q;
        state.q[idx] = state.s_hat[idx] + back[idx] * v_q;
    }
}

/// Per-`(k,n)` variance `ν_{q̃_{k,n}}`: the mean of `ν_q` over the `M`
/// entries of block `k` in row `n` of `Q̃ = Qᵀ`.
pub fn unpack_to_columns(state: &mut EstimatorState, cfg: &EstimatorConfig) {
    let sh = state.shape;
    for n in 0..sh.n {
        for k in 0..sh.k {
            let sum: f64 = (0..sh.m).map(|m| state.q_var[(n, sh.kr(k, m))]).sum();
            state.q_block_var[(n, k)] = clamp_var(sum / sh.m as f64, cfg);
        }
    }
}

/// Messages from the rank-one factors to `g_{m,n}`, their combination over
/// `k`, and the resulting belief of `g_{m,n}`.
pub fn update_g_beliefs(state: &mut EstimatorState, cfg: &EstimatorConfig) {
    let sh = state.shape;
    for n in 0..sh.n {
        for m in 0..sh.m {
            let mut prec = 0.0;
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..sh.k {
                let j = sh.kr(k, m);
                let h = state.h_mean[(n, k)];
                let denom = (h.norm_sqr() + state.h_var[(n, k)]).max(cfg.variance_floor);
                let var = clamp_var(state.q_block_var[(n, k)] / denom, cfg);
                let mean = state.q[(n, j)] * h.conj() / denom;
                state.fwd_g_branch[(n, j)] = mean;
                state.fwd_g_branch_var[(n, j)] = var;
                prec += 1.0 / var;
                acc += mean / var;
            }
            let var = clamp_var(1.0 / prec, cfg);
            let mean = acc * (1.0 / prec);
            state.fwd_g[(m, n)] = mean;
            state.fwd_g_var[(m, n)] = var;
            let (bm, bv) = apply_prior(mean, var, cfg.prior_var_g);
            state.g_mean[(m, n)] = bm;
            state.g_var[(m, n)] = clamp_var(bv, cfg);
        }
    }
}

/// Mirror of [`update_g_beliefs`] for `h_{k,n}`, using the `g` beliefs of
/// the current iteration.
pub fn update_h_beliefs(state: &mut EstimatorState, cfg: &EstimatorConfig) {
    let sh = state.shape;
    for n in 0..sh.n {
        for k in 0..sh.k {
            let mut prec = 0.0;
            let mut acc = C64::new(0.0, 0.0);
            let block_var = state.q_block_var[(n, k)];
            for m in 0..sh.m {
                let j = sh.kr(k, m);
                let g = state.g_mean[(m, n)];
                let denom = (g.norm_sqr() + state.g_var[(m, n)]).max(cfg.variance_floor);
                let var = clamp_var(block_var / denom, cfg);
                let mean = state.q[(n, j)] * g.conj() / denom;
                state.fwd_h_branch[(n, j)] = mean;
                state.fwd_h_branch_var[(n, j)] = var;
                prec += 1.0 / var;
                acc += mean / var;
            }
            let var = clamp_var(1.0 / prec, cfg);
            let mean = acc * (1.0 / prec);
            state.fwd_h[(n, k)] = mean;
            state.fwd_h_var[(n, k)] = var;
            let (bm, bv) = apply_prior(mean, var, cfg.prior_var_h);
            state.h_mean[(n, k)] = bm;
            state.h_var[(n, k)] = clamp_var(bv, cfg);
        }
    }
}

/// Extrinsic messages from `h_{k,n}` and `g_{m,n}` back to each factor
/// `f_{s̃_{m,k,n}}`: belief divided by the message that factor sent.
pub fn backward_channel_messages(state: &mut EstimatorState, cfg: &EstimatorConfig) {
    let sh = state.shape;
    for n in 0..sh.n {
        for k in 0..sh.k {
            for m in 0..sh.m {
                let j = sh.kr(k, m);
                let (hm, hv) = gaussian_quotient(
                    state.h_mean[(n, k)],
                    state.h_var[(n, k)],
                    state.fwd_h_branch[(n, j)],
                    state.fwd_h_branch_var[(n, j)],
                    cfg.variance_cap,
                );
                state.bwd_h[(n, j)] = hm;
                state.bwd_h_var[(n, j)] = clamp_var(hv, cfg);
                let (gm, gv) = gaussian_quotient(
                    state.g_mean[(m, n)],
                    state.g_var[(m, n)],
                    state.fwd_g_branch[(n, j)],
                    state.fwd_g_branch_var[(n, j)],
                    cfg.variance_cap,
                );
                state.bwd_g[(n, j)] = gm;
                state.bwd_g_var[(n, j)] = clamp_var(gv, cfg);
            }
        }
    }
}

/// Message from each rank-one factor to `s̃_{m,k,n}`, combined with the
/// forward message `(q̃, ν_{q̃_{k,n}})` into the posterior of `S`.
pub fn backward_s_combine(state: &mut EstimatorState, cfg: &EstimatorConfig) {
    let sh = state.shape;
    let j_len = sh.j();
    for idx in 0..sh.n * j_len {
        let (h, vh) = (state.bwd_h[idx], state.bwd_h_var[idx]);
        let (g, vg) = (state.bwd_g[idx], state.bwd_g_var[idx]);
        state.bwd_s[idx] = h * g;
        let v = h.norm_sqr() * vg + vh * g.norm_sqr() + vh * vg;
        // var product may exceed the cap; it only enters as a precision
        state.bwd_s_var[idx] = v.max(cfg.variance_floor);
    }

    let damping = cfg.damping;
    let mut col_var = vec![0.0; j_len];
    for n in 0..sh.n {
        for k in 0..sh.k {
            let vq = state.q_block_var[(n, k)];
            for m in 0..sh.m {
                let j = sh.kr(k, m);
                let (mean, var) = gaussian_product(
                    state.q[(n, j)],
                    vq,
                    state.bwd_s[(n, j)],
                    state.bwd_s_var[(n, j)],
                );
                let var = clamp_var(var, cfg);
                state.s_tilde_var[(n, j)] = var;
                col_var[j] += var;
                let old = state.s_hat[(n, j)];
                state.s_hat[(n, j)] = if damping < 1.0 {
                    mean * damping + old * (1.0 - damping)
                } else {
                    mean
                };
            }
        }
    }
    for (j, total) in col_var.into_iter().enumerate() {
        let fresh = total / sh.n as f64;
        let v = if damping < 1.0 {
            damping * fresh + (1.0 - damping) * state.s_var[j]
        } else {
            fresh
        };
        state.s_var[j] = clamp_var(v, cfg);
    }
}

/// Belief of `z_j = Ψ s_j` from the prior message `(p_j, ν_{p_j})` and the
/// likelihood `CN(r_j, β̂⁻¹)`.
pub fn update_z_beliefs(state: &mut EstimatorState, r: &CMat, cfg: &EstimatorConfig) {
    let beta = state.beta_hat;
    for idx in 0..state.z_hat.len() {
        let vp = state.p_var[idx];
        let prec = 1.0 / vp + beta;
        let vz = 1.0 / prec;
        state.z_hat[idx] = (state.p[idx] / vp + r[idx] * beta) * vz;
        state.z_var[idx] = clamp_var(vz, cfg);
    }
}

/// `Ĥ` (`N×K`) and `Ĝ` (`M×N`) from the current beliefs.
pub fn assemble(state: &EstimatorState) -> (CMat, CMat) {
    (state.h_mean.clone(), state.g_mean.clone())
}
