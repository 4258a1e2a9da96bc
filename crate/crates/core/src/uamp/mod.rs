//! Message-passing channel estimator built around unitary AMP.
//!
//! One iteration runs, in order: the noise-precision update, the UAMP
//! forward recursion on the columns of `S`, the unpacking of `Q̃ = Qᵀ` into
//! per-element blocks, the belief updates of `g` and then `h`, the extrinsic
//! messages back to the rank-one factors, their combination into the
//! posterior of `S`, and finally the belief of `Z = ΨS`.
//!
//! The cost per iteration is dominated by the products with `Ψ` and `Ψᴴ`,
//! i.e. `O(N·L·K·M)`.

mod messages;
mod state;

pub use messages::{
    apply_prior, assemble, backward_channel_messages, backward_s_combine, gaussian_product,
    gaussian_quotient, uamp_forward_step, unpack_to_columns, update_g_beliefs, update_h_beliefs,
    update_noise_precision, update_z_beliefs,
};
pub use state::{initialize_state, EstimatorState, StateShape};

use crate::dims::SystemDims;
use crate::error::{Error, Result};
use crate::estimate::ChannelEstimate;
use crate::linalg::{all_finite, rel_frob_diff, CMat};
use crate::metrics::nmse_with_ambiguity_removal;
use crate::model::{ChannelPair, TransformedModel};

/// How `ĥ` is seeded before the first iteration.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum HInit {
    /// i.i.d. `CN(0, 1)` draws from the run seed.
    #[default]
    Gaussian,
    /// All ones. Symmetric; tends to stall on multi-user problems.
    Ones,
    /// Caller-provided `N×K` matrix.
    Given(CMat),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    /// Stop once the relative change of both `Ĥ` and `Ĝ` is at most this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Prior variance of `h_{k,n}`; `+∞` is non-informative.
    pub prior_var_h: f64,
    pub prior_var_g: f64,
    /// Weight of the fresh `(ŝ, ν_s)` update, in `(0, 1]`.
    pub damping: f64,
    pub variance_floor: f64,
    /// Variance given to flat (non-informative) extrinsic messages.
    pub variance_cap: f64,
    pub beta_cap: f64,
    pub h_init: HInit,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-3,
            max_iterations: 30,
            prior_var_h: f64::INFINITY,
            prior_var_g: f64::INFINITY,
            damping: 1.0,
            variance_floor: 1e-12,
            variance_cap: 1e12,
            beta_cap: 1e12,
            h_init: HInit::Gaussian,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.tolerance > 0.0) {
            return bad("tolerance must be > 0");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be >= 1");
        }
        if !(self.prior_var_h > 0.0) || !(self.prior_var_g > 0.0) {
            return bad("prior variances must be > 0 or +inf");
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad("damping must lie in (0, 1]");
        }
        if !(self.variance_floor > 0.0) || !(self.variance_cap > self.variance_floor) {
            return bad("need 0 < variance_floor < variance_cap");
        }
        if !(self.beta_cap > 0.0) {
            return bad("beta_cap must be > 0");
        }
        Ok(())
    }
}

/// Relative change of the channel estimates over one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationReport {
    pub iteration: usize,
    pub change_h: f64,
    pub change_g: f64,
    pub beta_hat: f64,
}

/// Step-by-step driver; [`run_estimator`] wraps it for the common case.
#[derive(Debug, Clone)]
pub struct UampEstimator<'a> {
    model: &'a TransformedModel,
    cfg: EstimatorConfig,
    state: EstimatorState,
    last: Option<(CMat, CMat)>,
    converged: bool,
}

impl<'a> UampEstimator<'a> {
    pub fn new(
        model: &'a TransformedModel,
        dims: &SystemDims,
        cfg: EstimatorConfig,
        seed: u64,
    ) -> Result<Self> {
        let state = initialize_state(model, dims, &cfg, seed)?;
        Ok(Self {
            model,
            cfg,
            state,
            last: None,
            converged: false,
        })
    }

    pub fn state(&self) -> &EstimatorState {
        &self.state
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.cfg
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Runs one full iteration.
    pub fn step(&mut self) -> Result<IterationReport> {
        let cfg = &self.cfg;
        let st = &mut self.state;
        let iteration = st.iteration + 1;
        // ẑ, ν_z only exist after one pass; keep β̂ = 1 until then
        if iteration > 1 {
            update_noise_precision(st, &self.model.r, cfg);
        }
        uamp_forward_step(st, self.model, cfg);
        unpack_to_columns(st, cfg);
        update_g_beliefs(st, cfg);
        update_h_beliefs(st, cfg);
        backward_channel_messages(st, cfg);
        backward_s_combine(st, cfg);
        update_z_beliefs(st, &self.model.r, cfg);
        st.iteration = iteration;

        let check = |ok: bool, quantity| {
            if ok {
                Ok(())
            } else {
                Err(Error::NonFinite {
                    iteration,
                    quantity,
                })
            }
        };
        check(
            st.beta_hat.is_finite() && st.beta_hat > 0.0,
            "noise precision",
        )?;
        check(all_finite(&st.s_hat), "S estimate")?;
        check(all_finite(&st.z_hat), "Z estimate")?;
        check(all_finite(&st.h_mean), "H estimate")?;
        check(all_finite(&st.g_mean), "G estimate")?;

        let (h, g) = assemble(st);
        let (change_h, change_g) = match &self.last {
            Some((ph, pg)) => (rel_frob_diff(&h, ph), rel_frob_diff(&g, pg)),
            None => (f64::INFINITY, f64::INFINITY),
        };
        self.converged = change_h <= cfg.tolerance && change_g <= cfg.tolerance;
        self.last = Some((h, g));
        Ok(IterationReport {
            iteration,
            change_h,
            change_g,
            beta_hat: st.beta_hat,
        })
    }

    pub fn estimate(&self) -> ChannelEstimate {
        let (h, g) = assemble(&self.state);
        ChannelEstimate {
            h,
            g,
            beta_hat: self.state.beta_hat,
            iterations: self.state.iteration,
            converged: self.converged,
            oracle_stop: None,
            diagnostics: Vec::new(),
        }
    }

    /// Iterates until convergence or the iteration cap. With `truth`, the
    /// first iteration at which both ambiguity-free NMSEs drop below the
    /// tolerance is recorded in [`ChannelEstimate::oracle_stop`].
    pub fn run(mut self, truth: Option<&ChannelPair>) -> Result<ChannelEstimate> {
        let mut oracle_stop = None;
        while self.state.iteration < self.cfg.max_iterations {
            self.step()?;
            if let (Some(t), None) = (truth, oracle_stop) {
                let (h, g) = assemble(&self.state);
                if let Ok(est) = ChannelPair::new(h, g) {
                    if let Ok((eh, eg)) = nmse_with_ambiguity_removal(t, &est) {
                        if eh < self.cfg.tolerance && eg < self.cfg.tolerance {
                            oracle_stop = Some(self.state.iteration);
                        }
                    }
                }
            }
            if self.converged {
                break;
            }
        }
        let mut out = self.estimate();
        out.oracle_stop = oracle_stop;
        Ok(out)
    }
}

/// Runs the estimator on a transformed model.
pub fn run_estimator(
    model: &TransformedModel,
    dims: &SystemDims,
    cfg: &EstimatorConfig,
    seed: u64,
    truth: Option<&ChannelPair>,
) -> Result<ChannelEstimate> {
    if dims.l().min(dims.n()) != model.rows() {
        return Err(Error::Shape {
            what: "transformed model rows",
            expected: (dims.l().min(dims.n()), dims.j()),
            actual: model.r.shape(),
        });
    }
    if let Some(t) = truth {
        t.check_dims(dims)?;
    }
    UampEstimator::new(model, dims, cfg.clone(), seed)?.run(truth)
}
