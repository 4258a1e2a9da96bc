use crate::error::Result;
use crate::linalg::CMat;
use crate::model::ChannelPair;

/// Output of any of the channel estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    /// `Ĥ`, `N×K`.
    pub h: CMat,
    /// `Ĝ`, `M×N`.
    pub g: CMat,
    /// Estimated noise precision.
    pub beta_hat: f64,
    pub iterations: usize,
    pub converged: bool,
    /// First iteration at which both NMSEs against the supplied ground truth
    /// fell below the tolerance. Reporting only; never affects the result.
    pub oracle_stop: Option<usize>,
    /// Non-fatal events such as forced ridge regularisation.
    pub diagnostics: Vec<String>,
}

impl ChannelEstimate {
    pub fn channels(&self) -> Result<ChannelPair> {
        ChannelPair::new(self.h.clone(), self.g.clone())
    }
}
