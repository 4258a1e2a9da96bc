use super::{EstimatorConfig, HInit};
use crate::dims::SystemDims;
use crate::error::{Error, Result};
use crate::linalg::{CMat, RMat};
use crate::model::TransformedModel;
use crate::rng::{complex_normal_matrix, seeded};

/// Sizes of the message arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateShape {
    pub m: usize,
    pub k: usize,
    pub n: usize,
    /// Rows of `R` (and `Ψ`).
    pub rows: usize,
}

impl StateShape {
    pub fn j(&self) -> usize {
        self.k * self.m
    }

    #[inline]
    pub fn kr(&self, k: usize, m: usize) -> usize {
        k * self.m + m
    }
}

/// Every message and belief of one estimator run.
///
/// Per-`j` quantities are stored as columns (`rows×J` or `N×J`), the
/// per-`(m,k,n)` branch messages as `N×J` with `j = k·M + m`, beliefs of `h`
/// as `N×K` (the layout of `H`) and beliefs of `g` as `M×N` (the layout of
/// `G`). Since `S̃ = Sᵀ`, row `n` of an `N×J` array is the length-`J` vector
/// attached to RIS element `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState {
    pub shape: StateShape,
    pub beta_hat: f64,

    /// `Ŝ = [ŝ_1 … ŝ_J]`, `N×J`.
    pub s_hat: CMat,
    /// Common variance `ν_{s_j}` of each column.
    pub s_var: Vec<f64>,

    pub p: CMat,
    pub p_var: RMat,
    pub mu: CMat,
    pub mu_var: RMat,
    pub q: CMat,
    pub q_var: RMat,
    /// Block-averaged `ν_{q̃_{k,n}}`, `N×K`.
    pub q_block_var: RMat,

    /// Forward branch messages `→g_{m,k,n}`, `N×J`.
    pub fwd_g_branch: CMat,
    pub fwd_g_branch_var: RMat,
    /// Combined `→g_{m,n}`, `M×N`.
    pub fwd_g: CMat,
    pub fwd_g_var: RMat,
    pub g_mean: CMat,
    pub g_var: RMat,

    pub fwd_h_branch: CMat,
    pub fwd_h_branch_var: RMat,
    /// Combined `→h_{k,n}`, `N×K`.
    pub fwd_h: CMat,
    pub fwd_h_var: RMat,
    pub h_mean: CMat,
    pub h_var: RMat,

    /// Extrinsic messages towards the rank-one factors, `N×J`.
    pub bwd_h: CMat,
    pub bwd_h_var: RMat,
    pub bwd_g: CMat,
    pub bwd_g_var: RMat,
    pub bwd_s: CMat,
    pub bwd_s_var: RMat,
    /// Entrywise posterior variance of `S̃`, `N×J`.
    pub s_tilde_var: RMat,

    pub z_hat: CMat,
    pub z_var: RMat,

    /// Completed iterations.
    pub iteration: usize,
}

impl EstimatorState {
    /// All-zero messages with unit variances and `β̂ = 1`.
    pub fn blank(shape: StateShape) -> Self {
        let StateShape { m, k, n, rows } = shape;
        let j = shape.j();
        let cz = |r, c| CMat::zeros(r, c);
        let ones = |r, c| RMat::from_element(r, c, 1.0);
        Self {
            shape,
            beta_hat: 1.0,
            s_hat: cz(n, j),
            s_var: vec![1.0; j],
            p: cz(rows, j),
            p_var: ones(rows, j),
            mu: cz(rows, j),
            mu_var: ones(rows, j),
            q: cz(n, j),
            q_var: ones(n, j),
            q_block_var: ones(n, k),
            fwd_g_branch: cz(n, j),
            fwd_g_branch_var: ones(n, j),
            fwd_g: cz(m, n),
            fwd_g_var: ones(m, n),
            g_mean: cz(m, n),
            g_var: ones(m, n),
            fwd_h_branch: cz(n, j),
            fwd_h_branch_var: ones(n, j),
            fwd_h: cz(n, k),
            fwd_h_var: ones(n, k),
            h_mean: cz(n, k),
            h_var: ones(n, k),
            bwd_h: cz(n, j),
            bwd_h_var: ones(n, j),
            bwd_g: cz(n, j),
            bwd_g_var: ones(n, j),
            bwd_s: cz(n, j),
            bwd_s_var: ones(n, j),
            s_tilde_var: ones(n, j),
            z_hat: cz(rows, j),
            z_var: RMat::zeros(rows, j),
            iteration: 0,
        }
    }

    /// Smallest variance held anywhere in the state.
    pub fn min_variance(&self) -> f64 {
        let mats = [
            &self.p_var,
            &self.mu_var,
            &self.q_var,
            &self.q_block_var,
            &self.fwd_g_branch_var,
            &self.fwd_g_var,
            &self.g_var,
            &self.fwd_h_branch_var,
            &self.fwd_h_var,
            &self.h_var,
            &self.bwd_h_var,
            &self.bwd_g_var,
            &self.bwd_s_var,
            &self.s_tilde_var,
        ];
        let m = mats
            .iter()
            .flat_map(|m| m.iter())
            .copied()
            .fold(f64::INFINITY, f64::min);
        self.s_var.iter().copied().fold(m, f64::min)
    }
}

/// Starting point of the iteration: `ν_h = 1`, `ŝ_j = 0`, `ν_{s_j} = 1`,
/// `μ_j = 0`, `β̂ = 1`, and `ĥ` drawn according to `cfg.h_init`.
///
/// `ẑ` and `ν_z` start at zero; they are only read by the noise-precision
/// update, which is skipped on the first iteration.
pub fn initialize_state(
    model: &TransformedModel,
    dims: &SystemDims,
    cfg: &EstimatorConfig,
    seed: u64,
) -> Result<EstimatorState> {
    cfg.validate()?;
    if model.psi.ncols() != dims.n() {
        return Err(Error::Shape {
            what: "Ψ",
            expected: (model.rows(), dims.n()),
            actual: model.psi.shape(),
        });
    }
    if model.r.shape() != (model.rows(), dims.j()) {
        return Err(Error::Shape {
            what: "R",
            expected: (model.rows(), dims.j()),
            actual: model.r.shape(),
        });
    }
    let shape = StateShape {
        m: dims.m(),
        k: dims.k(),
        n: dims.n(),
        rows: model.rows(),
    };
    let mut state = EstimatorState::blank(shape);
    state.h_mean = match &cfg.h_init {
        HInit::Gaussian => complex_normal_matrix(&mut seeded(seed), dims.n(), dims.k(), 1.0),
        HInit::Ones => CMat::from_element(dims.n(), dims.k(), crate::linalg::ONE),
        HInit::Given(h) => {
            if h.shape() != (dims.n(), dims.k()) {
                return Err(Error::Shape {
                    what: "initial Ĥ",
                    expected: (dims.n(), dims.k()),
                    actual: h.shape(),
                });
            }
            h.clone()
        }
    };
    Ok(state)
}
