use super::RisPhaseMatrix;
use crate::error::{Error, Result};
use crate::linalg::{abs2, CMat, RMat};

/// The observation model after rotation by the left singular vectors of `Φ`:
/// `R = Ψ S + W̄` with `R = UᴴY`, `Ψ = UᴴΦ = ΛV`.
#[derive(Debug, Clone)]
pub struct TransformedModel {
    /// `Ψ`, `r×N` with `r = min(L, N)`.
    pub psi: CMat,
    /// `U`, `L×r` with orthonormal columns.
    pub u: CMat,
    /// `R`, `r×J`.
    pub r: CMat,
    /// Row energies `ψ = |Ψ|²·1_N`.
    pub psi_power: Vec<f64>,
    /// `|Ψ|²`, cached for the variance recursions.
    pub psi_abs2: RMat,
    /// True noise precision, when the data was simulated.
    pub noise_precision: Option<f64>,
}

impl TransformedModel {
    /// Number of rows kept after the economic decomposition.
    pub fn rows(&self) -> usize {
        self.psi.nrows()
    }

    pub fn with_noise_precision(mut self, beta: f64) -> Self {
        self.noise_precision = Some(beta);
        self
    }
}

/// Economic SVD `Φ = UΛV`, then `Ψ = UᴴΦ` and `R = UᴴY`.
///
/// For `L > N` the thin factor keeps `N` columns; the discarded part of `Y`
/// lies outside the range of `Φ` and carries noise only.
pub fn unitary_transform(phase: &RisPhaseMatrix, y: &CMat) -> Result<TransformedModel> {
    let phi = phase.matrix();
    if y.nrows() != phi.nrows() {
        return Err(Error::Shape {
            what: "observations Y (L×J)",
            expected: (phi.nrows(), y.ncols()),
            actual: y.shape(),
        });
    }
    let svd = phi
        .clone()
        .try_svd(true, false, f64::EPSILON, 0)
        .ok_or(Error::SvdFailed)?;
    let mut u = svd.u.ok_or(Error::SvdFailed)?;
    // Fix the per-column phase freedom so the largest entry of each singular
    // vector is real and positive (identity input then maps to U = I).
    for mut col in u.column_iter_mut() {
        let pivot = col
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or_default();
        if pivot.norm() > 0.0 {
            let rot = pivot.conj() / pivot.norm();
            col *= rot;
        }
    }
    let uh = u.adjoint();
    let psi = &uh * phi;
    let r = &uh * y;
    let psi_abs2 = abs2(&psi);
    let psi_power = psi_abs2.row_iter().map(|row| row.sum()).collect();
    Ok(TransformedModel {
        psi,
        u,
        r,
        psi_power,
        psi_abs2,
        noise_precision: None,
    })
}
