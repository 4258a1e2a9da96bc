//! Error metrics that ignore the per-element scaling ambiguity
//! `(c·h_n, g_n/c)` of the bilinear model.

use crate::error::{Error, Result};
use crate::linalg::{frob2, CMat, C64};
use crate::model::ChannelPair;

fn optimal_scale<'a>(
    est: impl Iterator<Item = &'a C64> + Clone,
    truth: impl Iterator<Item = &'a C64>,
) -> C64 {
    let energy: f64 = est.clone().map(|z| z.norm_sqr()).sum();
    if energy == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let inner: C64 = est.zip(truth).map(|(e, t)| e.conj() * t).sum();
    inner / energy
}

/// Squared error after fitting one complex scalar per RIS element.
fn column_scaled_error(truth: &CMat, est: &CMat, by_rows: bool) -> f64 {
    let count = if by_rows {
        truth.nrows()
    } else {
        truth.ncols()
    };
    let mut err = 0.0;
    for idx in 0..count {
        let (t, e): (Vec<C64>, Vec<C64>) = if by_rows {
            (
                truth.row(idx).iter().copied().collect(),
                est.row(idx).iter().copied().collect(),
            )
        } else {
            (
                truth.column(idx).iter().copied().collect(),
                est.column(idx).iter().copied().collect(),
            )
        };
        let alpha = optimal_scale(e.iter(), t.iter());
        err += e
            .iter()
            .zip(&t)
            .map(|(e, t)| (alpha * e - t).norm_sqr())
            .sum::<f64>();
    }
    err
}

/// `(NMSE_H, NMSE_G)` with independent optimal complex scalars per column of
/// `Hᵀ` and per column of `G`.
pub fn nmse_with_ambiguity_removal(
    truth: &ChannelPair,
    estimate: &ChannelPair,
) -> Result<(f64, f64)> {
    if truth.h().shape() != estimate.h().shape() {
        return Err(Error::Shape {
            what: "estimated H",
            expected: truth.h().shape(),
            actual: estimate.h().shape(),
        });
    }
    if truth.g().shape() != estimate.g().shape() {
        return Err(Error::Shape {
            what: "estimated G",
            expected: truth.g().shape(),
            actual: estimate.g().shape(),
        });
    }
    let (eh, eg) = (frob2(truth.h()), frob2(truth.g()));
    if eh == 0.0 || eg == 0.0 {
        return Err(Error::ZeroNormTruth);
    }
    // h_n is row n of H, g_n is column n of G
    let nmse_h = column_scaled_error(truth.h(), estimate.h(), true) / eh;
    let nmse_g = column_scaled_error(truth.g(), estimate.g(), false) / eg;
    Ok((nmse_h, nmse_g))
}

/// Plain `‖est − truth‖²_F / ‖truth‖²_F`.
pub fn nmse(truth: &CMat, est: &CMat) -> f64 {
    let diff: f64 = truth
        .iter()
        .zip(est.iter())
        .map(|(t, e)| (t - e).norm_sqr())
        .sum();
    diff / frob2(truth)
}
