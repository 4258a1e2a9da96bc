//! Small dense helpers on top of nalgebra.

use nalgebra::DMatrix;
pub use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;
pub type RMat = DMatrix<f64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Entrywise `|a|²`.
pub fn abs2(a: &CMat) -> RMat {
    a.map(|z| z.norm_sqr())
}

pub fn frob2(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// `‖a − b‖_F / ‖b‖_F`, or `‖a‖_F` when `b` is zero.
pub fn rel_frob_diff(a: &CMat, b: &CMat) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    let base = frob2(b);
    if base > 0.0 {
        (diff / base).sqrt()
    } else {
        diff.sqrt()
    }
}

pub fn to_complex(a: &RMat) -> CMat {
    a.map(|x| C64::new(x, 0.0))
}

pub fn all_finite(a: &CMat) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}
