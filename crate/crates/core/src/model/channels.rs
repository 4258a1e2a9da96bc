use crate::dims::SystemDims;
use crate::error::{Error, Result};
use crate::linalg::{all_finite, CMat};
use crate::rng::{complex_normal_matrix, seeded};

/// Channel matrices of one link: `H` (N×K, RIS → users) and `G` (M×N, BS ← RIS).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPair {
    h: CMat,
    g: CMat,
}

impl ChannelPair {
    pub fn new(h: CMat, g: CMat) -> Result<Self> {
        if h.ncols() == 0 || h.nrows() == 0 || g.nrows() == 0 {
            return Err(Error::InvalidDims("empty channel matrix".into()));
        }
        if g.ncols() != h.nrows() {
            return Err(Error::Shape {
                what: "G (expected M×N with N = rows of H)",
                expected: (g.nrows(), h.nrows()),
                actual: g.shape(),
            });
        }
        if !all_finite(&h) || !all_finite(&g) {
            return Err(Error::InvalidConfig(
                "channel entries must be finite".into(),
            ));
        }
        Ok(Self { h, g })
    }

    pub fn h(&self) -> &CMat {
        &self.h
    }

    pub fn g(&self) -> &CMat {
        &self.g
    }

    pub fn into_parts(self) -> (CMat, CMat) {
        (self.h, self.g)
    }

    /// Number of RIS elements.
    pub fn n(&self) -> usize {
        self.h.nrows()
    }

    pub fn k(&self) -> usize {
        self.h.ncols()
    }

    pub fn m(&self) -> usize {
        self.g.nrows()
    }

    pub(crate) fn check_dims(&self, dims: &SystemDims) -> Result<()> {
        if self.h.shape() != (dims.n(), dims.k()) {
            return Err(Error::Shape {
                what: "H",
                expected: (dims.n(), dims.k()),
                actual: self.h.shape(),
            });
        }
        if self.g.shape() != (dims.m(), dims.n()) {
            return Err(Error::Shape {
                what: "G",
                expected: (dims.m(), dims.n()),
                actual: self.g.shape(),
            });
        }
        Ok(())
    }
}

/// Draws `H` and `G` with i.i.d. `CN(0, 1)` entries.
pub fn generate_channels(dims: &SystemDims, seed: u64) -> ChannelPair {
    let mut rng = seeded(seed);
    let h = complex_normal_matrix(&mut rng, dims.n(), dims.k(), 1.0);
    let g = complex_normal_matrix(&mut rng, dims.m(), dims.n(), 1.0);
    ChannelPair { h, g }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_given_seed() {
        let d = SystemDims::new(2, 2, 4, 1).unwrap();
        let a = generate_channels(&d, 7);
        let b = generate_channels(&d, 7);
        assert_eq!(a, b);
        assert_ne!(a, generate_channels(&d, 8));
    }

    #[test]
    fn unit_power_entries() {
        let d = SystemDims::new(64, 64, 64, 1).unwrap();
        let c = generate_channels(&d, 1);
        let mean_h = c.h().iter().map(|z| z.norm_sqr()).sum::<f64>() / 4096.0;
        let mean_g = c.g().iter().map(|z| z.norm_sqr()).sum::<f64>() / 4096.0;
        assert!((mean_h - 1.0).abs() < 0.05, "{mean_h}");
        assert!((mean_g - 1.0).abs() < 0.05, "{mean_g}");
        // real and imaginary parts each carry half the power
        let re = c.h().iter().map(|z| z.re * z.re).sum::<f64>() / 4096.0;
        assert!((re - 0.5).abs() < 0.05, "{re}");
    }

    #[test]
    fn minimal_shape() {
        let d = SystemDims::new(1, 1, 1, 1).unwrap();
        let c = generate_channels(&d, 3);
        assert_eq!(c.h().shape(), (1, 1));
        assert_eq!(c.g().shape(), (1, 1));
    }

    #[test]
    fn rejects_mismatched_shapes() {
        assert!(ChannelPair::new(CMat::zeros(3, 2), CMat::zeros(2, 4)).is_err());
    }
}
