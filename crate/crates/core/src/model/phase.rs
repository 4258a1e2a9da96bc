use crate::dims::SystemDims;
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::rng::seeded;
use rand::Rng;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseKind {
    /// First `L` rows of the unnormalised `N`-point DFT matrix.
    PartialDft,
    /// Elements switched on or off with probability 1/2.
    BinaryRandom,
}

impl PhaseKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PhaseKind::PartialDft => "partial_dft",
            PhaseKind::BinaryRandom => "binary",
        }
    }

    /// `E{‖Φ‖_F²}` for an `L×N` matrix of this kind.
    pub fn expected_frob2(&self, l: usize, n: usize) -> f64 {
        let ln = (l * n) as f64;
        match self {
            PhaseKind::PartialDft => ln,
            PhaseKind::BinaryRandom => ln / 2.0,
        }
    }
}

impl std::str::FromStr for PhaseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "partial_dft" | "dft" | "partial-dft" => Ok(PhaseKind::PartialDft),
            "binary" | "binary_random" | "binary-random" => Ok(PhaseKind::BinaryRandom),
            other => Err(Error::InvalidConfig(format!(
                "unknown phase kind `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for PhaseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// RIS training configurations, one row per configuration (`L×N`).
#[derive(Debug, Clone, PartialEq)]
pub struct RisPhaseMatrix {
    phi: CMat,
    kind: PhaseKind,
}

impl RisPhaseMatrix {
    /// Wraps an arbitrary phase matrix. The kind is only used for the SNR
    /// normalisation.
    pub fn from_matrix(phi: CMat, kind: PhaseKind) -> Self {
        Self { phi, kind }
    }

    pub fn matrix(&self) -> &CMat {
        &self.phi
    }

    pub fn kind(&self) -> PhaseKind {
        self.kind
    }

    pub fn l(&self) -> usize {
        self.phi.nrows()
    }

    pub fn n(&self) -> usize {
        self.phi.ncols()
    }

    pub fn partial_dft(l: usize, n: usize) -> Result<Self> {
        if l > n {
            return Err(Error::PartialDftTooTall { l, n });
        }
        let phi = CMat::from_fn(l, n, |row, col| {
            // reduce the exponent mod N so large grids keep full accuracy
            let e = ((row * col) % n) as f64;
            C64::from_polar(1.0, -2.0 * PI * e / n as f64)
        });
        Ok(Self {
            phi,
            kind: PhaseKind::PartialDft,
        })
    }

    pub fn binary_random(l: usize, n: usize, seed: u64) -> Self {
        let mut rng = seeded(seed);
        let mut phi = CMat::zeros(l, n);
        for col in 0..n {
            for row in 0..l {
                if rng.random_bool(0.5) {
                    phi[(row, col)] = C64::new(1.0, 0.0);
                }
            }
        }
        Self {
            phi,
            kind: PhaseKind::BinaryRandom,
        }
    }
}

pub fn generate_phase_matrix(
    dims: &SystemDims,
    kind: PhaseKind,
    seed: u64,
) -> Result<RisPhaseMatrix> {
    match kind {
        PhaseKind::PartialDft => RisPhaseMatrix::partial_dft(dims.l(), dims.n()),
        PhaseKind::BinaryRandom => Ok(RisPhaseMatrix::binary_random(dims.l(), dims.n(), seed)),
    }
}
