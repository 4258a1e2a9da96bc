use super::{build_signal_matrix, ChannelPair, RisPhaseMatrix};
use crate::dims::SystemDims;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::rng::{complex_normal_matrix, seeded};

/// `Y = Φ S + W` with `W` i.i.d. `CN(0, 1/β)`. `β = +∞` gives noiseless data.
///
/// The users' orthogonal training matrix is taken as the identity: it only
/// multiplies white noise by a unitary matrix, so nothing downstream depends
/// on it.
pub fn simulate_observations(
    channels: &ChannelPair,
    phase: &RisPhaseMatrix,
    beta: f64,
    seed: u64,
) -> Result<CMat> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::InvalidNoisePrecision(beta));
    }
    if phase.n() != channels.n() {
        return Err(Error::Shape {
            what: "phase matrix (L×N)",
            expected: (phase.l(), channels.n()),
            actual: phase.matrix().shape(),
        });
    }
    let s = build_signal_matrix(channels);
    let mut y = phase.matrix() * s;
    if beta.is_finite() {
        let mut rng = seeded(seed);
        y += complex_normal_matrix(&mut rng, y.nrows(), y.ncols(), 1.0 / beta);
    }
    Ok(y)
}

/// Noise variance `β⁻¹` for a target SNR, where
/// `SNR = N·E{‖Φ‖_F²} / (L·β⁻¹)`.
pub fn snr_to_noise_variance(phase: &RisPhaseMatrix, snr_db: f64, dims: &SystemDims) -> f64 {
    let (l, n) = (dims.l() as f64, dims.n() as f64);
    let energy = phase.kind().expected_frob2(dims.l(), dims.n());
    n * energy / (l * 10f64.powf(snr_db / 10.0))
}

pub fn noise_precision_for_snr(phase: &RisPhaseMatrix, snr_db: f64, dims: &SystemDims) -> f64 {
    1.0 / snr_to_noise_variance(phase, snr_db, dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_channels, PhaseKind};

    #[test]
    fn noiseless_is_exact() {
        let d = SystemDims::new(3, 2, 4, 3).unwrap();
        let ch = generate_channels(&d, 1);
        let p = RisPhaseMatrix::partial_dft(3, 4).unwrap();
        let y = simulate_observations(&ch, &p, f64::INFINITY, 0).unwrap();
        assert_eq!(y, p.matrix() * build_signal_matrix(&ch));
    }

    #[test]
    fn noise_only_variance() {
        // L·J = 16 · 256 = 4096 noise samples
        let d = SystemDims::new(16, 16, 4, 16).unwrap();
        let ch = ChannelPair::new(CMat::zeros(4, 16), CMat::zeros(16, 4)).unwrap();
        let p = RisPhaseMatrix::binary_random(16, 4, 3);
        let y = simulate_observations(&ch, &p, 1.0, 42).unwrap();
        assert_eq!(y.nrows() * y.ncols(), 4096);
        let _ = d;
        let power = y.iter().map(|z| z.norm_sqr()).sum::<f64>() / 4096.0;
        assert!((power - 1.0).abs() < 0.1, "{power}");
    }

    #[test]
    fn deterministic_and_validated() {
        let d = SystemDims::new(2, 2, 3, 2).unwrap();
        let ch = generate_channels(&d, 1);
        let p = RisPhaseMatrix::partial_dft(2, 3).unwrap();
        let a = simulate_observations(&ch, &p, 10.0, 5).unwrap();
        let b = simulate_observations(&ch, &p, 10.0, 5).unwrap();
        assert_eq!(a, b);
        for bad in [0.0, -1.0, f64::NAN] {
            assert!(simulate_observations(&ch, &p, bad, 5).is_err());
        }
    }

    #[test]
    fn snr_mapping() {
        let d = SystemDims::new(4, 4, 64, 64).unwrap();
        let p = RisPhaseMatrix::partial_dft(64, 64).unwrap();
        assert!((snr_to_noise_variance(&p, 0.0, &d) - 64.0 * 64.0).abs() < 1e-9);
        assert!((snr_to_noise_variance(&p, 20.0, &d) - 40.96).abs() < 1e-9);
        assert!(snr_to_noise_variance(&p, 400.0, &d) < 1e-30);

        let d = SystemDims::new(1, 1, 8, 4).unwrap();
        let p = RisPhaseMatrix::partial_dft(4, 8).unwrap();
        assert!((snr_to_noise_variance(&p, 0.0, &d) - 64.0).abs() < 1e-12);
        let b = RisPhaseMatrix::binary_random(4, 8, 0);
        assert_eq!(b.kind(), PhaseKind::BinaryRandom);
        assert!((snr_to_noise_variance(&b, 0.0, &d) - 32.0).abs() < 1e-12);
    }
}
