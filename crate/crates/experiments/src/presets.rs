//! Built-in configurations of the published simulation figures.

use crate::config::{BaselineSettings, EstimatorKind, ExperimentConfig, UampSettings};
use crate::error::{ExperimentError, Result};
use ris_uamp::model::PhaseKind;

pub const FIGURES: [&str; 6] = ["fig4", "fig5", "fig6", "fig7", "fig8", "fig9"];

/// Trials per grid point before `--scale`.
pub const DEFAULT_TRIALS: usize = 100;

fn snr_sweep() -> Vec<f64> {
    (0..=6).map(|i| 5.0 * i as f64).collect()
}

fn base(m: usize, k: usize, n: Vec<usize>, l: Vec<usize>, snr_db: Vec<f64>) -> ExperimentConfig {
    ExperimentConfig {
        m: vec![m],
        k: vec![k],
        n,
        l,
        snr_db,
        phase_kinds: vec![PhaseKind::PartialDft, PhaseKind::BinaryRandom],
        estimators: vec![EstimatorKind::Uamp, EstimatorKind::Als],
        trials: DEFAULT_TRIALS,
        seed: 2022,
        timing: true,
        output: None,
        uamp: UampSettings::default(),
        als: BaselineSettings::default(),
        ls_rank1: BaselineSettings::default(),
    }
}

/// Configuration of figure `name`, with trial counts divided by `scale`
/// (at least one trial per point).
pub fn figure(name: &str, scale: usize) -> Result<ExperimentConfig> {
    if scale == 0 {
        return Err(ExperimentError::Config("--scale must be at least 1".into()));
    }
    let mut cfg = match name {
        // NMSE of H and G versus SNR, L = N = K = M = 64
        "fig4" => base(64, 64, vec![64], vec![64], snr_sweep()),
        // versus SNR for several L, N = K = M = 64
        "fig5" => base(64, 64, vec![64], vec![16, 32, 64], snr_sweep()),
        // versus L at 20 dB, N = K = M = 64
        "fig6" => base(
            64,
            64,
            vec![64],
            (1..=8).map(|i| 8 * i).collect(),
            vec![20.0],
        ),
        // versus SNR for several N, L = K = M = 32
        "fig7" => base(32, 32, vec![32, 64, 128], vec![32], snr_sweep()),
        // estimators against the CRLB, L = K = M = N = 16
        "fig8" => {
            let mut c = base(16, 16, vec![16], vec![16], snr_sweep());
            c.estimators.push(EstimatorKind::Crlb);
            c
        }
        // noise-variance estimate, partial DFT, L = 20, K = M = N = 32
        "fig9" => {
            let mut c = base(32, 32, vec![32], vec![20], snr_sweep());
            c.phase_kinds = vec![PhaseKind::PartialDft];
            c.estimators = vec![EstimatorKind::Uamp];
            c
        }
        other => {
            return Err(ExperimentError::Config(format!(
                "unknown figure `{other}` (expected one of {})",
                FIGURES.join(", ")
            )))
        }
    };
    cfg.trials = (cfg.trials / scale).max(1);
    cfg.validate()?;
    Ok(cfg)
}
