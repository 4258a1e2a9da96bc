//! Monte Carlo sweep over an [`ExperimentConfig`].

use crate::config::{EstimatorKind, ExperimentConfig, GridPoint};
use crate::error::{ExperimentError, Result};
use rayon::prelude::*;
use ris_uamp::baselines::{als_estimator, ls_rank1_estimator};
use ris_uamp::crlb::crlb_for;
use ris_uamp::metrics::nmse_with_ambiguity_removal;
use ris_uamp::model::{
    generate_channels, generate_phase_matrix, noise_precision_for_snr, simulate_observations,
    unitary_transform, ChannelPair, PhaseKind, RisPhaseMatrix,
};
use ris_uamp::rng::combine;
use ris_uamp::uamp::run_estimator;
use ris_uamp::{CMat, ChannelEstimate};
use std::time::Instant;

const TAG_CHANNELS: u64 = 1;
const TAG_PHASE: u64 = 2;
const TAG_NOISE: u64 = 3;
const TAG_UAMP: u64 = 4;
const TAG_ALS: u64 = 5;

fn kind_id(kind: PhaseKind) -> u64 {
    match kind {
        PhaseKind::PartialDft => 0,
        PhaseKind::BinaryRandom => 1,
    }
}

/// Seed of one trial; depends only on the base seed, the grid coordinates
/// and the trial index.
pub fn trial_seed(base: u64, point: &GridPoint, trial: usize) -> u64 {
    combine(&[
        base,
        point.m as u64,
        point.k as u64,
        point.n as u64,
        point.l as u64,
        point.snr_db.to_bits(),
        kind_id(point.kind),
        trial as u64,
    ])
}

fn sub_seed(seed: u64, tag: u64) -> u64 {
    combine(&[seed, tag])
}

/// Metrics of one estimator on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorOutcome {
    pub nmse_h: f64,
    pub nmse_g: f64,
    /// `|β̂⁻¹ − β⁻¹| / β⁻¹`.
    pub beta_rel_err: f64,
    pub iterations: usize,
    pub converged: bool,
    pub runtime_s: f64,
}

/// `Err` carries the estimator's error message.
pub type Outcome = std::result::Result<EstimatorOutcome, String>;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub point: GridPoint,
    pub trial: usize,
    pub seed: u64,
    pub uamp: Option<Outcome>,
    pub als: Option<Outcome>,
    pub ls_rank1: Option<Outcome>,
    /// `(CRLB_H, CRLB_G)` of the grid point.
    pub crlb: Option<Bound>,
    pub runtime_s: f64,
}

impl TrialRecord {
    pub fn outcome(&self, kind: EstimatorKind) -> Option<&Outcome> {
        match kind {
            EstimatorKind::Uamp => self.uamp.as_ref(),
            EstimatorKind::Als => self.als.as_ref(),
            EstimatorKind::LsRank1 => self.ls_rank1.as_ref(),
            EstimatorKind::Crlb => None,
        }
    }
}

/// Data of one trial, regenerated from its seed.
pub struct TrialData {
    pub channels: ChannelPair,
    pub phase: RisPhaseMatrix,
    pub beta: f64,
    pub y: CMat,
}

pub fn trial_data(point: &GridPoint, seed: u64) -> Result<TrialData> {
    let dims = point.dims();
    let channels = generate_channels(&dims, sub_seed(seed, TAG_CHANNELS));
    let phase = generate_phase_matrix(&dims, point.kind, sub_seed(seed, TAG_PHASE))?;
    let beta = noise_precision_for_snr(&phase, point.snr_db, &dims);
    let y = simulate_observations(&channels, &phase, beta, sub_seed(seed, TAG_NOISE))?;
    Ok(TrialData {
        channels,
        phase,
        beta,
        y,
    })
}

fn clock(timing: bool) -> impl Fn(Instant) -> f64 {
    move |start: Instant| {
        if timing {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        }
    }
}

fn score(data: &TrialData, est: ris_uamp::Result<ChannelEstimate>, runtime_s: f64) -> Outcome {
    let est = est.map_err(|e| e.to_string())?;
    let pair = est.channels().map_err(|e| e.to_string())?;
    let (nmse_h, nmse_g) =
        nmse_with_ambiguity_removal(&data.channels, &pair).map_err(|e| e.to_string())?;
    let true_var = 1.0 / data.beta;
    Ok(EstimatorOutcome {
        nmse_h,
        nmse_g,
        beta_rel_err: (1.0 / est.beta_hat - true_var).abs() / true_var,
        iterations: est.iterations,
        converged: est.converged,
        runtime_s,
    })
}

/// Runs every selected estimator on one trial. CRLB fields are left empty;
/// they are filled per grid point by [`run_monte_carlo`].
pub fn run_trial(cfg: &ExperimentConfig, point: &GridPoint, trial: usize) -> Result<TrialRecord> {
    let elapsed = clock(cfg.timing);
    let start = Instant::now();
    let seed = trial_seed(cfg.seed, point, trial);
    let data = trial_data(point, seed)?;
    let dims = point.dims();

    let uamp = cfg.selects(EstimatorKind::Uamp).then(|| {
        let t = Instant::now();
        let est = unitary_transform(&data.phase, &data.y).and_then(|model| {
            run_estimator(
                &model,
                &dims,
                &cfg.uamp.to_config(),
                sub_seed(seed, TAG_UAMP),
                None,
            )
        });
        score(&data, est, elapsed(t))
    });
    let als = cfg.selects(EstimatorKind::Als).then(|| {
        let t = Instant::now();
        let est = als_estimator(
            &data.y,
            &data.phase,
            &dims,
            &cfg.als.to_config(),
            sub_seed(seed, TAG_ALS),
        );
        score(&data, est, elapsed(t))
    });
    let ls_rank1 = cfg.selects(EstimatorKind::LsRank1).then(|| {
        let t = Instant::now();
        let est = ls_rank1_estimator(&data.y, &data.phase, &dims, &cfg.ls_rank1.to_config());
        score(&data, est, elapsed(t))
    });
    Ok(TrialRecord {
        point: *point,
        trial,
        seed,
        uamp,
        als,
        ls_rank1,
        crlb: None,
        runtime_s: elapsed(start),
    })
}

/// Bounds of one grid point, evaluated on the realisation of trial 0.
pub fn crlb_for_point(cfg: &ExperimentConfig, point: &GridPoint) -> Result<Bound> {
    let data = trial_data(point, trial_seed(cfg.seed, point, 0))?;
    Ok(
        crlb_for(&data.channels, data.phase.matrix(), 1.0 / data.beta)
            .map(|r| (r.crlb_h, r.crlb_g))
            .map_err(|e| e.to_string()),
    )
}

type Bound = std::result::Result<(f64, f64), String>;

enum Job {
    Trial(usize, usize),
    Crlb(usize),
}

enum Done {
    Trial(Box<TrialRecord>),
    Bound(usize, Bound),
}

/// All records in grid order, trials ascending. `threads = None` uses
/// rayon's default pool; `Some(1)` runs sequentially.
pub fn run_monte_carlo(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let grid = cfg.grid();
    let mut jobs: Vec<Job> = Vec::new();
    if cfg.selects(EstimatorKind::Crlb) {
        jobs.extend((0..grid.len()).map(Job::Crlb));
    }
    let any_estimator = cfg.selected().iter().any(|k| *k != EstimatorKind::Crlb);
    for p in 0..grid.len() {
        for t in 0..cfg.trials {
            if any_estimator || t == 0 {
                jobs.push(Job::Trial(p, t));
            }
        }
    }

    let run = |job: &Job| -> Result<Done> {
        match *job {
            Job::Trial(p, t) => Ok(Done::Trial(Box::new(run_trial(cfg, &grid[p], t)?))),
            Job::Crlb(p) => Ok(Done::Bound(p, crlb_for_point(cfg, &grid[p])?)),
        }
    };
    let results: Vec<Done> = match threads {
        Some(1) => jobs.iter().map(run).collect::<Result<_>>()?,
        _ => {
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(t) = threads {
                builder = builder.num_threads(t);
            }
            let pool = builder
                .build()
                .map_err(|e| ExperimentError::Pool(e.to_string()))?;
            pool.install(|| jobs.par_iter().map(run).collect::<Result<_>>())?
        }
    };

    let mut bounds = vec![None; grid.len()];
    let mut records = Vec::new();
    for done in results {
        match done {
            Done::Trial(rec) => records.push(*rec),
            Done::Bound(p, b) => bounds[p] = Some(b),
        }
    }
    for rec in &mut records {
        let p = grid
            .iter()
            .position(|g| g == &rec.point)
            .expect("record of a grid point");
        rec.crlb = bounds[p].clone();
    }
    Ok(records)
}

/// Median of the finite values, or NaN if there are none.
pub fn median(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}
