//! Experiment description, read from TOML.
//!
//! ```toml
//! m = [16]
//! k = [16]
//! n = [16]
//! l = [16]
//! snr_db = [10, 20, 30]
//! phase_kinds = ["partial_dft", "binary"]
//! estimators = ["uamp", "als", "ls_rank1", "crlb"]
//! trials = 100
//! seed = 1
//! timing = true
//! output = "results.csv"
//!
//! [uamp]
//! tolerance = 1e-3
//! max_iterations = 30
//!
//! [als]
//! max_iterations = 30
//! ```
//!
//! Every grid list is crossed with every other one.

use crate::error::{ExperimentError, Result};
use ris_uamp::baselines::BaselineConfig;
use ris_uamp::model::PhaseKind;
use ris_uamp::uamp::{EstimatorConfig, HInit};
use ris_uamp::SystemDims;
use serde::{Deserialize, Deserializer};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Uamp,
    Als,
    LsRank1,
    Crlb,
}

impl EstimatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::Uamp => "uamp",
            EstimatorKind::Als => "als",
            EstimatorKind::LsRank1 => "ls_rank1",
            EstimatorKind::Crlb => "crlb",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HInitKind {
    Gaussian,
    Ones,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UampSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub prior_var_h: f64,
    pub prior_var_g: f64,
    pub damping: f64,
    pub variance_floor: f64,
    pub variance_cap: f64,
    pub beta_cap: f64,
    pub h_init: HInitKind,
}

impl Default for UampSettings {
    fn default() -> Self {
        let d = EstimatorConfig::default();
        Self {
            tolerance: d.tolerance,
            max_iterations: d.max_iterations,
            prior_var_h: d.prior_var_h,
            prior_var_g: d.prior_var_g,
            damping: d.damping,
            variance_floor: d.variance_floor,
            variance_cap: d.variance_cap,
            beta_cap: d.beta_cap,
            h_init: HInitKind::Gaussian,
        }
    }
}

impl UampSettings {
    pub fn to_config(&self) -> EstimatorConfig {
        EstimatorConfig {
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            prior_var_h: self.prior_var_h,
            prior_var_g: self.prior_var_g,
            damping: self.damping,
            variance_floor: self.variance_floor,
            variance_cap: self.variance_cap,
            beta_cap: self.beta_cap,
            h_init: match self.h_init {
                HInitKind::Gaussian => HInit::Gaussian,
                HInitKind::Ones => HInit::Ones,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineSettings {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub ridge: f64,
}

impl Default for BaselineSettings {
    fn default() -> Self {
        let d = BaselineConfig::default();
        Self {
            max_iterations: d.max_iterations,
            tolerance: d.tolerance,
            ridge: d.ridge,
        }
    }
}

impl BaselineSettings {
    pub fn to_config(&self) -> BaselineConfig {
        BaselineConfig {
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            ridge: self.ridge,
            ..BaselineConfig::default()
        }
    }
}

fn phase_kinds<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Vec<PhaseKind>, D::Error> {
    let names = Vec::<String>::deserialize(de)?;
    names
        .iter()
        .map(|s| s.parse().map_err(serde::de::Error::custom))
        .collect()
}

fn default_phase_kinds() -> Vec<PhaseKind> {
    vec![PhaseKind::PartialDft]
}

fn default_estimators() -> Vec<EstimatorKind> {
    vec![EstimatorKind::Uamp]
}

fn default_trials() -> usize {
    100
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub m: Vec<usize>,
    pub k: Vec<usize>,
    pub n: Vec<usize>,
    pub l: Vec<usize>,
    pub snr_db: Vec<f64>,
    #[serde(default = "default_phase_kinds", deserialize_with = "phase_kinds")]
    pub phase_kinds: Vec<PhaseKind>,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorKind>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Record wall-clock times; `false` writes zeros so that repeated runs
    /// produce identical files.
    #[serde(default = "default_true")]
    pub timing: bool,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub uamp: UampSettings,
    #[serde(default)]
    pub als: BaselineSettings,
    #[serde(default)]
    pub ls_rank1: BaselineSettings,
}

/// One cell of the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub m: usize,
    pub k: usize,
    pub n: usize,
    pub l: usize,
    pub snr_db: f64,
    pub kind: PhaseKind,
}

impl GridPoint {
    pub fn dims(&self) -> SystemDims {
        SystemDims::new(self.m, self.k, self.n, self.l).expect("validated grid")
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(ExperimentError::Config(msg));
        if self.trials < 1 {
            return fail("trials must be at least 1".into());
        }
        for (name, list) in [
            ("m", &self.m),
            ("k", &self.k),
            ("n", &self.n),
            ("l", &self.l),
        ] {
            if list.is_empty() {
                return fail(format!("grid list `{name}` is empty"));
            }
            if list.contains(&0) {
                return fail(format!("grid list `{name}` contains 0"));
            }
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return fail("snr_db must be a non-empty list of finite values".into());
        }
        if self.phase_kinds.is_empty() {
            return fail("phase_kinds is empty".into());
        }
        if self.estimators.is_empty() {
            return fail("no estimators selected".into());
        }
        if self.phase_kinds.contains(&PhaseKind::PartialDft) {
            let max_l = *self.l.iter().max().unwrap();
            let min_n = *self.n.iter().min().unwrap();
            if max_l > min_n {
                return fail(format!(
                    "partial_dft needs L <= N at every grid point (L = {max_l}, N = {min_n})"
                ));
            }
        }
        self.uamp.to_config().validate()?;
        self.als.to_config().validate()?;
        self.ls_rank1.to_config().validate()?;
        Ok(())
    }

    pub fn selects(&self, kind: EstimatorKind) -> bool {
        self.estimators.contains(&kind)
    }

    /// Selected estimators in the fixed column order, without duplicates.
    pub fn selected(&self) -> Vec<EstimatorKind> {
        let mut out = self.estimators.clone();
        out.sort();
        out.dedup();
        out
    }

    /// Grid points in row-major order over `(kind, m, k, n, l, snr)`.
    pub fn grid(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &kind in &self.phase_kinds {
            for &m in &self.m {
                for &k in &self.k {
                    for &n in &self.n {
                        for &l in &self.l {
                            for &snr_db in &self.snr_db {
                                out.push(GridPoint {
                                    m,
                                    k,
                                    n,
                                    l,
                                    snr_db,
                                    kind,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}
