//! CSV rendering of trial records.
//!
//! Columns: `m, k, n, l, snr_db, phase, trial, seed`, then for each selected
//! estimator `E` in the order uamp, als, ls_rank1:
//! `E_nmse_h, E_nmse_g, E_beta_rel_err, E_iterations, E_converged,
//! E_runtime_s, E_status`, then `crlb_h, crlb_g` when the bound is selected,
//! and finally `runtime_s`. Floats carry 17 significant digits. Fields of a
//! failed estimator are empty and `E_status` holds the error message.

use crate::config::{EstimatorKind, ExperimentConfig};
use crate::error::{ExperimentError, Result};
use crate::runner::TrialRecord;
use std::io::Write;
use std::path::Path;

const ESTIMATOR_FIELDS: [&str; 7] = [
    "nmse_h",
    "nmse_g",
    "beta_rel_err",
    "iterations",
    "converged",
    "runtime_s",
    "status",
];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Column layout for a given estimator selection.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvLayout {
    estimators: Vec<EstimatorKind>,
    crlb: bool,
}

impl CsvLayout {
    pub fn new(selection: &[EstimatorKind]) -> Self {
        let mut estimators: Vec<EstimatorKind> = selection
            .iter()
            .copied()
            .filter(|k| *k != EstimatorKind::Crlb)
            .collect();
        estimators.sort();
        estimators.dedup();
        Self {
            estimators,
            crlb: selection.contains(&EstimatorKind::Crlb),
        }
    }

    pub fn for_config(cfg: &ExperimentConfig) -> Self {
        Self::new(&cfg.estimators)
    }

    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["m", "k", "n", "l", "snr_db", "phase", "trial", "seed"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        for e in &self.estimators {
            h.extend(
                ESTIMATOR_FIELDS
                    .iter()
                    .map(|f| format!("{}_{f}", e.as_str())),
            );
        }
        if self.crlb {
            h.push("crlb_h".into());
            h.push("crlb_g".into());
        }
        h.push("runtime_s".into());
        h
    }

    pub fn row(&self, rec: &TrialRecord) -> Vec<String> {
        let p = &rec.point;
        let mut row = vec![
            p.m.to_string(),
            p.k.to_string(),
            p.n.to_string(),
            p.l.to_string(),
            fmt_f64(p.snr_db),
            p.kind.as_str().to_string(),
            rec.trial.to_string(),
            rec.seed.to_string(),
        ];
        for e in &self.estimators {
            match rec.outcome(*e) {
                Some(Ok(o)) => row.extend([
                    fmt_f64(o.nmse_h),
                    fmt_f64(o.nmse_g),
                    fmt_f64(o.beta_rel_err),
                    o.iterations.to_string(),
                    o.converged.to_string(),
                    fmt_f64(o.runtime_s),
                    "ok".to_string(),
                ]),
                Some(Err(msg)) => {
                    row.extend(std::iter::repeat_n(
                        String::new(),
                        ESTIMATOR_FIELDS.len() - 1,
                    ));
                    row.push(msg.clone());
                }
                None => row.extend(std::iter::repeat_n(String::new(), ESTIMATOR_FIELDS.len())),
            }
        }
        if self.crlb {
            match &rec.crlb {
                Some(Ok((h, g))) => row.extend([fmt_f64(*h), fmt_f64(*g)]),
                _ => row.extend([String::new(), String::new()]),
            }
        }
        row.push(fmt_f64(rec.runtime_s));
        row
    }
}

pub fn write_csv<W: Write>(records: &[TrialRecord], layout: &CsvLayout, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(layout.header())?;
    for rec in records {
        w.write_record(layout.row(rec))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn emit_csv(records: &[TrialRecord], layout: &CsvLayout, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| ExperimentError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    write_csv(records, layout, std::io::BufWriter::new(file)).map_err(|e| match e {
        ExperimentError::Csv(err) => ExperimentError::Io {
            path: path.to_path_buf(),
            source: std::io::Error::other(err.to_string()),
        },
        other => other,
    })
}
