//! Named, configuration-driven experiments, each turning one statement about
//! the transformed paths into a pass/fail [`CheckReport`].
//!
//! Every check draws from its own RNG streams, derived from the master seed
//! and the check name, and merges per-path results in path order, so a report
//! depends only on its configuration.

pub mod analytic_suite;
pub mod bessel;
pub mod bm;
pub mod config;
pub mod laws;
pub mod report;

use std::time::Instant;

use crate::error::Result;
use crate::samplers::derive_seed;

pub use analytic_suite::check_analytic_suite;
pub use bessel::{check_drift_pos_bridge, check_joint_r_theta, check_martingale_mean_one, check_reweighting, joint_cell_mass};
pub use bm::{check_drift_bm, check_t0_laws};
pub use config::{CheckConfig, CheckName, ConfigFile, MIN_PATHS};
pub use laws::{check_decomposition_two_sample, check_split, check_vervaat_classical};
pub use report::{bonferroni, Bound, Cell, CheckReport, SuiteReport};

pub(crate) fn stream_seed(cfg: &CheckConfig, label: &str) -> u64 {
    derive_seed(cfg.master_seed, &format!("{}/{label}", cfg.check))
}

pub(crate) fn reference_seed(cfg: &CheckConfig, label: &str) -> u64 {
    match cfg.reference_seed {
        Some(s) => s,
        None => stream_seed(cfg, label),
    }
}

pub(crate) fn time_indices(times: &[f64], n_steps: usize) -> Vec<usize> {
    times
        .iter()
        .map(|t| ((t * n_steps as f64).round() as usize).clamp(1, n_steps - 1))
        .collect()
}

/// Rows of per-path observations to one column per observable.
pub(crate) fn transpose(rows: &[Vec<f64>], width: usize) -> Vec<Vec<f64>> {
    let mut cols = vec![Vec::with_capacity(rows.len()); width];
    for row in rows {
        for (c, &x) in cols.iter_mut().zip(row) {
            c.push(x);
        }
    }
    cols
}

/// Running mean and standard error, fed in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanAccumulator {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl MeanAccumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    pub fn se(&self) -> f64 {
        let n = self.n as f64;
        let m = self.mean();
        ((self.sum_sq / n - m * m).max(0.0) / (n - 1.0)).sqrt()
    }
}

/// Runs one check and stamps its wall time.
pub fn run_check(cfg: &CheckConfig) -> Result<CheckReport> {
    let start = Instant::now();
    let mut report = match cfg.check {
        CheckName::AnalyticSuite => check_analytic_suite(cfg),
        CheckName::VervaatClassical => check_vervaat_classical(cfg),
        CheckName::SplitNeg | CheckName::SplitPos => check_split(cfg),
        CheckName::Decomposition => check_decomposition_two_sample(cfg),
        CheckName::JointRTheta => check_joint_r_theta(cfg),
        CheckName::MartingaleMeanOne => check_martingale_mean_one(cfg),
        CheckName::Reweighting => check_reweighting(cfg),
        CheckName::DriftPosBridge => check_drift_pos_bridge(cfg),
        CheckName::T0Laws => check_t0_laws(cfg),
        CheckName::DriftBm => check_drift_bm(cfg),
    }
    .map_err(|e| e.with_context(format!("check {}", cfg.check)))?;
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Default configurations of the full suite: every check once, with the
/// split checks at each of their three levels.
pub fn suite_configs() -> Vec<CheckConfig> {
    let mut out = Vec::new();
    for check in CheckName::ALL {
        match check {
            CheckName::SplitNeg | CheckName::SplitPos => {
                let sign = if check == CheckName::SplitNeg { -1.0 } else { 1.0 };
                for l in [0.5, 1.0, 2.0] {
                    let mut cfg = CheckConfig::defaults(check);
                    cfg.lambda = sign * l;
                    out.push(cfg);
                }
            }
            _ => out.push(CheckConfig::defaults(check)),
        }
    }
    out
}

/// Runs `configs` in order; an error in one check aborts the suite.
pub fn run_suite(configs: &[CheckConfig]) -> Result<SuiteReport> {
    let reports = configs.iter().map(run_check).collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::new(reports))
}
