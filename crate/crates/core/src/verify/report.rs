use serde::{Deserialize, Serialize};

use super::config::CheckConfig;

/// Direction of a cell's comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Passes when `statistic ≤ threshold`.
    AtMost,
    /// Passes when `statistic ≥ threshold`.
    AtLeast,
}

/// One compared quantity inside a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub label: String,
    pub statistic: f64,
    pub threshold: f64,
    pub bound: Bound,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub se: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub estimate: Option<f64>,
    pub pass: bool,
}

impl Cell {
    fn new(label: impl Into<String>, statistic: f64, threshold: f64, bound: Bound) -> Self {
        let pass = match bound {
            Bound::AtMost => statistic <= threshold,
            Bound::AtLeast => statistic >= threshold,
        };
        Cell {
            label: label.into(),
            statistic,
            threshold,
            bound,
            p_value: None,
            se: None,
            estimate: None,
            pass,
        }
    }

    pub fn at_most(label: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Cell::new(label, statistic, threshold, Bound::AtMost)
    }

    pub fn at_least(label: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Cell::new(label, statistic, threshold, Bound::AtLeast)
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p_value = Some(p);
        self
    }

    pub fn with_se(mut self, se: f64) -> Self {
        self.se = Some(se);
        self
    }

    pub fn with_estimate(mut self, x: f64) -> Self {
        self.estimate = Some(x);
        self
    }

    /// How far past its threshold the statistic sits; above 1 means fail.
    fn severity(&self) -> f64 {
        let (s, t) = (self.statistic, self.threshold);
        if t == 0.0 && self.bound == Bound::AtMost {
            return if s <= 0.0 { 0.0 } else { f64::INFINITY };
        }
        let r = match self.bound {
            Bound::AtMost => s / t,
            Bound::AtLeast => t / s,
        };
        if r.is_nan() {
            f64::INFINITY
        } else {
            r
        }
    }
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub config: CheckConfig,
    /// Statistic of the cell closest to (or furthest past) its threshold.
    pub statistic: f64,
    pub threshold: f64,
    pub p_value: Option<f64>,
    pub pass: bool,
    /// True when the data could not decide the question.
    pub inconclusive: bool,
    pub seed: u64,
    pub runtime_ms: u64,
    pub cells: Vec<Cell>,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn from_cells(config: &CheckConfig, cells: Vec<Cell>, notes: Vec<String>) -> Self {
        let headline = cells
            .iter()
            .max_by(|a, b| a.severity().total_cmp(&b.severity()));
        let (statistic, threshold) = headline.map_or((f64::NAN, f64::NAN), |c| (c.statistic, c.threshold));
        let p_value = cells
            .iter()
            .filter_map(|c| c.p_value)
            .min_by(|a, b| a.total_cmp(b));
        CheckReport {
            check: config.check.name().to_string(),
            config: config.clone(),
            statistic,
            threshold,
            p_value,
            pass: !cells.is_empty() && cells.iter().all(|c| c.pass),
            inconclusive: false,
            seed: config.master_seed,
            runtime_ms: 0,
            cells,
            notes,
        }
    }

    /// Report for a check whose event of interest never occurred.
    pub fn inconclusive(config: &CheckConfig, note: String) -> Self {
        let mut r = CheckReport::from_cells(config, Vec::new(), vec![note]);
        r.inconclusive = true;
        r
    }

    /// A failure is a conclusive negative verdict.
    pub fn failed(&self) -> bool {
        !self.pass && !self.inconclusive
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// All reports of a suite run with the overall verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub pass: bool,
    pub reports: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn new(reports: Vec<CheckReport>) -> Self {
        SuiteReport {
            pass: !reports.iter().any(|r| r.failed()),
            reports,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Bonferroni-adjusted p-value for one of `m` cells.
pub fn bonferroni(p: f64, m: usize) -> f64 {
    (p * m.max(1) as f64).min(1.0)
}
