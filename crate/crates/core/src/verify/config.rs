use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::QuadratureSpec;
use crate::samplers::crossing::Crossings;
use crate::samplers::Transform;

/// Named experiments of the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    AnalyticSuite,
    VervaatClassical,
    SplitNeg,
    SplitPos,
    Decomposition,
    JointRTheta,
    MartingaleMeanOne,
    Reweighting,
    DriftPosBridge,
    T0Laws,
    DriftBm,
}

impl CheckName {
    pub const ALL: [CheckName; 11] = [
        CheckName::AnalyticSuite,
        CheckName::VervaatClassical,
        CheckName::SplitNeg,
        CheckName::SplitPos,
        CheckName::Decomposition,
        CheckName::JointRTheta,
        CheckName::MartingaleMeanOne,
        CheckName::Reweighting,
        CheckName::DriftPosBridge,
        CheckName::T0Laws,
        CheckName::DriftBm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckName::AnalyticSuite => "analytic-suite",
            CheckName::VervaatClassical => "vervaat-classical",
            CheckName::SplitNeg => "split-neg",
            CheckName::SplitPos => "split-pos",
            CheckName::Decomposition => "decomposition",
            CheckName::JointRTheta => "joint-r-theta",
            CheckName::MartingaleMeanOne => "martingale-mean-one",
            CheckName::Reweighting => "reweighting",
            CheckName::DriftPosBridge => "drift-pos-bridge",
            CheckName::T0Laws => "t0-laws",
            CheckName::DriftBm => "drift-bm",
        }
    }

    /// Statistical checks draw paths and need a minimum ensemble size.
    pub fn is_statistical(self) -> bool {
        self != CheckName::AnalyticSuite
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckName::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown check '{s}'")))
    }
}

/// Smallest ensemble accepted by a statistical check.
pub const MIN_PATHS: usize = 1000;

/// Parameters of one check run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub check: CheckName,
    pub lambda: f64,
    /// Levels for checks that sweep several values of `λ`.
    pub lambdas: Vec<f64>,
    pub n_paths: usize,
    pub n_steps: usize,
    pub times: Vec<f64>,
    /// Path lifetime for checks evaluated at the end of the path.
    pub horizon: f64,
    pub master_seed: u64,
    /// Seed of the reference ensemble in two-ensemble checks; derived from
    /// `master_seed` when absent.
    pub reference_seed: Option<u64>,
    pub thresholds: BTreeMap<String, f64>,
    pub quad: QuadratureSpec,
    /// How transformed paths are formed from grid samples.
    #[serde(default)]
    pub transform: Transform,
    /// How crossing times between nodes are resolved.
    #[serde(default)]
    pub crossings: Crossings,
}

fn th(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

impl CheckConfig {
    /// Desk-scale defaults for `check`.
    pub fn defaults(check: CheckName) -> Self {
        let mut cfg = CheckConfig {
            check,
            lambda: 1.0,
            lambdas: Vec::new(),
            n_paths: 50_000,
            n_steps: 1 << 12,
            times: vec![0.25, 0.5, 0.75],
            horizon: 1.0,
            master_seed: 42,
            reference_seed: None,
            thresholds: BTreeMap::new(),
            quad: QuadratureSpec::default(),
            transform: Transform::BridgeMin,
            crossings: Crossings::Bridge,
        };
        match check {
            CheckName::AnalyticSuite => {
                cfg.n_paths = 0;
                cfg.n_steps = 0;
                cfg.times = Vec::new();
                cfg.thresholds = th(&[
                    ("lemma_rel", 1e-8),
                    ("lemma_pi_abs", 1e-10),
                    ("jump_rel", 1e-10),
                    ("pde_scaled", 1e-4),
                    ("dj_rel", 1e-5),
                    ("d2f_rel", 1e-5),
                    ("dual_route_rel", 1e-8),
                    ("joint_forms_rel", 1e-12),
                    ("mass_abs", 1e-8),
                    ("bound_violations", 0.0),
                ]);
            }
            CheckName::VervaatClassical => {
                cfg.thresholds = th(&[("p_min", 1e-3)]);
            }
            CheckName::SplitNeg | CheckName::SplitPos => {
                cfg.lambda = if check == CheckName::SplitNeg { -1.0 } else { 1.0 };
                cfg.n_steps = 1 << 14;
                cfg.times = Vec::new();
                cfg.thresholds = th(&[("ks_max", 0.02)]);
            }
            CheckName::Decomposition => {
                cfg.lambda = -1.0;
                cfg.n_steps = 1 << 14;
                cfg.thresholds = th(&[("p_min", 1e-3)]);
            }
            CheckName::JointRTheta => {
                cfg.n_paths = 100_000;
                cfg.times = Vec::new();
                cfg.thresholds = th(&[("p_min", 1e-3), ("min_cells", 40.0), ("z_max", 3.0)]);
            }
            CheckName::MartingaleMeanOne => {
                cfg.n_paths = 100_000;
                cfg.lambdas = vec![0.5, 1.0, 2.0];
                cfg.thresholds = th(&[("z_max", 3.0)]);
            }
            CheckName::Reweighting => {
                cfg.n_paths = 100_000;
                cfg.n_steps = 1 << 14;
                cfg.times = vec![0.5];
                cfg.thresholds = th(&[("z_max", 3.0)]);
            }
            CheckName::DriftPosBridge => {
                cfg.n_paths = 20_000;
                cfg.times = Vec::new();
                cfg.thresholds = th(&[("z_max", 3.0), ("power_z_min", 10.0), ("window_end", 0.95), ("var_z_max", 3.0)]);
            }
            CheckName::T0Laws => {
                cfg.n_paths = 100_000;
                cfg.n_steps = 1 << 14;
                cfg.times = Vec::new();
                cfg.thresholds = th(&[
                    ("z_max", 3.0),
                    ("agreement_min", 0.995),
                    ("ks_arcsine_max", 0.02),
                    ("ks_endpoint_max", 0.03),
                    ("t0_bins", 4.0),
                ]);
            }
            CheckName::DriftBm => {
                cfg.n_paths = 5_000;
                cfg.times = Vec::new();
                cfg.thresholds = th(&[("z_max", 3.0), ("power_z_min", 10.0), ("buffer", 0.05)]);
            }
        }
        cfg
    }

    pub fn threshold(&self, key: &str) -> Result<f64> {
        self.thresholds
            .get(key)
            .copied()
            .ok_or_else(|| Error::Config(format!("{}: missing threshold '{key}'", self.check)))
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("{key}: cannot parse '{value}' as {what}"));
        let real = || value.parse::<f64>().map_err(|_| bad("a real number"));
        let list = || -> Result<Vec<f64>> {
            value
                .split(',')
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>().map_err(|_| bad("a list of reals")))
                .collect()
        };
        match key {
            "check" => self.check = value.parse()?,
            "lambda" => self.lambda = real()?,
            "lambdas" => self.lambdas = list()?,
            "n_paths" | "n-paths" => self.n_paths = value.parse().map_err(|_| bad("a count"))?,
            "n_steps" | "n-steps" => self.n_steps = value.parse().map_err(|_| bad("a count"))?,
            "times" => self.times = list()?,
            "horizon" => self.horizon = real()?,
            "seed" | "master_seed" => self.master_seed = value.parse().map_err(|_| bad("a seed"))?,
            "reference_seed" => self.reference_seed = Some(value.parse().map_err(|_| bad("a seed"))?),
            "transform" => self.transform = value.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
            "crossings" => self.crossings = value.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
            "quad.rel_tol" => self.quad.rel_tol = real()?,
            "quad.abs_tol" => self.quad.abs_tol = real()?,
            "quad.max_subdivisions" => {
                self.quad.max_subdivisions = value.parse().map_err(|_| bad("a count"))?
            }
            "quad.lambda_nodes" => self.quad.lambda_nodes = value.parse().map_err(|_| bad("a count"))?,
            _ => match key.strip_prefix("threshold.") {
                Some(name) => {
                    self.thresholds.insert(name.to_string(), real()?);
                }
                None => return Err(Error::Config(format!("unknown key '{key}'"))),
            },
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(Error::Config(format!("{}: {msg}", self.check)));
        self.quad.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.check.is_statistical() {
            if self.n_paths < MIN_PATHS {
                return err(format!("n_paths = {} is below the floor {MIN_PATHS}", self.n_paths));
            }
            if self.n_steps < 16 {
                return err(format!("n_steps = {} is too small", self.n_steps));
            }
        }
        if let Some(t) = self.times.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return err(format!("time {t} is not inside (0, 1)"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return err(format!("horizon must be positive, got {}", self.horizon));
        }
        if !self.lambda.is_finite() || self.lambdas.iter().any(|l| !l.is_finite()) {
            return err("levels must be finite".into());
        }
        if self.reference_seed == Some(self.master_seed) {
            return err("reference ensemble would reuse the master seed".into());
        }
        let needs_times = matches!(
            self.check,
            CheckName::VervaatClassical
                | CheckName::Decomposition
                | CheckName::MartingaleMeanOne
                | CheckName::Reweighting
        );
        if needs_times && self.times.is_empty() {
            return err("at least one time is required".into());
        }
        match self.check {
            CheckName::SplitNeg | CheckName::Decomposition if self.lambda >= 0.0 => {
                err(format!("λ must be negative, got {}", self.lambda))
            }
            CheckName::SplitPos
            | CheckName::JointRTheta
            | CheckName::Reweighting
            | CheckName::DriftPosBridge
                if self.lambda <= 0.0 =>
            {
                err(format!("λ must be positive, got {}", self.lambda))
            }
            CheckName::MartingaleMeanOne if self.lambdas.iter().any(|&l| l <= 0.0) => {
                err("all levels must be positive".into())
            }
            _ => Ok(()),
        }
    }
}

/// Parsed `key = value` text. Keys prefixed with `<check-name>.` apply to
/// that check only; unprefixed keys apply to every check.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub entries: Vec<(String, String)>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            entries.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(ConfigFile { entries })
    }

    /// Value of `check` if the file names one.
    pub fn check(&self) -> Option<&str> {
        self.entries.iter().rev().find(|(k, _)| k == "check").map(|(_, v)| v.as_str())
    }

    /// Applies the entries relevant to `cfg.check`; later lines win.
    pub fn apply(&self, cfg: &mut CheckConfig) -> Result<()> {
        for (k, v) in &self.entries {
            if k == "check" {
                continue;
            }
            let key = match k.split_once('.') {
                Some((prefix, rest)) if prefix.parse::<CheckName>().is_ok() => {
                    if prefix != cfg.check.name() {
                        continue;
                    }
                    rest
                }
                _ => k.as_str(),
            };
            cfg.set(key, v)?;
        }
        Ok(())
    }
}
