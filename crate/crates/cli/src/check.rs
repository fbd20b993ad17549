use std::path::PathBuf;

use clap::Args;
use vervaat_core::verify::{self, CheckConfig, CheckName, CheckReport, ConfigFile, SuiteReport};

use crate::{env_seed, io_failure, read_text, Common, Failure, EXIT_FAIL};

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Check name, e.g. split-neg; may instead come from the config file.
    name: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Comma-separated levels for checks that sweep λ.
    #[arg(long, allow_hyphen_values = true)]
    lambdas: Option<String>,
    #[arg(long)]
    n_paths: Option<usize>,
    #[arg(long)]
    n_steps: Option<usize>,
    /// Comma-separated times in (0, 1).
    #[arg(long)]
    times: Option<String>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reference_seed: Option<u64>,
    /// Threshold override, `name=value`; repeatable.
    #[arg(long = "threshold", value_name = "NAME=VALUE")]
    thresholds: Vec<String>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    lambda_nodes: Option<usize>,
    /// `grid` or `bridge-min`.
    #[arg(long)]
    transform: Option<String>,
    /// `bridge` or `grid`.
    #[arg(long)]
    crossings: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
pub struct SuiteArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: Common,
}

fn config_file(common: &Common) -> Result<Option<ConfigFile>, Failure> {
    match &common.config {
        Some(p) => Ok(Some(ConfigFile::parse(&read_text(p)?)?)),
        None => Ok(None),
    }
}

fn build_config(a: &CheckArgs) -> Result<CheckConfig, Failure> {
    let file = config_file(&a.common)?;
    let name = a
        .name
        .as_deref()
        .or_else(|| file.as_ref().and_then(|f| f.check()))
        .ok_or_else(|| Failure::usage("check needs a name"))?;
    let check: CheckName = name.parse()?;
    let mut cfg = CheckConfig::defaults(check);
    if let Some(s) = env_seed()? {
        cfg.master_seed = s;
    }
    if let Some(f) = &file {
        f.apply(&mut cfg)?;
    }
    let mut set = |k: &str, v: Option<String>| -> Result<(), Failure> {
        if let Some(v) = v {
            cfg.set(k, &v)?;
        }
        Ok(())
    };
    set("lambda", a.lambda.map(|v| v.to_string()))?;
    set("lambdas", a.lambdas.clone())?;
    set("n_paths", a.n_paths.map(|v| v.to_string()))?;
    set("n_steps", a.n_steps.map(|v| v.to_string()))?;
    set("times", a.times.clone())?;
    set("horizon", a.horizon.map(|v| v.to_string()))?;
    set("seed", a.seed.map(|v| v.to_string()))?;
    set("reference_seed", a.reference_seed.map(|v| v.to_string()))?;
    set("quad.rel_tol", a.rel_tol.map(|v| v.to_string()))?;
    set("quad.lambda_nodes", a.lambda_nodes.map(|v| v.to_string()))?;
    set("transform", a.transform.clone())?;
    set("crossings", a.crossings.clone())?;
    for t in &a.thresholds {
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("--threshold expects NAME=VALUE, got {t:?}")))?;
        cfg.set(&format!("threshold.{}", k.trim()), v.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn verdict(r: &CheckReport) -> &'static str {
    if r.pass {
        "PASS"
    } else if r.inconclusive {
        "INCONCLUSIVE"
    } else {
        "FAIL"
    }
}

fn summary(r: &CheckReport) -> String {
    let lambda = match r.config.check {
        CheckName::AnalyticSuite | CheckName::VervaatClassical | CheckName::T0Laws | CheckName::DriftBm => {
            String::new()
        }
        CheckName::MartingaleMeanOne => format!(" lambdas={:?}", r.config.lambdas),
        _ => format!(" lambda={}", r.config.lambda),
    };
    format!(
        "{:<20}{lambda} {} statistic={:.6} threshold={} seed={} runtime_ms={}",
        r.check,
        verdict(r),
        r.statistic,
        r.threshold,
        r.seed,
        r.runtime_ms
    )
}

fn write_json(path: &PathBuf, json: &str) -> Result<(), Failure> {
    std::fs::write(path, format!("{json}\n")).map_err(|e| io_failure(path, e))
}

pub fn run_check(a: CheckArgs, no_timing: bool) -> Result<u8, Failure> {
    let cfg = build_config(&a)?;
    let mut report = verify::run_check(&cfg)?;
    if no_timing {
        report.runtime_ms = 0;
    }
    match &a.common.out {
        Some(p) => {
            write_json(p, &report.to_json())?;
            println!("{}", summary(&report));
        }
        None => {
            println!("{}", report.to_json());
            eprintln!("{}", summary(&report));
        }
    }
    Ok(if report.failed() { EXIT_FAIL } else { 0 })
}

pub fn run_suite(a: SuiteArgs, no_timing: bool) -> Result<u8, Failure> {
    let file = config_file(&a.common)?;
    let seed = env_seed()?;
    let mut configs = verify::suite_configs();
    for cfg in configs.iter_mut() {
        if let Some(s) = seed {
            cfg.master_seed = s;
        }
        if let Some(f) = &file {
            f.apply(cfg)?;
        }
        if let Some(s) = a.seed {
            cfg.master_seed = s;
        }
        cfg.validate()?;
    }
    let mut reports = Vec::with_capacity(configs.len());
    for cfg in &configs {
        let mut r = verify::run_check(cfg)?;
        if no_timing {
            r.runtime_ms = 0;
        }
        println!("{}", summary(&r));
        reports.push(r);
    }
    let suite = SuiteReport::new(reports);
    let out = a.common.out.clone().unwrap_or_else(|| PathBuf::from("suite.json"));
    write_json(&out, &suite.to_json())?;
    println!("suite {} -> {}", if suite.pass { "PASS" } else { "FAIL" }, out.display());
    Ok(if suite.pass { 0 } else { EXIT_FAIL })
}
