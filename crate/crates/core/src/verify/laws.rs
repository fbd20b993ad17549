//! Checks on path laws: the classical transform, split times and the
//! decomposition of the negative-endpoint bridge.

use crate::analytic::{split_cdf_neg, split_cdf_pos};
use crate::error::{Error, Result};
use crate::numerics::{ks_one_sample, ks_two_sample, EmpiricalSample};
use crate::path::{detect_split, running_min, vervaat_transform, SplitKind};
use crate::samplers::crossing::{first_touch_time, last_exit_time, Crossings};
use crate::samplers::{
    par_streams, sample_bridge, sample_excursion, sample_with, vervaat_shifted, vervaat_transform_bridge_min, Law,
    LawSpec, Transform,
};

use super::config::CheckConfig;
use super::report::{bonferroni, Cell, CheckReport};
use super::{reference_seed, stream_seed, time_indices, transpose};

/// Transformed 0→0 bridges against excursions, marginal by marginal.
pub fn check_vervaat_classical(cfg: &CheckConfig) -> Result<CheckReport> {
    cfg.validate()?;
    let n = cfg.n_steps;
    let idx = time_indices(&cfg.times, n);
    let direct = par_streams(stream_seed(cfg, "direct"), cfg.n_paths, |_, rng| {
        let b = sample_bridge(0.0, 0.0, 1.0, n, rng)?;
        let v = match cfg.transform {
            Transform::Grid => vervaat_transform(&b),
            Transform::BridgeMin => vervaat_transform_bridge_min(&b, rng),
        };
        Ok(idx.iter().map(|&k| v.values()[k]).collect::<Vec<_>>())
    })?;
    let reference = par_streams(reference_seed(cfg, "excursion"), cfg.n_paths, |_, rng| {
        let e = sample_excursion(1.0, n, rng)?;
        Ok(idx.iter().map(|&k| e.values()[k]).collect::<Vec<_>>())
    })?;
    let (a, b) = (transpose(&direct, idx.len()), transpose(&reference, idx.len()));
    let p_min = cfg.threshold("p_min")?;
    let m = idx.len();
    let mut cells = Vec::with_capacity(m);
    for (j, t) in cfg.times.iter().enumerate() {
        let ks = ks_two_sample(&EmpiricalSample::new(a[j].clone()), &EmpiricalSample::new(b[j].clone()))?;
        let p = bonferroni(ks.p_value, m);
        cells.push(Cell::at_least(format!("t={t}"), p, p_min).with_estimate(ks.statistic).with_p(p));
    }
    Ok(CheckReport::from_cells(
        cfg,
        cells,
        vec![format!("two-sample KS, Bonferroni factor {m}; estimate is the KS distance")],
    ))
}

/// Detected split times of transformed bridges against the closed-form law.
pub fn check_split(cfg: &CheckConfig) -> Result<CheckReport> {
    cfg.validate()?;
    let lambda = cfg.lambda;
    let neg = lambda < 0.0;
    let kind = if neg { SplitKind::ZNeg } else { SplitKind::ZhatPos };
    let n = cfg.n_steps;
    // With bridge crossings: Z is the first touch of 0 after the wrap node and
    // Ẑ the last touch of λ before it; elsewhere the continuous path stays
    // strictly on one side.
    let times = par_streams(stream_seed(cfg, "paths"), cfg.n_paths, |i, rng| {
        let s = vervaat_shifted(&sample_bridge(0.0, lambda, 1.0, n, rng)?, cfg.transform, rng);
        let (v, dt) = (s.path.values(), s.path.dt());
        let t = match (cfg.crossings, neg) {
            (Crossings::Grid, _) => detect_split(&s.path, kind, lambda)?.map(|r| r.split_time),
            (Crossings::Bridge, true) => first_touch_time(v, dt, 0.0, s.return_search_start(), rng).map(|t| t + s.offset),
            (Crossings::Bridge, false) => Some(last_exit_time(v, dt, lambda, s.wrap_index, rng) + s.offset),
        };
        t.ok_or_else(|| Error::MalformedPath(format!("no split detected on path {i}")))
    })?;
    let sample = EmpiricalSample::new(times);
    let ks = if neg {
        ks_one_sample(&sample, |x| split_cdf_neg(x, lambda))?
    } else {
        ks_one_sample(&sample, |x| split_cdf_pos(x, lambda))?
    };
    let cell = Cell::at_most(format!("lambda={lambda}"), ks.statistic, cfg.threshold("ks_max")?).with_p(ks.p_value);
    Ok(CheckReport::from_cells(cfg, vec![cell], vec!["one-sample KS distance of detected split times".into()]))
}

/// Direct transform of the bridge to `λ < 0` against the excursion plus
/// first passage bridge construction: marginals and running minima.
pub fn check_decomposition_two_sample(cfg: &CheckConfig) -> Result<CheckReport> {
    cfg.validate()?;
    let lambda = cfg.lambda;
    let n = cfg.n_steps;
    let idx = time_indices(&cfg.times, n);
    let direct_spec = LawSpec::unit(Law::VervaatNegBridge { lambda }, n)?;
    let built_spec = LawSpec::unit(Law::DecomposedNeg { lambda }, n)?;
    let observe = |spec: &LawSpec, seed: u64| {
        par_streams(seed, cfg.n_paths, |_, rng| {
            let p = sample_with(spec, cfg.transform, rng)?;
            if p.n_steps() != n {
                return Err(Error::InvalidArgument("ensembles differ in n_steps".into()));
            }
            let rm = running_min(&p);
            let mut out: Vec<f64> = idx.iter().map(|&k| p.values()[k]).collect();
            out.extend(idx.iter().map(|&k| rm.values()[k]));
            Ok(out)
        })
    };
    let width = 2 * idx.len();
    let a = transpose(&observe(&direct_spec, stream_seed(cfg, "direct"))?, width);
    let b = transpose(&observe(&built_spec, reference_seed(cfg, "decomposed"))?, width);
    let p_min = cfg.threshold("p_min")?;
    let mut cells = Vec::with_capacity(width);
    for j in 0..width {
        let (what, t) = if j < idx.len() {
            ("value", cfg.times[j])
        } else {
            ("running-min", cfg.times[j - idx.len()])
        };
        let ks = ks_two_sample(&EmpiricalSample::new(a[j].clone()), &EmpiricalSample::new(b[j].clone()))?;
        let p = bonferroni(ks.p_value, width);
        cells.push(Cell::at_least(format!("{what} t={t}"), p, p_min).with_estimate(ks.statistic).with_p(p));
    }
    Ok(CheckReport::from_cells(
        cfg,
        cells,
        vec![format!("two-sample KS, Bonferroni factor {width}; estimate is the KS distance")],
    ))
}
