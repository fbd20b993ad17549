//! Checks on the transformed Brownian motion: the law of its first zero
//! and its drift before and after that zero.

use rand::Rng;

use crate::analytic::{
    arcsine_cdf, drift_bm_after, drift_bm_before_from_parts, endpoint_given_t0_cdf, FdotSign, JEvaluator,
    MixtureTracker,
};
use crate::error::{Error, Result};
use crate::numerics::{ks_one_sample, DriftAccumulator, DriftRegression, EmpiricalSample};
use crate::path::{detect_split, SplitKind};
use crate::samplers::crossing::{first_touch_time, Crossings};
use crate::samplers::{
    bridge_interval_min, par_streams, sample_bm, vervaat_shifted, ShiftedPath};

use super::config::CheckConfig;
use super::report::{Cell, CheckReport};
use super::stream_seed;

/// Transformed Brownian path with its node offset and wrap index.
fn transformed_bm<R: Rng + ?Sized>(cfg: &CheckConfig, rng: &mut R) -> Result<ShiftedPath> {
    let b = sample_bm(1.0, cfg.n_steps, rng)?;
    Ok(vervaat_shifted(&b, cfg.transform, rng))
}

/// First zero after time 0 in node time: the first interior node at or below
/// 0, or the refined touch of 0 between nodes. Before the wrap the path stays
/// above its minimum, so touches are only searched after it.
fn first_zero<R: Rng + ?Sized>(cfg: &CheckConfig, s: &ShiftedPath, rng: &mut R) -> Result<Option<f64>> {
    match cfg.crossings {
        Crossings::Grid => Ok(detect_split(&s.path, SplitKind::T0Bm, 0.0)?.map(|r| r.split_time)),
        Crossings::Bridge => Ok(first_touch_time(s.path.values(), s.path.dt(), 0.0, s.return_search_start(), rng)),
    }
}

/// Arcsine quantile, used for equal-mass bins of the first zero.
fn arcsine_quantile(q: f64) -> f64 {
    let s = (std::f64::consts::FRAC_PI_2 * q).sin();
    s * s
}

/// Law of the first zero `T̃₀`, its link with the endpoint sign, and the
/// endpoint law given `T̃₀`.
pub fn check_t0_laws(cfg: &CheckConfig) -> Result<CheckReport> {
    cfg.validate()?;
    let draws = par_streams(stream_seed(cfg, "paths"), cfg.n_paths, |_, rng| {
        let s = transformed_bm(cfg, rng)?;
        let t0 = first_zero(cfg, &s, rng)?.map(|t| (t + s.offset).min(1.0 - 1e-12));
        Ok((t0, s.path.end()))
    })?;
    let n = draws.len() as f64;
    let hits: Vec<(f64, f64)> = draws.iter().filter_map(|&(t0, v1)| t0.map(|t| (t, v1))).collect();
    let p_hat = hits.len() as f64 / n;
    let se = (0.25 / n).sqrt();
    let agree = draws.iter().filter(|(t0, v1)| t0.is_some() == (*v1 <= 0.0)).count() as f64 / n;
    let ks_arc = ks_one_sample(&EmpiricalSample::new(hits.iter().map(|h| h.0).collect()), arcsine_cdf)?;
    let mut cells = vec![
        Cell::at_most("P(T0 <= 1) |z|", ((p_hat - 0.5) / se).abs(), cfg.threshold("z_max")?)
            .with_estimate(p_hat)
            .with_se(se),
        Cell::at_least("agreement with {V_1 <= 0}", agree, cfg.threshold("agreement_min")?),
        Cell::at_most("arcsine KS", ks_arc.statistic, cfg.threshold("ks_arcsine_max")?).with_p(ks_arc.p_value),
    ];
    let bins = cfg.threshold("t0_bins")?.max(1.0) as usize;
    let ks_end = cfg.threshold("ks_endpoint_max")?;
    for b in 0..bins {
        let (lo, hi) = (arcsine_quantile(b as f64 / bins as f64), arcsine_quantile((b + 1) as f64 / bins as f64));
        // probability integral transform under the conditional law at each path's own T̃₀
        let u: Vec<f64> = hits
            .iter()
            .filter(|(t0, _)| *t0 >= lo && (*t0 < hi || b + 1 == bins))
            .map(|&(t0, v1)| endpoint_given_t0_cdf(t0, v1))
            .collect();
        let label = format!("endpoint KS, T0 in [{lo:.3}, {hi:.3})");
        if u.len() < 10 {
            cells.push(Cell::at_most(label, f64::NAN, ks_end));
            continue;
        }
        let ks = ks_one_sample(&EmpiricalSample::new(u), |x| x.clamp(0.0, 1.0))?;
        cells.push(Cell::at_most(label, ks.statistic, ks_end).with_p(ks.p_value));
    }
    Ok(CheckReport::from_cells(
        cfg,
        cells,
        vec![format!("{} of {} paths have a detected zero", hits.len(), draws.len())],
    ))
}

struct BmAccs {
    before: [DriftAccumulator; 2],
    after: DriftAccumulator,
    after_flipped: DriftAccumulator,
}

/// Increment regressions of the transformed Brownian motion before its
/// first zero (mixture drift) and after it (reflection at the running
/// minimum). Both sign conventions of the `Ḟ` term are regressed; the
/// verdict uses [`FdotSign::Plus`].
pub fn check_drift_bm(cfg: &CheckConfig) -> Result<CheckReport> {
    cfg.validate()?;
    let n = cfg.n_steps;
    let dt = 1.0 / n as f64;
    let buffer = cfg.threshold("buffer")?;
    let k_lo = ((buffer * n as f64).ceil() as usize).max(1);
    let k_hi = ((1.0 - buffer) * n as f64).floor() as usize;
    if k_lo >= k_hi {
        return Err(Error::Config(format!("buffer {buffer} leaves an empty window")));
    }
    let n_bins = 10;
    let bin_of = |k: usize| ((k - k_lo) * n_bins / (k_hi - k_lo)).min(n_bins - 1);
    let jeval = JEvaluator::default();
    let accs = par_streams(stream_seed(cfg, "paths"), cfg.n_paths, |i, rng| {
        let s = transformed_bm(cfg, rng)?;
        let vals = s.path.values();
        let tau = first_zero(cfg, &s, rng)?;
        let mut out = BmAccs {
            before: [DriftAccumulator::new(n_bins), DriftAccumulator::new(n_bins)],
            after: DriftAccumulator::new(n_bins),
            after_flipped: DriftAccumulator::new(n_bins),
        };
        // Before the first zero. No buffer ahead of it: excluding the steps
        // just before T̃₀ would condition on the future. A step containing
        // T̃₀ is compensated up to T̃₀ only; the drift after it starts at 0.
        let before_end = tau.map_or(n, |t| (t / dt).ceil() as usize).min(k_hi);
        let mut tracker = MixtureTracker::new(dt);
        for k in 0..before_end {
            tracker.push(vals[k]);
            if k < k_lo {
                continue;
            }
            let (t, y) = (k as f64 * dt, vals[k]);
            let h = tau.map_or(dt, |t0| (t0 - t).min(dt));
            let mix = tracker.value();
            let (jv, jd) = jeval.eval(t, y);
            let inc = vals[k + 1] - y;
            for (acc, sign) in out.before.iter_mut().zip([FdotSign::Plus, FdotSign::Minus]) {
                let mu = drift_bm_before_from_parts(y, mix, jv, jd, sign);
                if !mu.is_finite() {
                    return Err(Error::NonFiniteDrift { path: i, step: k });
                }
                acc.push(bin_of(k), inc - mu * h);
            }
        }
        if let Some(t0) = tau {
            let j0 = ((t0 / dt).floor() as usize).min(n - 1);
            let start = ((t0 + buffer) / dt).ceil() as usize;
            let mut runmin = match cfg.crossings {
                Crossings::Grid => vals[j0],
                Crossings::Bridge => bridge_interval_min(0.0, vals[j0 + 1], (j0 + 1) as f64 * dt - t0, rng).min(0.0),
            };
            for k in j0 + 1..k_hi {
                runmin = runmin.min(vals[k]);
                if cfg.crossings == Crossings::Bridge && k > j0 + 1 {
                    runmin = runmin.min(bridge_interval_min(vals[k - 1], vals[k], dt, rng));
                }
                if k < start {
                    continue;
                }
                let t = k as f64 * dt;
                let mu = drift_bm_after(t, vals[k], runmin)?;
                let inc = vals[k + 1] - vals[k];
                out.after.push(bin_of(k), inc - mu * dt);
                out.after_flipped.push(bin_of(k), inc + mu * dt);
            }
        }
        Ok(out)
    })?;
    let mut tot = BmAccs {
        before: [DriftAccumulator::new(n_bins), DriftAccumulator::new(n_bins)],
        after: DriftAccumulator::new(n_bins),
        after_flipped: DriftAccumulator::new(n_bins),
    };
    for a in &accs {
        tot.before[0].merge(&a.before[0]);
        tot.before[1].merge(&a.before[1]);
        tot.after.merge(&a.after);
        tot.after_flipped.merge(&a.after_flipped);
    }
    let edges: Vec<f64> = (0..=n_bins)
        .map(|b| (k_lo + b * (k_hi - k_lo) / n_bins) as f64 * dt)
        .collect();
    let plus = tot.before[0].finish(dt, &edges);
    let minus = tot.before[1].finish(dt, &edges);
    let after = tot.after.finish(dt, &edges);
    let flipped = tot.after_flipped.finish(dt, &edges);
    let z_max = cfg.threshold("z_max")?;
    let cells = vec![
        Cell::at_most("before T0 |z|", plus.z.abs(), z_max).with_estimate(plus.z),
        Cell::at_most("after T0 |z|", after.z.abs(), z_max).with_estimate(after.z),
        Cell::at_least("power: after T0 sign flipped |z|", flipped.z.abs(), cfg.threshold("power_z_min")?)
            .with_estimate(flipped.z),
    ];
    let mut notes = vec![
        format!("before T0: {} residuals, after T0: {} residuals", plus.count, after.count),
        format!("alternative sign 1/y - (Fdot + y Jdot)/(F + J): z = {}", minus.z),
    ];
    let describe = |name: &str, r: &DriftRegression| {
        r.bins
            .iter()
            .map(|b| {
                format!(
                    "{name} bin [{:.3}, {:.3}): drift error {:.4} ± {:.4} ({} steps)",
                    b.t_lo, b.t_hi, b.mean_drift_error, b.se, b.count
                )
            })
            .collect::<Vec<_>>()
    };
    notes.extend(describe("before", &plus));
    notes.extend(describe("after", &after));
    Ok(CheckReport::from_cells(cfg, cells, notes))
}
