//! Checks built on the three-dimensional Bessel process: the joint law of
//! `(R_t, θ^λ_t)`, the martingale `F^λ`, reweighting and the drift of the
//! transformed bridge to `λ > 0`.

use rand::Rng;

use crate::analytic::{drift_pos_bridge, f as f_lambda, DriftState};
use crate::error::{Error, Result};
use crate::numerics::special::erfc;
use crate::numerics::stats::chi_square_cells;
use crate::numerics::{adaptive_quadrature, DriftAccumulator, QuadratureSpec};
use crate::samplers::crossing::{bridge_hit_probability, last_exit, locate_touch, Crossings};
use crate::samplers::{par_streams, sample_bessel3, sample_with, Law, LawSpec};

use super::config::CheckConfig;
use super::report::{Cell, CheckReport};
use super::{reference_seed, stream_seed, time_indices, MeanAccumulator};

/// Edges of `R_t − λ` in units of `√t` for the joint chi-square grid.
const U_EDGES: [f64; 9] = [0.0, 0.15, 0.3, 0.5, 0.7, 0.95, 1.25, 1.7, f64::INFINITY];
const S_BINS: usize = 8;

/// Probability that `R_t − λ ∈ [u0, u1)` and `θ^λ_t ∈ [s0, s1)`, from the
/// joint density integrated in closed form over `y` and by quadrature over `s`.
pub fn joint_cell_mass(t: f64, lambda: f64, u: (f64, f64), s: (f64, f64), quad: &QuadratureSpec) -> Result<f64> {
    let (u0, u1) = u;
    let (s0, s1) = s;
    if !(0.0 <= s0 && s0 < s1 && s1 <= t && 0.0 <= u0 && u0 < u1) {
        return Err(Error::InvalidArgument(format!("bad cell u={u:?} s={s:?}")));
    }
    let integrand = |w: f64| {
        // s = t − w², ds = 2w dw
        let tau = w * w;
        let s = t - tau;
        if s <= 0.0 || tau <= 0.0 {
            return 0.0;
        }
        let rt = tau.sqrt();
        let g0 = (-u0 * u0 / (2.0 * tau)).exp();
        let (g1, ug1) = if u1.is_finite() {
            let g = (-u1 * u1 / (2.0 * tau)).exp();
            (g, u1 * g)
        } else {
            (0.0, 0.0)
        };
        let dphi = 0.5 * (erfc(u0 / (rt * std::f64::consts::SQRT_2)) - erfc(u1 / (rt * std::f64::consts::SQRT_2)));
        let a = tau * (u0 * g0 - ug1) + tau * rt * (2.0 * std::f64::consts::PI).sqrt() * dphi;
        let b = tau * (g0 - g1);
        let pref = lambda * (-lambda * lambda / (2.0 * s)).exp() / (std::f64::consts::PI * s.powf(1.5) * tau * rt);
        pref * (a + lambda * b) * 2.0 * w
    };
    let (v, _) = adaptive_quadrature(integrand, (t - s1).sqrt(), (t - s0).sqrt(), quad)?;
    Ok(v)
}

/// Chi-square of `(R_t, θ^λ_t)` on `{R_t > λ}` against the joint density.
pub fn check_joint_r_theta(cfg: &CheckConfig) -> Result<CheckReport> {
    cfg.validate()?;
    let (t, lambda, n) = (cfg.horizon, cfg.lambda, cfg.n_steps);
    let dt = t / n as f64;
    let draws = par_streams(stream_seed(cfg, "bessel3"), cfg.n_paths, |_, rng| {
        let r = sample_bessel3(t, n, rng)?;
        let y = r.end();
        Ok((y > lambda).then(|| (y - lambda, last_exit(cfg.crossings, r.values(), dt, lambda, n, rng))))
    })?;
    let hits: Vec<(f64, f64)> = draws.into_iter().flatten().collect();
    if hits.is_empty() {
        return Ok(CheckReport::inconclusive(
            cfg,
            format!("no path ended above λ = {lambda}; the event is empty at this sample size"),
        ));
    }
    let root = t.sqrt();
    let u_edges: Vec<f64> = U_EDGES.iter().map(|e| e * root).collect();
    let s_edges: Vec<f64> = (0..=S_BINS).map(|i| t * i as f64 / S_BINS as f64).collect();
    let (nu, ns) = (u_edges.len() - 1, S_BINS);
    let mut observed = vec![0.0; nu * ns];
    for &(u, s) in &hits {
        let iu = u_edges.partition_point(|&e| e <= u) - 1;
        let is = (s_edges.partition_point(|&e| e <= s) - 1).min(ns - 1);
        observed[iu * ns + is] += 1.0;
    }
    let mut mass = vec![0.0; nu * ns];
    for iu in 0..nu {
        for is in 0..ns {
            mass[iu * ns + is] = joint_cell_mass(
                t,
                lambda,
                (u_edges[iu], u_edges[iu + 1]),
                (s_edges[is], s_edges[is + 1]),
                &cfg.quad,
            )?;
        }
    }
    let event_mass: f64 = mass.iter().sum();
    let chi = chi_square_cells(&observed, &mass, hits.len() as f64)?;
    let n_paths = cfg.n_paths as f64;
    let p_hat = hits.len() as f64 / n_paths;
    let se = (event_mass * (1.0 - event_mass) / n_paths).sqrt();
    let cells = vec![
        Cell::at_least("chi-square p", chi.p_value, cfg.threshold("p_min")?)
            .with_p(chi.p_value)
            .with_estimate(chi.statistic),
        Cell::at_least("occupied cells", chi.cells as f64, cfg.threshold("min_cells")?),
        Cell::at_most("event probability |z|", ((p_hat - event_mass) / se).abs(), cfg.threshold("z_max")?)
            .with_estimate(p_hat)
            .with_se(se),
    ];
    Ok(CheckReport::from_cells(
        cfg,
        cells,
        vec![
            format!("chi-square {} on {} dof", chi.statistic, chi.dof),
            format!("event mass from the joint density: {event_mass}"),
        ],
    ))
}

fn bessel_lambdas(cfg: &CheckConfig) -> Vec<f64> {
    if cfg.lambdas.is_empty() {
        vec![cfg.lambda]
    } else {
        cfg.lambdas.clone()
    }
}

fn f_at(t: f64, y: f64, theta: f64, lambda: f64) -> Result<f64> {
    f_lambda(DriftState::new(t, y, theta)?, lambda)
}

/// Monte Carlo mean of `F^λ(t, R_t, θ^λ_t)` against 1.
pub fn check_martingale_mean_one(cfg: &CheckConfig) -> Result<CheckReport> {
    cfg.validate()?;
    let n = cfg.n_steps;
    let dt = 1.0 / n as f64;
    let lambdas = bessel_lambdas(cfg);
    let idx = time_indices(&cfg.times, n);
    let k_max = *idx.iter().max().expect("times validated nonempty");
    let values = par_streams(stream_seed(cfg, "bessel3"), cfg.n_paths, |_, rng| {
        let r = sample_bessel3(k_max as f64 * dt, k_max, rng)?;
        let mut out = Vec::with_capacity(lambdas.len() * idx.len());
        for &lambda in &lambdas {
            for &k in &idx {
                let theta = last_exit(cfg.crossings, r.values(), dt, lambda, k, rng);
                out.push(f_at(k as f64 * dt, r.values()[k], theta, lambda)?);
            }
        }
        Ok(out)
    })?;
    let mut acc = vec![MeanAccumulator::default(); lambdas.len() * idx.len()];
    for row in &values {
        for (a, &x) in acc.iter_mut().zip(row) {
            a.push(x);
        }
    }
    let z_max = cfg.threshold("z_max")?;
    let mut cells = Vec::new();
    for (i, &lambda) in lambdas.iter().enumerate() {
        for (j, &k) in idx.iter().enumerate() {
            let a = &acc[i * idx.len() + j];
            let (m, se) = (a.mean(), a.se());
            cells.push(
                Cell::at_most(format!("lambda={lambda} t={}", k as f64 * dt), ((m - 1.0) / se).abs(), z_max)
                    .with_estimate(m)
                    .with_se(se),
            );
        }
    }
    Ok(CheckReport::from_cells(cfg, cells, vec!["statistic is |mean − 1| / SE".into()]))
}

/// `E[Φ(R_t) F^λ(t, R_t, θ^λ_t)]` against `E[Φ(V_t)]` for the transformed
/// bridge to `λ`, with `Φ ∈ {y, y², 1_{y>λ}}`.
pub fn check_reweighting(cfg: &CheckConfig) -> Result<CheckReport> {
    cfg.validate()?;
    let (lambda, n) = (cfg.lambda, cfg.n_steps);
    let dt = 1.0 / n as f64;
    let idx = time_indices(&cfg.times, n);
    let k_max = *idx.iter().max().expect("times validated nonempty");
    let phis = |y: f64| [y, y * y, if y > lambda { 1.0 } else { 0.0 }];
    const NAMES: [&str; 3] = ["y", "y^2", "1{y>lambda}"];
    let weighted = par_streams(stream_seed(cfg, "bessel3"), cfg.n_paths, |_, rng| {
        let r = sample_bessel3(k_max as f64 * dt, k_max, rng)?;
        let mut out = Vec::with_capacity(3 * idx.len());
        for &k in &idx {
            let y = r.values()[k];
            let theta = last_exit(cfg.crossings, r.values(), dt, lambda, k, rng);
            let w = f_at(k as f64 * dt, y, theta, lambda)?;
            out.extend(phis(y).iter().map(|p| p * w));
        }
        Ok(out)
    })?;
    let spec = LawSpec::unit(Law::VervaatPosBridge { lambda }, n)?;
    let direct = par_streams(reference_seed(cfg, "vervaat"), cfg.n_paths, |_, rng| {
        let v = sample_with(&spec, cfg.transform, rng)?;
        Ok(idx.iter().flat_map(|&k| phis(v.values()[k])).collect::<Vec<_>>())
    })?;
    let width = 3 * idx.len();
    let (mut wa, mut da) = (vec![MeanAccumulator::default(); width], vec![MeanAccumulator::default(); width]);
    for (row_w, row_d) in weighted.iter().zip(&direct) {
        for j in 0..width {
            wa[j].push(row_w[j]);
            da[j].push(row_d[j]);
        }
    }
    let z_max = cfg.threshold("z_max")?;
    let mut cells = Vec::new();
    for (ti, &k) in idx.iter().enumerate() {
        for (pi, name) in NAMES.iter().enumerate() {
            let j = ti * 3 + pi;
            let diff = wa[j].mean() - da[j].mean();
            let se = (wa[j].se().powi(2) + da[j].se().powi(2)).sqrt();
            cells.push(
                Cell::at_most(format!("phi={name} t={}", k as f64 * dt), (diff / se).abs(), z_max)
                    .with_estimate(diff)
                    .with_se(se),
            );
        }
    }
    Ok(CheckReport::from_cells(
        cfg,
        cells,
        vec!["statistic is |reweighted − direct| / combined SE; estimate is the difference".into()],
    ))
}

/// Increment regression of the transformed bridge to `λ > 0` on its drift
/// `1/y + ∂₂F^λ/F^λ`, with the `F^λ` correction removed as a power control.
pub fn check_drift_pos_bridge(cfg: &CheckConfig) -> Result<CheckReport> {
    cfg.validate()?;
    let (lambda, n) = (cfg.lambda, cfg.n_steps);
    let dt = 1.0 / n as f64;
    let end = ((cfg.threshold("window_end")? * n as f64).floor() as usize).clamp(2, n);
    // the drift 1/y is infinite at t = 0
    let window = 1..end;
    let n_bins = 10;
    let spec = LawSpec::unit(Law::VervaatPosBridge { lambda }, n)?;
    // Variance uses trapezoid residuals ΔV − ½(μ_k + μ_{k+1})Δ: the Euler
    // residual variance is Δ(1 + E[∂_y μ]Δ), a bias far above the SE here.
    let accs = par_streams(stream_seed(cfg, "paths"), cfg.n_paths, |i, rng| {
        let v = sample_with(&spec, cfg.transform, rng)?;
        let vals = v.values();
        let mut full = DriftAccumulator::new(n_bins);
        let mut bare = DriftAccumulator::new(n_bins);
        let mut zero = DriftAccumulator::new(n_bins);
        let mut trap = DriftAccumulator::new(n_bins);
        let mut theta = 0.0;
        let mut prev: Option<(usize, f64, f64)> = None;
        for k in 0..=window.end.min(n - 1) {
            if vals[k] <= lambda {
                theta = k as f64 * dt;
            } else if k > 0 && cfg.crossings == Crossings::Bridge {
                let (a, b) = (vals[k - 1], vals[k]);
                if rng.random::<f64>() < bridge_hit_probability(a, b, lambda, dt) {
                    theta = (k - 1) as f64 * dt + locate_touch(a, b, lambda, dt, true, rng);
                }
            }
            if k < window.start {
                continue;
            }
            let (t, y) = (k as f64 * dt, vals[k]);
            let mu = drift_pos_bridge(DriftState::new(t, y, theta)?, lambda)?;
            if !mu.is_finite() {
                return Err(Error::NonFiniteDrift { path: i, step: k });
            }
            if let Some((bin, inc, mu_prev)) = prev {
                trap.push(bin, inc - 0.5 * (mu_prev + mu) * dt);
            }
            if k >= window.end {
                break;
            }
            let bin = ((k - window.start) * n_bins / window.len()).min(n_bins - 1);
            let inc = vals[k + 1] - y;
            full.push(bin, inc - mu * dt);
            bare.push(bin, inc - dt / y);
            zero.push(bin, inc);
            prev = (k + 1 < n).then_some((bin, inc, mu));
        }
        Ok([full, bare, zero, trap])
    })?;
    let mut tot: [DriftAccumulator; 4] = std::array::from_fn(|_| DriftAccumulator::new(n_bins));
    for a in &accs {
        for (t, x) in tot.iter_mut().zip(a) {
            t.merge(x);
        }
    }
    let [full, bare, zero, trap] = tot;
    let edges: Vec<f64> = (0..=n_bins)
        .map(|b| (window.start + b * window.len() / n_bins) as f64 * dt)
        .collect();
    let reg = full.finish(dt, &edges);
    let no_f = bare.finish(dt, &edges);
    let power = zero.finish(dt, &edges);
    let qv = trap.finish(dt, &edges);
    let var_z = (qv.residual_variance_ratio - 1.0) / qv.residual_variance_se;
    let cells = vec![
        Cell::at_most("drift |z|", reg.z.abs(), cfg.threshold("z_max")?).with_estimate(reg.z),
        Cell::at_least("power: zero drift |z|", power.z.abs(), cfg.threshold("power_z_min")?)
            .with_estimate(power.z),
        Cell::at_most("residual variance / dt, |z|", var_z.abs(), cfg.threshold("var_z_max")?)
            .with_estimate(qv.residual_variance_ratio)
            .with_se(qv.residual_variance_se),
    ];
    let mut notes = vec![
        format!("window steps {}..{} of {n}; {} residuals", window.start, window.end, reg.count),
        format!(
            "Euler residual variance / dt {:.5} ± {:.5}",
            reg.residual_variance_ratio, reg.residual_variance_se
        ),
        format!("drift 1/y alone (F-term removed): z = {:.3}", no_f.z),
    ];
    notes.extend(reg.bins.iter().map(|b| {
        format!(
            "bin [{:.3}, {:.3}): drift error {:.4} ± {:.4}",
            b.t_lo, b.t_hi, b.mean_drift_error, b.se
        )
    }));
    Ok(CheckReport::from_cells(cfg, cells, notes))
}
