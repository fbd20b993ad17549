//! Shared numerical substrate: quadrature, special functions, statistics.

pub mod quadrature;
pub mod special;
pub mod stats;

use std::ops::Range;

pub use quadrature::{adaptive_quadrature, adaptive_quadrature_to_infinity, GaussLegendre, QuadratureSpec};
pub use special::{erf, erfc, incomplete_gamma_tail, normal_cdf};
pub use stats::{
    chi_square_2d, ks_one_sample, ks_two_sample, DriftAccumulator, DriftRegression, EmpiricalSample,
    KsResult,
};

use crate::error::{invalid, Error, Result};
use crate::path::PathGrid;

/// Regresses path increments on a predicted drift over a window of steps.
///
/// For every path `i` and step `k` in `window`, the residual is
/// `values[k+1] − values[k] − μ(k, path)·Δ`. Steps are binned into `n_bins`
/// equal slices of the window for the per-bin report.
pub fn drift_regression<F>(
    ensemble: &[PathGrid],
    predicted_drift: F,
    window: Range<usize>,
    n_bins: usize,
) -> Result<DriftRegression>
where
    F: Fn(usize, &PathGrid) -> f64,
{
    let first = ensemble
        .first()
        .ok_or_else(|| invalid("drift regression needs a nonempty ensemble"))?;
    let dt = first.dt();
    if window.end > first.n_steps() || window.start >= window.end {
        return Err(invalid(format!(
            "window {:?} outside 0..{}",
            window,
            first.n_steps()
        )));
    }
    let n_bins = n_bins.max(1);
    let width = window.end - window.start;
    let mut acc = DriftAccumulator::new(n_bins);
    for (i, path) in ensemble.iter().enumerate() {
        if path.n_steps() != first.n_steps() {
            return Err(invalid("ensemble paths differ in step count"));
        }
        let v = path.values();
        for k in window.clone() {
            let mu = predicted_drift(k, path);
            if !mu.is_finite() {
                return Err(Error::NonFiniteDrift { path: i, step: k });
            }
            let bin = ((k - window.start) * n_bins / width).min(n_bins - 1);
            acc.push(bin, v[k + 1] - v[k] - mu * dt);
        }
    }
    let edges: Vec<f64> = (0..=n_bins)
        .map(|b| (window.start + b * width / n_bins) as f64 * dt)
        .collect();
    Ok(acc.finish(dt, &edges))
}
