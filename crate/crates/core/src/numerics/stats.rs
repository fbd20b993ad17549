//! Goodness-of-fit statistics used by the verification harness.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::special::chi_square_sf;

/// Sample values with optional positive weights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmpiricalSample {
    pub values: Vec<f64>,
    pub weights: Option<Vec<f64>>,
}

impl EmpiricalSample {
    pub fn new(values: Vec<f64>) -> Self {
        EmpiricalSample {
            values,
            weights: None,
        }
    }

    pub fn weighted(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != values.len() {
            return Err(invalid("weights and values differ in length"));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(invalid("weights must be positive and finite"));
        }
        Ok(EmpiricalSample {
            values,
            weights: Some(weights),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Kish effective sample size; `n` when unweighted.
    pub fn effective_size(&self) -> f64 {
        match &self.weights {
            None => self.values.len() as f64,
            Some(w) if w.is_empty() => self.values.len() as f64,
            Some(w) => {
                let s: f64 = w.iter().sum();
                let s2: f64 = w.iter().map(|x| x * x).sum();
                s * s / s2
            }
        }
    }

    /// Sorted (value, normalized weight) pairs.
    fn sorted_atoms(&self) -> Vec<(f64, f64)> {
        let n = self.values.len();
        let mut atoms: Vec<(f64, f64)> = match &self.weights {
            Some(w) if !w.is_empty() => {
                let total: f64 = w.iter().sum();
                self.values
                    .iter()
                    .zip(w)
                    .map(|(&v, &wi)| (v, wi / total))
                    .collect()
            }
            _ => self.values.iter().map(|&v| (v, 1.0 / n as f64)).collect(),
        };
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        atoms
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub n_effective: f64,
    pub p_value: f64,
}

/// `P(K > x)` for the Kolmogorov distribution, series truncated at 100 terms.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        // theta-function form converges fast for small x
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let mut cdf = 0.0;
        for k in 1..=100 {
            let m = (2 * k - 1) as f64;
            let term = (-m * m * pi2 / (8.0 * x * x)).exp();
            cdf += term;
            if term < 1e-300 {
                break;
            }
        }
        cdf *= (2.0 * std::f64::consts::PI).sqrt() / x;
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * x * x).exp();
            sum += if k % 2 == 1 { term } else { -term };
            if term < 1e-300 {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

/// One-sample Kolmogorov–Smirnov test against a continuous `cdf`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &EmpiricalSample, cdf: F) -> Result<KsResult> {
    if sample.len() < 10 {
        return Err(invalid(format!(
            "KS test needs at least 10 points, got {}",
            sample.len()
        )));
    }
    let atoms = sample.sorted_atoms();
    let mut cum = 0.0;
    let mut d: f64 = 0.0;
    let mut prev_cdf = f64::NEG_INFINITY;
    let mut i = 0;
    while i < atoms.len() {
        let x = atoms[i].0;
        let f = cdf(x);
        if !(f >= prev_cdf - 1e-15) || !(0.0..=1.0 + 1e-12).contains(&f) {
            return Err(Error::NonMonotoneCdf { index: i });
        }
        prev_cdf = f;
        // F̂(x⁻) then F̂(x) after absorbing ties
        d = d.max((f - cum).abs());
        while i < atoms.len() && atoms[i].0 == x {
            cum += atoms[i].1;
            i += 1;
        }
        d = d.max((cum - f).abs());
    }
    let n_eff = sample.effective_size();
    Ok(KsResult {
        statistic: d,
        n_effective: n_eff,
        p_value: kolmogorov_sf(n_eff.sqrt() * d),
    })
}

/// Two-sample Kolmogorov–Smirnov test.
pub fn ks_two_sample(a: &EmpiricalSample, b: &EmpiricalSample) -> Result<KsResult> {
    if a.len() < 10 || b.len() < 10 {
        return Err(invalid("two-sample KS needs at least 10 points per sample"));
    }
    let xa = a.sorted_atoms();
    let xb = b.sorted_atoms();
    let (mut i, mut j) = (0, 0);
    let (mut ca, mut cb) = (0.0, 0.0);
    let mut d: f64 = 0.0;
    while i < xa.len() || j < xb.len() {
        let x = match (xa.get(i), xb.get(j)) {
            (Some(p), Some(q)) => p.0.min(q.0),
            (Some(p), None) => p.0,
            (None, Some(q)) => q.0,
            (None, None) => unreachable!(),
        };
        while i < xa.len() && xa[i].0 == x {
            ca += xa[i].1;
            i += 1;
        }
        while j < xb.len() && xb[j].0 == x {
            cb += xb[j].1;
            j += 1;
        }
        d = d.max((ca - cb).abs());
    }
    let (n, m) = (a.effective_size(), b.effective_size());
    let n_eff = n * m / (n + m);
    Ok(KsResult {
        statistic: d.min(1.0),
        n_effective: n_eff,
        p_value: kolmogorov_sf(n_eff.sqrt() * d),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Cells left after pooling sparse bins.
    pub cells: usize,
}

/// Pearson chi-square of 2-D sample pairs against rectangle masses.
///
/// `bin_mass(x0, x1, y0, y1)` returns the model probability of a cell; the
/// masses are renormalized to the sample's conditioning event. Cells whose
/// expected count falls below 5 are pooled into one cell.
pub fn chi_square_2d<M>(
    pairs: &[(f64, f64)],
    x_edges: &[f64],
    y_edges: &[f64],
    mut bin_mass: M,
) -> Result<ChiSquareResult>
where
    M: FnMut(f64, f64, f64, f64) -> Result<f64>,
{
    if x_edges.len() < 2 || y_edges.len() < 2 {
        return Err(invalid("need at least one bin per axis"));
    }
    if !x_edges.windows(2).all(|w| w[0] < w[1]) || !y_edges.windows(2).all(|w| w[0] < w[1]) {
        return Err(invalid("bin edges must be strictly increasing"));
    }
    let nx = x_edges.len() - 1;
    let ny = y_edges.len() - 1;
    let mut observed = vec![0.0; nx * ny];
    let mut n_in = 0.0;
    for &(x, y) in pairs {
        let (Some(ix), Some(iy)) = (locate(x_edges, x), locate(y_edges, y)) else {
            continue;
        };
        observed[ix * ny + iy] += 1.0;
        n_in += 1.0;
    }
    let mut mass = vec![0.0; nx * ny];
    for ix in 0..nx {
        for iy in 0..ny {
            mass[ix * ny + iy] =
                bin_mass(x_edges[ix], x_edges[ix + 1], y_edges[iy], y_edges[iy + 1])?;
        }
    }
    chi_square_cells(&observed, &mass, n_in)
}

/// Pearson chi-square on flat cell arrays with pooling of sparse cells.
pub fn chi_square_cells(observed: &[f64], mass: &[f64], n: f64) -> Result<ChiSquareResult> {
    let total_mass: f64 = mass.iter().sum();
    if !(total_mass > 0.0) {
        return Err(invalid("bin masses sum to zero"));
    }
    let mut stat = 0.0;
    let mut cells = 0usize;
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (o, m) in observed.iter().zip(mass) {
        let e = n * m / total_mass;
        if e < 5.0 {
            pooled_obs += o;
            pooled_exp += e;
            continue;
        }
        stat += (o - e) * (o - e) / e;
        cells += 1;
    }
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
        cells += 1;
    } else if pooled_obs > 0.0 {
        stat = f64::INFINITY;
        cells += 1;
    }
    if cells < 2 {
        return Err(invalid("fewer than two usable chi-square cells"));
    }
    let dof = cells - 1;
    Ok(ChiSquareResult {
        statistic: stat,
        dof,
        p_value: chi_square_sf(stat, dof as f64),
        cells,
    })
}

fn locate(edges: &[f64], x: f64) -> Option<usize> {
    if !(x >= edges[0]) || !(x < edges[edges.len() - 1]) {
        return None;
    }
    let i = edges.partition_point(|&e| e <= x);
    Some(i - 1)
}

/// Streaming accumulator for drift regressions.
///
/// Residuals are `ΔV − μ(t_k)Δ` with `μ` evaluated at the left endpoint.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DriftAccumulator {
    pub sum: f64,
    pub sum_sq: f64,
    pub sum_fourth: f64,
    pub count: u64,
    pub bin_sum: Vec<f64>,
    pub bin_sum_sq: Vec<f64>,
    pub bin_count: Vec<u64>,
}

impl DriftAccumulator {
    pub fn new(n_bins: usize) -> Self {
        DriftAccumulator {
            bin_sum: vec![0.0; n_bins],
            bin_sum_sq: vec![0.0; n_bins],
            bin_count: vec![0; n_bins],
            ..Default::default()
        }
    }

    pub fn push(&mut self, bin: usize, residual: f64) {
        let r2 = residual * residual;
        self.sum += residual;
        self.sum_sq += r2;
        self.sum_fourth += r2 * r2;
        self.count += 1;
        if let Some(s) = self.bin_sum.get_mut(bin) {
            *s += residual;
            self.bin_sum_sq[bin] += r2;
            self.bin_count[bin] += 1;
        }
    }

    pub fn merge(&mut self, other: &DriftAccumulator) {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.sum_fourth += other.sum_fourth;
        self.count += other.count;
        for i in 0..self.bin_sum.len().min(other.bin_sum.len()) {
            self.bin_sum[i] += other.bin_sum[i];
            self.bin_sum_sq[i] += other.bin_sum_sq[i];
            self.bin_count[i] += other.bin_count[i];
        }
    }

    pub fn finish(&self, dt: f64, t_edges: &[f64]) -> DriftRegression {
        let n = self.count as f64;
        let z = if self.count == 0 {
            0.0
        } else {
            self.sum / (n * dt).sqrt()
        };
        let mean_sq = if self.count == 0 { 0.0 } else { self.sum_sq / n };
        let var_ratio = mean_sq / dt;
        let var_se = if self.count < 2 {
            f64::INFINITY
        } else {
            let m4 = self.sum_fourth / n;
            ((m4 - mean_sq * mean_sq).max(0.0) / n).sqrt() / dt
        };
        let bins = (0..self.bin_sum.len())
            .map(|i| {
                let c = self.bin_count[i] as f64;
                let (mean_drift_error, se) = if self.bin_count[i] > 1 {
                    let m = self.bin_sum[i] / c;
                    let v = (self.bin_sum_sq[i] / c - m * m).max(0.0);
                    (m / dt, (v / c).sqrt() / dt)
                } else {
                    (0.0, f64::INFINITY)
                };
                DriftBin {
                    t_lo: t_edges.get(i).copied().unwrap_or(f64::NAN),
                    t_hi: t_edges.get(i + 1).copied().unwrap_or(f64::NAN),
                    count: self.bin_count[i],
                    mean_drift_error,
                    se,
                }
            })
            .collect();
        DriftRegression {
            z,
            count: self.count,
            residual_variance_ratio: var_ratio,
            residual_variance_se: var_se,
            bins,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftBin {
    pub t_lo: f64,
    pub t_hi: f64,
    pub count: u64,
    /// Mean residual per unit time, i.e. realized minus predicted drift.
    pub mean_drift_error: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftRegression {
    /// `Σr / √(count·Δ)`; standard normal under a correct drift.
    pub z: f64,
    pub count: u64,
    /// Mean squared residual over `Δ`.
    pub residual_variance_ratio: f64,
    pub residual_variance_se: f64,
    pub bins: Vec<DriftBin>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_sf_known_points() {
        // classical critical values
        assert!((kolmogorov_sf(1.358_099) - 0.05).abs() < 1e-5);
        assert!((kolmogorov_sf(1.627_624) - 0.01).abs() < 1e-5);
        assert!((kolmogorov_sf(1.949_591) - 0.001).abs() < 1e-5);
        // both branches agree at the switch
        assert!((kolmogorov_sf(1.0 - 1e-12) - kolmogorov_sf(1.0)).abs() < 1e-9);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn point_mass_against_uniform() {
        let s = EmpiricalSample::new(vec![0.3; 20]);
        let r = ks_one_sample(&s, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((r.statistic - 0.7).abs() < 1e-12);
    }

    #[test]
    fn empty_weights_are_uniform() {
        let v: Vec<f64> = (0..50).map(|i| (i as f64 + 0.5) / 50.0).collect();
        let plain = ks_one_sample(&EmpiricalSample::new(v.clone()), |x| x).unwrap();
        let w = EmpiricalSample {
            values: v,
            weights: Some(vec![]),
        };
        let r = ks_one_sample(&w, |x| x).unwrap();
        assert_eq!(plain, r);
    }

    #[test]
    fn non_monotone_cdf_rejected() {
        let s = EmpiricalSample::new((0..20).map(|i| i as f64).collect());
        let err = ks_one_sample(&s, |x| if x > 10.0 { 0.1 } else { 0.5 }).unwrap_err();
        assert!(matches!(err, Error::NonMonotoneCdf { .. }));
    }

    #[test]
    fn two_sample_identical_and_disjoint() {
        let a = EmpiricalSample::new((0..100).map(|i| i as f64).collect());
        let r = ks_two_sample(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        let b = EmpiricalSample::new((0..100).map(|i| 1000.0 + i as f64).collect());
        let r = ks_two_sample(&a, &b).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert!((r.n_effective - 50.0).abs() < 1e-12);
    }

    #[test]
    fn too_small_samples_rejected() {
        let s = EmpiricalSample::new(vec![0.1, 0.2]);
        assert!(ks_one_sample(&s, |x| x).is_err());
    }

    #[test]
    fn chi_square_all_mass_in_one_bin() {
        let pairs: Vec<(f64, f64)> = (0..1000).map(|_| (0.1, 0.1)).collect();
        let edges = [0.0, 0.5, 1.0];
        let r = chi_square_2d(&pairs, &edges, &edges, |x0, x1, y0, y1| {
            Ok((x1 - x0) * (y1 - y0))
        })
        .unwrap();
        assert!(r.statistic > 1000.0);
        assert_eq!(r.dof, 3);
        assert!(r.p_value < 1e-100);
    }

    #[test]
    fn chi_square_dof_counts_cells() {
        let observed = [10.0, 10.0, 10.0, 0.0];
        let mass = [1.0, 1.0, 1.0, 0.01];
        let r = chi_square_cells(&observed, &mass, 30.0).unwrap();
        // last cell pooled alone
        assert_eq!(r.cells, 4);
        assert_eq!(r.dof, 3);
    }

    #[test]
    fn drift_accumulator_merge_is_order_independent() {
        let mut a = DriftAccumulator::new(2);
        let mut b = DriftAccumulator::new(2);
        for i in 0..10 {
            a.push(i % 2, i as f64 * 0.1);
            b.push((i + 1) % 2, -(i as f64) * 0.05);
        }
        let mut ab = a.clone();
        ab.merge(&b);
        let mut ba = b.clone();
        ba.merge(&a);
        assert_eq!(ab.count, ba.count);
        assert!((ab.sum - ba.sum).abs() < 1e-15);
        assert_eq!(ab.bin_count, ba.bin_count);
    }
}
