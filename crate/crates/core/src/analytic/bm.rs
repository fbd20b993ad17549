//! Drift and density of the transformed Brownian motion.
//!
//! Before its first return to 0 the transformed path is compared with the
//! auxiliary process `ξ` (Bessel-3 with probability 1/2, an excursion of
//! arcsine length otherwise). The density is `(F + J)/(1 + J)` where `J`
//! comes from the excursion branch and `F` mixes `F^λ` over a half-normal `λ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::pos_bridge::{scaled_d2f, scaled_f};
use crate::error::{invalid, Error, Result};
use crate::numerics::quadrature::{adaptive_quadrature, GaussLegendre, QuadratureSpec};
use crate::numerics::special::erfc;
use crate::path::{PathGrid, SuffixMinima};

/// `2/√(2π)`, the half-normal density at 0.
const HALF_NORMAL: f64 = 0.797_884_560_802_865_4;
/// Beyond this many standard deviations `(1−t)^{1/2}` the λ-integrands are below `e^{−72}`.
const WINDOW_SD: f64 = 12.0;
/// `e^{−60}` cut for the Gaussian tail in `J`.
const J_TAIL: f64 = 60.0;

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t < 1.0) {
        return Err(invalid(format!("t must lie in [0, 1), got {t}")));
    }
    Ok(())
}

// J and J̇ are split at m = (1+t)/2.
// On (t, m): s = t + y²/2v², integrand (2√2/πy) s/√(1−s) e^{−v²} dv, J̇ gets 2v²/y².
// On (m, 1): s = 1 − r², integrand (2/π) s (s−t)^{−3/2} e^{−y²/2(s−t)} dr, J̇ gets 1/(s−t).

#[inline]
fn j_near(t: f64, y: f64, v: f64) -> (f64, f64) {
    let s = t + y * y / (2.0 * v * v);
    let base = 2.0 * std::f64::consts::SQRT_2 / (PI * y) * s / (1.0 - s).sqrt() * (-v * v).exp();
    (base, base * 2.0 * v * v / (y * y))
}

#[inline]
fn j_far(t: f64, y: f64, r: f64) -> (f64, f64) {
    let s = 1.0 - r * r;
    let u = s - t;
    let base = 2.0 / PI * s / (u * u.sqrt()) * (-y * y / (2.0 * u)).exp();
    (base, base / u)
}

fn j_limits(t: f64, y: f64) -> (f64, f64, f64) {
    let m = 0.5 * (1.0 + t);
    let v0 = y / (1.0 - t).sqrt();
    let v1 = (v0 * v0 + J_TAIL).sqrt();
    (v0, v1, (1.0 - m).sqrt())
}

fn check_jy(t: f64, y: f64) -> Result<()> {
    check_time(t)?;
    if !(y > 0.0 && y.is_finite()) {
        return Err(invalid(format!("y must be positive, got {y}")));
    }
    Ok(())
}

/// `(J_t(y), J̇_t(y))` by adaptive quadrature.
pub fn j_pair(t: f64, y: f64, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    check_jy(t, y)?;
    let (v0, v1, r1) = j_limits(t, y);
    let (ja, _) = adaptive_quadrature(|v| j_near(t, y, v).0, v0, v1, quad)?;
    let (jda, _) = adaptive_quadrature(|v| j_near(t, y, v).1, v0, v1, quad)?;
    let (jb, _) = adaptive_quadrature(|r| j_far(t, y, r).0, 0.0, r1, quad)?;
    let (jdb, _) = adaptive_quadrature(|r| j_far(t, y, r).1, 0.0, r1, quad)?;
    Ok((ja + jb, jda + jdb))
}

pub fn j(t: f64, y: f64, quad: &QuadratureSpec) -> Result<f64> {
    j_pair(t, y, quad).map(|p| p.0)
}

pub fn jdot(t: f64, y: f64, quad: &QuadratureSpec) -> Result<f64> {
    j_pair(t, y, quad).map(|p| p.1)
}

/// Fixed-rule evaluator of `(J, J̇)` for per-step use along paths.
///
/// The near piece is split into geometric panels `[v₀, 2v₀, 4v₀, …)` up to
/// `v = 2`, which resolves the `1/v²` peak when `y ≪ √(1−t)`, and one panel
/// for the Gaussian tail. Relative accuracy is about 1e−10.
#[derive(Debug, Clone)]
pub struct JEvaluator {
    panel: GaussLegendre,
    tail: GaussLegendre,
    far: GaussLegendre,
}

impl Default for JEvaluator {
    fn default() -> Self {
        JEvaluator::new(16, 64, 48)
    }
}

impl JEvaluator {
    pub fn new(panel_nodes: usize, tail_nodes: usize, far_nodes: usize) -> Self {
        JEvaluator {
            panel: GaussLegendre::new(panel_nodes),
            tail: GaussLegendre::new(tail_nodes),
            far: GaussLegendre::new(far_nodes),
        }
    }

    pub fn eval(&self, t: f64, y: f64) -> (f64, f64) {
        let (v0, v1, r1) = j_limits(t, y);
        let (mut j, mut jd) = (0.0, 0.0);
        let mut add = |rule: &GaussLegendre, a: f64, b: f64, f: &dyn Fn(f64) -> (f64, f64)| {
            let h = 0.5 * (b - a);
            let c = 0.5 * (b + a);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let (p, q) = f(c + h * x);
                j += w * h * p;
                jd += w * h * q;
            }
        };
        let near = |v: f64| j_near(t, y, v);
        let mut a = v0;
        while a < 2.0 && 2.0 * a < v1 {
            add(&self.panel, a, 2.0 * a, &near);
            a *= 2.0;
        }
        add(&self.tail, a, v1, &near);
        add(&self.far, 0.0, r1, &|r| j_far(t, y, r));
        (j, jd)
    }
}

/// Values of the λ-mixtures at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureValue {
    pub f: f64,
    pub fdot: f64,
}

/// θ-free part: `(2/√2π) ∫ F¹ e^{−λ²/2} dλ` and its `y`-derivative in closed form.
pub fn f1_mixture(t: f64, y: f64) -> MixtureValue {
    let s2 = 1.0 - t;
    let s = s2.sqrt();
    let tail = (PI / 2.0).sqrt() * erfc(y / (std::f64::consts::SQRT_2 * s));
    let q = -(-y * y / (2.0 * s2)).exp_m1();
    if y <= 1e-8 {
        return MixtureValue {
            f: HALF_NORMAL * (0.5 * y / s + tail),
            fdot: -HALF_NORMAL / (2.0 * s),
        };
    }
    MixtureValue {
        f: HALF_NORMAL * (s * q / y + tail),
        fdot: -HALF_NORMAL * s * q / (y * y),
    }
}

/// θ-dependent part, exact on each λ-interval where `θ^λ` is constant.
///
/// `entries` is the suffix-minimum ladder of the path prefix ending at the
/// current value `y`; `dt` converts indices to times.
fn f2_mixture(t: f64, y: f64, entries: &[(usize, f64)], dt: f64) -> MixtureValue {
    let mut out = MixtureValue { f: 0.0, fdot: 0.0 };
    if !(y > 0.0) || entries.is_empty() {
        return out;
    }
    let s2 = 1.0 - t;
    let s = s2.sqrt();
    let cutoff = (y - WINDOW_SD * s).max(0.0);
    let mut piece = |a: f64, b: f64, theta: f64| {
        if b <= a {
            return;
        }
        let (ua, ub) = (y - a, y - b);
        let eb = (-ub * ub / (2.0 * s2)).exp();
        // e_a = e_b (1 + δ)
        let delta = (-(b - a) * (ua + ub) / (2.0 * s2)).exp_m1();
        let c = HALF_NORMAL * (1.0 - theta);
        out.f += c * eb * -delta / (s * y);
        out.fdot += c * eb * (delta * (s2 + ua * y) + (ua - ub) * y) / (s2 * s * y * y);
    };
    let top = entries.len() - 1;
    for j in (0..top).rev() {
        let (idx, lo) = entries[j];
        let a = lo.max(0.0);
        let b = entries[j + 1].1.min(y);
        piece(a, b, idx as f64 * dt);
        if a <= cutoff {
            return out;
        }
    }
    // λ below the prefix minimum: no visit at or below λ yet
    if entries[0].1 > 0.0 {
        piece(0.0, entries[0].1.min(y), 0.0);
    }
    out
}

/// Incremental `F(t, γ)`, `Ḟ(t, γ)` along a path, one grid step at a time.
#[derive(Debug, Clone)]
pub struct MixtureTracker {
    minima: SuffixMinima,
    dt: f64,
    last: f64,
}

impl MixtureTracker {
    pub fn new(dt: f64) -> Self {
        MixtureTracker {
            minima: SuffixMinima::new(),
            dt,
            last: f64::NAN,
        }
    }

    pub fn push(&mut self, value: f64) {
        self.minima.push(value);
        self.last = value;
    }

    /// Grid index of the last pushed value.
    pub fn index(&self) -> usize {
        self.minima.len().saturating_sub(1)
    }

    pub fn value(&self) -> MixtureValue {
        let t = self.index() as f64 * self.dt;
        let y = self.last;
        let a = f1_mixture(t, y);
        let b = f2_mixture(t, y, self.minima.entries(), self.dt);
        MixtureValue {
            f: a.f + b.f,
            fdot: a.fdot + b.fdot,
        }
    }
}

fn grid_index(t: f64, path: &PathGrid) -> Result<usize> {
    check_time(t)?;
    let k = path.index_of(t);
    if (path.time(k) - t).abs() > 1e-9 * path.dt() {
        return Err(invalid(format!("t = {t} is not a grid time")));
    }
    if k >= path.n_steps() {
        return Err(invalid("t at the final grid node"));
    }
    Ok(k)
}

fn tracker_at(k: usize, path: &PathGrid) -> MixtureTracker {
    let mut tr = MixtureTracker::new(path.dt());
    for &v in &path.values()[..=k] {
        tr.push(v);
    }
    tr
}

/// `F(t, γ)` and `Ḟ(t, γ)` for the path prefix up to grid time `t`.
pub fn mixture(t: f64, path: &PathGrid) -> Result<MixtureValue> {
    let k = grid_index(t, path)?;
    Ok(tracker_at(k, path).value())
}

pub fn f_mix(t: f64, path: &PathGrid) -> Result<f64> {
    mixture(t, path).map(|m| m.f)
}

pub fn fdot_mix(t: f64, path: &PathGrid) -> Result<f64> {
    mixture(t, path).map(|m| m.fdot)
}

/// The same mixtures by plain Gauss–Legendre quadrature in `λ` with
/// `quad.lambda_nodes` nodes, split at `λ = y`.
///
/// Slow and only first-order accurate where `θ^λ` jumps; kept as an
/// independent route for testing.
pub fn mixture_by_lambda_quadrature(t: f64, path: &PathGrid, quad: &QuadratureSpec) -> Result<MixtureValue> {
    quad.validate()?;
    let k = grid_index(t, path)?;
    let y = path.values()[k];
    let minima = SuffixMinima::from_prefix(&path.values()[..=k]);
    let rule = GaussLegendre::new((quad.lambda_nodes / 2).max(1));
    let s = (1.0 - t).sqrt();
    let dt = path.dt();
    let theta = |l: f64| minima.last_exit(l).map_or(0.0, |i| i as f64 * dt);
    let mut out = MixtureValue { f: 0.0, fdot: 0.0 };
    let windows = [((y - WINDOW_SD * s).max(0.0), y.max(0.0)), (y.max(0.0), y.max(0.0) + WINDOW_SD * s)];
    for (a, b) in windows {
        if b <= a {
            continue;
        }
        out.f += rule.integrate(a, b, |l| if l > 0.0 { scaled_f(t, y, theta(l), l) } else { 0.0 });
        out.fdot += rule.integrate(a, b, |l| if l > 0.0 { scaled_d2f(t, y, theta(l), l) } else { 0.0 });
    }
    out.f *= HALF_NORMAL;
    out.fdot *= HALF_NORMAL;
    Ok(out)
}

/// Sign convention for the `Ḟ` term of the drift before the first zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FdotSign {
    /// `1/y + (Ḟ − yJ̇)/(F + J)`, the Girsanov drift of the density `(F+J)/(1+J)`.
    Plus,
    /// `1/y − (Ḟ + yJ̇)/(F + J)`.
    Minus,
}

impl Default for FdotSign {
    fn default() -> Self {
        FdotSign::Plus
    }
}

/// Drift before the first zero from precomputed pieces.
pub fn drift_bm_before_from_parts(y: f64, mix: MixtureValue, jv: f64, jdv: f64, sign: FdotSign) -> f64 {
    let fd = match sign {
        FdotSign::Plus => mix.fdot,
        FdotSign::Minus => -mix.fdot,
    };
    1.0 / y + (fd - y * jdv) / (mix.f + jv)
}

/// Drift of the transformed Brownian motion at grid time `t` before its first zero.
pub fn drift_bm_before(t: f64, path: &PathGrid, quad: &QuadratureSpec) -> Result<f64> {
    let k = grid_index(t, path)?;
    let y = path.values()[k];
    if !(y > 0.0) {
        return Err(Error::Numerical(format!("path value {y} is not positive at t = {t}")));
    }
    if path.values()[1..=k].iter().any(|&v| v <= 0.0) {
        return Err(invalid(format!("t = {t} is after the first zero")));
    }
    let mix = tracker_at(k, path).value();
    let (jv, jdv) = j_pair(t, y, quad)?;
    Ok(drift_bm_before_from_parts(y, mix, jv, jdv, FdotSign::Plus))
}

/// Drift after the first zero: `−(value − runmin)/(1 − t)`.
pub fn drift_bm_after(t: f64, value: f64, runmin: f64) -> Result<f64> {
    if !(t < 1.0) {
        return Err(invalid(format!("t must be below 1, got {t}")));
    }
    Ok(-(value - runmin) / (1.0 - t))
}

/// Density `D_t` of the stopped transformed Brownian motion relative to `ξ`.
pub fn density_d_bm(t: f64, path: &PathGrid, quad: &QuadratureSpec) -> Result<f64> {
    let k = grid_index(t, path)?;
    if k == 0 {
        return Ok(1.0);
    }
    if path.values()[1..=k].iter().any(|&v| v <= 0.0) {
        return Ok(1.0);
    }
    let y = path.values()[k];
    let mix = tracker_at(k, path).value();
    let (jv, _) = j_pair(t, y, quad)?;
    Ok((mix.f + jv) / (1.0 + jv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::pos_bridge::scaled_f1;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn j_monotone_and_positive() {
        let a = j(0.5, 0.01, &q()).unwrap();
        let b = j(0.5, 0.1, &q()).unwrap();
        let c = j(0.5, 1.0, &q()).unwrap();
        assert!(a > b && b > c && c > 0.0);
    }

    #[test]
    fn j_derivative_identity() {
        let (t, y) = (0.3, 0.7);
        let h = 1e-5;
        let fd = (j(t, y + h, &q()).unwrap() - j(t, y - h, &q()).unwrap()) / (2.0 * h);
        assert!(rel(fd, -y * jdot(t, y, &q()).unwrap()) < 1e-6);
    }

    #[test]
    fn fixed_rule_matches_adaptive() {
        let ev = JEvaluator::default();
        for &t in &[0.0, 0.05, 0.3, 0.7, 0.95] {
            for &y in &[1e-3, 0.02, 0.3, 1.0, 2.5, 5.0] {
                let (a, ad) = j_pair(t, y, &q()).unwrap();
                let (b, bd) = ev.eval(t, y);
                assert!(rel(b, a) < 1e-9, "J({t},{y}): {b} vs {a}");
                assert!(rel(bd, ad) < 1e-9, "Jdot({t},{y}): {bd} vs {ad}");
            }
        }
    }

    #[test]
    fn f1_mixture_closed_form_matches_quadrature() {
        let rule = GaussLegendre::new(400);
        for &(t, y) in &[(0.1, 0.05), (0.4, 0.9), (0.8, 2.0)] {
            let s = (1.0f64 - t).sqrt();
            let num = HALF_NORMAL
                * (rule.integrate(0.0, y, |l| scaled_f1(t, y, l))
                    + rule.integrate(y, y + 14.0 * s, |l| scaled_f1(t, y, l)));
            assert!(rel(f1_mixture(t, y).f, num) < 1e-10);
            let h = 1e-6;
            let fd = (f1_mixture(t, y + h).f - f1_mixture(t, y - h).f) / (2.0 * h);
            assert!(rel(f1_mixture(t, y).fdot, fd) < 1e-6);
        }
    }

    #[test]
    fn mixture_is_one_at_start() {
        let p = PathGrid::new(1.0, vec![0.0, 0.1, 0.3, 0.2]).unwrap();
        let m = mixture(0.0, &p).unwrap();
        assert!((m.f - 1.0).abs() < 1e-12);
        assert!((density_d_bm(0.0, &p, &q()).unwrap() - 1.0).abs() < 1e-15);
        // weight normalization of the half-normal over the two windows
        let rule = GaussLegendre::new(64);
        let w = HALF_NORMAL
            * (rule.integrate(0.0, 0.7, |l| (-0.5 * l * l).exp())
                + rule.integrate(0.7, 0.7 + 12.0, |l| (-0.5 * l * l).exp()));
        assert!((w - 1.0).abs() < 1e-10);
    }

    fn wiggly(n: usize) -> PathGrid {
        let v = (0..=n)
            .map(|k| {
                let kf = k as f64;
                (kf / n as f64).sqrt() * (1.1 + 0.4 * (1.7 * kf).sin())
            })
            .collect();
        PathGrid::new(1.0, v).unwrap()
    }

    #[test]
    fn exact_mixture_matches_lambda_quadrature() {
        let p = wiggly(16);
        let quad = QuadratureSpec::default().with_lambda_nodes(4096);
        for k in [3usize, 8, 11] {
            let t = k as f64 / 16.0;
            let a = mixture(t, &p).unwrap();
            let b = mixture_by_lambda_quadrature(t, &p, &quad).unwrap();
            assert!(rel(a.f, b.f) < 1e-4, "F at {k}: {} vs {}", a.f, b.f);
            assert!((a.fdot - b.fdot).abs() < 1e-3 * (1.0 + a.fdot.abs()), "Fdot at {k}: {} vs {}", a.fdot, b.fdot);
        }
    }

    #[test]
    fn after_drift_examples() {
        assert_eq!(drift_bm_after(0.5, 1.0, 0.2).unwrap(), -1.6);
        assert_eq!(drift_bm_after(0.3, -0.4, -0.4).unwrap(), 0.0);
        assert!(drift_bm_after(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn density_is_one_after_first_zero() {
        let p = PathGrid::new(1.0, vec![0.0, 0.2, -0.1, 0.3, 0.5]).unwrap();
        assert_eq!(density_d_bm(0.75, &p, &q()).unwrap(), 1.0);
        assert!(drift_bm_before(0.75, &p, &q()).is_err());
    }

    #[test]
    fn density_tends_to_one_near_zero() {
        let mut p = wiggly(16).into_values();
        p[12] = 1e-6;
        let p = PathGrid::new(1.0, p).unwrap();
        let d = density_d_bm(0.75, &p, &q()).unwrap();
        assert!((d - 1.0).abs() < 1e-4, "{d}");
    }
}
