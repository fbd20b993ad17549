//! Density and drift of the transformed bridge with positive endpoint
//! relative to a Bessel-3 process: `F^λ = F¹ + (1−θ)(0 ∨ F²)` and `∂₂F^λ`.
//!
//! Internally everything is computed without the common factor `e^{λ²/2}`
//! (the `scaled_*` functions); the mixture over `λ` in the Brownian-motion
//! case cancels it against the half-normal weight.

use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::quadrature::{adaptive_quadrature, GaussLegendre, QuadratureSpec};
use crate::numerics::special::incomplete_gamma_tail;

/// Arguments `(t, y, θ)` of `F^λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftState {
    pub t: f64,
    pub y: f64,
    pub theta: f64,
}

impl DriftState {
    pub fn new(t: f64, y: f64, theta: f64) -> Result<Self> {
        let s = DriftState { t, y, theta };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.theta && self.theta <= self.t && self.t < 1.0) {
            return Err(invalid(format!(
                "need 0 ≤ θ ≤ t < 1, got θ = {}, t = {}",
                self.theta, self.t
            )));
        }
        if !(self.y >= 0.0) {
            return Err(invalid(format!("y must be nonnegative, got {}", self.y)));
        }
        Ok(())
    }
}

const SMALL_Y: f64 = 1e-8;

fn check_t(t: f64) -> Result<()> {
    if t >= 1.0 || !(t >= 0.0) {
        Err(invalid(format!("t must lie in [0, 1), got {t}")))
    } else {
        Ok(())
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("lambda must be positive, got {lambda}")))
    }
}

fn short_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(24))
}

/// `∫_{lo}^{lo+w} 2 e^{−v²} dv` for `lo, w ≥ 0`, accurate also when the
/// interval is short and far out in the tail.
pub(crate) fn gauss_mass(lo: f64, w: f64) -> f64 {
    let hi = lo + w;
    if w <= 0.0 {
        return 0.0;
    }
    if w * (lo + 1.0) < 1.0 {
        // factor out e^{−lo²}: the remaining integrand is smooth on [0, w]
        let inner = short_rule().integrate(0.0, w, |x| (-(2.0 * lo * x + x * x)).exp());
        2.0 * (-lo * lo).exp() * inner
    } else {
        incomplete_gamma_tail(lo * lo) - incomplete_gamma_tail(hi * hi)
    }
}

/// `F¹ e^{−λ²/2}`.
pub fn scaled_f1(t: f64, y: f64, lambda: f64) -> f64 {
    let s2 = 1.0 - t;
    if y <= SMALL_Y {
        return (-lambda * lambda / (2.0 * s2)).exp() / s2.sqrt();
    }
    let r = (2.0 * s2).sqrt();
    let lo = (y - lambda).abs() / r;
    let w = 2.0 * y.min(lambda) / r;
    gauss_mass(lo, w) / (2.0 * SQRT_2 * y)
}

/// `∂₂F¹ e^{−λ²/2}`; at `y = λ` the right limit.
pub fn scaled_d2f1(t: f64, y: f64, lambda: f64) -> f64 {
    if y <= SMALL_Y {
        // F¹ is even in y
        return 0.0;
    }
    let s2 = 1.0 - t;
    let sgn = if y >= lambda { 1.0 } else { -1.0 };
    let ap = (y + lambda) * (y + lambda) / (2.0 * s2);
    let am = (y - lambda) * (y - lambda) / (2.0 * s2);
    -scaled_f1(t, y, lambda) / y + ((-ap).exp() - sgn * (-am).exp()) / (2.0 * y * s2.sqrt())
}

/// `F² e^{−λ²/2}`, sign not clamped.
pub fn scaled_f2(t: f64, y: f64, lambda: f64) -> f64 {
    let s2 = 1.0 - t;
    let u = y - lambda;
    u / (s2 * s2.sqrt() * y) * (-u * u / (2.0 * s2)).exp()
}

/// `∂₂F² e^{−λ²/2}`.
pub fn scaled_d2f2(t: f64, y: f64, lambda: f64) -> f64 {
    let s2 = 1.0 - t;
    let u = y - lambda;
    (-u * u / (2.0 * s2)).exp() / (s2 * s2.sqrt()) * (lambda / (y * y) - u * u / (y * s2))
}

/// `F^λ e^{−λ²/2}`.
pub fn scaled_f(t: f64, y: f64, theta: f64, lambda: f64) -> f64 {
    let mut v = scaled_f1(t, y, lambda);
    if y > lambda {
        v += (1.0 - theta) * scaled_f2(t, y, lambda);
    }
    v
}

/// `∂₂F^λ e^{−λ²/2}` with the right-limit convention at `y = λ`.
pub fn scaled_d2f(t: f64, y: f64, theta: f64, lambda: f64) -> f64 {
    let mut v = scaled_d2f1(t, y, lambda);
    if y >= lambda {
        v += (1.0 - theta) * scaled_d2f2(t, y, lambda);
    }
    v
}

fn weight(lambda: f64) -> f64 {
    (0.5 * lambda * lambda).exp()
}

pub fn f1(t: f64, y: f64, lambda: f64) -> Result<f64> {
    check_t(t)?;
    check_lambda(lambda)?;
    if !(y > 0.0) {
        return Err(invalid(format!("y must be positive, got {y}")));
    }
    Ok(weight(lambda) * scaled_f1(t, y, lambda))
}

pub fn f2(t: f64, y: f64, lambda: f64) -> Result<f64> {
    check_t(t)?;
    check_lambda(lambda)?;
    if !(y > 0.0) {
        return Err(invalid(format!("y must be positive, got {y}")));
    }
    Ok(weight(lambda) * scaled_f2(t, y, lambda))
}

pub fn f(state: DriftState, lambda: f64) -> Result<f64> {
    state.validate()?;
    check_lambda(lambda)?;
    Ok(weight(lambda) * scaled_f(state.t, state.y, state.theta, lambda))
}

pub fn d2f(state: DriftState, lambda: f64) -> Result<f64> {
    state.validate()?;
    check_lambda(lambda)?;
    Ok(weight(lambda) * scaled_d2f(state.t, state.y, state.theta, lambda))
}

/// One-sided derivatives `(∂₂F^λ(λ⁻), ∂₂F^λ(λ⁺))` at `y = λ`.
pub fn d2f_one_sided_at_level(t: f64, theta: f64, lambda: f64) -> Result<(f64, f64)> {
    DriftState::new(t, lambda, theta)?;
    check_lambda(lambda)?;
    let s2 = 1.0 - t;
    let w = weight(lambda);
    let f1v = scaled_f1(t, lambda, lambda);
    let ap = (-2.0 * lambda * lambda / s2).exp();
    let left = -f1v / lambda + (ap + 1.0) / (2.0 * lambda * s2.sqrt());
    let right = -f1v / lambda + (ap - 1.0) / (2.0 * lambda * s2.sqrt())
        + (1.0 - theta) * scaled_d2f2(t, lambda, lambda);
    Ok((w * left, w * right))
}

/// Total drift `1/y + ∂₂F^λ / F^λ` of the transformed bridge.
pub fn drift_pos_bridge(state: DriftState, lambda: f64) -> Result<f64> {
    state.validate()?;
    check_lambda(lambda)?;
    if !(state.y > 0.0) {
        return Err(invalid("drift needs y > 0"));
    }
    let fv = scaled_f(state.t, state.y, state.theta, lambda);
    if !(fv > 0.0) || !fv.is_finite() {
        return Err(Error::Numerical(format!(
            "F^λ = {fv} at t = {}, y = {}, θ = {}, λ = {lambda}",
            state.t, state.y, state.theta
        )));
    }
    Ok(1.0 / state.y + scaled_d2f(state.t, state.y, state.theta, lambda) / fv)
}

/// `c(t) = 2/√(1−t) + (1−t)^{−3/2}`.
pub fn bound_constant(t: f64) -> f64 {
    let s = (1.0 - t).sqrt();
    2.0 / s + 1.0 / (s * s * s)
}

/// `c(t) e^{λ²/2} exp(−(y−λ)²/2(1−t))`, an upper bound for `F^λ(t, y, θ)`.
pub fn bound_envelope(state: DriftState, lambda: f64) -> Result<f64> {
    state.validate()?;
    check_lambda(lambda)?;
    let u = state.y - lambda;
    Ok(bound_constant(state.t) * weight(lambda) * (-u * u / (2.0 * (1.0 - state.t))).exp())
}

/// `F¹` from its defining integral over the future split time `s ∈ (t, 1)`,
/// without the incomplete-gamma reduction.
pub fn f1_by_split_integral(t: f64, y: f64, lambda: f64, quad: &QuadratureSpec) -> Result<f64> {
    check_t(t)?;
    check_lambda(lambda)?;
    if !(y > 0.0) {
        return Err(invalid("y must be positive"));
    }
    let s2 = 1.0 - t;
    let bm = (y - lambda) * (y - lambda) / (2.0 * s2);
    let bp = (y + lambda) * (y + lambda) / (2.0 * s2);
    // same substitution as `integral_lemma_lhs`, applied to both terms at once
    let (v, _) = adaptive_quadrature(
        |phi| {
            let c = phi.cos();
            if c <= 0.0 {
                return 0.0;
            }
            let k = 1.0 / (c * c);
            (-bm * k).exp() - (-bp * k).exp()
        },
        0.0,
        PI / 2.0,
        quad,
    )?;
    Ok(weight(lambda) / (2.0 * y * (2.0 * PI).sqrt()) * 2.0 * v)
}
