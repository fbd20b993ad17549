//! Heat, first-passage and Bessel-3 kernels, split densities and the CDFs
//! the statistical checks compare against.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::numerics::quadrature::{adaptive_quadrature, QuadratureSpec};
use crate::numerics::special::{erf, erfc, gamma_p};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn in_unit(name: &str, t: f64) -> Result<()> {
    if t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must lie in (0, 1), got {t}")))
    }
}

/// `p_T(x, y) = (2πT)^{-1/2} exp(−(y−x)²/2T)`.
pub fn heat_kernel(t: f64, x: f64, y: f64) -> Result<f64> {
    positive("T", t)?;
    Ok(INV_SQRT_2PI / t.sqrt() * (-(y - x) * (y - x) / (2.0 * t)).exp())
}

/// Density of the first hitting time of level `a` (in absolute value) by Brownian motion.
pub fn fp_density(a: f64, t: f64) -> Result<f64> {
    positive("a", a)?;
    positive("t", t)?;
    Ok(fp_density_unchecked(a, t))
}

#[inline]
pub(crate) fn fp_density_unchecked(a: f64, t: f64) -> f64 {
    a * INV_SQRT_2PI / (t * t * t).sqrt() * (-a * a / (2.0 * t)).exp()
}

/// Bessel-3 transition density with respect to `y² dy`.
///
/// Written as `(2πt)^{-1/2} e^{−(x−y)²/2t} (1 − e^{−2xy/t}) / (xy)` so that
/// neither small nor large `xy/t` loses precision.
pub fn q_kernel(t: f64, x: f64, y: f64) -> Result<f64> {
    positive("t", t)?;
    positive("x", x)?;
    positive("y", y)?;
    Ok(q_kernel_unchecked(t, x, y))
}

#[inline]
pub(crate) fn q_kernel_unchecked(t: f64, x: f64, y: f64) -> f64 {
    let g = INV_SQRT_2PI / t.sqrt() * (-(x - y) * (x - y) / (2.0 * t)).exp();
    let xy = x * y;
    if xy == 0.0 {
        g * 2.0 / t
    } else {
        g * -(-2.0 * xy / t).exp_m1() / xy
    }
}

/// `q̃_t(0, y) = 2 (2πt³)^{-1/2} e^{−y²/2t}`.
pub fn q0y(t: f64, y: f64) -> Result<f64> {
    positive("t", t)?;
    if !(y >= 0.0) {
        return Err(invalid(format!("y must be nonnegative, got {y}")));
    }
    Ok(q0y_unchecked(t, y))
}

#[inline]
pub(crate) fn q0y_unchecked(t: f64, y: f64) -> f64 {
    2.0 * INV_SQRT_2PI / (t * t * t).sqrt() * (-y * y / (2.0 * t)).exp()
}

pub fn q00(t: f64) -> Result<f64> {
    positive("t", t)?;
    Ok(2.0 * INV_SQRT_2PI / (t * t * t).sqrt())
}

/// Density of the split time `Z` when the bridge ends at `λ < 0`.
pub fn split_density_neg(t: f64, lambda: f64) -> Result<f64> {
    in_unit("t", t)?;
    if !(lambda < 0.0) {
        return Err(invalid(format!("lambda must be negative, got {lambda}")));
    }
    let s = 1.0 - t;
    Ok(-lambda * INV_SQRT_2PI / (t * s * s * s).sqrt() * (-lambda * lambda * t / (2.0 * s)).exp())
}

/// Density of `Ẑ` when the bridge ends at `λ > 0`.
pub fn split_density_pos(t: f64, lambda: f64) -> Result<f64> {
    in_unit("t", t)?;
    if !(lambda > 0.0) {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    split_density_neg(1.0 - t, -lambda)
}

/// `P(Z ≤ x) = erf(|λ| √(x / 2(1−x)))`.
pub fn split_cdf_neg(x: f64, lambda: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        erf(lambda.abs() * (x / (2.0 * (1.0 - x))).sqrt())
    }
}

/// `P(Ẑ ≤ x) = erfc(λ √((1−x) / 2x))`.
pub fn split_cdf_pos(x: f64, lambda: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        erfc(lambda.abs() * ((1.0 - x) / (2.0 * x)).sqrt())
    }
}

/// Joint density of `(R_t, θ^λ_t)` at `(y, s)` on `{R_t > λ}` for a Bessel-3 process from 0:
/// `y(y−λ)λ / (π √((t−s)³ s³)) · exp(−(y−λ)²/2(t−s) − λ²/2s)`.
pub fn joint_density_r_theta(t: f64, y: f64, s: f64, lambda: f64) -> Result<f64> {
    positive("lambda", lambda)?;
    if !(y > lambda) {
        return Err(invalid(format!("need y > lambda, got y = {y}")));
    }
    if !(s > 0.0 && s < t) {
        return Err(invalid(format!("need 0 < s < t, got s = {s}, t = {t}")));
    }
    Ok(joint_density_unchecked(t, y, s, lambda))
}

#[inline]
pub(crate) fn joint_density_unchecked(t: f64, y: f64, s: f64, lambda: f64) -> f64 {
    let u = t - s;
    let w = y - lambda;
    y * w * lambda / (PI * (u * u * u * s * s * s).sqrt())
        * (-w * w / (2.0 * u) - lambda * lambda / (2.0 * s)).exp()
}

/// The same density assembled from the kernels:
/// `q̃_t(0,y) f_{y−λ}(t−s) f_λ(s) / f_y(t) · y²`.
pub fn joint_density_r_theta_factorized(t: f64, y: f64, s: f64, lambda: f64) -> Result<f64> {
    joint_density_r_theta(t, y, s, lambda)?;
    Ok(q0y_unchecked(t, y) * fp_density_unchecked(y - lambda, t - s) * fp_density_unchecked(lambda, s)
        / fp_density_unchecked(y, t)
        * y
        * y)
}

/// CDF of `R_t` for a Bessel-3 process started at 0: `P(χ²₃ ≤ y²/t)`.
pub fn bessel3_cdf(t: f64, y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else {
        gamma_p(1.5, y * y / (2.0 * t))
    }
}

/// CDF at time `s` of a Bessel-3 bridge from 0 to 0 of length `lifetime`.
pub fn excursion_marginal_cdf(s: f64, lifetime: f64, y: f64) -> f64 {
    bessel3_cdf(s * (lifetime - s) / lifetime, y)
}

/// Arcsine CDF `(2/π) arcsin √t`.
pub fn arcsine_cdf(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        2.0 / PI * t.sqrt().asin()
    }
}

/// CDF of the endpoint given the split time `t0`: minus a Rayleigh variable of scale `√(1−t0)`.
pub fn endpoint_given_t0_cdf(t0: f64, x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        (-x * x / (2.0 * (1.0 - t0))).exp()
    }
}

/// `∫_t^1 ds / √((1−s)(s−t)) · exp(−a/(s−t))` by direct quadrature.
///
/// With `z = (1−s)/(1−t)`, `w = 1/(1−z)`, `w = 1 + tan²φ` the integral becomes
/// `2 ∫₀^{π/2} exp(−b / cos²φ) dφ` with `b = a/(1−t)`, which has no singularity.
pub fn integral_lemma_lhs(t: f64, a: f64, quad: &QuadratureSpec) -> Result<f64> {
    in_unit("t", t)?;
    if !(a >= 0.0) {
        return Err(invalid(format!("a must be nonnegative, got {a}")));
    }
    let b = a / (1.0 - t);
    let (v, _) = adaptive_quadrature(
        |phi| {
            let c = phi.cos();
            if c <= 0.0 {
                if b == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (-b / (c * c)).exp()
            }
        },
        0.0,
        PI / 2.0,
        quad,
    )?;
    Ok(2.0 * v)
}
