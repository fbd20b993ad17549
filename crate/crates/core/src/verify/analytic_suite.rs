//! Deterministic identities of the closed-form layer, swept over fixed grids.

use std::f64::consts::PI;

use rand::Rng;

use crate::analytic::pos_bridge::{scaled_d2f1, scaled_d2f2, scaled_f1, scaled_f2};
use crate::analytic::{
    bound_envelope, d2f, d2f_one_sided_at_level, f as f_lambda, f1, f1_by_split_integral, fp_density,
    integral_lemma_lhs, j, j_pair, joint_density_r_theta, joint_density_r_theta_factorized, mixture, q0y,
    split_density_neg, split_density_pos, DriftState,
};
use crate::error::Result;
use crate::numerics::special::SQRT_PI;
use crate::numerics::{adaptive_quadrature, adaptive_quadrature_to_infinity, incomplete_gamma_tail};
use crate::path::PathGrid;
use crate::samplers::RngStreamSpec;

use super::config::CheckConfig;
use super::report::{Cell, CheckReport};
use super::stream_seed;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn lemma_cells(cfg: &CheckConfig) -> Result<Vec<Cell>> {
    let a_grid = [0.0, 0.01, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
    let (mut worst, mut worst_pi) = (0.0f64, 0.0f64);
    for i in 0..10 {
        let t = 0.05 + 0.1 * i as f64;
        for &a in &a_grid {
            let lhs = integral_lemma_lhs(t, a, &cfg.quad)?;
            worst = worst.max(rel(lhs, SQRT_PI * incomplete_gamma_tail(a / (1.0 - t))));
            if a == 0.0 {
                worst_pi = worst_pi.max((lhs - PI).abs());
            }
        }
    }
    Ok(vec![
        Cell::at_most("integral lemma, max rel error on 10x10 grid", worst, cfg.threshold("lemma_rel")?),
        Cell::at_most("integral lemma, a = 0 row vs pi", worst_pi, cfg.threshold("lemma_pi_abs")?),
    ])
}

fn jump_cell(cfg: &CheckConfig, rng: &mut impl Rng) -> Result<Cell> {
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let t: f64 = rng.random_range(0.02..0.95);
        let theta: f64 = rng.random_range(0.0..t);
        let lambda: f64 = rng.random_range(0.1..3.0);
        let want = (t - theta) * (0.5 * lambda * lambda).exp() / (lambda * (1.0 - t).powf(1.5));
        let (left, right) = d2f_one_sided_at_level(t, theta, lambda)?;
        // errors measured against the size of the one-sided derivatives,
        // since the jump itself vanishes as θ → t
        let scale = left.abs() + right.abs();
        worst = worst.max(((right - left) - want).abs() / scale);
        // limits of the general derivative on either side, by quadratic
        // extrapolation from three points
        let eps = 1e-5 * lambda;
        let at = |y: f64| d2f(DriftState::new(t, y, theta)?, lambda);
        let side = |e: f64| -> Result<f64> {
            Ok(3.0 * at(lambda + e)? - 3.0 * at(lambda + 2.0 * e)? + at(lambda + 3.0 * e)?)
        };
        let (below, above) = (side(-eps)?, side(eps)?);
        worst = worst.max(((above - below) - want).abs() / scale);
    }
    Ok(Cell::at_most("d2F jump at y = lambda, 100 points", worst, cfg.threshold("jump_rel")?))
}

/// `½∂²ᵧ + (1/y)∂ᵧ + ∂ₜ` applied to `f`, by central differences of the
/// analytic first derivative, with the sum of absolute terms as scale.
fn pde_residual(f: impl Fn(f64, f64) -> f64, dy: impl Fn(f64, f64) -> f64, t: f64, y: f64) -> f64 {
    let hy = 1e-4 * y.max(0.1);
    let ht = 1e-5;
    let fyy = (dy(t, y + hy) - dy(t, y - hy)) / (2.0 * hy);
    let ft = (f(t + ht, y) - f(t - ht, y)) / (2.0 * ht);
    let fy = dy(t, y);
    let terms = [0.5 * fyy, fy / y, ft];
    let scale: f64 = terms.iter().map(|x| x.abs()).sum();
    terms.iter().sum::<f64>().abs() / scale.max(1e-300)
}

fn pde_cells(cfg: &CheckConfig, rng: &mut impl Rng) -> Result<Vec<Cell>> {
    let (mut w1, mut w2) = (0.0f64, 0.0f64);
    let mut done = 0;
    while done < 100 {
        let t: f64 = rng.random_range(0.05..0.9);
        let y: f64 = rng.random_range(0.05..4.0);
        let lambda: f64 = rng.random_range(0.2..3.0);
        if (y - lambda).abs() < 0.05 {
            continue;
        }
        w1 = w1.max(pde_residual(|t, y| scaled_f1(t, y, lambda), |t, y| scaled_d2f1(t, y, lambda), t, y));
        w2 = w2.max(pde_residual(|t, y| scaled_f2(t, y, lambda), |t, y| scaled_d2f2(t, y, lambda), t, y));
        done += 1;
    }
    let tol = cfg.threshold("pde_scaled")?;
    Ok(vec![
        Cell::at_most("PDE residual of F1, scaled", w1, tol),
        Cell::at_most("PDE residual of F2, scaled", w2, tol),
    ])
}

fn dj_cell(cfg: &CheckConfig, rng: &mut impl Rng) -> Result<Cell> {
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let t: f64 = rng.random_range(0.02..0.95);
        let y: f64 = rng.random_range(0.05..3.0);
        // five-point stencil on the scale over which J varies
        let h = 1e-3 * y.min((1.0 - t) / y);
        let jq = |x: f64| j(t, x, &cfg.quad);
        let fd = (jq(y - 2.0 * h)? - 8.0 * jq(y - h)? + 8.0 * jq(y + h)? - jq(y + 2.0 * h)?) / (12.0 * h);
        let (_, jd) = j_pair(t, y, &cfg.quad)?;
        worst = worst.max(rel(fd, -y * jd));
    }
    Ok(Cell::at_most("dJ/dy = -y Jdot, 100 points", worst, cfg.threshold("dj_rel")?))
}

fn d2f_fd_cell(cfg: &CheckConfig, rng: &mut impl Rng) -> Result<Cell> {
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < 1000 {
        let t: f64 = rng.random_range(0.0..0.9);
        let theta: f64 = rng.random_range(0.0..=t);
        let y: f64 = rng.random_range(0.05..4.0);
        let lambda: f64 = rng.random_range(0.1..3.0);
        if (y - lambda).abs() < 0.05 {
            continue;
        }
        let h = 1e-5 * y;
        let fv = |yy: f64| f_lambda(DriftState::new(t, yy, theta).unwrap(), lambda).unwrap();
        let fd = (fv(y + h) - fv(y - h)) / (2.0 * h);
        let an = d2f(DriftState::new(t, y, theta)?, lambda)?;
        // relative to the size of F/y so that zeros of the derivative are harmless
        worst = worst.max((fd - an).abs() / (an.abs() + fv(y) / y));
        done += 1;
    }
    Ok(Cell::at_most("d2F vs central differences, 1000 points", worst, cfg.threshold("d2f_rel")?))
}

fn dual_route_cell(cfg: &CheckConfig) -> Result<Cell> {
    let mut worst = 0.0f64;
    for t in [0.0, 0.2, 0.4, 0.6, 0.8] {
        for y in [0.1, 0.5, 1.0, 1.7, 3.0] {
            for lambda in [0.2, 0.6, 1.0, 1.5, 2.5] {
                worst = worst.max(rel(f1_by_split_integral(t, y, lambda, &cfg.quad)?, f1(t, y, lambda)?));
            }
        }
    }
    Ok(Cell::at_most("F1 by incomplete gamma vs split-time integral, 5x5x5", worst, cfg.threshold("dual_route_rel")?))
}

fn bound_cell(cfg: &CheckConfig) -> Result<Cell> {
    let mut violations = 0usize;
    for i in 1..=10 {
        let t = 0.09 * i as f64;
        for jy in 1..=10 {
            let y = 0.5 * jy as f64;
            for m in 0..10 {
                let theta = t * m as f64 / 9.0;
                for l in 1..=10 {
                    let lambda = 0.3 * l as f64;
                    let st = DriftState::new(t, y, theta)?;
                    if f_lambda(st, lambda)? > bound_envelope(st, lambda)? {
                        violations += 1;
                    }
                }
            }
        }
    }
    Ok(Cell::at_most("bound envelope violations over 10^4 points", violations as f64, cfg.threshold("bound_violations")?))
}

fn joint_forms_cell(cfg: &CheckConfig, rng: &mut impl Rng) -> Result<Cell> {
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let t: f64 = rng.random_range(0.2..3.0);
        let lambda: f64 = rng.random_range(0.1..2.0);
        let y = lambda + rng.random_range(0.01..3.0);
        let s: f64 = rng.random_range(0.01..0.99) * t;
        worst = worst.max(rel(
            joint_density_r_theta(t, y, s, lambda)?,
            joint_density_r_theta_factorized(t, y, s, lambda)?,
        ));
    }
    Ok(Cell::at_most("joint density explicit vs factorized, 200 points", worst, cfg.threshold("joint_forms_rel")?))
}

fn mass_cell(cfg: &CheckConfig) -> Result<Cell> {
    let q = cfg.quad.with_rel_tol(1e-10);
    let mut worst = 0.0f64;
    // t = 1/w² turns the t^{-3/2} tail into a Gaussian one
    for a in [0.3, 1.0, 2.5] {
        let (m, _) = adaptive_quadrature_to_infinity(
            |w| if w > 0.0 { fp_density(a, 1.0 / (w * w)).unwrap() * 2.0 / (w * w * w) } else { 0.0 },
            0.0,
            &q,
        )?;
        worst = worst.max((m - 1.0).abs());
    }
    for t in [0.3, 1.0, 2.0] {
        let (m, _) = adaptive_quadrature_to_infinity(|y| if y > 0.0 { q0y(t, y).unwrap() * y * y } else { 0.0 }, 0.0, &q)?;
        worst = worst.max((m - 1.0).abs());
    }
    // t = u² (resp. 1 − u²) removes the inverse square root at the open end
    for lambda in [0.5, 1.0, 2.0] {
        let (m, _) = adaptive_quadrature(|u| split_density_neg(u * u, -lambda).unwrap_or(0.0) * 2.0 * u, 0.0, 1.0, &q)?;
        worst = worst.max((m - 1.0).abs());
        let (m, _) =
            adaptive_quadrature(|u| split_density_pos(1.0 - u * u, lambda).unwrap_or(0.0) * 2.0 * u, 0.0, 1.0, &q)?;
        worst = worst.max((m - 1.0).abs());
    }
    // F(0, γ) = 1 for any path started at 0
    let path = PathGrid::new(1.0, (0..=32).map(|k| (k as f64 / 32.0).sqrt()).collect())?;
    worst = worst.max((mixture(0.0, &path)?.f - 1.0).abs());
    Ok(Cell::at_most("density masses and mixture weight", worst, cfg.threshold("mass_abs")?))
}

/// Runs every deterministic identity; random sweep points come from the
/// check's own stream so the suite is reproducible.
pub fn check_analytic_suite(cfg: &CheckConfig) -> Result<CheckReport> {
    cfg.validate()?;
    let mut rng = RngStreamSpec::new(stream_seed(cfg, "points"), 0).rng();
    let mut cells = lemma_cells(cfg)?;
    cells.push(jump_cell(cfg, &mut rng)?);
    cells.extend(pde_cells(cfg, &mut rng)?);
    cells.push(dj_cell(cfg, &mut rng)?);
    cells.push(d2f_fd_cell(cfg, &mut rng)?);
    cells.push(dual_route_cell(cfg)?);
    cells.push(bound_cell(cfg)?);
    cells.push(joint_forms_cell(cfg, &mut rng)?);
    cells.push(mass_cell(cfg)?);
    Ok(CheckReport::from_cells(cfg, cells, vec!["statistics are worst-case errors over each sweep".into()]))
}
