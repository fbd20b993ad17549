//! Level crossings between grid nodes.
//!
//! Between consecutive nodes a path is treated as a Brownian bridge. Whether
//! an interval touches a level is drawn from the exact bridge probability and
//! the touching point is then located by conditioned bisection.

use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, InverseGaussian, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// How crossing times between grid nodes are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Crossings {
    /// Node times only.
    #[default]
    Grid,
    /// Bridge interpolation between nodes.
    Bridge,
}

impl FromStr for Crossings {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(Crossings::Grid),
            "bridge" => Ok(Crossings::Bridge),
            _ => Err(invalid(format!("unknown crossings mode {s:?}, expected grid or bridge"))),
        }
    }
}

/// Bisection depth when locating a crossing; resolution `Δ / 2^depth`.
pub const LOCATE_DEPTH: u32 = 12;
const MAX_TRIES: usize = 1 << 20;

/// Probability that a Brownian bridge from `a` to `b` over time `h` touches `level`.
pub fn bridge_hit_probability(a: f64, b: f64, level: f64, h: f64) -> f64 {
    let (da, db) = (a - level, b - level);
    if da * db <= 0.0 {
        1.0
    } else {
        (-2.0 * da * db / h).exp()
    }
}

fn touches<R: Rng + ?Sized>(a: f64, b: f64, level: f64, h: f64, rng: &mut R) -> bool {
    let p = bridge_hit_probability(a, b, level, h);
    p >= 1.0 || rng.random::<f64>() < p
}

/// Offset in `[0, h]` of the first (or last) touch of `level` by a bridge
/// from `a` to `b` that is known to touch it.
pub fn locate_touch<R: Rng + ?Sized>(mut a: f64, mut b: f64, level: f64, h: f64, last: bool, rng: &mut R) -> f64 {
    let (mut lo, mut w) = (0.0, h);
    for _ in 0..LOCATE_DEPTH {
        let half = 0.5 * w;
        let mut split = None;
        for _ in 0..MAX_TRIES {
            let z: f64 = rng.sample(StandardNormal);
            let m = 0.5 * (a + b) + 0.5 * w.sqrt() * z;
            let left = touches(a, m, level, half, rng);
            let right = touches(m, b, level, half, rng);
            if left || right {
                split = Some((m, left, right));
                break;
            }
        }
        let Some((m, left, right)) = split else {
            break;
        };
        let go_right = if last { right } else { !left };
        if go_right {
            lo += half;
            a = m;
        } else {
            b = m;
        }
        w = half;
    }
    lo + 0.5 * w
}

/// First time at or after node `from` at which the path touches `level`
/// from above, or `None` if it stays above up to the last node.
pub fn first_touch_time<R: Rng + ?Sized>(values: &[f64], dt: f64, level: f64, from: usize, rng: &mut R) -> Option<f64> {
    if values.get(from).is_some_and(|&v| v <= level) {
        return Some(from as f64 * dt);
    }
    for j in from..values.len().saturating_sub(1) {
        let (a, b) = (values[j], values[j + 1]);
        if touches(a, b, level, dt, rng) {
            return Some(j as f64 * dt + locate_touch(a, b, level, dt, false, rng));
        }
    }
    None
}

/// Last time up to node `upto` at which the path is at or below `level`;
/// `upto · Δ` when the path ends there at or below it, 0 if it never was.
pub fn last_exit_time<R: Rng + ?Sized>(values: &[f64], dt: f64, level: f64, upto: usize, rng: &mut R) -> f64 {
    if values[upto] <= level {
        return upto as f64 * dt;
    }
    for j in (0..upto).rev() {
        let (a, b) = (values[j], values[j + 1]);
        if touches(a, b, level, dt, rng) {
            return j as f64 * dt + locate_touch(a, b, level, dt, true, rng);
        }
    }
    0.0
}

/// Last exit time of `level` up to node `upto`, on nodes or refined.
pub fn last_exit<R: Rng + ?Sized>(
    mode: Crossings,
    values: &[f64],
    dt: f64,
    level: f64,
    upto: usize,
    rng: &mut R,
) -> f64 {
    match mode {
        Crossings::Grid => values[..=upto].iter().rposition(|&v| v <= level).unwrap_or(0) as f64 * dt,
        Crossings::Bridge => last_exit_time(values, dt, level, upto, rng),
    }
}

/// Time in `(0, h)` of the minimum `m` of a Brownian bridge from `a` to `b`
/// over `h`, given `m`.
pub fn bridge_argmin_time<R: Rng + ?Sized>(a: f64, b: f64, m: f64, h: f64, rng: &mut R) -> f64 {
    let c1 = (b - m) * (b - m) / (2.0 * h);
    let c2 = (a - m) * (a - m) / (2.0 * h);
    if c2 <= 0.0 {
        return 0.0;
    }
    if c1 <= 0.0 {
        return h;
    }
    let r = (c1 / c2).sqrt();
    let v = if rng.random::<f64>() < 1.0 / (1.0 + r) {
        InverseGaussian::new(r, 2.0 * c1).expect("positive parameters").sample(rng)
    } else {
        1.0 / InverseGaussian::new(1.0 / r, 2.0 * c2).expect("positive parameters").sample(rng)
    };
    h / (1.0 + v)
}
