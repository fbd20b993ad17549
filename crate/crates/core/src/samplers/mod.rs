//! Exact grid samplers for the Brownian-type laws and the decomposed laws.
//!
//! Every Bessel-3 object is the Euclidean norm of a three dimensional
//! Gaussian path, so the samplers are exact in law on the grid. First
//! passage bridges are Bessel-3 bridges ending at 0.

pub mod crossing;
pub mod ensemble_io;
pub mod rng;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::path::{argmin_first, concatenate, vervaat_transform, PathGrid, SplitKind, SplitRecord};

pub use rng::{derive_seed, par_stream_range, par_streams, PathRng, RngStreamSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum Law {
    BrownianMotion,
    Bridge { x: f64, y: f64 },
    Bessel3,
    Bessel3Bridge { x: f64, y: f64 },
    FirstPassageBridge { x: f64 },
    Excursion,
    VervaatNegBridge { lambda: f64 },
    VervaatPosBridge { lambda: f64 },
    VervaatBm,
    DecomposedNeg { lambda: f64 },
    DecomposedPos { lambda: f64 },
    DecomposedBm,
}

impl Law {
    pub const NAMES: [&'static str; 12] = [
        "brownian-motion",
        "bridge",
        "bessel3",
        "bessel3-bridge",
        "first-passage-bridge",
        "excursion",
        "vervaat-neg-bridge",
        "vervaat-pos-bridge",
        "vervaat-bm",
        "decomposed-neg",
        "decomposed-pos",
        "decomposed-bm",
    ];

    pub fn name(&self) -> &'static str {
        let i = match self {
            Law::BrownianMotion => 0,
            Law::Bridge { .. } => 1,
            Law::Bessel3 => 2,
            Law::Bessel3Bridge { .. } => 3,
            Law::FirstPassageBridge { .. } => 4,
            Law::Excursion => 5,
            Law::VervaatNegBridge { .. } => 6,
            Law::VervaatPosBridge { .. } => 7,
            Law::VervaatBm => 8,
            Law::DecomposedNeg { .. } => 9,
            Law::DecomposedPos { .. } => 10,
            Law::DecomposedBm => 11,
        };
        Law::NAMES[i]
    }

    /// Builds a law from its name. `lambda` is the endpoint for the Vervaat and
    /// decomposed laws; `x`, `y` are bridge endpoints (a bridge defaults to `0 → λ`).
    pub fn from_name(name: &str, lambda: Option<f64>, x: Option<f64>, y: Option<f64>) -> Result<Law> {
        let need_lambda = || lambda.ok_or_else(|| invalid(format!("law {name} needs lambda")));
        let law = match name {
            "brownian-motion" | "bm" => Law::BrownianMotion,
            "bridge" => Law::Bridge {
                x: x.unwrap_or(0.0),
                y: match y {
                    Some(y) => y,
                    None => need_lambda()?,
                },
            },
            "bessel3" => Law::Bessel3,
            "bessel3-bridge" => Law::Bessel3Bridge {
                x: x.unwrap_or(0.0),
                y: y.unwrap_or(0.0),
            },
            "first-passage-bridge" => Law::FirstPassageBridge {
                x: match x {
                    Some(x) => x,
                    None => need_lambda()?.abs(),
                },
            },
            "excursion" => Law::Excursion,
            "vervaat-neg-bridge" => Law::VervaatNegBridge {
                lambda: need_lambda()?,
            },
            "vervaat-pos-bridge" => Law::VervaatPosBridge {
                lambda: need_lambda()?,
            },
            "vervaat-bm" => Law::VervaatBm,
            "decomposed-neg" => Law::DecomposedNeg {
                lambda: need_lambda()?,
            },
            "decomposed-pos" => Law::DecomposedPos {
                lambda: need_lambda()?,
            },
            "decomposed-bm" => Law::DecomposedBm,
            other => return Err(invalid(format!("unknown law {other:?}"))),
        };
        Ok(law)
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Law {
    type Err = Error;
    /// Parses parameter-free laws only; use [`Law::from_name`] for the rest.
    fn from_str(s: &str) -> Result<Law> {
        Law::from_name(s, None, None, None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawSpec {
    #[serde(flatten)]
    pub law: Law,
    pub lifetime: f64,
    pub n_steps: usize,
}

impl LawSpec {
    pub fn new(law: Law, lifetime: f64, n_steps: usize) -> Result<Self> {
        let spec = LawSpec {
            law,
            lifetime,
            n_steps,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn unit(law: Law, n_steps: usize) -> Result<Self> {
        LawSpec::new(law, 1.0, n_steps)
    }

    pub fn dt(&self) -> f64 {
        self.lifetime / self.n_steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lifetime > 0.0 && self.lifetime.is_finite()) {
            return Err(invalid(format!("lifetime must be positive, got {}", self.lifetime)));
        }
        if self.n_steps < 1 {
            return Err(invalid("n_steps must be at least 1"));
        }
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("{what} must be finite")))
            }
        };
        match self.law {
            Law::Bridge { x, y } => {
                finite(x, "x")?;
                finite(y, "y")?;
            }
            Law::Bessel3Bridge { x, y } => {
                finite(x, "x")?;
                finite(y, "y")?;
                if x < 0.0 || y < 0.0 {
                    return Err(invalid("Bessel-3 bridge endpoints must be nonnegative"));
                }
            }
            Law::FirstPassageBridge { x } => {
                if !(x > 0.0 && x.is_finite()) {
                    return Err(invalid(format!("first passage bridge needs x > 0, got {x}")));
                }
            }
            Law::VervaatNegBridge { lambda } | Law::DecomposedNeg { lambda } => {
                if !(lambda < 0.0 && lambda.is_finite()) {
                    return Err(invalid(format!("{} needs lambda < 0, got {lambda}", self.law)));
                }
            }
            Law::VervaatPosBridge { lambda } | Law::DecomposedPos { lambda } => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return Err(invalid(format!("{} needs lambda > 0, got {lambda}", self.law)));
                }
            }
            _ => {}
        }
        let decomposed = matches!(
            self.law,
            Law::DecomposedNeg { .. } | Law::DecomposedPos { .. } | Law::DecomposedBm
        );
        if decomposed && self.n_steps < 2 {
            return Err(invalid("decomposed laws need at least 2 steps"));
        }
        Ok(())
    }
}

#[inline]
fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Uniform on the open interval (0, 1).
#[inline]
fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Random walk with N(0, Δ) increments, started at 0, written into `out`.
fn fill_walk<R: Rng + ?Sized>(out: &mut [f64], dt: f64, rng: &mut R) {
    let sd = dt.sqrt();
    let mut acc = 0.0;
    out[0] = 0.0;
    for v in out.iter_mut().skip(1) {
        acc += sd * normal(rng);
        *v = acc;
    }
}

/// Turns a walk from 0 in place into a bridge from `x` to `y`.
fn pin_walk(out: &mut [f64], x: f64, y: f64) {
    let n = out.len() - 1;
    let end = out[n];
    let nf = n as f64;
    for (k, v) in out.iter_mut().enumerate() {
        let s = k as f64 / nf;
        *v = x + *v - s * end + s * (y - x);
    }
    out[0] = x;
    out[n] = y;
}

pub fn sample_bm<R: Rng + ?Sized>(lifetime: f64, n_steps: usize, rng: &mut R) -> Result<PathGrid> {
    let mut v = vec![0.0; n_steps + 1];
    fill_walk(&mut v, lifetime / n_steps as f64, rng);
    PathGrid::new(lifetime, v)
}

/// Brownian bridge from `x` to `y`: `x + W_t − (t/T)W_T + (t/T)(y − x)`.
pub fn sample_bridge<R: Rng + ?Sized>(
    x: f64,
    y: f64,
    lifetime: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<PathGrid> {
    let mut v = vec![0.0; n_steps + 1];
    fill_walk(&mut v, lifetime / n_steps as f64, rng);
    pin_walk(&mut v, x, y);
    PathGrid::new(lifetime, v)
}

pub fn sample_bessel3<R: Rng + ?Sized>(lifetime: f64, n_steps: usize, rng: &mut R) -> Result<PathGrid> {
    let sd = (lifetime / n_steps as f64).sqrt();
    let mut v = Vec::with_capacity(n_steps + 1);
    let (mut a, mut b, mut c) = (0.0f64, 0.0f64, 0.0f64);
    v.push(0.0);
    for _ in 0..n_steps {
        a += sd * normal(rng);
        b += sd * normal(rng);
        c += sd * normal(rng);
        v.push((a * a + b * b + c * c).sqrt());
    }
    PathGrid::new(lifetime, v)
}

/// Bessel-3 bridge from `x` to `y`: the norm of a 3-d Brownian bridge
/// from `(x, 0, 0)` to `(y, 0, 0)`.
pub fn sample_bessel3_bridge<R: Rng + ?Sized>(
    x: f64,
    y: f64,
    lifetime: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<PathGrid> {
    if x < 0.0 || y < 0.0 {
        return Err(invalid("Bessel-3 bridge endpoints must be nonnegative"));
    }
    let n = n_steps + 1;
    let dt = lifetime / n_steps as f64;
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    fill_walk(&mut v, dt, rng);
    pin_walk(&mut v, x, y);
    for vk in v.iter_mut() {
        *vk *= *vk;
    }
    for _ in 0..2 {
        fill_walk(&mut w, dt, rng);
        pin_walk(&mut w, 0.0, 0.0);
        for (vk, wk) in v.iter_mut().zip(&w) {
            *vk += wk * wk;
        }
    }
    for vk in v.iter_mut() {
        *vk = vk.sqrt();
    }
    v[0] = x;
    v[n_steps] = y;
    PathGrid::new(lifetime, v)
}

/// First passage bridge from `x > 0` to 0, as a Bessel-3 bridge `x → 0`.
pub fn sample_first_passage_bridge<R: Rng + ?Sized>(
    x: f64,
    lifetime: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<PathGrid> {
    if !(x > 0.0) {
        return Err(invalid(format!("first passage bridge needs x > 0, got {x}")));
    }
    sample_bessel3_bridge(x, 0.0, lifetime, n_steps, rng)
}

pub fn sample_excursion<R: Rng + ?Sized>(lifetime: f64, n_steps: usize, rng: &mut R) -> Result<PathGrid> {
    sample_bessel3_bridge(0.0, 0.0, lifetime, n_steps, rng)
}

/// Split time `Z` for `λ < 0` on the unit interval.
///
/// With `U = Z/(1−Z)` the density of `Z` becomes that of `χ²₁/λ²`, hence
/// `Z = N²/(N² + λ²)` exactly.
pub fn sample_split_z<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<f64> {
    if !(lambda < 0.0) {
        return Err(invalid(format!("Z split needs lambda < 0, got {lambda}")));
    }
    let l2 = lambda * lambda;
    loop {
        let g = normal(rng);
        let g2 = g * g;
        let z = g2 / (g2 + l2);
        if z > 0.0 && z < 1.0 {
            return Ok(z);
        }
    }
}

/// Split time `Ẑ` for `λ > 0`; in law `1 − Z(−λ)`, computed as `λ²/(N² + λ²)`.
pub fn sample_split_zhat<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(invalid(format!("Ẑ split needs lambda > 0, got {lambda}")));
    }
    let l2 = lambda * lambda;
    loop {
        let g = normal(rng);
        let z = l2 / (g * g + l2);
        if z > 0.0 && z < 1.0 {
            return Ok(z);
        }
    }
}

/// Arcsine law by inversion: `sin²(πU/2)`.
pub fn sample_t0_arcsine<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let s = (0.5 * PI * open_uniform(rng)).sin();
        let t = s * s;
        if t > 0.0 && t < 1.0 {
            return t;
        }
    }
}

/// Endpoint given the split time: minus a Rayleigh variable of scale `√(1 − t0)`.
pub fn sample_endpoint_given_t0<R: Rng + ?Sized>(t0: f64, rng: &mut R) -> Result<f64> {
    if !(t0 > 0.0 && t0 < 1.0) {
        return Err(invalid(format!("t0 must lie in (0, 1), got {t0}")));
    }
    loop {
        let x = -(-2.0 * (1.0 - t0) * open_uniform(rng).ln()).sqrt();
        if x < 0.0 {
            return Ok(x);
        }
    }
}

fn split_index(time: f64, dt: f64, n_steps: usize) -> usize {
    ((time / dt).round() as usize).clamp(1, n_steps - 1)
}

/// Excursion on `[0, Z]` followed by a first passage bridge from 0 to `λ < 0`.
fn decomposed_neg<R: Rng + ?Sized>(
    lambda: f64,
    lifetime: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<(PathGrid, SplitRecord)> {
    let dt = lifetime / n_steps as f64;
    // Brownian scaling to the unit interval
    let z = lifetime * sample_split_z(lambda / lifetime.sqrt(), rng)?;
    let k = split_index(z, dt, n_steps);
    let exc = sample_excursion(k as f64 * dt, k, rng)?;
    let mut tail = sample_bessel3_bridge(-lambda, 0.0, (n_steps - k) as f64 * dt, n_steps - k, rng)?
        .into_values();
    for v in tail.iter_mut() {
        *v += lambda;
    }
    tail[0] = 0.0;
    let m = tail.len() - 1;
    tail[m] = lambda;
    let tail = PathGrid::new((n_steps - k) as f64 * dt, tail)?;
    let mut path = concatenate(&exc, &tail)?;
    path = PathGrid::new(lifetime, path.into_values())?;
    let rec = SplitRecord::at_index(SplitKind::ZNeg, &path, k);
    Ok((path, rec))
}

/// Time-reversed first passage bridge from `λ > 0` to 0 on `[0, Ẑ]`, then
/// `λ` plus an excursion.
fn decomposed_pos<R: Rng + ?Sized>(
    lambda: f64,
    lifetime: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<(PathGrid, SplitRecord)> {
    let dt = lifetime / n_steps as f64;
    let zhat = lifetime * sample_split_zhat(lambda / lifetime.sqrt(), rng)?;
    let k = split_index(zhat, dt, n_steps);
    let head = sample_bessel3_bridge(0.0, lambda, k as f64 * dt, k, rng)?;
    let exc = sample_excursion((n_steps - k) as f64 * dt, n_steps - k, rng)?;
    let mut v = concatenate(&head, &exc)?.into_values();
    v[n_steps] = lambda;
    let path = PathGrid::new(lifetime, v)?;
    let rec = SplitRecord::at_index(SplitKind::ZhatPos, &path, k);
    Ok((path, rec))
}

/// Transformed Brownian motion built from its pieces.
///
/// With probability 1/2 the path returns to 0 before the end: arcsine split,
/// excursion, Rayleigh endpoint and a first passage bridge to it. Otherwise
/// the endpoint is half-normal and, given it, the path is the decomposed
/// positive-endpoint bridge.
fn decomposed_bm<R: Rng + ?Sized>(
    lifetime: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<(PathGrid, SplitRecord)> {
    let dt = lifetime / n_steps as f64;
    let root = lifetime.sqrt();
    if rng.random::<bool>() {
        let t0 = sample_t0_arcsine(rng);
        let lambda = root * sample_endpoint_given_t0(t0, rng)?;
        let k = split_index(lifetime * t0, dt, n_steps);
        let exc = sample_excursion(k as f64 * dt, k, rng)?;
        let mut tail =
            sample_bessel3_bridge(-lambda, 0.0, (n_steps - k) as f64 * dt, n_steps - k, rng)?
                .into_values();
        for v in tail.iter_mut() {
            *v += lambda;
        }
        tail[0] = 0.0;
        let tail = PathGrid::new((n_steps - k) as f64 * dt, tail)?;
        let mut v = concatenate(&exc, &tail)?.into_values();
        v[n_steps] = lambda;
        let path = PathGrid::new(lifetime, v)?;
        let rec = SplitRecord::at_index(SplitKind::T0Bm, &path, k);
        Ok((path, rec))
    } else {
        let lambda = loop {
            let g = (root * normal(rng)).abs();
            if g > 0.0 {
                break g;
            }
        };
        decomposed_pos(lambda, lifetime, n_steps, rng)
    }
}

/// Samples a decomposed law together with its split record.
pub fn sample_decomposed<R: Rng + ?Sized>(spec: &LawSpec, rng: &mut R) -> Result<(PathGrid, SplitRecord)> {
    spec.validate()?;
    let (t, n) = (spec.lifetime, spec.n_steps);
    match spec.law {
        Law::DecomposedNeg { lambda } => decomposed_neg(lambda, t, n, rng),
        Law::DecomposedPos { lambda } => decomposed_pos(lambda, t, n, rng),
        Law::DecomposedBm => decomposed_bm(t, n, rng),
        other => Err(invalid(format!("{other} is not a decomposed law"))),
    }
}

/// How the Vervaat laws are built from the grid path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    /// Cyclic shift at the grid argmin.
    #[default]
    Grid,
    /// Cyclic shift just after the sampled continuous minimum, see
    /// [`vervaat_transform_bridge_min`].
    BridgeMin,
}

impl Transform {
    pub fn name(&self) -> &'static str {
        match self {
            Transform::Grid => "grid",
            Transform::BridgeMin => "bridge-min",
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(Transform::Grid),
            "bridge-min" => Ok(Transform::BridgeMin),
            _ => Err(invalid(format!("unknown transform {s:?}, expected grid or bridge-min"))),
        }
    }
}

/// Minimum of a Brownian bridge from `a` to `b` over a time `h`.
pub fn bridge_interval_min<R: Rng + ?Sized>(a: f64, b: f64, h: f64, rng: &mut R) -> f64 {
    let e = -2.0 * h * open_uniform(rng).ln();
    0.5 * (a + b - ((b - a) * (b - a) + e).sqrt())
}

/// Vervaat transform with the continuous minimum restored.
///
/// Between nodes the path is treated as a Brownian bridge. Each interval
/// minimum is drawn from its exact law, the path is shifted at the node
/// following the overall minimum `m` and `m` is subtracted. Interior values
/// are the continuous transform observed at `t_k + ε` with `0 < ε ≤ Δ`, so the
/// grid-minimum bias of order `√Δ` disappears.
pub fn vervaat_transform_bridge_min<R: Rng + ?Sized>(p: &PathGrid, rng: &mut R) -> PathGrid {
    let s = vervaat_transform_bridge_min_offset(p, rng);
    let mut v = s.path.values().to_vec();
    v[0] = 0.0;
    PathGrid::new(p.lifetime(), v).expect("finite shifted values")
}

/// Output of [`vervaat_transform_bridge_min_offset`].
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedPath {
    pub path: PathGrid,
    /// Node `k` sits at time `t_k + offset` of the continuous transform; for
    /// an offset above zero node 0 is not pinned at 0.
    pub offset: f64,
    /// Last node taken before the end of the original path; later nodes
    /// come from its start.
    pub wrap_index: usize,
}

impl ShiftedPath {
    /// First node to search for a return to the minimum level. Node 0 of a
    /// grid transform is the minimum itself, so the search skips it there.
    pub fn return_search_start(&self) -> usize {
        if self.offset > 0.0 {
            self.wrap_index
        } else {
            self.wrap_index.max(1)
        }
    }
}

/// [`vervaat_transform_bridge_min`] together with the offset `ε`, drawn from
/// the law of the minimum's position within its interval.
pub fn vervaat_transform_bridge_min_offset<R: Rng + ?Sized>(p: &PathGrid, rng: &mut R) -> ShiftedPath {
    let n = p.n_steps();
    let h = p.dt();
    let v = p.values();
    let (mut j_min, mut m) = (0, f64::INFINITY);
    for j in 0..n {
        let mj = bridge_interval_min(v[j], v[j + 1], h, rng);
        if mj < m {
            m = mj;
            j_min = j;
        }
    }
    let offset = h - crossing::bridge_argmin_time(v[j_min], v[j_min + 1], m, h, rng);
    let start = j_min + 1;
    let end = v[n];
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let j = start + k;
        out.push(if j <= n { v[j] - m } else { v[j - n] + end - m });
    }
    out[n] = end;
    ShiftedPath {
        path: PathGrid::new(p.lifetime(), out).expect("finite shifted values"),
        offset,
        wrap_index: n - start,
    }
}

/// Vervaat transform of `p` by either method, with offset and wrap index.
pub fn vervaat_shifted<R: Rng + ?Sized>(p: &PathGrid, transform: Transform, rng: &mut R) -> ShiftedPath {
    match transform {
        Transform::Grid => ShiftedPath {
            path: vervaat_transform(p),
            offset: 0.0,
            wrap_index: p.n_steps() - argmin_first(p),
        },
        Transform::BridgeMin => vervaat_transform_bridge_min_offset(p, rng),
    }
}

/// Samples any law in [`Law`].
pub fn sample<R: Rng + ?Sized>(spec: &LawSpec, rng: &mut R) -> Result<PathGrid> {
    sample_with(spec, Transform::Grid, rng)
}

/// Like [`sample`], choosing how the Vervaat laws are formed.
pub fn sample_with<R: Rng + ?Sized>(spec: &LawSpec, transform: Transform, rng: &mut R) -> Result<PathGrid> {
    spec.validate()?;
    let vervaat = |p: PathGrid, rng: &mut R| match transform {
        Transform::Grid => vervaat_transform(&p),
        Transform::BridgeMin => vervaat_transform_bridge_min(&p, rng),
    };
    let (t, n) = (spec.lifetime, spec.n_steps);
    match spec.law {
        Law::BrownianMotion => sample_bm(t, n, rng),
        Law::Bridge { x, y } => sample_bridge(x, y, t, n, rng),
        Law::Bessel3 => sample_bessel3(t, n, rng),
        Law::Bessel3Bridge { x, y } => sample_bessel3_bridge(x, y, t, n, rng),
        Law::FirstPassageBridge { x } => sample_first_passage_bridge(x, t, n, rng),
        Law::Excursion => sample_excursion(t, n, rng),
        Law::VervaatNegBridge { lambda } | Law::VervaatPosBridge { lambda } => {
            let p = sample_bridge(0.0, lambda, t, n, rng)?;
            Ok(vervaat(p, rng))
        }
        Law::VervaatBm => {
            let p = sample_bm(t, n, rng)?;
            Ok(vervaat(p, rng))
        }
        Law::DecomposedNeg { .. } | Law::DecomposedPos { .. } | Law::DecomposedBm => {
            sample_decomposed(spec, rng).map(|(p, _)| p)
        }
    }
}

/// `n_paths` independent paths, path `i` drawn from stream `i` of `master_seed`.
pub fn sample_ensemble(spec: &LawSpec, master_seed: u64, n_paths: usize) -> Result<Vec<PathGrid>> {
    spec.validate()?;
    par_streams(master_seed, n_paths, |_, rng| sample(spec, rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(i: u64) -> PathRng {
        RngStreamSpec::new(2024, i).rng()
    }

    #[test]
    fn law_names_round_trip() {
        for name in Law::NAMES {
            let law = Law::from_name(name, Some(-1.0), None, None);
            if let Ok(law) = law {
                assert_eq!(law.name(), name);
            }
        }
        assert!(Law::from_name("nope", None, None, None).is_err());
    }

    #[test]
    fn lambda_sign_enforced() {
        assert!(LawSpec::unit(Law::VervaatNegBridge { lambda: 1.0 }, 8).is_err());
        assert!(LawSpec::unit(Law::DecomposedPos { lambda: -1.0 }, 8).is_err());
        assert!(LawSpec::unit(Law::FirstPassageBridge { x: 0.0 }, 8).is_err());
        assert!(LawSpec::unit(Law::BrownianMotion, 0).is_err());
    }

    #[test]
    fn bridges_hit_endpoints_exactly() {
        let mut r = rng(0);
        let b = sample_bridge(0.3, -1.7, 2.0, 100, &mut r).unwrap();
        assert_eq!(b.start(), 0.3);
        assert_eq!(b.end(), -1.7);
        let q = sample_bessel3_bridge(0.5, 1.25, 1.0, 64, &mut r).unwrap();
        assert_eq!(q.start(), 0.5);
        assert_eq!(q.end(), 1.25);
        assert!(q.values().iter().all(|&v| v >= 0.0));
        let e = sample_excursion(1.0, 64, &mut r).unwrap();
        assert_eq!((e.start(), e.end()), (0.0, 0.0));
        assert!(e.values()[1..64].iter().all(|&v| v > 0.0));
    }

    #[test]
    fn same_stream_same_path() {
        let spec = LawSpec::unit(Law::VervaatBm, 256).unwrap();
        let a = sample(&spec, &mut rng(5)).unwrap();
        let b = sample(&spec, &mut rng(5)).unwrap();
        let c = sample(&spec, &mut rng(6)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn split_samplers_stay_inside_unit_interval() {
        let mut r = rng(1);
        for _ in 0..1000 {
            let z = sample_split_z(-5.0, &mut r).unwrap();
            assert!(z > 0.0 && z < 1.0);
            let zh = sample_split_zhat(0.01, &mut r).unwrap();
            assert!(zh > 0.0 && zh < 1.0);
            let t0 = sample_t0_arcsine(&mut r);
            assert!(t0 > 0.0 && t0 < 1.0);
            assert!(sample_endpoint_given_t0(t0, &mut r).unwrap() < 0.0);
        }
        assert!(sample_split_z(1.0, &mut r).is_err());
        assert!(sample_split_zhat(-1.0, &mut r).is_err());
    }

    #[test]
    fn decomposed_neg_shape() {
        let spec = LawSpec::unit(Law::DecomposedNeg { lambda: -1.0 }, 512).unwrap();
        for i in 0..50 {
            let (p, rec) = sample_decomposed(&spec, &mut rng(i)).unwrap();
            assert_eq!(p.n_steps(), 512);
            assert_eq!(p.end(), -1.0);
            assert_eq!(p.values()[rec.split_index], 0.0);
            assert!(p.values()[1..rec.split_index].iter().all(|&v| v > 0.0));
            assert!(p.values()[rec.split_index + 1..].iter().all(|&v| v > -1.0 - 1e-12));
        }
    }

    #[test]
    fn decomposed_pos_shape() {
        let spec = LawSpec::unit(Law::DecomposedPos { lambda: 0.8 }, 512).unwrap();
        for i in 0..50 {
            let (p, rec) = sample_decomposed(&spec, &mut rng(i)).unwrap();
            let k = rec.split_index;
            assert!((p.values()[k] - 0.8).abs() < 1e-12);
            assert_eq!(p.end(), 0.8);
            assert!(p.values()[k + 1..512].iter().all(|&v| v > 0.8));
        }
    }

    #[test]
    fn decomposed_bm_branches() {
        let spec = LawSpec::unit(Law::DecomposedBm, 256).unwrap();
        let mut zero_branch = 0;
        for i in 0..400 {
            let (p, rec) = sample_decomposed(&spec, &mut rng(i)).unwrap();
            match rec.kind {
                SplitKind::T0Bm => {
                    zero_branch += 1;
                    assert!(p.end() < 0.0);
                    assert!(p.values()[1..rec.split_index].iter().all(|&v| v > 0.0));
                }
                SplitKind::ZhatPos => assert!(p.end() > 0.0),
                SplitKind::ZNeg => unreachable!(),
            }
        }
        assert!((150..250).contains(&zero_branch), "{zero_branch}");
    }

    #[test]
    fn general_lifetime_is_respected() {
        let spec = LawSpec::new(Law::DecomposedNeg { lambda: -2.0 }, 4.0, 100).unwrap();
        let (p, _) = sample_decomposed(&spec, &mut rng(3)).unwrap();
        assert_eq!(p.lifetime(), 4.0);
        assert_eq!(p.end(), -2.0);
    }

    #[test]
    fn interval_min_mean() {
        // zero-to-zero bridge over h: P(min < −m) = exp(−2m²/h)
        let h = 0.25;
        let mut r = rng(11);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| bridge_interval_min(0.0, 0.0, h, &mut r)).sum::<f64>() / n as f64;
        let want = -(std::f64::consts::PI * h / 8.0).sqrt();
        assert!((mean - want).abs() < 4.0 * 0.0025, "{mean} vs {want}");
        assert!(bridge_interval_min(1.0, 3.0, 0.1, &mut r) <= 1.0);
    }

    #[test]
    fn bridge_min_transform_shape() {
        let spec = LawSpec::unit(Law::VervaatPosBridge { lambda: 0.7 }, 64).unwrap();
        for i in 0..200 {
            let v = sample_with(&spec, Transform::BridgeMin, &mut rng(i)).unwrap();
            assert_eq!(v.values()[0], 0.0);
            assert_eq!(v.end(), 0.7);
            assert!(v.values().iter().all(|&x| x >= 0.0));
        }
        assert_eq!("bridge-min".parse::<Transform>().unwrap(), Transform::BridgeMin);
        assert!("nope".parse::<Transform>().is_err());
    }

    #[test]
    fn bridge_min_transform_keeps_increments() {
        let p = sample_bridge(0.0, -0.4, 1.0, 32, &mut rng(5)).unwrap();
        let v = vervaat_transform_bridge_min(&p, &mut rng(6));
        let inc = |x: &[f64], k: usize| x[k % 32 + 1] - x[k % 32];
        let (a, b) = (p.values(), v.values());
        // interior increments of the output are cyclic increments of the input
        let shift = (0..32)
            .find(|&s| (1..30).all(|k| (b[k + 1] - b[k] - inc(a, s + k)).abs() < 1e-12))
            .expect("cyclic shift");
        assert!(shift < 32);
    }
}
