//! Paths on uniform time grids and the deterministic path transforms.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A continuous path sampled at `k·T/n`, `k = 0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathGrid {
    lifetime: f64,
    values: Vec<f64>,
}

impl PathGrid {
    pub fn new(lifetime: f64, values: Vec<f64>) -> Result<Self> {
        if !(lifetime > 0.0) || !lifetime.is_finite() {
            return Err(invalid(format!("lifetime must be positive, got {lifetime}")));
        }
        if values.len() < 2 {
            return Err(invalid("a path needs at least one step"));
        }
        Ok(PathGrid { lifetime, values })
    }

    pub fn zeros(lifetime: f64, n_steps: usize) -> Result<Self> {
        PathGrid::new(lifetime, vec![0.0; n_steps + 1])
    }

    pub fn lifetime(&self) -> f64 {
        self.lifetime
    }

    pub fn n_steps(&self) -> usize {
        self.values.len() - 1
    }

    /// Grid spacing `Δ = T / n`.
    pub fn dt(&self) -> f64 {
        self.lifetime / self.n_steps() as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps() {
            self.lifetime
        } else {
            k as f64 * self.dt()
        }
    }

    /// Nearest grid index to time `t`, clamped to the grid.
    pub fn index_of(&self, t: f64) -> usize {
        ((t / self.dt()).round().max(0.0) as usize).min(self.n_steps())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn start(&self) -> f64 {
        self.values[0]
    }

    pub fn end(&self) -> f64 {
        self.values[self.n_steps()]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Writes `t,value` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,value")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e}", self.time(k), v)?;
        }
        Ok(())
    }

    /// Reads the format produced by [`PathGrid::write_csv`]; `#` lines are skipped.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut times = Vec::new();
        let mut values = Vec::new();
        let mut saw_header = false;
        for line in input.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                if line != "t,value" {
                    return Err(invalid(format!("unexpected CSV header {line:?}")));
                }
                saw_header = true;
                continue;
            }
            let (t, v) = line
                .split_once(',')
                .ok_or_else(|| invalid(format!("malformed CSV row {line:?}")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| invalid(format!("bad number {s:?}: {e}")))
            };
            times.push(parse(t)?);
            values.push(parse(v)?);
        }
        let lifetime = *times.last().ok_or_else(|| invalid("empty CSV"))?;
        PathGrid::new(lifetime, values)
    }
}

/// Smallest index attaining the minimum.
pub fn argmin_first(p: &PathGrid) -> usize {
    let mut best = 0;
    for (k, &v) in p.values.iter().enumerate() {
        if v < p.values[best] {
            best = k;
        }
    }
    best
}

/// Cyclic shift of the path so that it starts at its (first) minimum.
///
/// `V(f)(t) = f(τ + t mod T) + f(T)·1{t + τ ≥ T} − f(τ)`, with τ a grid node.
pub fn vervaat_transform(p: &PathGrid) -> PathGrid {
    let n = p.n_steps();
    let tau = argmin_first(p);
    let v = &p.values;
    let base = v[tau];
    let end = v[n];
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let j = tau + k;
        let x = if j < n { v[j] - base } else { v[j - n] + end - base };
        out.push(x);
    }
    out[0] = 0.0;
    out[n] = end;
    PathGrid {
        lifetime: p.lifetime,
        values: out,
    }
}

pub fn time_reverse(p: &PathGrid) -> PathGrid {
    let mut values = p.values.clone();
    values.reverse();
    PathGrid {
        lifetime: p.lifetime,
        values,
    }
}

/// Joins `b` after `a`, shifting `b` so the path is continuous at the join.
pub fn concatenate(a: &PathGrid, b: &PathGrid) -> Result<PathGrid> {
    let (da, db) = (a.dt(), b.dt());
    if ((da - db) / da).abs() > 1e-12 {
        return Err(Error::SpacingMismatch {
            left: da,
            right: db,
        });
    }
    let shift = a.end() - b.start();
    let mut values = Vec::with_capacity(a.values.len() + b.n_steps());
    values.extend_from_slice(&a.values);
    values.extend(b.values[1..].iter().map(|x| a.end() + (x - b.start())));
    // exact endpoint when the shift is exact
    if shift == 0.0 {
        let n = values.len() - 1;
        values[n] = b.end();
    }
    Ok(PathGrid {
        lifetime: a.lifetime + b.lifetime,
        values,
    })
}

/// Largest `k ≤ t_index` with `values[k] ≤ level`; 0 when there is none.
pub fn last_exit_below(p: &PathGrid, level: f64, t_index: usize) -> usize {
    let t_index = t_index.min(p.n_steps());
    p.values[..=t_index]
        .iter()
        .rposition(|&v| v <= level)
        .unwrap_or(0)
}

pub fn running_min(p: &PathGrid) -> PathGrid {
    let mut m = f64::INFINITY;
    let values = p
        .values
        .iter()
        .map(|&v| {
            m = m.min(v);
            m
        })
        .collect();
    PathGrid {
        lifetime: p.lifetime,
        values,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitKind {
    /// End of the initial excursion for a bridge with negative endpoint.
    ZNeg,
    /// Last visit to the endpoint level for a bridge with positive endpoint.
    ZhatPos,
    /// First zero after time 0 of the transformed Brownian motion.
    T0Bm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub kind: SplitKind,
    pub split_time: f64,
    pub split_index: usize,
}

impl SplitRecord {
    pub fn at_index(kind: SplitKind, p: &PathGrid, index: usize) -> Self {
        SplitRecord {
            kind,
            split_time: p.time(index),
            split_index: index,
        }
    }
}

/// Grid-level detection of the split point of a transformed path.
pub fn detect_split(p: &PathGrid, kind: SplitKind, level: f64) -> Result<Option<SplitRecord>> {
    let n = p.n_steps();
    let v = &p.values;
    let found = match kind {
        SplitKind::ZNeg => {
            let k = (1..n).find(|&k| v[k] <= 0.0).ok_or_else(|| {
                Error::MalformedPath("no nonpositive interior value for a negative-endpoint split".into())
            })?;
            Some(k)
        }
        SplitKind::T0Bm => (1..n).find(|&k| v[k] <= 0.0),
        SplitKind::ZhatPos => (1..n).rev().find(|&k| v[k] <= level),
    };
    Ok(found.map(|k| SplitRecord::at_index(kind, p, k)))
}

/// Suffix-minimum ladder of a growing path prefix.
///
/// After pushing `values[0..=k]`, consecutive entries `(i_j, v_j)` have
/// strictly increasing values and indices, the top entry is `(k, values[k])`,
/// and for `λ ∈ [v_j, v_{j+1})` the last index `≤ k` with value `≤ λ` is
/// `i_j`. Amortized O(1) per push.
#[derive(Debug, Clone, Default)]
pub struct SuffixMinima {
    stack: Vec<(usize, f64)>,
    len: usize,
}

impl SuffixMinima {
    pub fn new() -> Self {
        SuffixMinima::default()
    }

    pub fn from_prefix(values: &[f64]) -> Self {
        let mut s = SuffixMinima::new();
        for &v in values {
            s.push(v);
        }
        s
    }

    pub fn push(&mut self, value: f64) {
        while let Some(&(_, top)) = self.stack.last() {
            if top >= value {
                self.stack.pop();
            } else {
                break;
            }
        }
        self.stack.push((self.len, value));
        self.len += 1;
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.stack
    }

    /// Number of values pushed so far.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Last index with value `≤ level`, or `None` when every value exceeds it.
    pub fn last_exit(&self, level: f64) -> Option<usize> {
        let pos = self.stack.partition_point(|&(_, v)| v <= level);
        if pos == 0 {
            None
        } else {
            Some(self.stack[pos - 1].0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(v: &[f64]) -> PathGrid {
        PathGrid::new(1.0, v.to_vec()).unwrap()
    }

    #[test]
    fn argmin_examples() {
        assert_eq!(argmin_first(&grid(&[0.0, 0.0, 0.0])), 0);
        assert_eq!(argmin_first(&grid(&[0.0, -1.0, -0.5, -1.5, -1.0])), 3);
        assert_eq!(argmin_first(&grid(&[0.0, -2.0, -2.0, 0.0, 1.0])), 1);
    }

    #[test]
    fn vervaat_hand_example() {
        let v = vervaat_transform(&grid(&[0.0, -1.0, -0.5, -1.5, -1.0]));
        let expected = [0.0, 0.5, -0.5, 0.0, -1.0];
        for (a, b) in v.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(v.lifetime(), 1.0);
    }

    #[test]
    fn vervaat_identity_on_nonnegative_paths() {
        let p = grid(&[0.0, 0.3, 0.1, 0.7, 0.2]);
        assert_eq!(vervaat_transform(&p), p);
    }

    #[test]
    fn reverse_examples() {
        assert_eq!(time_reverse(&grid(&[0.0, 1.0, 2.0])).values(), &[2.0, 1.0, 0.0]);
        let pal = grid(&[1.0, 2.0, 1.0]);
        assert_eq!(time_reverse(&pal), pal);
    }

    #[test]
    fn concatenate_examples() {
        let c = concatenate(&grid(&[0.0, 1.0]), &grid(&[0.0, -1.0])).unwrap();
        assert_eq!(c.values(), &[0.0, 1.0, 0.0]);
        assert_eq!(c.lifetime(), 2.0);
        let c = concatenate(&grid(&[0.0, 0.0]), &grid(&[5.0, 6.0])).unwrap();
        assert_eq!(c.values(), &[0.0, 0.0, 1.0]);
        let half = PathGrid::new(1.0, vec![0.0, 1.0, 2.0]).unwrap();
        assert!(matches!(
            concatenate(&grid(&[0.0, 1.0]), &half),
            Err(Error::SpacingMismatch { .. })
        ));
    }

    #[test]
    fn zero_step_paths_rejected() {
        assert!(PathGrid::new(1.0, vec![0.0]).is_err());
        assert!(PathGrid::new(0.0, vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn last_exit_examples() {
        let p = grid(&[0.0, 2.0, 1.0, 3.0]);
        assert_eq!(last_exit_below(&p, 1.0, 3), 2);
        assert_eq!(last_exit_below(&p, 1.0, 2), 2);
        assert_eq!(last_exit_below(&p, 1e9, 3), 3);
    }

    #[test]
    fn running_min_examples() {
        assert_eq!(running_min(&grid(&[0.0, -1.0, 1.0])).values(), &[0.0, -1.0, -1.0]);
        assert_eq!(running_min(&grid(&[0.5, 1.0, 2.0])).values(), &[0.5, 0.5, 0.5]);
    }

    #[test]
    fn detect_split_examples() {
        let p = grid(&[0.0, 1.0, 0.5, -0.2, -1.0]);
        let r = detect_split(&p, SplitKind::ZNeg, 0.0).unwrap().unwrap();
        assert_eq!(r.split_index, 3);
        assert!((r.split_time - 0.75).abs() < 1e-15);
        let p = grid(&[0.0, 0.5, 1.5, 2.0, 1.0]);
        let r = detect_split(&p, SplitKind::ZhatPos, 1.0).unwrap().unwrap();
        assert_eq!(r.split_index, 1);
        let p = grid(&[0.0, 0.5, 1.5, 2.0, 1.0]);
        assert!(detect_split(&p, SplitKind::T0Bm, 0.0).unwrap().is_none());
        assert!(detect_split(&p, SplitKind::ZNeg, 0.0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let p = grid(&[0.0, 0.1234567890123456789, -3.0e-7, 2.5]);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,value\n"));
        assert_eq!(text.lines().count(), 5);
        let back = PathGrid::read_csv(&buf[..]).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn suffix_minima_matches_brute_force() {
        let v = [0.0, 0.8, 0.3, 0.9, 0.5, 0.5, 1.2, 0.7];
        let mut s = SuffixMinima::new();
        for (k, &x) in v.iter().enumerate() {
            s.push(x);
            let p = PathGrid::new(1.0, v.to_vec()).unwrap();
            for lvl in [0.0, 0.2, 0.3, 0.5, 0.6, 0.75, 0.85, 1.0, 2.0] {
                assert_eq!(s.last_exit(lvl).unwrap(), last_exit_below(&p, lvl, k));
            }
        }
    }
}
