//! Named analytic functions for tabulation over rectangular grids.

use std::collections::BTreeMap;
use std::io::Write;

use crate::analytic::{bm, kernels, pos_bridge, pos_bridge::DriftState};
use crate::error::{invalid, Result};
use crate::numerics::quadrature::QuadratureSpec;
use crate::numerics::special::incomplete_gamma_tail;

type Eval = fn(&[f64], &QuadratureSpec) -> Result<f64>;

pub struct TableFunction {
    pub name: &'static str,
    /// Argument names; the first one is the default grid axis.
    pub args: &'static [&'static str],
    eval: Eval,
}

impl TableFunction {
    pub fn eval(&self, args: &[f64], quad: &QuadratureSpec) -> Result<f64> {
        (self.eval)(args, quad)
    }
}

fn state(t: f64, y: f64, theta: f64) -> Result<DriftState> {
    DriftState::new(t, y, theta)
}

pub static REGISTRY: &[TableFunction] = &[
    TableFunction { name: "heat-kernel", args: &["y", "t", "x"], eval: |a, _| kernels::heat_kernel(a[1], a[2], a[0]) },
    TableFunction { name: "fp-density", args: &["t", "a"], eval: |a, _| kernels::fp_density(a[1], a[0]) },
    TableFunction { name: "q-kernel", args: &["y", "t", "x"], eval: |a, _| kernels::q_kernel(a[1], a[2], a[0]) },
    TableFunction { name: "q0y", args: &["y", "t"], eval: |a, _| kernels::q0y(a[1], a[0]) },
    TableFunction { name: "q00", args: &["t"], eval: |a, _| kernels::q00(a[0]) },
    TableFunction { name: "split-density-neg", args: &["t", "lambda"], eval: |a, _| kernels::split_density_neg(a[0], a[1]) },
    TableFunction { name: "split-density-pos", args: &["t", "lambda"], eval: |a, _| kernels::split_density_pos(a[0], a[1]) },
    TableFunction { name: "split-cdf-neg", args: &["t", "lambda"], eval: |a, _| Ok(kernels::split_cdf_neg(a[0], a[1])) },
    TableFunction { name: "split-cdf-pos", args: &["t", "lambda"], eval: |a, _| Ok(kernels::split_cdf_pos(a[0], a[1])) },
    TableFunction { name: "joint-density", args: &["y", "s", "t", "lambda"], eval: |a, _| kernels::joint_density_r_theta(a[2], a[0], a[1], a[3]) },
    TableFunction { name: "incomplete-gamma-tail", args: &["x"], eval: |a, _| {
        if a[0] < 0.0 { Err(invalid("x must be nonnegative")) } else { Ok(incomplete_gamma_tail(a[0])) }
    } },
    TableFunction { name: "integral-lemma", args: &["a", "t"], eval: |a, q| kernels::integral_lemma_lhs(a[1], a[0], q) },
    TableFunction { name: "arcsine-cdf", args: &["t"], eval: |a, _| Ok(kernels::arcsine_cdf(a[0])) },
    TableFunction { name: "F1", args: &["y", "t", "lambda"], eval: |a, _| pos_bridge::f1(a[1], a[0], a[2]) },
    TableFunction { name: "F2", args: &["y", "t", "lambda"], eval: |a, _| pos_bridge::f2(a[1], a[0], a[2]) },
    TableFunction { name: "F", args: &["y", "t", "theta", "lambda"], eval: |a, _| pos_bridge::f(state(a[1], a[0], a[2])?, a[3]) },
    TableFunction { name: "d2F", args: &["y", "t", "theta", "lambda"], eval: |a, _| pos_bridge::d2f(state(a[1], a[0], a[2])?, a[3]) },
    TableFunction { name: "drift-pos-bridge", args: &["y", "t", "theta", "lambda"], eval: |a, _| pos_bridge::drift_pos_bridge(state(a[1], a[0], a[2])?, a[3]) },
    TableFunction { name: "bound-envelope", args: &["y", "t", "theta", "lambda"], eval: |a, _| pos_bridge::bound_envelope(state(a[1], a[0], a[2])?, a[3]) },
    TableFunction { name: "J", args: &["y", "t"], eval: |a, q| bm::j(a[1], a[0], q) },
    TableFunction { name: "Jdot", args: &["y", "t"], eval: |a, q| bm::jdot(a[1], a[0], q) },
];

pub fn lookup(name: &str) -> Option<&'static TableFunction> {
    REGISTRY.iter().find(|f| f.name == name)
}

/// One table axis: a fixed value or `n` equally spaced points from `lo` to `hi`.
#[derive(Debug, Clone, PartialEq)]
pub enum Axis {
    Fixed(f64),
    Range { lo: f64, hi: f64, n: usize },
}

impl Axis {
    /// Parses `v` or `lo:hi:n`.
    pub fn parse(s: &str) -> Result<Axis> {
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("bad number {x:?} in {s:?}")))
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [v] => Ok(Axis::Fixed(num(v)?)),
            [lo, hi, n] => {
                let n: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| invalid(format!("bad point count in {s:?}")))?;
                if n == 0 {
                    return Err(invalid("a range needs at least one point"));
                }
                Ok(Axis::Range { lo: num(lo)?, hi: num(hi)?, n })
            }
            _ => Err(invalid(format!("axis must be `v` or `lo:hi:n`, got {s:?}"))),
        }
    }

    pub fn points(&self) -> Vec<f64> {
        match *self {
            Axis::Fixed(v) => vec![v],
            Axis::Range { lo, hi, n } => {
                if n == 1 {
                    vec![lo]
                } else {
                    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
                }
            }
        }
    }
}

/// Writes `arg1,arg2,...,value` rows over the product of the axes (last axis fastest).
pub fn write_table<W: Write>(
    func: &TableFunction,
    axes: &BTreeMap<String, Axis>,
    quad: &QuadratureSpec,
    header_comment: &str,
    mut out: W,
) -> Result<usize> {
    for k in axes.keys() {
        if !func.args.contains(&k.as_str()) {
            return Err(invalid(format!("{} has no argument {k:?}", func.name)));
        }
    }
    let grids: Vec<Vec<f64>> = func
        .args
        .iter()
        .map(|a| {
            axes.get(*a)
                .map(Axis::points)
                .ok_or_else(|| invalid(format!("{} needs a value for {a:?}", func.name)))
        })
        .collect::<Result<_>>()?;
    writeln!(out, "# {header_comment}")?;
    writeln!(out, "{},value", func.args.join(","))?;
    let total: usize = grids.iter().map(Vec::len).product();
    let mut idx = vec![0usize; grids.len()];
    let mut args = vec![0.0; grids.len()];
    for _ in 0..total {
        for (d, g) in grids.iter().enumerate() {
            args[d] = g[idx[d]];
        }
        let v = func
            .eval(&args, quad)
            .map_err(|e| e.with_context(format!("{} at {:?}", func.name, args)))?;
        let row: Vec<String> = args.iter().map(|a| format!("{a:.16e}")).collect();
        writeln!(out, "{},{:.16e}", row.join(","), v)?;
        for d in (0..grids.len()).rev() {
            idx[d] += 1;
            if idx[d] < grids[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
    out.flush()?;
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing() {
        assert_eq!(Axis::parse("0.5").unwrap(), Axis::Fixed(0.5));
        let r = Axis::parse("0.001:0.999:999").unwrap();
        let p = r.points();
        assert_eq!(p.len(), 999);
        assert!((p[998] - 0.999).abs() < 1e-15);
        assert!(Axis::parse("1:2").is_err());
        assert!(Axis::parse("a").is_err());
    }

    #[test]
    fn split_density_table_rows() {
        let f = lookup("split-density-neg").unwrap();
        let mut axes = BTreeMap::new();
        axes.insert("t".to_string(), Axis::parse("0.001:0.999:999").unwrap());
        axes.insert("lambda".to_string(), Axis::Fixed(-1.0));
        let mut buf = Vec::new();
        let n = write_table(f, &axes, &QuadratureSpec::default(), "test", &mut buf).unwrap();
        assert_eq!(n, 999);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1001);
        assert_eq!(text.lines().nth(1).unwrap(), "t,lambda,value");
    }

    #[test]
    fn missing_or_unknown_arguments_rejected() {
        let f = lookup("F").unwrap();
        let mut axes = BTreeMap::new();
        axes.insert("y".to_string(), Axis::Fixed(1.0));
        assert!(write_table(f, &axes, &QuadratureSpec::default(), "", Vec::new()).is_err());
        axes.insert("bogus".to_string(), Axis::Fixed(1.0));
        assert!(write_table(f, &axes, &QuadratureSpec::default(), "", Vec::new()).is_err());
        assert!(lookup("nope").is_none());
    }
}
