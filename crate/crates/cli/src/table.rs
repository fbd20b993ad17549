use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};

use clap::Args;
use vervaat_core::analytic::table::{lookup, write_table, Axis, REGISTRY};
use vervaat_core::numerics::QuadratureSpec;
use vervaat_core::verify::ConfigFile;

use crate::{io_failure, read_text, Common, Failure};

#[derive(Args, Debug)]
pub struct TableArgs {
    /// Function name from the analytic registry.
    function: String,
    #[command(flatten)]
    common: Common,
    /// Arguments as `--name value` or `--name lo:hi:n`; `--grid` names the
    /// function's first argument.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "ARGS")]
    rest: Vec<String>,
}

pub fn run_table(a: TableArgs) -> Result<u8, Failure> {
    let func = lookup(&a.function).ok_or_else(|| {
        let names: Vec<&str> = REGISTRY.iter().map(|f| f.name).collect();
        Failure::usage(format!("unknown function '{}'; known: {}", a.function, names.join(", ")))
    })?;
    let mut raw: BTreeMap<String, String> = BTreeMap::new();
    let mut out_path = a.common.out.clone();
    if let Some(p) = &a.common.config {
        for (k, v) in ConfigFile::parse(&read_text(p)?)?.entries {
            if k == "out" {
                out_path = out_path.or(Some(v.into()));
            } else {
                raw.insert(k, v);
            }
        }
    }
    let mut quad = QuadratureSpec::default();
    let mut it = a.rest.iter();
    while let Some(flag) = it.next() {
        let key = flag
            .strip_prefix("--")
            .ok_or_else(|| Failure::usage(format!("expected --name, got {flag:?}")))?;
        let value = it.next().ok_or_else(|| Failure::usage(format!("{flag} needs a value")))?;
        match key {
            "out" => out_path = Some(value.into()),
            "rel-tol" => {
                quad.rel_tol = value.parse().map_err(|_| Failure::usage(format!("bad --rel-tol {value:?}")))?
            }
            "grid" => {
                raw.insert(func.args[0].to_string(), value.clone());
            }
            _ => {
                raw.insert(key.to_string(), value.clone());
            }
        }
    }
    quad.validate()?;
    let mut axes = BTreeMap::new();
    for (k, v) in &raw {
        axes.insert(k.clone(), Axis::parse(v)?);
    }
    let header = format!(
        "vervaat table {} {}",
        func.name,
        raw.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
    );
    let rows = match &out_path {
        Some(p) => {
            let file = File::create(p).map_err(|e| io_failure(p, e))?;
            let mut w = BufWriter::new(file);
            let n = write_table(func, &axes, &quad, &header, &mut w)?;
            w.flush().map_err(|e| io_failure(p, e))?;
            n
        }
        None => write_table(func, &axes, &quad, &header, std::io::stdout().lock())?,
    };
    if let Some(p) = &out_path {
        println!("wrote {rows} rows of {} -> {}", func.name, p.display());
    }
    Ok(0)
}
