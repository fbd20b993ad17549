use std::fs::File;
use std::io::{BufWriter, Write};
use std::time::Instant;

use clap::{Args, ValueEnum};
use vervaat_core::samplers::ensemble_io::BinaryWriter;
use vervaat_core::samplers::{par_stream_range, sample_with, Law, LawSpec, Transform};
use vervaat_core::verify::ConfigFile;
use vervaat_core::PathGrid;

use crate::{env_seed, io_failure, read_text, Common, Failure};

const DEFAULT_SEED: u64 = 42;
/// Paths generated per batch; bounds memory for large ensembles.
const CHUNK: usize = 1024;

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Binary,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// Law name, e.g. vervaat-neg-bridge.
    #[arg(long)]
    law: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Start point for bridge laws.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    /// End point for bridge laws.
    #[arg(long, allow_hyphen_values = true)]
    y: Option<f64>,
    #[arg(long)]
    lifetime: Option<f64>,
    #[arg(long)]
    n_paths: Option<usize>,
    #[arg(long)]
    n_steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// How Vervaat laws are formed: `grid` (default) or `bridge-min`.
    #[arg(long)]
    transform: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Default)]
struct Settings {
    law: Option<String>,
    lambda: Option<f64>,
    x: Option<f64>,
    y: Option<f64>,
    lifetime: f64,
    n_paths: usize,
    n_steps: usize,
    seed: u64,
    format: Option<Format>,
    transform: Transform,
    out: Option<std::path::PathBuf>,
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, Failure> {
    v.parse().map_err(|_| Failure::usage(format!("{key}: cannot parse {v:?}")))
}

fn settings(a: SampleArgs) -> Result<Settings, Failure> {
    let mut s = Settings {
        lifetime: 1.0,
        n_paths: 1000,
        n_steps: 1024,
        seed: env_seed()?.unwrap_or(DEFAULT_SEED),
        ..Default::default()
    };
    if let Some(path) = &a.common.config {
        let file = ConfigFile::parse(&read_text(path)?)?;
        for (k, v) in &file.entries {
            match k.as_str() {
                "law" => s.law = Some(v.clone()),
                "lambda" => s.lambda = Some(parse(k, v)?),
                "x" => s.x = Some(parse(k, v)?),
                "y" => s.y = Some(parse(k, v)?),
                "lifetime" => s.lifetime = parse(k, v)?,
                "n_paths" | "n-paths" => s.n_paths = parse(k, v)?,
                "n_steps" | "n-steps" => s.n_steps = parse(k, v)?,
                "seed" => s.seed = parse(k, v)?,
                "format" => {
                    s.format = Some(Format::from_str(v, true).map_err(|_| Failure::usage(format!("format: {v:?}")))?)
                }
                "transform" => s.transform = v.parse()?,
                "out" => s.out = Some(v.into()),
                _ => return Err(Failure::usage(format!("sample: unknown key '{k}'"))),
            }
        }
    }
    s.law = a.law.or(s.law);
    s.lambda = a.lambda.or(s.lambda);
    s.x = a.x.or(s.x);
    s.y = a.y.or(s.y);
    s.lifetime = a.lifetime.unwrap_or(s.lifetime);
    s.n_paths = a.n_paths.unwrap_or(s.n_paths);
    s.n_steps = a.n_steps.unwrap_or(s.n_steps);
    s.seed = a.seed.unwrap_or(s.seed);
    s.format = a.format.or(s.format);
    if let Some(t) = &a.transform {
        s.transform = t.parse()?;
    }
    s.out = a.common.out.or(s.out);
    Ok(s)
}

fn format_for(out: &std::path::Path, explicit: Option<Format>) -> Format {
    explicit.unwrap_or_else(|| match out.extension().and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        Some("bin") | Some("vvt") => Format::Binary,
        _ => Format::Csv,
    })
}

pub fn run_sample(a: SampleArgs) -> Result<u8, Failure> {
    let s = settings(a)?;
    let name = s.law.as_deref().ok_or_else(|| Failure::usage("sample needs --law"))?;
    let law = Law::from_name(name, s.lambda, s.x, s.y)?;
    let spec = LawSpec::new(law, s.lifetime, s.n_steps)?;
    if s.n_paths == 0 {
        return Err(Failure::usage("--n-paths must be positive"));
    }
    let out_path = s.out.clone().ok_or_else(|| Failure::usage("sample needs --out"))?;
    let format = format_for(&out_path, s.format);
    let spec_json = serde_json::to_string(&spec).expect("law specs serialize");
    let header = format!(
        "vervaat sample {spec_json} transform={} n_paths={} seed={}",
        s.transform, s.n_paths, s.seed
    );
    let transform = s.transform;

    let start = Instant::now();
    let file = File::create(&out_path).map_err(|e| io_failure(&out_path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e: std::io::Error| io_failure(&out_path, e);
    let chunks = (0..s.n_paths).step_by(CHUNK).map(|lo| lo..(lo + CHUNK).min(s.n_paths));
    match format {
        Format::Csv => {
            writeln!(out, "# {header}").map_err(io)?;
            writeln!(out, "path_id,t,value").map_err(io)?;
            for range in chunks {
                let lo = range.start;
                let paths = par_stream_range(s.seed, range, |_, rng| sample_with(&spec, transform, rng))?;
                for (j, p) in paths.iter().enumerate() {
                    for (k, v) in p.values().iter().enumerate() {
                        writeln!(out, "{},{:.16e},{:.16e}", lo + j, p.time(k), v).map_err(io)?;
                    }
                }
            }
        }
        Format::Binary => {
            let mut w = BinaryWriter::with_comment(&mut out, &header, s.n_paths, s.n_steps, s.lifetime)?;
            for range in chunks {
                for p in par_stream_range(s.seed, range, |_, rng| sample_with(&spec, transform, rng))? {
                    w.push(&p)?;
                }
            }
            w.finish()?;
        }
        Format::Json => {
            let mut paths: Vec<PathGrid> = Vec::with_capacity(s.n_paths);
            for range in chunks {
                paths.extend(par_stream_range(s.seed, range, |_, rng| sample_with(&spec, transform, rng))?);
            }
            let doc = serde_json::json!({
                "header": header,
                "spec": spec,
                "seed": s.seed,
                "paths": paths.iter().map(|p| p.values()).collect::<Vec<_>>(),
            });
            serde_json::to_writer(&mut out, &doc).map_err(|e| io(e.into()))?;
            writeln!(out).map_err(io)?;
        }
    }
    out.flush().map_err(io)?;
    println!(
        "sampled {} paths of {} steps ({}), seed {}, {:.3} s -> {}",
        s.n_paths,
        s.n_steps,
        spec.law,
        s.seed,
        start.elapsed().as_secs_f64(),
        out_path.display()
    );
    Ok(0)
}
