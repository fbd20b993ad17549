//! Full-size acceptance run: one line per criterion, then a hard assert.
//!
//! Takes roughly ten minutes on one core with a release-optimised test profile.
//! Run alone with `cargo test --release -p vervaat-core --test acceptance -- --nocapture`.

use std::io::Write;
use std::time::{Duration, Instant};

use vervaat_core::verify::{run_check, CheckConfig, CheckName, CheckReport};

struct Outcome {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn run(cfg: &CheckConfig) -> (CheckReport, Duration) {
    let start = Instant::now();
    let r = run_check(cfg).unwrap_or_else(|e| panic!("{}: {e}", cfg.check));
    (r, start.elapsed())
}

fn in_pool(cfg: &CheckConfig, threads: usize) -> String {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let mut r = pool.install(|| run_check(cfg)).unwrap();
    r.runtime_ms = 0;
    r.to_json()
}

fn summary(r: &CheckReport) -> String {
    let failing: Vec<String> = r
        .cells
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{}={:.4}", c.label, c.statistic))
        .collect();
    let mut s = format!("statistic {:.4} vs {}", r.statistic, r.threshold);
    if !failing.is_empty() {
        s.push_str(&format!("; failing: {}", failing.join(", ")));
    }
    s
}

fn single(id: usize, name: &'static str, check: CheckName, limit: Option<Duration>) -> Outcome {
    let (r, took) = run(&CheckConfig::defaults(check));
    let in_time = limit.is_none_or(|l| took <= l);
    Outcome {
        id,
        name,
        pass: r.pass && in_time,
        detail: format!("{}; {:.0} s", summary(&r), took.as_secs_f64()),
    }
}

#[test]
fn acceptance() {
    let mut out = Vec::new();
    let min = |m: u64| Some(Duration::from_secs(60 * m));

    out.push(single(1, "analytic suite", CheckName::AnalyticSuite, min(2)));
    out.push(single(2, "classical Vervaat", CheckName::VervaatClassical, min(3)));

    // split laws: six levels, ten minutes in total
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    let mut reference = None;
    for (check, sign) in [(CheckName::SplitNeg, -1.0), (CheckName::SplitPos, 1.0)] {
        for l in [0.5, 1.0, 2.0] {
            let mut cfg = CheckConfig::defaults(check);
            cfg.lambda = sign * l;
            let (mut r, _) = run(&cfg);
            pass &= r.pass;
            parts.push(format!("λ={}: D={:.4}", cfg.lambda, r.statistic));
            if cfg.lambda == -1.0 {
                r.runtime_ms = 0;
                reference = Some((cfg, r.to_json()));
            }
        }
    }
    let took = start.elapsed();
    out.push(Outcome {
        id: 3,
        name: "split laws",
        pass: pass && took <= Duration::from_secs(600),
        detail: format!("{}; {:.0} s", parts.join(", "), took.as_secs_f64()),
    });

    out.push(single(4, "decomposition", CheckName::Decomposition, None));
    out.push(single(5, "joint (R_t, θ_t)", CheckName::JointRTheta, None));
    out.push(single(6, "martingale mean one", CheckName::MartingaleMeanOne, None));
    out.push(single(7, "reweighting", CheckName::Reweighting, None));
    out.push(single(8, "drift, positive bridge", CheckName::DriftPosBridge, None));
    out.push(single(9, "T̃₀ laws", CheckName::T0Laws, None));
    out.push(single(10, "drift, Brownian motion", CheckName::DriftBm, min(30)));

    // full-size rerun of one criterion on four threads, plus every check at a
    // reduced size on one and three threads
    let (cfg, one) = reference.unwrap();
    let mut same = in_pool(&cfg, 4) == one;
    let mut differing = Vec::new();
    for check in CheckName::ALL {
        let mut cfg = CheckConfig::defaults(check);
        if check.is_statistical() {
            cfg.n_paths = 2000;
            cfg.n_steps = 512;
        }
        if in_pool(&cfg, 1) != in_pool(&cfg, 3) {
            same = false;
            differing.push(check.name());
        }
    }
    out.push(Outcome {
        id: 11,
        name: "determinism across threads",
        pass: same,
        detail: if differing.is_empty() {
            "byte-identical reports".into()
        } else {
            format!("differs: {}", differing.join(", "))
        },
    });

    // written past the test harness capture so the summary always shows
    let mut w = std::io::stdout().lock();
    writeln!(w).unwrap();
    for o in &out {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        writeln!(w, "criterion {:>2} {:<28} {verdict}  ({})", o.id, o.name, o.detail).unwrap();
    }
    drop(w);
    let failed: Vec<usize> = out.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
