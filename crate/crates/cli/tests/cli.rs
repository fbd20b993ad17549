use std::path::Path;
use std::process::{Command, Output};

fn vervaat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vervaat"))
        .args(args)
        .env_remove("VERVAAT_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&vervaat(&["check", "no-such-check"])), 2);
    assert_eq!(code(&vervaat(&["table", "no-such-function"])), 2);
    assert_eq!(code(&vervaat(&["frobnicate"])), 2);
    assert_eq!(code(&vervaat(&["sample", "--law", "vervaat-neg-bridge", "--lambda", "1"])), 2);
    assert_eq!(code(&vervaat(&["check", "split-neg", "--lambda", "1"])), 2);
    assert_eq!(code(&vervaat(&["check", "split-neg", "--transform", "sideways"])), 2);
    assert_eq!(code(&vervaat(&["--threads", "0", "check", "analytic-suite"])), 2);
}

#[test]
fn io_errors_exit_3() {
    let o = vervaat(&["sample", "--law", "brownian-motion", "--n-paths", "1", "--n-steps", "2", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(code(&o), 3);
    assert_eq!(code(&vervaat(&["check", "--config", "/nonexistent/cfg.txt"])), 3);
}

#[test]
fn analytic_suite_passes_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.json");
    let o = vervaat(&["--no-timing", "check", "analytic-suite", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    assert_eq!(json["pass"], true);
    assert_eq!(json["runtime_ms"], 0);
}

#[test]
fn reports_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let out = dir.path().join(name);
        let o = vervaat(&[
            "--threads", threads, "--no-timing", "check", "split-pos", "--lambda", "1", "--n-paths", "1000",
            "--n-steps", "256", "--out", out.to_str().unwrap(),
        ]);
        assert!(code(&o) <= 1, "{}", String::from_utf8_lossy(&o.stderr));
        read(&out)
    };
    assert_eq!(run("1", "a.json"), run("4", "b.json"));
}

#[test]
fn sampling_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = vervaat(&[
            "--threads", threads, "sample", "--law", "vervaat-pos-bridge", "--lambda", "0.5", "--n-paths", "40",
            "--n-steps", "16", "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        read(&out)
    };
    let a = run("a.csv", "1");
    assert_eq!(a, run("b.csv", "3"));
    let lines: Vec<&str> = a.lines().collect();
    assert!(lines[0].starts_with("# vervaat sample"));
    assert_eq!(lines[1], "path_id,t,value");
    assert_eq!(lines.len(), 2 + 40 * 17);
}

#[test]
fn json_and_binary_formats_are_written() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["e.json", "e.bin"] {
        let out = dir.path().join(name);
        let o = vervaat(&["sample", "--law", "brownian-motion", "--n-paths", "3", "--n-steps", "8", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        assert!(std::fs::metadata(&out).unwrap().len() > 0);
    }
    let json: serde_json::Value = serde_json::from_str(&read(&dir.path().join("e.json"))).unwrap();
    assert!(json.is_object());
}

#[test]
fn table_writes_one_row_per_grid_point() {
    let o = vervaat(&["table", "split-cdf-neg", "--grid", "0.1:0.9:9", "--lambda", "-1"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "t,lambda,value");
    assert_eq!(rows.len(), 10);
    let last: f64 = rows[9].split(',').nth(2).unwrap().parse().unwrap();
    assert!(last > 0.0 && last < 1.0);

    // two swept axes give the product grid
    let o = vervaat(&["table", "q0y", "--y", "0.5:2:4", "--t", "0.25:1:3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 12);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sample.cfg");
    std::fs::write(&cfg, "law = brownian-motion\nn_paths = 5\nn_steps = 4\nseed = 7\n").unwrap();
    let out = dir.path().join("s.csv");
    let run = |extra: &[&str]| {
        let mut args = vec!["sample", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = vervaat(&args);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        read(&out)
    };
    let from_file = run(&[]);
    assert!(from_file.lines().next().unwrap().contains("seed=7"));
    assert_eq!(from_file.lines().count(), 2 + 5 * 5);
    let flagged = run(&["--n-paths", "2", "--seed", "8"]);
    assert!(flagged.lines().next().unwrap().contains("seed=8"));
    assert_eq!(flagged.lines().count(), 2 + 2 * 5);
}

#[test]
fn environment_seed_sits_below_config_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_vervaat"));
        cmd.args(["sample", "--law", "brownian-motion", "--n-paths", "1", "--n-steps", "2", "--out"])
            .arg(&out)
            .args(extra)
            .env_remove("VERVAAT_SEED");
        if let Some(s) = env {
            cmd.env("VERVAAT_SEED", s);
        }
        assert!(cmd.output().unwrap().status.success());
        read(&out).lines().next().unwrap().to_string()
    };
    assert!(run(None, &[]).ends_with("seed=42"));
    assert!(run(Some("99"), &[]).ends_with("seed=99"));
    assert!(run(Some("99"), &["--seed", "3"]).ends_with("seed=3"));

    let o = Command::new(env!("CARGO_BIN_EXE_vervaat"))
        .args(["sample", "--law", "brownian-motion"])
        .env("VERVAAT_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn statistical_failure_exits_1() {
    // the literal grid transform at a coarse grid is visibly biased
    let o = vervaat(&[
        "--no-timing", "check", "vervaat-classical", "--n-paths", "20000", "--n-steps", "16", "--transform", "grid",
    ]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
}
