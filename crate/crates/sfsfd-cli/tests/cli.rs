//! End-to-end tests of the `sfsfd` binary: command contracts, error
//! paths, and the reproducibility acceptance criterion.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sfsfd"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_ok(output: &Output) {
    assert!(
        output.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn sample_sobol_unscrambled_base_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "sample", "--method", "sobol", "--unscrambled", "--n", "4", "--d", "1", "--seed",
            "0", "--out", "design.csv",
        ],
    );
    assert_ok(&out);
    let text = std::fs::read_to_string(dir.path().join("design.csv")).unwrap();
    assert_eq!(text, "0\n0.5\n0.75\n0.25\n");
}

#[test]
fn sample_lhs_stratifies_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sample", "--method", "lhs", "--n", "4", "--d", "2", "--seed", "1", "--out",
    ];
    assert_ok(&run_in(dir.path(), &[&args[..], &["a.csv"]].concat()));
    assert_ok(&run_in(dir.path(), &[&args[..], &["b.csv"]].concat()));
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);

    let text = String::from_utf8(a).unwrap();
    for k in 0..2 {
        let mut seen = [false; 4];
        for line in text.lines() {
            let x: f64 = line.split(',').nth(k).unwrap().parse().unwrap();
            let stratum = (x * 4.0).floor() as usize;
            assert!(!seen[stratum]);
            seen[stratum] = true;
        }
    }
}

#[test]
fn discrepancy_prints_ten_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("single.csv"), "0.5\n").unwrap();
    let out = run_in(dir.path(), &["discrepancy", "single.csv"]);
    assert_ok(&out);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "8.333333333e-2");
}

#[test]
fn discrepancy_rejects_bad_input_naming_the_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.csv"), "0.5,0.5\n0.5,abc\n").unwrap();
    let out = run_in(dir.path(), &["discrepancy", "bad.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    std::fs::write(dir.path().join("empty.csv"), "").unwrap();
    let out = run_in(dir.path(), &["discrepancy", "empty.csv"]);
    assert!(!out.status.success());

    std::fs::write(dir.path().join("range.csv"), "0.5,1.5\n").unwrap();
    let out = run_in(dir.path(), &["discrepancy", "range.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside"));
}

#[test]
fn missing_required_flag_exits_nonzero_with_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["sample", "--n", "4"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--method"));

    let out = run_in(dir.path(), &["discrepancy"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.to_lowercase().contains("usage"), "stderr: {err}");
}

#[test]
fn optimize_writes_valid_density_and_budget_one_is_uniform() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "optimize", "--n", "10", "--d", "2", "--m", "5", "--seed", "0", "--budget", "1",
            "--a-initial", "2", "--out", "pdf.json",
        ],
    );
    assert_ok(&out);
    let objective: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!(objective > 0.0);

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("pdf.json")).unwrap())
            .unwrap();
    let masses: Vec<f64> = doc["masses"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let total: f64 = masses.iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
    // budget 1 never leaves the uniform start
    for &p in &masses {
        assert!((p - 0.2).abs() < 1e-12);
    }
    assert!(dir.path().join("pdf.trace.jsonl").exists());
}

#[test]
fn optimized_density_feeds_the_sampler() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&run_in(
        dir.path(),
        &[
            "optimize", "--n", "8", "--d", "2", "--m", "4", "--seed", "3", "--budget", "10",
            "--a-initial", "2", "--out", "pdf.json",
        ],
    ));
    assert_ok(&run_in(
        dir.path(),
        &[
            "sample", "--method", "sfsfd-pdf-file", "--pdf", "pdf.json", "--n", "6", "--d",
            "2", "--seed", "1", "--out", "design.csv",
        ],
    ));
    let text = std::fs::read_to_string(dir.path().join("design.csv")).unwrap();
    assert_eq!(text.lines().count(), 6);

    // the design scores cleanly
    let out = run_in(dir.path(), &["discrepancy", "design.csv"]);
    assert_ok(&out);

    let missing = run_in(
        dir.path(),
        &[
            "sample", "--method", "sfsfd-pdf-file", "--pdf", "nope.json", "--n", "2", "--d",
            "2", "--out", "x.csv",
        ],
    );
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nope.json"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"method": "lhs", "n": 4, "d": 2, "seed": 9, "out": "from_config.csv"}"#,
    )
    .unwrap();

    // config only
    assert_ok(&run_in(dir.path(), &["sample", "--config", "cfg.json"]));
    let text = std::fs::read_to_string(dir.path().join("from_config.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);

    // flag overrides n
    assert_ok(&run_in(
        dir.path(),
        &["sample", "--config", "cfg.json", "--n", "7", "--out", "override.csv"],
    ));
    let text = std::fs::read_to_string(dir.path().join("override.csv")).unwrap();
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn benchmark_smoke_runs_and_emits_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "benchmark", "--out", "bench", "--methods", "sfsfd,lhs,sobol,uniform", "--dims",
            "3", "--sizes", "12", "--seeds", "2", "--budget", "3", "--a-initial", "1", "--m",
            "3", "--workers", "2",
        ],
    );
    assert_ok(&out);
    let bench = dir.path().join("bench");
    assert!(bench.join("records.jsonl").exists());
    let csv = std::fs::read_to_string(bench.join("aggregate.csv")).unwrap();
    // 4 methods x 1 dim x 1 size + header
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("method,d,n,seed_count,mean_discrepancy,std_discrepancy"));
    assert!(bench.join("discrepancy_vs_d_linear.svg").exists());
    assert!(bench.join("discrepancy_vs_d_log.svg").exists());
}

#[test]
fn benchmark_desk_preset_completes() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .current_dir(dir.path())
        .env("SFSFD_WORKERS", "2")
        .args(["benchmark", "--preset", "desk", "--out", "bench"])
        .output()
        .expect("binary runs");
    assert_ok(&out);
    let csv = std::fs::read_to_string(dir.path().join("bench/aggregate.csv")).unwrap();
    // 4 methods x 3 dims x 1 size + header
    assert_eq!(csv.lines().count(), 13);
}

#[test]
fn benchmark_paper_preset_has_full_grid_axes() {
    // Run the paper grid axes with the cheap generator only; the full
    // density run at paper scale is an explicit long-form invocation.
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "benchmark", "--preset", "paper", "--methods", "sobol", "--seeds", "1", "--out",
            "bench", "--no-svg",
        ],
    );
    assert_ok(&out);
    let csv = std::fs::read_to_string(dir.path().join("bench/aggregate.csv")).unwrap();
    // 1 method x 6 dims x 5 sizes + header
    assert_eq!(csv.lines().count(), 31);
    assert!(!dir.path().join("bench/discrepancy_vs_d_linear.svg").exists());
}

#[test]
fn benchmark_failure_cells_set_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    // dimension 2000 exceeds the sobol table
    let out = run_in(
        dir.path(),
        &[
            "benchmark", "--out", "bench", "--methods", "sobol", "--dims", "2000", "--sizes",
            "8", "--seeds", "1",
        ],
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cell"));
    // the failure is persisted, not lost
    let records = std::fs::read_to_string(dir.path().join("bench/records.jsonl")).unwrap();
    assert!(records.contains("\"error\""));
}

/// Acceptance criterion 8: identical invocations give byte-identical
/// outputs, and an interrupted-then-resumed benchmark matches an
/// uninterrupted one.
#[test]
fn criterion_8_reproducibility_and_resume() {
    let dir = tempfile::tempdir().unwrap();

    // sample: identical flags, byte-identical files.
    for name in ["s1.csv", "s2.csv"] {
        assert_ok(&run_in(
            dir.path(),
            &[
                "sample", "--method", "uniform", "--n", "32", "--d", "4", "--seed", "11",
                "--out", name,
            ],
        ));
    }
    assert_eq!(
        std::fs::read(dir.path().join("s1.csv")).unwrap(),
        std::fs::read(dir.path().join("s2.csv")).unwrap()
    );

    // optimize: identical flags, byte-identical density and trace.
    for sub in ["o1", "o2"] {
        std::fs::create_dir_all(dir.path().join(sub)).unwrap();
        assert_ok(&run_in(
            &dir.path().join(sub),
            &[
                "optimize", "--n", "10", "--d", "2", "--m", "4", "--seed", "2", "--budget",
                "12", "--a-initial", "2", "--out", "pdf.json",
            ],
        ));
    }
    for file in ["pdf.json", "pdf.trace.jsonl"] {
        assert_eq!(
            std::fs::read(dir.path().join("o1").join(file)).unwrap(),
            std::fs::read(dir.path().join("o2").join(file)).unwrap(),
            "{file} differs between identical runs"
        );
    }

    // benchmark: interrupted (partial grid) + resumed == uninterrupted.
    let grid = [
        "--dims", "2,4", "--sizes", "8", "--seeds", "2", "--budget", "2", "--a-initial",
        "1", "--m", "3",
    ];
    let full_methods = ["--methods", "uniform,lhs,sobol,sfsfd"];
    let partial_methods = ["--methods", "uniform,lhs"];

    let fresh: Vec<String> = ["benchmark", "--out", "fresh"]
        .iter()
        .chain(full_methods.iter())
        .chain(grid.iter())
        .map(|s| s.to_string())
        .collect();
    let fresh_args: Vec<&str> = fresh.iter().map(|s| s.as_str()).collect();
    assert_ok(&run_in(dir.path(), &fresh_args));

    let partial: Vec<String> = ["benchmark", "--out", "resumed"]
        .iter()
        .chain(partial_methods.iter())
        .chain(grid.iter())
        .map(|s| s.to_string())
        .collect();
    let partial_args: Vec<&str> = partial.iter().map(|s| s.as_str()).collect();
    assert_ok(&run_in(dir.path(), &partial_args));

    let resumed: Vec<String> = ["benchmark", "--out", "resumed"]
        .iter()
        .chain(full_methods.iter())
        .chain(grid.iter())
        .map(|s| s.to_string())
        .collect();
    let resumed_args: Vec<&str> = resumed.iter().map(|s| s.as_str()).collect();
    assert_ok(&run_in(dir.path(), &resumed_args));

    // Derived outputs are byte-identical.
    for file in [
        "aggregate.csv",
        "discrepancy_vs_d_linear.svg",
        "discrepancy_vs_d_log.svg",
    ] {
        assert_eq!(
            std::fs::read(dir.path().join("fresh").join(file)).unwrap(),
            std::fs::read(dir.path().join("resumed").join(file)).unwrap(),
            "{file} differs between fresh and resumed runs"
        );
    }

    // Record sets match on every result-bearing field (wall time is
    // telemetry and varies run to run).
    let canonical = |path: &std::path::Path| -> Vec<String> {
        let mut lines: Vec<String> = std::fs::read_to_string(path)
            .unwrap()
            .lines()
            .map(|line| {
                let mut v: serde_json::Value = serde_json::from_str(line).unwrap();
                v["wall_time_seconds"] = 0.0.into();
                v.to_string()
            })
            .collect();
        lines.sort();
        lines
    };
    assert_eq!(
        canonical(&dir.path().join("fresh/records.jsonl")),
        canonical(&dir.path().join("resumed/records.jsonl"))
    );

    // Re-running the completed benchmark recomputes nothing: the store
    // bytes are untouched.
    let before = std::fs::read(dir.path().join("fresh/records.jsonl")).unwrap();
    assert_ok(&run_in(dir.path(), &fresh_args));
    let after = std::fs::read(dir.path().join("fresh/records.jsonl")).unwrap();
    assert_eq!(before, after);

    println!("ACCEPTANCE 8 (byte-identical reruns, interrupted == uninterrupted): PASS");
}
