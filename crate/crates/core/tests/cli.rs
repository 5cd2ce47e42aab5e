//! End-to-end behaviour of the `pgscout` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn pgscout(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pgscout"))
        .current_dir(dir)
        .env_remove("PGSCOUT_OUT")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let o = pgscout(dir, args);
    assert_eq!(
        code(&o),
        0,
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

/// Temp dir holding the running example as `g/graph.jsonl` plus `g/truth.csv`.
fn social_example_dir() -> TempDir {
    let t = TempDir::new().unwrap();
    ok(
        t.path(),
        &["gen-synthetic", "--preset", "social", "--out", "g"],
    );
    t
}

fn data_rows(path: PathBuf) -> Vec<String> {
    let text = fs::read_to_string(&path).unwrap();
    text.lines().skip(1).map(str::to_string).collect()
}

#[test]
fn discover_writes_every_output() {
    let t = social_example_dir();
    ok(
        t.path(),
        &["discover", "--input", "g/graph.jsonl", "--out", "o"],
    );
    for f in [
        "schema.loose.pgs",
        "schema.xsd",
        "schema.json",
        "assignment.csv",
        "timings.json",
    ] {
        assert!(t.path().join("o").join(f).is_file(), "{f} missing");
    }
    // presence and datatypes are only known after post-processing
    assert!(!t.path().join("o/schema.strict.pgs").exists());
    assert_eq!(data_rows(t.path().join("o/assignment.csv")).len(), 14);

    ok(
        t.path(),
        &[
            "discover",
            "--input",
            "g/graph.jsonl",
            "--out",
            "o",
            "--postprocess",
        ],
    );
    let strict = fs::read_to_string(t.path().join("o/schema.strict.pgs")).unwrap();
    assert!(strict.contains("STRICT"));
    assert!(strict.contains("bday DATE"));

    // a rerun without post-processing must not leave a stale strict schema behind
    ok(
        t.path(),
        &["discover", "--input", "g/graph.jsonl", "--out", "o"],
    );
    assert!(!t.path().join("o/schema.strict.pgs").exists());
}

#[test]
fn empty_graph_succeeds() {
    let t = TempDir::new().unwrap();
    fs::write(t.path().join("empty.jsonl"), "").unwrap();
    ok(
        t.path(),
        &[
            "discover",
            "--input",
            "empty.jsonl",
            "--out",
            "o",
            "--postprocess",
        ],
    );
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(t.path().join("o/schema.json")).unwrap()).unwrap();
    assert_eq!(json["nodeTypes"].as_array().map(Vec::len), Some(0));
    assert_eq!(data_rows(t.path().join("o/assignment.csv")).len(), 0);
}

#[test]
fn caller_mistakes_exit_with_one() {
    let t = TempDir::new().unwrap();
    fs::write(t.path().join("bad.jsonl"), "not json\n").unwrap();
    let cases: [&[&str]; 4] = [
        &["discover", "--input", "missing.jsonl", "--out", "o"],
        &["discover", "--input", "bad.jsonl", "--out", "o"],
        &["discover", "--no-such-flag"],
        &["inject-noise", "--input", "bad.jsonl", "--drop-pct", "1.5"],
    ];
    for args in cases {
        let o = pgscout(t.path(), args);
        assert_eq!(code(&o), 1, "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn unwritable_output_exits_with_two() {
    let t = social_example_dir();
    fs::write(t.path().join("blocker"), "").unwrap();
    let o = pgscout(
        t.path(),
        &["discover", "--input", "g/graph.jsonl", "--out", "blocker/o"],
    );
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn output_directory_precedence() {
    let t = social_example_dir();
    let run = |extra: &[&str], env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_pgscout"));
        cmd.current_dir(t.path()).env_remove("PGSCOUT_OUT");
        if let Some(v) = env {
            cmd.env("PGSCOUT_OUT", v);
        }
        let o = cmd
            .args(["discover", "--input", "g/graph.jsonl"])
            .args(extra)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
    };
    fs::write(t.path().join("cfg.toml"), "out = \"from-config\"\n").unwrap();

    run(&[], None);
    assert!(t.path().join("pgscout-out/schema.json").is_file());
    run(&[], Some("from-env"));
    assert!(t.path().join("from-env/schema.json").is_file());
    run(&["--config", "cfg.toml"], Some("ignored-env"));
    assert!(t.path().join("from-config/schema.json").is_file());
    assert!(!t.path().join("ignored-env").exists());
    run(
        &["--config", "cfg.toml", "--out", "from-flag"],
        Some("ignored-env"),
    );
    assert!(t.path().join("from-flag/schema.json").is_file());
    assert!(!t.path().join("ignored-env").exists());
}

#[test]
fn flags_override_config_values() {
    let t = social_example_dir();
    fs::write(
        t.path().join("cfg.toml"),
        "theta = 2.0\npostprocess = true\n",
    )
    .unwrap();
    let o = pgscout(
        t.path(),
        &[
            "--config",
            "cfg.toml",
            "discover",
            "--input",
            "g/graph.jsonl",
            "--out",
            "o",
        ],
    );
    assert_eq!(code(&o), 1, "theta outside [0, 1] is rejected");
    ok(
        t.path(),
        &[
            "--config",
            "cfg.toml",
            "discover",
            "--input",
            "g/graph.jsonl",
            "--out",
            "o",
            "--theta",
            "0.9",
        ],
    );
    // untouched config keys still apply
    assert!(t.path().join("o/schema.strict.pgs").is_file());

    fs::write(t.path().join("broken.toml"), "theta = [").unwrap();
    let o = pgscout(
        t.path(),
        &[
            "--config",
            "broken.toml",
            "discover",
            "--input",
            "g/graph.jsonl",
        ],
    );
    assert_eq!(code(&o), 1);
}

#[test]
fn incremental_writes_one_snapshot_per_batch() {
    let t = social_example_dir();
    ok(
        t.path(),
        &[
            "incremental",
            "--input",
            "g/graph.jsonl",
            "--batch-size",
            "5",
            "--out",
            "o",
        ],
    );
    // 14 elements in batches of 5
    for i in 0..3 {
        assert!(t.path().join(format!("o/schema.batch{i}.json")).is_file());
    }
    assert!(!t.path().join("o/schema.batch3.json").exists());
    assert!(t.path().join("o/schema.strict.pgs").is_file());
    let last = fs::read_to_string(t.path().join("o/schema.batch2.json")).unwrap();
    let fin = fs::read_to_string(t.path().join("o/schema.json")).unwrap();
    let types = |s: &str| {
        let v: serde_json::Value = serde_json::from_str(s).unwrap();
        (
            v["nodeTypes"].as_array().unwrap().len(),
            v["edgeTypes"].as_array().unwrap().len(),
        )
    };
    assert_eq!(types(&last), types(&fin));
}

#[test]
fn inject_noise_and_evaluate_round_trip() {
    let t = social_example_dir();
    ok(
        t.path(),
        &[
            "inject-noise",
            "--input",
            "g/graph.jsonl",
            "--drop-pct",
            "0.5",
            "--label-avail",
            "0",
            "--format",
            "csv",
            "--out",
            "n",
        ],
    );
    for f in ["nodes.csv", "edges.csv", "truth.csv"] {
        assert!(t.path().join("n").join(f).is_file(), "{f} missing");
    }
    // ground truth survives label removal unchanged
    assert_eq!(
        fs::read_to_string(t.path().join("n/truth.csv")).unwrap(),
        fs::read_to_string(t.path().join("g/truth.csv")).unwrap()
    );

    ok(
        t.path(),
        &["discover", "--input", "g/graph.jsonl", "--out", "d"],
    );
    ok(
        t.path(),
        &[
            "evaluate",
            "--truth",
            "g/truth.csv",
            "--assignment",
            "d/assignment.csv",
            "--out",
            "e",
        ],
    );
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(t.path().join("e/eval.json")).unwrap()).unwrap();
    assert_eq!(v["edgeF1"], 1.0);
    // alice carries no label, so her true type is empty and scores 0
    assert!((v["nodeF1"].as_f64().unwrap() - 0.76).abs() < 1e-12);
    assert!(v["nodeTypes"][0]["trueType"].is_string());

    ok(
        t.path(),
        &[
            "evaluate",
            "--truth",
            "g/truth.csv",
            "--nodes",
            "n/nodes.csv",
            "--edges",
            "n/edges.csv",
            "--out",
            "e2",
        ],
    );
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(t.path().join("e2/eval.json")).unwrap()).unwrap();
    assert!(v["wallTimes"]["total"].is_number());
}

#[test]
fn sweep_covers_the_grid_plus_adaptive() {
    let t = social_example_dir();
    ok(
        t.path(),
        &[
            "sweep",
            "--input",
            "g/graph.jsonl",
            "--truth",
            "g/truth.csv",
            "--out",
            "s",
        ],
    );
    let rows = data_rows(t.path().join("s/sweep.csv"));
    assert_eq!(rows.len(), 5 * 4 + 1);
    assert_eq!(rows.iter().filter(|r| r.contains("adaptive")).count(), 1);
}

#[test]
fn benchmark_covers_noise_and_availability_grid() {
    let t = social_example_dir();
    ok(
        t.path(),
        &[
            "benchmark",
            "--dataset",
            "soc=g/graph.jsonl",
            "--seeds",
            "1,2",
            "--out",
            "b",
        ],
    );
    let rows = data_rows(t.path().join("b/benchmark.csv"));
    // 5 noise levels x 3 availability levels per (method, seed)
    assert_eq!(rows.len(), 15 * 2 * 2);
    assert!(rows.iter().all(|r| r.starts_with("soc,")));

    ok(
        t.path(),
        &[
            "benchmark",
            "--dataset",
            "soc=g/graph.jsonl",
            "--grid",
            "0,0.2:1",
            "--methods",
            "elsh",
            "--out",
            "b2",
        ],
    );
    assert_eq!(data_rows(t.path().join("b2/benchmark.csv")).len(), 2);
}

#[test]
fn generated_desk_graph_has_requested_size() {
    let t = TempDir::new().unwrap();
    ok(
        t.path(),
        &[
            "gen-synthetic",
            "--preset",
            "desk",
            "--node-count",
            "800",
            "--edge-count",
            "1200",
            "--out",
            "d",
        ],
    );
    let truth = fs::read_to_string(t.path().join("d/truth.csv")).unwrap();
    assert_eq!(truth.lines().filter(|l| l.contains(",node,")).count(), 800);
    assert_eq!(truth.lines().filter(|l| l.contains(",edge,")).count(), 1200);
    assert!(t.path().join("d/spec.json").is_file());
}
