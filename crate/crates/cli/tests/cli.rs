use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn walkpovm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_walkpovm"))
        .args(args)
        .env_remove("WALKPOVM_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_reference_state() {
    let v = stdout_json(&walkpovm(&["simulate", "--state", "1"]));
    let d = &v["distribution"];
    for x in ["0", "2", "4"] {
        assert!((d[x].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }
    assert!(d.get("6").is_none());
}

#[test]
fn simulate_writes_distribution_and_final_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = walkpovm(&[
        "simulate",
        "--state",
        "3",
        "--format",
        "csv",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("distribution.csv")).unwrap();
    assert!(csv.starts_with("position,probability\n"));
    assert!(csv.contains("6,3.33333333333333"));
    let state = read_json(&dir.path().join("final_state.json"));
    assert!(state.get("0").is_none());
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"steps": [[{"coins": {"0": [[1,0],[1,0],[0,0],[1,0]]}}]]}"#,
    )
    .unwrap();
    let counts = dir.path().join("counts.json");
    fs::write(&counts, r#"{"counts": {"0": 3}, "total": 4, "seed": 0}"#).unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["simulate", "--state", "7"],
        vec!["simulate", "--visibility", "1.5"],
        vec!["simulate", "--jitter-deg", "-1"],
        vec!["simulate", "--schedule", bad.to_str().unwrap()],
        vec!["simulate", "--schedule", "/nonexistent/schedule.json"],
        vec![
            "sample",
            "--shots",
            "0",
            "--out-dir",
            dir.path().to_str().unwrap(),
        ],
        vec![
            "pipeline",
            "--shots",
            "0",
            "--out-dir",
            dir.path().to_str().unwrap(),
        ],
        vec!["reconstruct", "--counts", counts.to_str().unwrap()],
        vec!["simulate", "--format", "xml"],
        vec!["simulate", "--seed", "abc"],
        vec!["no-such-command"],
    ];
    for args in cases {
        let out = walkpovm(&args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let out = walkpovm(&["simulate", "--schedule", bad.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("steps[0][0].coins"));
}

#[test]
fn povm_matches_tetrahedron() {
    let v = stdout_json(&walkpovm(&["extract-povm"]));
    assert_eq!(v["sic"]["is_sic"], Value::Bool(true));
    let a = &v["assignment"];
    for (x, i) in [("6", 1), ("4", 2), ("0", 3), ("2", 4)] {
        assert_eq!(a[x].as_u64(), Some(i));
    }
    let csv = walkpovm(&["extract-povm", "--format", "csv"]);
    assert!(String::from_utf8_lossy(&csv.stdout).starts_with("position,operator,m00_re"));
}

#[test]
fn compile_and_verify_table() {
    let v = stdout_json(&walkpovm(&["compile", "--state", "4"]));
    assert_eq!(v["preparation"][0]["kind"], "QWP");
    assert!(stdout_json(&walkpovm(&["verify-table"]))["pass"]
        .as_bool()
        .unwrap());

    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.json");
    fs::write(
        &table,
        r#"[{"step": 1, "site": 1, "plates": [{"kind": "HWP", "angle": -20.0}]}]"#,
    )
    .unwrap();
    let out = walkpovm(&["verify-table", "--table", table.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

fn sample_into(dir: &Path, seed: &str) -> Output {
    walkpovm(&[
        "sample",
        "--state",
        "2",
        "--visibility",
        "0.992",
        "--jitter-deg",
        "0.1",
        "--seed",
        seed,
        "--out-dir",
        dir.to_str().unwrap(),
    ])
}

#[test]
fn sampling_is_deterministic_and_replayable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(sample_into(a.path(), "11").status.success());
    assert!(sample_into(b.path(), "11").status.success());
    for f in ["counts.json", "counts.csv", "manifest.json"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let c = tempfile::tempdir().unwrap();
    assert!(sample_into(c.path(), "12").status.success());
    assert_ne!(
        fs::read(a.path().join("counts.json")).unwrap(),
        fs::read(c.path().join("counts.json")).unwrap()
    );

    let m = read_json(&a.path().join("manifest.json"));
    assert_eq!(m["seed"], 11);
    assert_eq!(m["outputs"].as_object().unwrap().len(), 2);
    let record = read_json(&a.path().join("counts.json"));
    assert_eq!(record["total"], 32000);

    let replay_dir = tempfile::tempdir().unwrap();
    let manifest = a.path().join("manifest.json");
    let out = walkpovm(&[
        "replay",
        "--manifest",
        manifest.to_str().unwrap(),
        "--out-dir",
        replay_dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        fs::read(a.path().join("counts.csv")).unwrap(),
        fs::read(replay_dir.path().join("counts.csv")).unwrap()
    );

    // a manifest whose recorded outputs do not match is reported
    let mut tampered = m.clone();
    tampered["outputs"]["counts.csv"] = Value::String("0".repeat(64));
    let t = replay_dir.path().join("tampered.json");
    fs::write(&t, serde_json::to_string(&tampered).unwrap()).unwrap();
    let out = walkpovm(&[
        "replay",
        "--manifest",
        t.to_str().unwrap(),
        "--out-dir",
        replay_dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn replay_detects_changed_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let noise = dir.path().join("noise.json");
    fs::write(
        &noise,
        r#"{"visibility": 0.99, "angle_jitter_deg": 0.2, "seed": 3, "shots": 5000}"#,
    )
    .unwrap();
    let run = dir.path().join("run");
    let out = walkpovm(&[
        "sample",
        "--noise",
        noise.to_str().unwrap(),
        "--out-dir",
        run.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let m = read_json(&run.join("manifest.json"));
    assert_eq!(m["seed"], 3);
    assert_eq!(m["shots"], 5000);

    fs::write(&noise, r#"{"visibility": 0.5}"#).unwrap();
    let out = walkpovm(&[
        "replay",
        "--manifest",
        run.join("manifest.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let run = |env: Option<&str>, flag: Option<&str>, sub: &str| {
        let out_dir = dir.path().join(sub);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_walkpovm"));
        cmd.args([
            "sample",
            "--shots",
            "1000",
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        cmd.env_remove("WALKPOVM_SEED");
        if let Some(e) = env {
            cmd.env("WALKPOVM_SEED", e);
        }
        if let Some(f) = flag {
            cmd.args(["--seed", f]);
        }
        assert!(cmd.output().unwrap().status.success());
        read_json(&out_dir.join("manifest.json"))["seed"]
            .as_u64()
            .unwrap()
    };
    assert_eq!(run(None, None, "a"), 0);
    assert_eq!(run(Some("41"), None, "b"), 41);
    assert_eq!(run(Some("41"), Some("5"), "c"), 5);
}

#[test]
fn pipeline_recovers_the_input_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = walkpovm(&[
        "pipeline",
        "--state",
        "2",
        "--seed",
        "1",
        "--visibility",
        "1",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = read_json(&dir.path().join("reconstruction.json"));
    assert!(r["trace_distance_to_input"].as_f64().unwrap() < 0.03);
    for f in [
        "distribution.json",
        "counts.json",
        "counts.csv",
        "reconstruction.json",
        "manifest.json",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }

    let counts = dir.path().join("counts.json");
    let lin = stdout_json(&walkpovm(&[
        "reconstruct",
        "--counts",
        counts.to_str().unwrap(),
        "--method",
        "linear",
    ]));
    assert_eq!(lin["method"], "linear");
}

#[test]
fn verify_paper_reports_every_criterion() {
    let out = walkpovm(&["verify-paper"]);
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 8, "{text}");
    for (i, line) in lines.iter().enumerate() {
        assert!(line.contains(&format!("] {}. ", i + 1)));
    }
    let all_pass = lines.iter().all(|l| l.starts_with("[PASS]"));
    assert_eq!(out.status.success(), all_pass);
    if !all_pass {
        assert_eq!(out.status.code(), Some(1));
    }
}
