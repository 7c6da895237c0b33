use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_channelflow"));
    cmd.env_remove("CHANNELFLOW_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("channelflow-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad json ({e}): {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn gen_file(name: &str, extra: &[&str]) -> PathBuf {
    let path = scratch(name);
    let mut args = vec!["gen", "-o", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

const BOTTLENECK: &str = r#"{
  "mode": "tree",
  "n": 13,
  "networks": [{"id": 0, "edges": [[1,4],[2,4],[12,4],[4,5],[5,10],[5,3],[5,13],[4,6],[5,7],[6,8],[7,9],[9,11]]}],
  "processors": [{"id": 0, "access": [0]}, {"id": 1, "access": [0]}, {"id": 2, "access": [0]}],
  "demands": [
    {"id": 0, "owner": 0, "u": 1, "v": 10, "profit_num": 1, "height_num": 1, "denom": 1},
    {"id": 1, "owner": 1, "u": 2, "v": 3, "profit_num": 1, "height_num": 1, "denom": 1},
    {"id": 2, "owner": 2, "u": 12, "v": 13, "profit_num": 1, "height_num": 1, "denom": 1}
  ]
}"#;

#[test]
fn gen_is_deterministic() {
    let a = gen_file("det-a.json", &["--n", "16", "--m", "8", "--r", "2", "--seed", "7"]);
    let b = gen_file("det-b.json", &["--n", "16", "--m", "8", "--r", "2", "--seed", "7"]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    let out = run(&["gen", "--n", "16", "--m", "8", "--r", "2", "--seed", "7"]);
    let c = gen_file("det-c.json", &["--n", "16", "--m", "8", "--r", "2", "--seed", "7"]);
    assert_eq!(out.stdout, std::fs::read(c).unwrap());
}

#[test]
fn seed_falls_back_to_environment() {
    let a = bin()
        .args(["gen", "--n", "16", "--m", "8"])
        .env("CHANNELFLOW_SEED", "11")
        .output()
        .unwrap();
    let b = run(&["gen", "--n", "16", "--m", "8", "--seed", "11"]);
    let c = run(&["gen", "--n", "16", "--m", "8", "--seed", "12"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn validate_accepts_generated_and_rejects_disconnected() {
    let good = gen_file("valid.json", &["--mode", "line", "--n", "20", "--seed", "3"]);
    let out = run(&["validate", good.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(json(&out)["ok"], Value::Bool(true));

    let bad = scratch("disconnected.json");
    // same edge count, but vertex 10 is cut off and 4-5-7-9-6 closes a cycle
    let text = BOTTLENECK.replace("[5,10]", "[6,9]");
    std::fs::write(&bad, text).unwrap();
    let out = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let report = json(&out);
    assert_eq!(report["ok"], Value::Bool(false));
    assert!(report["error"].as_str().unwrap().contains("connected"), "{report}");
}

#[test]
fn ideal_decompositions_have_small_pivot_sets() {
    for seed in 0..100 {
        let n = (2 + seed * 7 % 60).to_string();
        let file = gen_file(
            &format!("dec-{seed}.json"),
            &["--n", &n, "--m", "1", "--seed", &seed.to_string()],
        );
        let out = run(&["decompose", file.to_str().unwrap(), "--kind", "ideal"]);
        assert!(out.status.success());
        for dump in json(&out).as_array().unwrap() {
            assert!(dump["report"]["theta"].as_u64().unwrap() <= 2);
        }
    }
}

#[test]
fn seq_tree_keeps_one_of_three_overlapping_routes() {
    let file = scratch("bottleneck.json");
    std::fs::write(&file, BOTTLENECK).unwrap();
    let out = run(&["run", file.to_str().unwrap(), "--algo", "seq-tree", "--oracle"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert_eq!(report["selected"].as_array().unwrap().len(), 1);
    assert_eq!(report["optimum"]["exact"], "1");
    assert_eq!(report["certified"], Value::Bool(true));
}

#[test]
fn line_unit_reports_three_critical_edges() {
    let file = gen_file(
        "line.json",
        &["--mode", "line", "--n", "24", "--m", "6", "--seed", "5"],
    );
    let out = run(&["run", file.to_str().unwrap(), "--algo", "dist-line-unit"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert!(report["delta"].as_u64().unwrap() <= 3);
    assert_eq!(report["xi"][0]["exact"], "8/9");
    assert!(report.get("ratio").is_none());
}

#[test]
fn reports_repeat_except_wall_time() {
    let file = gen_file("repeat.json", &["--n", "30", "--m", "12", "--r", "2", "--seed", "9"]);
    let trace_a = scratch("trace-a.jsonl");
    let trace_b = scratch("trace-b.jsonl");
    let go = |trace: &PathBuf| {
        let mut v = json(&run(&[
            "run",
            file.to_str().unwrap(),
            "--algo",
            "dist-unit",
            "--seed",
            "4",
            "--trace",
            trace.to_str().unwrap(),
        ]));
        v.as_object_mut().unwrap().remove("wall_ms");
        v
    };
    assert_eq!(go(&trace_a), go(&trace_b));
    assert_eq!(std::fs::read(trace_a).unwrap(), std::fs::read(trace_b).unwrap());
}

#[test]
fn exit_codes() {
    let tree = gen_file("codes-tree.json", &["--n", "30", "--m", "20", "--r", "3", "--seed", "1"]);
    let out = run(&["run", tree.to_str().unwrap(), "--algo", "dist-line-unit"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["run", tree.to_str().unwrap(), "--algo", "dist-unit", "--oracle", "--cap", "5"]);
    assert_eq!(out.status.code(), Some(4));
    let out = run(&["run", "/nonexistent/file.json", "--algo", "dist-unit"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_emits_csv_rows() {
    let out = run(&[
        "bench", "--algo", "dist-height", "--heights", "mixed", "--n", "10", "--m", "5", "--r", "2",
        "--count", "6", "--oracle", "--csv",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[0].starts_with("digest,algorithm"));
    assert!(lines[1..].iter().all(|l| l.contains(",true,")));
}
