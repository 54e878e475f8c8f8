use std::path::Path;
use std::process::{Command, Output};

fn gmec(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmec"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn data_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn solve_toy2() {
    let out = gmec(&data_dir(), &["solve", "--input", "toy2.gmec"]);
    let v = stdout_json(&out);
    assert_eq!(v["energy"], 1.6);
    assert_eq!(v["assignment"], serde_json::json!([0, 1]));
}

#[test]
fn kbest_toy2_matches_oracle() {
    let dir = data_dir();
    let kb = stdout_json(&gmec(&dir, &["kbest", "--input", "toy2.gmec", "--k", "3"]));
    let or = stdout_json(&gmec(&dir, &["oracle", "--input", "toy2.gmec", "--k", "3"]));
    assert_eq!(kb["k_best"], or["k_best"]);
    assert_eq!(kb["k_best"][0]["energy"], 1.6);
    assert_eq!(kb["k_best"][1]["energy"], 2.0);
}

#[test]
fn solve_agrees_with_oracle_with_and_without_dee() {
    let dir = data_dir();
    let or = stdout_json(&gmec(&dir, &["oracle", "--input", "toy2.gmec"]));
    for dee in ["true", "false"] {
        let sv = stdout_json(&gmec(&dir, &["solve", "--input", "toy2.gmec", "--dee", dee]));
        assert_eq!(sv["energy"], or["energy"]);
        assert_eq!(sv["assignment"], or["assignment"]);
    }
}

#[test]
fn gen_is_deterministic() {
    let dir = data_dir();
    let args = ["gen", "--seed", "7", "--n", "6", "--max-domain", "3", "--density", "0.5"];
    let a = gmec(&dir, &args);
    let b = gmec(&dir, &args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(a.stdout.starts_with(b"GMEC 1\n"));
}

#[test]
fn gen_output_round_trips_through_solve() {
    let dir = data_dir();
    let gen = gmec(&dir, &["gen", "--seed", "12", "--n", "5", "--max-domain", "4"]);
    let tmp = std::env::temp_dir().join("gmec_cli_roundtrip.gmec");
    std::fs::write(&tmp, &gen.stdout).unwrap();
    let path = tmp.to_str().unwrap();
    let sv = stdout_json(&gmec(&dir, &["solve", "--input", path]));
    let or = stdout_json(&gmec(&dir, &["oracle", "--input", path]));
    assert_eq!(sv["energy"], or["energy"]);
}

#[test]
fn stats_prints_network_summary() {
    let out = gmec(&data_dir(), &["stats", "--input", "toy2.gmec", "--dee", "false"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text,
        "n: 2\nedges: 1\ninduced_width: 1\ntree_depth: 2\ndropped_error_bound: 0\n"
    );
}

#[test]
fn exit_codes() {
    let dir = data_dir();
    let missing = gmec(&dir, &["solve", "--input", "no_such_file.gmec"]);
    assert_eq!(missing.status.code(), Some(2));
    let bad = gmec(&dir, &["frobnicate"]);
    assert_eq!(bad.status.code(), Some(2));
    let starved = gmec(&dir, &["solve", "--input", "toy2.gmec", "--dee", "false", "--mbe-mem-cap", "8"]);
    assert_eq!(starved.status.code(), Some(3));
}

#[test]
fn golden_record_is_schema_stable() {
    let dir = data_dir();
    let out = gmec(&dir, &["solve", "--input", "toy2.gmec", "--dee", "false"]);
    let mut v = stdout_json(&out);
    // Timings vary run to run; everything else must match exactly.
    v["stats"]["init_ms"] = 0.into();
    v["stats"]["search_ms"] = 0.into();
    let golden_path = dir.join("toy2_solve.golden.json");
    let golden: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&golden_path).unwrap()).unwrap();
    assert_eq!(v, golden);
}
