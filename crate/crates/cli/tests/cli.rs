use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn arrowsym(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arrowsym"))
        .current_dir(dir)
        .env_remove("ARROWSYM_OUT_DIR")
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = arrowsym(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn encode_k8_c5() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "encode", "--f", "k8", "--g", "c5", "--h", "c5", "-o", "k8.cnf", "--meta", "k8.json",
        ],
    );
    let cnf = fs::read_to_string(d.join("k8.cnf")).unwrap();
    assert!(cnf.lines().any(|l| l.trim() == "p cnf 28 1344"));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("k8.json")).unwrap()).unwrap();
    assert_eq!(meta["edges"].as_array().unwrap().len(), 28);
    assert_eq!(meta["edges"][0], serde_json::json!([0, 1]));
}

#[test]
fn stage_round_trip_k5_k3() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "encode", "--f", "k5", "--g", "k3", "--h", "k3", "-o", "f.cnf", "--meta", "m.json",
        ],
    );
    ok(d, &["allsat", "--in", "f.cnf", "--out", "all.txt"]);
    assert_eq!(
        fs::read_to_string(d.join("all.txt"))
            .unwrap()
            .lines()
            .count(),
        12
    );

    ok(d, &["symmetries", "--in", "f.cnf", "--out", "sym.json"]);
    let sym: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("sym.json")).unwrap()).unwrap();
    assert!(sym.is_object());

    ok(
        d,
        &[
            "sbp",
            "--mode",
            "exact",
            "--in",
            "f.cnf",
            "--out",
            "s.cnf",
            "--aux-map",
            "aux.json",
        ],
    );
    ok(
        d,
        &[
            "allsat",
            "--in",
            "s.cnf",
            "--project-file",
            "aux.json",
            "--out",
            "proj.txt",
        ],
    );
    let projected = fs::read_to_string(d.join("proj.txt")).unwrap();
    assert_eq!(projected.lines().count(), 1);

    let classes = ok(
        d,
        &[
            "dedup", "--host", "k5", "--in", "all.txt", "--meta", "m.json",
        ],
    );
    assert_eq!(classes.lines().count(), 1);

    ok(
        d,
        &[
            "verify", "--f", "k5", "--g", "k3", "--h", "k3", "--in", "proj.txt", "--meta", "m.json",
        ],
    );
    let cov = ok(
        d,
        &[
            "coverage",
            "--host",
            "k5",
            "--candidate",
            "proj.txt",
            "--reference",
            "all.txt",
            "--meta",
            "m.json",
        ],
    );
    let cov: serde_json::Value = serde_json::from_str(&cov).unwrap();
    assert_eq!(cov["complete"], true);
    assert_eq!(cov["covered"], 1);
}

#[test]
fn vertex_induced_generators_need_host() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "encode", "--f", "k5", "--g", "k3", "--h", "k3", "-o", "f.cnf", "--meta", "m.json",
        ],
    );
    let out = arrowsym(
        d,
        &[
            "sbp",
            "--mode",
            "relaxed",
            "--in",
            "f.cnf",
            "--out",
            "s.cnf",
            "--generators",
            "vertex-induced",
        ],
    );
    assert_eq!(code(&out), 1);
    ok(
        d,
        &[
            "sbp",
            "--mode",
            "relaxed",
            "--in",
            "f.cnf",
            "--out",
            "s.cnf",
            "--generators",
            "vertex-induced",
            "--host",
            "k5",
            "--meta",
            "m.json",
        ],
    );
}

#[test]
fn non_witness_fails_verify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.txt"), "0000000000\n").unwrap();
    let out = arrowsym(
        d,
        &[
            "verify", "--f", "k5", "--g", "k3", "--h", "k3", "--in", "bad.txt",
        ],
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&arrowsym(d, &["encode", "--bogus"])), 1);
    assert_eq!(code(&arrowsym(d, &["--help"])), 0);
    assert_eq!(
        code(&arrowsym(
            d,
            &[
                "pipeline",
                "--f",
                "k5",
                "--g",
                "k3",
                "--h",
                "k3",
                "--project"
            ]
        )),
        1
    );
    assert_eq!(
        code(&arrowsym(
            d,
            &["pipeline", "--f", "missing.graph", "--g", "k3", "--h", "k3"]
        )),
        1
    );
    assert_eq!(
        code(&arrowsym(
            d,
            &["allsat", "--in", "missing.cnf", "--out", "x.txt"]
        )),
        2
    );
    fs::write(d.join("broken.cnf"), "p cnf 2 1\n1 5 0\n").unwrap();
    assert_eq!(
        code(&arrowsym(
            d,
            &["allsat", "--in", "broken.cnf", "--out", "x.txt"]
        )),
        2
    );
}

#[test]
fn out_dir_from_env() {
    let dir = tempfile::tempdir().unwrap();
    let work = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_arrowsym"))
        .current_dir(work.path())
        .env("ARROWSYM_OUT_DIR", dir.path())
        .args([
            "encode",
            "--f",
            "c5",
            "--g",
            "path:3",
            "--h",
            "path:3",
            "-o",
            "nested/c5.cnf",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("nested/c5.cnf").is_file());
    assert!(!work.path().join("nested").exists());
}

#[test]
fn pipeline_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let text = ok(
        d,
        &[
            "pipeline",
            "--f",
            "k8",
            "--g",
            "c5",
            "--h",
            "c5",
            "--sbp",
            "exact",
            "--project",
            "--json",
        ],
    );
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["base"]["vars"], 28);
    assert_eq!(report["reference_models"], 1190);
    assert_eq!(report["coverage"]["classes"], 4);
    assert_eq!(report["coverage"]["complete"], true);
}

#[test]
fn strict_reproduction_reports_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = arrowsym(
        d,
        &[
            "--out-dir",
            "repro",
            "reproduce-paper",
            "--strict-reference",
        ],
    );
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(d.join("repro/reproduction.json").is_file());
}
