use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fhs_core::format::{from_csv, DesignFile, Payload};
use tempfile::TempDir;

fn fhs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fhs"))
        .args(args)
        .env_remove("FHS_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn construct(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let out_path = path(dir, name);
    let mut full = vec!["construct"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", s(&out_path)]);
    let out = fhs(&full);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    out_path
}

fn qv_fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/qv_base_30.json")
}

#[test]
fn construct_a_writes_expected_shape() {
    let dir = TempDir::new().unwrap();
    let f = construct(&dir, "a.json", &["a", "--p", "2", "--m", "3", "--u", "2"]);
    let file = DesignFile::from_json(&std::fs::read_to_string(f).unwrap()).unwrap();
    let p = &file.claimed.parameters;
    assert_eq!((p["n"], p["M"], p["l"]), (14, 2, 4));
    assert_eq!(file.claimed.lambda, Some(4));
}

#[test]
fn construct_rejections_name_the_constraint() {
    let out = fhs(&["construct", "tv", "--t", "2", "--v", "4"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("v must be odd"), "{}", stderr(&out));

    let out = fhs(&["construct", "threep", "--p", "5"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("packing"), "{}", stderr(&out));

    let out = fhs(&["construct", "vw", "--v", "25", "--e", "3", "--w", "5", "--e-prime", "2"]);
    assert_eq!(code(&out), 2);

    let out = fhs(&["construct", "threep"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn construct_output_reverifies() {
    let dir = TempDir::new().unwrap();
    let f = construct(&dir, "s.json", &["threep", "--p", "13"]);
    let out = fhs(&["verify", s(&f)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["profile"]["max"], 4);
    assert_eq!(report["verdict"]["classification"]["status"], "optimal");
    assert_eq!(report["passed"], true);
}

#[test]
fn verify_too_strong_claim_exits_one() {
    let dir = TempDir::new().unwrap();
    let f = construct(&dir, "s.json", &["threep", "--p", "13"]);
    let mut file = DesignFile::from_json(&std::fs::read_to_string(&f).unwrap()).unwrap();
    file.claimed.lambda = Some(3);
    std::fs::write(&f, file.to_json()).unwrap();
    let report_path = path(&dir, "report.json");
    let out = fhs(&["verify", s(&f), "--report", s(&report_path)]);
    assert_eq!(code(&out), 1);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["passed"], false);
    assert_eq!(std::fs::read_to_string(report_path).unwrap(), stdout(&out));
}

#[test]
fn schema_and_io_errors() {
    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "bad.json");
    std::fs::write(&bad, "{\"schema_version\": 1, \"kind\": \"fhs-set\", ").unwrap();
    assert_eq!(code(&fhs(&["verify", s(&bad)])), 4);

    let empty = path(&dir, "empty.json");
    std::fs::write(
        &empty,
        r#"{"schema_version":1,"kind":"fhs-set","payload":{"alphabet":4,"sequences":[]}}"#,
    )
    .unwrap();
    assert_eq!(code(&fhs(&["export", s(&empty)])), 4);
    assert_eq!(code(&fhs(&["verify", s(&empty)])), 4);

    let wrong_version = path(&dir, "v2.json");
    std::fs::write(
        &wrong_version,
        r#"{"schema_version":2,"kind":"fhs-set","payload":{"alphabet":2,"sequences":[[0,1]]}}"#,
    )
    .unwrap();
    assert_eq!(code(&fhs(&["verify", s(&wrong_version)])), 4);

    assert_eq!(code(&fhs(&["verify", s(&path(&dir, "missing.json"))])), 3);
    let out = fhs(&["construct", "threep", "--p", "13", "--out", "/nonexistent/dir/x.json"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn export_csv_and_rows() {
    let dir = TempDir::new().unwrap();
    let f = construct(&dir, "a.json", &["a", "--p", "2", "--m", "2", "--u", "2"]);
    let out = fhs(&["export", s(&f)]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# n=6,M=2,l=4,lambda=2");
    assert_eq!(lines.len(), 3);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 6));

    let rows = stdout(&fhs(&["export", s(&f), "--format", "rows"]));
    assert_eq!(rows.lines().count(), 2);
    assert!(rows.lines().all(|l| l.split(' ').count() == 6));

    let original = DesignFile::from_json(&std::fs::read_to_string(&f).unwrap()).unwrap();
    let back = DesignFile::from_set(&from_csv(&text).unwrap());
    assert_eq!(back.payload.digest(), original.payload.digest());
}

#[test]
fn export_rejects_other_kinds() {
    let dir = TempDir::new().unwrap();
    let out = fhs(&["export", s(&qv_fixture())]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    let _ = dir;
}

#[test]
fn construct_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = construct(&dir, "1.json", &["vw", "--v", "25", "--e", "2", "--w", "5", "--e-prime", "2"]);
    let b = construct(&dir, "2.json", &["vw", "--v", "25", "--e", "2", "--w", "5", "--e-prime", "2"]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    let one = fhs(&["construct", "tv", "--t", "3", "--v", "7"]);
    let two = fhs(&["construct", "tv", "--t", "3", "--v", "7"]);
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn verify_reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let f = construct(&dir, "s.json", &["cyclotomic", "--v", "13", "--e", "2"]);
    let one = fhs(&["verify", s(&f)]);
    let two = fhs(&["verify", s(&f)]);
    assert_eq!(one.stdout, two.stdout);
    let timed = fhs(&["verify", s(&f), "--timing"]);
    assert!(stdout(&timed).contains("elapsed_ms"));
}

#[test]
fn based_constructions() {
    let dir = TempDir::new().unwrap();
    let base = construct(&dir, "base.json", &["threep", "--p", "13"]);
    let nv = construct(&dir, "nv.json", &["nv", "--w", "11", "--base", s(&base)]);
    let kn = construct(&dir, "kn.json", &["kn", "--t", "2", "--base", s(&base)]);
    for f in [&nv, &kn] {
        assert_eq!(code(&fhs(&["verify", s(f)])), 0);
    }
    let nv = DesignFile::from_json(&std::fs::read_to_string(nv).unwrap()).unwrap();
    assert_eq!(nv.claimed.parameters["n"], 429);

    let out = fhs(&["construct", "nv", "--w", "11", "--base", s(&qv_fixture())]);
    assert_eq!(code(&out), 2);
}

#[test]
fn qv_from_fixture() {
    let dir = TempDir::new().unwrap();
    let fixture = qv_fixture();
    let f = construct(
        &dir,
        "qv.json",
        &[
            "qv", "--base", s(&fixture), "--p", "2", "--p-prime", "2", "--m", "4", "--a", "5", "--b", "3",
            "--v", "17", "--e", "2", "--w", "17", "--e-prime", "2", "--no-verify",
        ],
    );
    let file = DesignFile::from_json(&std::fs::read_to_string(f).unwrap()).unwrap();
    let Payload::FhsSet(p) = &file.payload else { panic!("kind {}", file.payload.kind()) };
    assert_eq!((p.sequences.len(), p.sequences[0].len(), p.alphabet), (2, 8670, 1590));
}

#[test]
fn bounds_output() {
    let out = fhs(&["bounds", "15", "2", "4"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("peng-fan-second     4"));

    let out = fhs(&["bounds", "195", "2", "49", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["peng_fan_second"], 4);

    let out = fhs(&["bounds", "9", "1", "9"]);
    assert!(stdout(&out).contains("lempel-greenberger  0"));

    let out = fhs(&["bounds", "72", "2", "9", "--measured", "9"]);
    assert!(stdout(&out).contains("measured 9: not optimal"), "{}", stdout(&out));

    assert_eq!(code(&fhs(&["bounds", "0", "2", "4"])), 2);
    assert_eq!(code(&fhs(&["bounds", "15", "-2", "4"])), 2);
}

#[test]
fn catalog_lists_families() {
    let out = fhs(&["catalog", "--json"]);
    assert_eq!(code(&out), 0);
    let v: Vec<serde_json::Value> = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v.len(), 9);
}

#[test]
fn thread_count_env() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_fhs"))
            .args(["construct", "threep", "--p", "13"])
            .env("FHS_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    let four = run("4");
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(code(&run("zero")), 2);
}
