use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use srn_core::io::{import_mask, Format};
use srn_core::{add, generate_base, BaseMatrixSpec};

fn srn(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srn")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn spec(k: u32, s: &[u8]) -> BaseMatrixSpec {
    BaseMatrixSpec::new(k, s.iter().copied()).unwrap()
}

#[test]
fn gen_writes_every_format() {
    let dir = tempfile::tempdir().unwrap();
    let expected = generate_base(&spec(3, &[1, 3]));
    for (fmt, file) in [("binary", "a.srnm"), ("dense-text", "a.txt"), ("edge-csv", "a.csv"), ("structured-text", "a.json")] {
        let out = srn(&["gen", "--k", "3", "--diagonals", "1,3", "--out", file, "--format", fmt], dir.path());
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let bytes = fs::read(dir.path().join(file)).unwrap();
        let format: Format = fmt.parse().unwrap();
        let back = import_mask(&bytes, format, Some((8, 8))).unwrap();
        assert_eq!(back.effective().unlabeled(), expected.unlabeled(), "{fmt}");
    }
    let dense = fs::read_to_string(dir.path().join("a.txt")).unwrap();
    assert_eq!(dense.lines().next(), Some("10001000"));
}

#[test]
fn gen_densify() {
    let dir = tempfile::tempdir().unwrap();
    let out = srn(&["gen", "--k", "3", "--diagonals", "1", "--densify", "0.5", "--out", "d.txt", "--format", "dense-text"], dir.path());
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(dir.path().join("d.txt")).unwrap();
    assert_eq!(text.matches('1').count(), 32);
}

#[test]
fn stack_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for d in ["one", "two"] {
        let out = srn(&["stack", "--sizes", "8,16,8", "--density", "1/2", "--seed", "42", "--out-dir", d], dir.path());
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let mut names: Vec<_> = fs::read_dir(dir.path().join("one")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 4);
    for name in names {
        let a = fs::read(dir.path().join("one").join(&name)).unwrap();
        let b = fs::read(dir.path().join("two").join(&name)).unwrap();
        assert_eq!(a, b, "{name:?}");
    }
    let other = srn(&["stack", "--sizes", "8,16,8", "--density", "1/2", "--seed", "43", "--out-dir", "three"], dir.path());
    assert_eq!(code(&other), 0);
    assert_ne!(
        fs::read(dir.path().join("one/layer_000.srnm")).unwrap(),
        fs::read(dir.path().join("three/layer_000.srnm")).unwrap()
    );
}

#[test]
fn verify_reports_and_checks() {
    let dir = tempfile::tempdir().unwrap();
    srn(&["gen", "--k", "3", "--diagonals", "1,2,3,4", "--out", "a3.srnm", "--format", "binary"], dir.path());
    let out = srn(&["verify", "a3.srnm", "--exact"], dir.path());
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["density"], "1/2");
    assert_eq!(report["method"], "exact");

    let eps = report["epsilon_star"].as_str().unwrap().to_string();
    let pass = srn(&["verify", "a3.srnm", "--exact", "--epsilon", &eps, "--delta", "1/10"], dir.path());
    assert_eq!(code(&pass), 0, "{}", String::from_utf8_lossy(&pass.stdout));
    let fail = srn(&["verify", "a3.srnm", "--exact", "--epsilon", "1/100", "--delta", "1/10"], dir.path());
    assert_eq!(code(&fail), 3);

    let sampled = srn(&["verify", "a3.srnm", "--samples", "50", "--seed", "4"], dir.path());
    assert_eq!(code(&sampled), 0);
    assert_eq!(sampled.stdout, srn(&["verify", "a3.srnm", "--samples", "50", "--seed", "4"], dir.path()).stdout);
}

#[test]
fn expander_compare_spectral() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&srn(&["expander", "--n", "8", "--degree", "4", "--seed", "1", "--out", "x.srnm"], dir.path())), 0);
    srn(&["gen", "--k", "3", "--diagonals", "1,2,3,4", "--out", "a.srnm", "--format", "binary"], dir.path());
    let table = srn(&["compare", "a.srnm", "x.srnm"], dir.path());
    assert_eq!(code(&table), 0);
    let text = String::from_utf8(table.stdout).unwrap();
    assert!(text.contains("a.srnm") && text.contains("x.srnm"));

    let spec = srn(&["spectral", "x.srnm"], dir.path());
    assert_eq!(code(&spec), 0);
    let v: serde_json::Value = serde_json::from_slice(&spec.stdout).unwrap();
    assert_eq!(v["degree_h"], 4);
    assert!((v["lambda1"].as_f64().unwrap() - 4.0).abs() < 1e-9);
}

#[test]
fn add_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    srn(&["gen", "--k", "4", "--diagonals", "1,2", "--out", "t.srnm", "--format", "binary"], dir.path());
    let out = srn(&["add", "--target", "t.srnm", "--addend-k", "3", "--addend-diagonals", "1,2", "--out", "s.srnm"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let got = import_mask(&fs::read(dir.path().join("s.srnm")).unwrap(), Format::Binary, None).unwrap();
    let want = add(&generate_base(&spec(4, &[1, 2])), &spec(3, &[1, 2])).unwrap();
    assert_eq!(got.base, want);

    srn(&["gen", "--k", "4", "--diagonals", "1,2", "--out", "t.txt", "--format", "dense-text"], dir.path());
    let unlabeled = srn(&["add", "--target", "t.txt", "--addend-k", "3", "--addend-diagonals", "1,2", "--out", "u.srnm"], dir.path());
    assert_eq!(code(&unlabeled), 3);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&srn(&["gen", "--k", "2", "--diagonals", "7", "--out", "x"], dir.path())), 2);
    assert_eq!(code(&srn(&["gen", "--k"], dir.path())), 2);
    assert_eq!(code(&srn(&["stack", "--sizes", "6,12", "--density", "1/2", "--out-dir", "o"], dir.path())), 2);
    assert_eq!(code(&srn(&["verify", "missing.srnm"], dir.path())), 4);
    fs::write(dir.path().join("bad.srnm"), b"NOPE").unwrap();
    assert_eq!(code(&srn(&["verify", "bad.srnm", "--input-format", "binary"], dir.path())), 4);
    fs::write(dir.path().join("zero.txt"), b"00\n00\n").unwrap();
    assert_eq!(code(&srn(&["spectral", "zero.txt"], dir.path())), 3);

    srn(&["gen", "--k", "2", "--diagonals", "1", "--out", "g.srnm"], dir.path());
    let mut bytes = fs::read(dir.path().join("g.srnm")).unwrap();
    // first payload byte, after the header and both permutations
    bytes[36 + 4 * 8] ^= 0b10;
    fs::write(dir.path().join("g.srnm"), &bytes).unwrap();
    assert_eq!(code(&srn(&["verify", "g.srnm"], dir.path())), 4);
}
