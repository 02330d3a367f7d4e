//! End-to-end runs of the pqvrf binary: exit-code contract, artifact
//! layout, deterministic reproduction, and the negative paths.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> PathBuf {
    let mut p = PathBuf::from(env!("CARGO_BIN_EXE_pqvrf"));
    assert!(p.exists(), "binary not built");
    p = p.canonicalize().unwrap();
    p
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pqvrf-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn keygen(dir: &Path, extra: &[&str]) {
    let mut args = vec![
        "keygen",
        "--group",
        "toy64",
        "--participants",
        "4",
        "--seed",
        "11",
        "--deterministic",
        "--out",
        "keys.txt",
    ];
    args.extend_from_slice(extra);
    let out = run(dir, &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn keygen_is_deterministic_and_loadable() {
    let dir = tmpdir("keygen");
    keygen(&dir, &[]);
    let first = std::fs::read(dir.join("keys.txt")).unwrap();
    keygen(&dir, &[]);
    let second = std::fs::read(dir.join("keys.txt")).unwrap();
    assert_eq!(first, second, "same seed must give byte-identical key files");

    // different seed differs
    let out = run(
        &dir,
        &[
            "keygen", "--group", "toy64", "--participants", "4", "--seed", "12",
            "--deterministic", "--out", "keys2.txt",
        ],
    );
    assert!(out.status.success());
    assert_ne!(first, std::fs::read(dir.join("keys2.txt")).unwrap());
}

#[test]
fn keygen_rejects_zero_participants_with_code_2() {
    let dir = tmpdir("keygen-bad");
    let out = run(
        &dir,
        &["keygen", "--participants", "0", "--out", "keys.txt"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn round_trip_with_verify() {
    let dir = tmpdir("round");
    keygen(&dir, &[]);
    let out = run(
        &dir,
        &[
            "round", "--keys", "keys.txt", "--rounds", "2", "--seed", "21",
            "--deterministic", "--out-dir", "r",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for r in 0..2 {
        let receipt = std::fs::read_to_string(dir.join(format!("r/round-{r}/receipt.txt"))).unwrap();
        assert_eq!(receipt.trim(), "status=1");
    }
    assert!(dir.join("r/events.log").exists());
    assert!(dir.join("r/state.txt").exists());

    // deterministic re-run reproduces the artifact tree byte-for-byte
    let out = run(
        &dir,
        &[
            "round", "--keys", "keys.txt", "--rounds", "2", "--seed", "21",
            "--deterministic", "--out-dir", "r2",
        ],
    );
    assert!(out.status.success());
    for f in ["round-0/proof.txt", "round-0/c1.hex", "round-1/seed.txt", "events.log", "state.txt"] {
        assert_eq!(
            std::fs::read(dir.join("r").join(f)).unwrap(),
            std::fs::read(dir.join("r2").join(f)).unwrap(),
            "artifact {f} not reproducible"
        );
    }

    // verify: honest proof exits 0
    let out = run(
        &dir,
        &[
            "verify", "--proof", "r/round-0/proof.txt", "--ring", "r/ring.txt",
            "--group", "toy64",
        ],
    );
    assert_eq!(out.status.code(), Some(0));

    // a flipped hex nibble exits 1
    let text = std::fs::read_to_string(dir.join("r/round-0/proof.txt")).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let body = lines[1].clone();
    let pos = body.len() / 2;
    let replacement = if &body[pos..pos + 1] == "0" { "1" } else { "0" };
    lines[1] = format!("{}{}{}", &body[..pos], replacement, &body[pos + 1..]);
    std::fs::write(dir.join("bad.txt"), lines.join("\n") + "\n").unwrap();
    let out = run(
        &dir,
        &["verify", "--proof", "bad.txt", "--ring", "r/ring.txt", "--group", "toy64"],
    );
    assert_eq!(out.status.code(), Some(1));

    // malformed file exits 2 with a message
    std::fs::write(dir.join("junk.txt"), "not a proof\n").unwrap();
    let out = run(
        &dir,
        &["verify", "--proof", "junk.txt", "--ring", "r/ring.txt", "--group", "toy64"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn tampered_round_signals_rejection() {
    let dir = tmpdir("tamper");
    keygen(&dir, &[]);
    let out = run(
        &dir,
        &[
            "round", "--keys", "keys.txt", "--seed", "31", "--deterministic",
            "--tamper", "--out-dir", "t",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let receipt = std::fs::read_to_string(dir.join("t/round-0/receipt.txt")).unwrap();
    assert_eq!(receipt.trim(), "status=0");
}

#[test]
fn nist_zeros_source_fails_everything() {
    let dir = tmpdir("nist-zeros");
    let out = run(
        &dir,
        &[
            "nist", "--source", "zeros", "--sequences", "2", "--bits", "16384",
            "--out-dir", "rep",
        ],
    );
    assert!(out.status.success());
    let table = std::fs::read_to_string(dir.join("rep/report.txt")).unwrap();
    assert!(table.contains("alpha=0.01"));
    let total = table.lines().find(|l| l.starts_with("Total |")).unwrap();
    assert!(total.ends_with("| 0.00"), "zero stream must pass nothing: {total}");
}

#[test]
fn nist_pipeline_source_emits_full_report() {
    let dir = tmpdir("nist-pipe");
    let out = run(
        &dir,
        &[
            "nist", "--source", "pipeline", "--group", "toy64", "--participants", "3",
            "--sequences", "2", "--bits", "16384", "--seed", "7", "--out-dir", "rep",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let tsv = std::fs::read_to_string(dir.join("rep/report.tsv")).unwrap();
    assert!(tsv.starts_with("# nist-suite v1"));
    assert_eq!(tsv.lines().count(), 3 + 11 + 1);

    // report re-renders the record file
    let out = run(&dir, &["report", "--input", "rep/report.tsv"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("Frequency (Monobit) Test"));
}

#[test]
fn bench_reference_numbers() {
    let dir = tmpdir("bench");
    let out = run(
        &dir,
        &[
            "bench", "--hash-bits", "256", "--participants", "10",
            "--poly-degree", "1024", "--log-p", "11",
        ],
    );
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("hashing | 256 | 8.0000"));
    assert!(text.contains("participants | 10 | 3.3219"));
    assert!(text.contains("polynomial | 10240 | 13.3219"));
    assert!(text.contains("multi-exponentiation | 110 | 6.7814"));
    assert!(text.contains("single-exponentiation | 11 | 3.4594"));
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tmpdir("config");
    std::fs::write(
        dir.join("run.conf"),
        "group=toy64\nparticipants=3\nrounds=1\nseed=5\ndeterministic=true\n",
    )
    .unwrap();
    let out = run(
        &dir,
        &["keygen", "--config", "run.conf", "--participants", "6", "--out", "keys.txt"],
    );
    assert!(out.status.success());
    let keys = std::fs::read_to_string(dir.join("keys.txt")).unwrap();
    assert!(keys.contains("participants=6"), "flag must override file");
    assert!(keys.contains("group=toy64"));
}
