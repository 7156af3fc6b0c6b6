use std::fs;
use std::process::Command;

use ccm_beamform::cli::{parse_args, Experiment};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ccm-beamform"));
    cmd.env("BEAMFORM_THREADS", "2");
    cmd
}

fn write_small_scenario(dir: &tempfile::TempDir) -> std::path::PathBuf {
    let path = dir.path().join("s.json");
    fs::write(
        &path,
        r#"{"m": 12, "n_sources": 4, "snr_db": 10, "n_snapshots": 25, "n_runs": 3,
            "master_seed": 5, "rank": 3}"#,
    )
    .unwrap();
    path
}

#[test]
fn parse_examples() {
    let spec = parse_args(["complexity", "--m", "32", "--r", "5", "--out", "t.csv"]).unwrap();
    assert_eq!(spec.command, Experiment::Complexity { m: 32, r: 5 });
    assert_eq!(parse_args(["bogus"]).unwrap_err().exit_code(), 2);
}

#[test]
fn curve_csv_has_one_row_per_algorithm_and_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_small_scenario(&dir);
    let out = dir.path().join("c.csv");
    let status = bin()
        .args(["curve", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let mut reader = csv::Reader::from_path(&out).unwrap();
    assert_eq!(
        reader.headers().unwrap(),
        vec!["algorithm", "snapshot", "sinr_db", "n_runs", "rank", "mu_T", "mu_w", "seed"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4 * 25);
    assert_eq!(&rows[0][0], "fullrank-cmv-sg");
    assert_eq!(&rows[99][0], "jio-ccm-gs");
    assert_eq!(&rows[99][1], "25");
    assert_eq!(&rows[99][3], "3");
    assert_eq!(&rows[99][4], "3");
    assert_eq!(&rows[99][5], "0.003");
    assert_eq!(&rows[99][7], "5");
    assert!(rows.iter().all(|r| r[2].parse::<f64>().unwrap().is_finite()));
}

#[test]
fn identical_invocations_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_small_scenario(&dir);
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let status = bin()
            .env("BEAMFORM_THREADS", threads)
            .args(["mismatch", "--runs", "4", "--seed", "11", "--scenario"])
            .arg(&scenario)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        fs::read(out).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "4");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("algorithm,snapshot,sinr_db,n_runs,rank,mu_T,mu_w,seed,mismatch_deg\n"));
    assert!(text.lines().nth(1).unwrap().ends_with(",2"));
}

#[test]
fn complexity_csv_contains_jio_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let status = bin()
        .args(["complexity", "--m", "32", "--r", "5", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("algorithm,m,r,additions,multiplications\n"));
    assert!(text.contains("\nJIO-CCM,32,5,680,713\n"));
    assert!(text.contains("\nFull-Rank-CCM,32,,96,131\n"));
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn rank_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_small_scenario(&dir);
    let out = dir.path().join("r.csv");
    let status = bin()
        .args(["rank-sweep", "--ranks", "2,4", "--snapshots", "20", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "algorithm,rank,sinr_db");
    assert_eq!(lines.len(), 1 + 2 * 2);
    assert!(lines[1].starts_with("jio-ccm,2,"));
    assert!(lines[4].starts_with("jio-ccm-gs,4,"));
}

#[test]
fn selftest_passes() {
    let output = bin().arg("selftest").output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.lines().count() >= 5);
    assert!(stdout.lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn exit_codes() {
    let usage = bin().arg("bogus").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
    let unknown_flag = bin().args(["curve", "--nope"]).output().unwrap();
    assert_eq!(unknown_flag.status.code(), Some(2));
    let missing = bin().args(["curve", "--scenario", "/no/such/file.json"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
    let help = bin().arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
    let help_text = String::from_utf8(help.stdout).unwrap();
    for cmd in ["curve", "rank-sweep", "mismatch", "complexity", "selftest"] {
        assert!(help_text.contains(cmd));
    }

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"m": 4, "snr_db": 10}"#).unwrap();
    let runtime = bin().args(["curve", "--scenario"]).arg(&bad).output().unwrap();
    assert_eq!(runtime.status.code(), Some(1));
    assert!(!runtime.stderr.is_empty());

    let scenario = write_small_scenario(&dir);
    let unwritable = bin()
        .args(["curve", "--scenario"])
        .arg(&scenario)
        .args(["--out", "/no/such/dir/out.csv"])
        .output()
        .unwrap();
    assert_eq!(unwritable.status.code(), Some(1));

    let bad_threads = bin()
        .env("BEAMFORM_THREADS", "zero")
        .args(["curve", "--scenario"])
        .arg(&scenario)
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(1));
}
