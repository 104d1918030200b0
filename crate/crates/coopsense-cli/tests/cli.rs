//! End-to-end tests of the `coopsense` binary: exit codes, CSV schemas,
//! manifest reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coopsense")).args(args).output().expect("binary runs")
}

fn out_path(dir: &tempfile::TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|err| panic!("{}: {err}", path.display()))
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|line| line.split(',').map(str::to_string).collect()).collect()
}

const SWEEP_HEADER: &str =
    "rule,gamma_db,n,per_su_pd,lambda,per_su_pf,pf_total,overhead_factor,throughput,is_optimal";

#[test]
fn sweep_schema_sorting_and_argmax_marks() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = out_path(&dir, "sweep.csv");
    let output = run(&[
        "sweep",
        "--set",
        "ts=60",
        "--set",
        "m=6",
        "--set",
        "gamma_db=5,0", // deliberately unsorted input
        "--set",
        "n_max=10",
        "--output",
        csv_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");

    let csv = read(&csv_path);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), SWEEP_HEADER);
    let rows = rows(&csv);
    assert_eq!(rows.len(), 2 * 2 * 10); // both rules x two gammas x n_max

    // Sorted by (rule, gamma_db, n): "and" first, gammas ascending.
    let key: Vec<(String, f64, u32)> = rows
        .iter()
        .map(|row| (row[0].clone(), row[1].parse().unwrap(), row[2].parse().unwrap()))
        .collect();
    let mut sorted = key.clone();
    sorted.sort_by(|a, b| (a.0.as_str(), a.1, a.2).partial_cmp(&(b.0.as_str(), b.1, b.2)).unwrap());
    assert_eq!(key, sorted);

    // Exactly one argmax mark per (rule, gamma) curve, and probabilities in range.
    for rule in ["and", "or"] {
        for gamma in ["0", "5"] {
            let marks: u32 = rows
                .iter()
                .filter(|row| row[0] == rule && row[1] == gamma)
                .map(|row| row[9].parse::<u32>().unwrap())
                .sum();
            assert_eq!(marks, 1, "curve {rule}/{gamma}");
        }
    }
    for row in &rows {
        for col in [3, 5, 6, 8] {
            let p: f64 = row[col].parse().unwrap();
            assert!((0.0..=1.0).contains(&p), "column {col} out of range: {p}");
        }
    }
}

#[test]
fn certain_target_zeroes_the_throughput_column() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = out_path(&dir, "certain.csv");
    let output = run(&[
        "sweep",
        "--set",
        "total_pd_target=1",
        "--set",
        "gamma_db=0",
        "--set",
        "n_max=5",
        "--output",
        csv_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let csv = read(&csv_path);
    let rows = rows(&csv);
    assert_eq!(rows.len(), 2 * 5);
    for row in &rows {
        assert_eq!(row[6], format!("{:.11e}", 1.0), "pf_total: {row:?}");
        assert_eq!(row[8], format!("{:.11e}", 0.0), "throughput: {row:?}");
    }
}

#[test]
fn single_size_cluster_makes_rules_identical() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = out_path(&dir, "identity.csv");
    let output = run(&[
        "sweep",
        "--set",
        "gamma_db=5",
        "--set",
        "n_max=1",
        "--output",
        csv_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let rows = rows(&read(&csv_path));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "and");
    assert_eq!(rows[1][0], "or");
    // With N = 1 fusion is the identity, so every numeric cell must agree.
    assert_eq!(rows[0][1..], rows[1][1..]);
    assert_eq!(rows[0][9], "1");
}

#[test]
fn manifest_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first_csv = out_path(&dir, "first.csv");
    let output = run(&[
        "sweep",
        "--set",
        "ts=80",
        "--set",
        "m_fraction=0.1",
        "--set",
        "gamma_db=-5,0",
        "--set",
        "n_max=12",
        "--output",
        first_csv.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");

    let manifest_path = out_path(&dir, "first.csv.manifest");
    let manifest = read(&manifest_path);
    // Resolved keys present, sorted, with m resolved from the fraction.
    assert!(manifest.contains("command=sweep\n"));
    assert!(manifest.contains("m=8\n"));
    let keys: Vec<&str> = manifest.lines().map(|l| l.split('=').next().unwrap()).collect();
    let mut sorted = keys.clone();
    sorted.sort_unstable();
    assert_eq!(keys, sorted);

    let second_csv = out_path(&dir, "second.csv");
    let output = run(&[
        "sweep",
        "--config",
        manifest_path.to_str().unwrap(),
        "--output",
        second_csv.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    assert_eq!(read(&first_csv), read(&second_csv));
}

#[test]
fn validate_passes_with_the_default_seed_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let first_csv = out_path(&dir, "validate.csv");
    let output =
        run(&["validate", "--set", "trials=20000", "--output", first_csv.to_str().unwrap()]);
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("PASS"), "{stdout}");

    let csv = read(&first_csv);
    assert_eq!(
        csv.lines().next().unwrap(),
        "m,gamma_db,pd_target,rule,n,quantity,analytic,estimate,half_width,tolerance,retried,pass"
    );
    assert_eq!(csv.lines().count(), 1 + 576);

    let second_csv = out_path(&dir, "validate2.csv");
    let output = run(&[
        "validate",
        "--config",
        out_path(&dir, "validate.csv.manifest").to_str().unwrap(),
        "--output",
        second_csv.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    assert_eq!(csv, read(&second_csv));
}

#[test]
fn validate_retry_rescues_a_single_marginal_failure() {
    // Seed 3 at 20k trials misses exactly one case on the first pass; the
    // fresh-seed retry accepts it.
    let dir = tempfile::tempdir().unwrap();
    let csv_path = out_path(&dir, "retry.csv");
    let output = run(&[
        "validate",
        "--set",
        "trials=20000",
        "--set",
        "seed=3",
        "--output",
        csv_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("1 retried -> PASS"), "{stdout}");
    let retried_rows = rows(&read(&csv_path)).iter().filter(|row| row[10] == "1").count();
    assert_eq!(retried_rows, 1);
}

#[test]
fn validate_failure_exits_one() {
    // Seed 6 at 20k trials fails two cases; no retry applies.
    let dir = tempfile::tempdir().unwrap();
    let csv_path = out_path(&dir, "fail.csv");
    let output = run(&[
        "validate",
        "--set",
        "trials=20000",
        "--set",
        "seed=6",
        "--output",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("FAIL"), "{stdout}");
    // The CSV is still written, with failing rows flagged.
    let failing = rows(&read(&csv_path)).iter().filter(|row| row[11] == "0").count();
    assert_eq!(failing, 2);
}

#[test]
fn config_errors_exit_two_with_precise_locations() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = out_path(&dir, "never.csv");

    let output = run(&["sweep", "--set", "bogus=1", "--output", csv_path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2), "{output:?}");
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("--set #1"), "{stderr}");
    assert!(stderr.contains("unknown key `bogus`"), "{stderr}");

    let config_path = out_path(&dir, "bad.conf");
    std::fs::write(&config_path, "ts=100\ntrials=many\n").unwrap();
    let output = run(&[
        "sweep",
        "--config",
        config_path.to_str().unwrap(),
        "--output",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2), "{output:?}");
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("bad.conf:2"), "{stderr}");

    let output = run(&[
        "optimize",
        "--set",
        "m=5",
        "--set",
        "m_fraction=0.1",
        "--output",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2), "{output:?}");

    assert!(!csv_path.exists(), "no output on config errors");
}

#[test]
fn optimize_reports_one_row_per_curve() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = out_path(&dir, "optimize.csv");
    let output = run(&[
        "optimize",
        "--set",
        "ts=60",
        "--set",
        "m=6",
        "--set",
        "gamma_db=0,5,10",
        "--output",
        csv_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let csv = read(&csv_path);
    assert_eq!(csv.lines().next().unwrap(), "rule,gamma_db,n_opt,throughput,pf_total");
    let rows = rows(&csv);
    assert_eq!(rows.len(), 2 * 3);
    for row in &rows {
        let n_opt: u32 = row[2].parse().unwrap();
        assert!((1..=54).contains(&n_opt));
    }
}

#[test]
fn optimize_degenerate_single_candidate() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = out_path(&dir, "degenerate.csv");
    let output = run(&[
        "optimize",
        "--set",
        "n_max=1",
        "--set",
        "gamma_db=0",
        "--output",
        csv_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    for row in rows(&read(&csv_path)) {
        assert_eq!(row[2], "1");
    }
}

#[test]
fn calibrate_searches_and_tolerates_empty_ranges() {
    let dir = tempfile::tempdir().unwrap();

    let csv_path = out_path(&dir, "calibrate.csv");
    let output = run(&[
        "calibrate",
        "--set",
        "calibrate_ts=100",
        "--set",
        "calibrate_targets=0.9",
        "--output",
        csv_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let csv = read(&csv_path);
    assert_eq!(
        csv.lines().next().unwrap(),
        "ts,total_pd_target,gamma_db,m,n_opt_or,n_opt_and,want_or,want_and,matches"
    );
    let rows = rows(&csv);
    assert_eq!(rows.len(), 2, "two reference cells per setting");
    assert_eq!(rows[0][0], "100");
    assert_eq!(rows[0][3], "5"); // m = 0.05 * 100
    assert_eq!(rows[1][3], "20"); // m = 0.2 * 100

    let empty_csv = out_path(&dir, "empty.csv");
    let output = run(&[
        "calibrate",
        "--set",
        "calibrate_ts=",
        "--set",
        "calibrate_targets=",
        "--output",
        empty_csv.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    assert_eq!(read(&empty_csv).lines().count(), 1, "header only");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("searched 0 settings"), "{stdout}");
}
