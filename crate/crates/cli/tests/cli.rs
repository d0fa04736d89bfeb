//! End-to-end tests against the compiled binary: output contracts, exit
//! codes, and bit-stable sweep round trips.

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prizebalance"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn write_temp(contents: &str, suffix: &str) -> tempfile::NamedTempFile {
    let mut file = tempfile::Builder::new()
        .suffix(suffix)
        .tempfile()
        .unwrap();
    file.write_all(contents.as_bytes()).unwrap();
    file
}

const MICRO: &str = "club,budget\nA,5\nB,4\nC,3\nD,2\nE,1\n";

#[test]
fn index_reports_points_and_band() {
    let file = write_temp(MICRO, ".csv");
    let out = run(&["index", "--input", file.path().to_str().unwrap(), "--cr", "2"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("HHI 2444.4, High"), "{text}");
    assert!(text.contains("CR(2) 0.6000"), "{text}");
}

#[test]
fn index_equal_budgets_hit_the_floor() {
    let file = write_temp("club,budget\nA,9\nB,9\nC,9\nD,9\n", ".csv");
    let out = run(&["index", "--input", file.path().to_str().unwrap()]);
    assert!(stdout(&out).contains("HHI 2500.0, High"));
}

#[test]
fn index_accepts_json_input() {
    let file = write_temp(
        r#"[{"club":"A","budget":3},{"club":"B","budget":1}]"#,
        ".json",
    );
    let out = run(&["index", "--input", file.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("HHI 6250.0, High"));
}

#[test]
fn index_json_output_carries_both_scales() {
    let file = write_temp(MICRO, ".csv");
    let out = run(&[
        "index",
        "--input",
        file.path().to_str().unwrap(),
        "--format",
        "json",
    ]);
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let raw = parsed["hhi_raw"].as_f64().unwrap();
    let points = parsed["hhi_points"].as_f64().unwrap();
    assert_eq!(points, raw * 10_000.0);
    assert_eq!(parsed["band"], "High");
}

#[test]
fn parse_errors_exit_2_with_line_numbers() {
    let file = write_temp("club,budget\nA,1\nB,oops\n", ".csv");
    let out = run(&["index", "--input", file.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    let text = stderr(&out);
    assert!(text.contains("line 3"), "{text}");
}

#[test]
fn validation_errors_exit_2() {
    let file = write_temp("club,budget\nA,5\n", ".csv");
    let out = run(&["index", "--input", file.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);

    let out = run(&["index", "--input", "/nonexistent/league.csv"]);
    assert_eq!(exit_code(&out), 2);

    let file = write_temp(MICRO, ".csv");
    let out = run(&[
        "sweep",
        "--input",
        file.path().to_str().unwrap(),
        "--k",
        "9",
        "--grid",
        "0:10:2",
    ]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn apply_reports_post_award_distribution() {
    let file = write_temp("club,budget\nX,3\nY,2\nZ,1\n", ".csv");
    let out = run(&[
        "apply",
        "--input",
        file.path().to_str().unwrap(),
        "--k",
        "2",
        "--endowment",
        "4",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("even top-2"), "{text}");
    assert!(text.contains("hurts"), "{text}");

    let out = run(&[
        "apply",
        "--input",
        file.path().to_str().unwrap(),
        "--weights",
        "0.75,0.25",
        "--endowment",
        "4",
        "--format",
        "json",
    ]);
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let awarded: Vec<f64> = parsed["awarded"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["budget"].as_f64().unwrap())
        .collect();
    assert_eq!(awarded, [6.0, 3.0, 1.0]);
}

#[test]
fn apply_requires_exactly_one_rule() {
    let file = write_temp(MICRO, ".csv");
    let out = run(&[
        "apply",
        "--input",
        file.path().to_str().unwrap(),
        "--endowment",
        "4",
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("exactly one rule"));
}

#[test]
fn thresholds_show_regimes_and_smallest_improving_k() {
    let file = write_temp(MICRO, ".csv");
    let out = run(&[
        "thresholds",
        "--input",
        file.path().to_str().unwrap(),
        "--endowment",
        "50",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("smallest improving k: 4"), "{text}");
    assert!(text.contains("60"), "{text}"); // break-even for k=4
    assert!(text.contains("10"), "{text}"); // HHI minimum for k=4
    assert!(text.contains("always falling"), "{text}");

    let out = run(&[
        "thresholds",
        "--input",
        file.path().to_str().unwrap(),
        "--endowment",
        "100",
    ]);
    assert!(stdout(&out).contains("smallest improving k: 5"));
}

#[test]
fn sweep_csv_schema_and_break_even_delta() {
    let file = write_temp(MICRO, ".csv");
    let out = run(&[
        "sweep",
        "--input",
        file.path().to_str().unwrap(),
        "--k",
        "4",
        "--grid",
        "0:60:6",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("E,hhi_points,band,delta"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 7);
    assert!(rows[0].starts_with("0,") && rows[0].ends_with(",0"));
    assert!(rows[6].starts_with("60,") && rows[6].ends_with(",0"));
    // interior deltas are the known dips
    let delta_at_10: f64 = rows[1].split(',').nth(3).unwrap().parse().unwrap();
    assert!((delta_at_10 - (150.0 / 625.0 - 55.0 / 225.0)).abs() < 1e-15);
}

#[test]
fn sweep_is_bit_stable_and_round_trips() {
    let file = write_temp(MICRO, ".csv");
    let args = [
        "sweep",
        "--input",
        file.path().to_str().unwrap(),
        "--k",
        "3",
        "--grid",
        "0:97:13",
    ];
    let first = stdout(&run(&args));
    let second = stdout(&run(&args));
    assert_eq!(first, second, "same input and flags must reproduce bytes");

    // re-parse, recompute at the parsed endowments, and compare rendering
    use prizebalance::analysis::sweep_endowments;
    use prizebalance::model::BudgetDistribution;
    let dist = BudgetDistribution::from_budgets(&[5.0, 4.0, 3.0, 2.0, 1.0]).unwrap();
    let grid: Vec<f64> = first
        .lines()
        .skip(1)
        .map(|row| row.split(',').next().unwrap().parse().unwrap())
        .collect();
    let sweep = sweep_endowments(&dist, 3, &grid).unwrap();
    for (row, recomputed) in first.lines().skip(1).zip(&sweep.rows) {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[0], recomputed.endowment.to_string());
        assert_eq!(fields[1], recomputed.hhi_points.to_string());
        assert_eq!(fields[2], recomputed.band.to_string());
        assert_eq!(fields[3], recomputed.delta.to_string());
    }
}

#[test]
fn sweep_writes_to_file() {
    let file = write_temp(MICRO, ".csv");
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep",
        "--input",
        file.path().to_str().unwrap(),
        "--k",
        "1",
        "--grid",
        "0:4:1",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).is_empty());
    let written = std::fs::read_to_string(&out_path).unwrap();
    assert!(written.starts_with("E,hhi_points,band,delta\n"));
    assert_eq!(written.lines().count(), 3);
}

#[test]
fn verify_small_run_passes_and_is_seed_stable() {
    let out = run(&["verify", "--instances", "300", "--seed", "7"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("6 properties, 300 instances, 0 failures"), "{text}");

    let again = run(&["verify", "--instances", "300", "--seed", "7"]);
    assert_eq!(stdout(&again), text, "same seed must reproduce the report");
}

#[test]
fn verify_handles_minimum_league_size() {
    let out = run(&[
        "verify",
        "--instances",
        "200",
        "--n-min",
        "2",
        "--n-max",
        "2",
    ]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("0 failures"));
}

#[test]
fn bundled_example_files_load() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    for name in ["micro5.csv", "toy3.csv", "even4.json"] {
        let path = root.join(name);
        let out = run(&["index", "--input", path.to_str().unwrap()]);
        assert_eq!(exit_code(&out), 0, "{name} failed: {}", stderr(&out));
    }
}
