use std::path::PathBuf;
use std::process::Command;

use twinsim::fock::Statistics;
use twinsim_cli::{execute, parse_args, Action, CliError, RunSpec};

fn parse(args: &[&str]) -> Result<Action, clap::Error> {
    parse_args(std::iter::once("twinsim").chain(args.iter().copied()))
}

fn table_spec(args: &[&str]) -> RunSpec {
    match parse(args).expect("parse ok") {
        Action::Table(spec) => spec,
        other => panic!("expected a table action, got {other:?}"),
    }
}

#[test]
fn sweep_parses_grid_and_statistics() {
    let spec = table_spec(&[
        "sweep",
        "--stats",
        "boson,fermion",
        "--phi",
        "0:6.283185:64",
        "--out",
        "results.csv",
    ]);
    assert_eq!(
        spec.statistics,
        vec![Statistics::Boson, Statistics::Fermion]
    );
    assert_eq!(spec.phis.len(), 64);
    assert_eq!(spec.phis[0], 0.0);
    let endpoint: f64 = "6.283185".parse().unwrap();
    assert!(*spec.phis.last().unwrap() < endpoint);
    assert_eq!(spec.out, Some(PathBuf::from("results.csv")));
    assert!(!spec.verify);
}

#[test]
fn run_parses_a_single_point() {
    let spec = table_spec(&["run", "--stats", "fermion", "--phi", "1.0625"]);
    assert_eq!(spec.statistics, vec![Statistics::Fermion]);
    assert_eq!(spec.phis, vec![1.0625]);
    assert_eq!(spec.out, None);
}

#[test]
fn empty_grid_is_a_usage_error() {
    assert!(parse(&["sweep", "--phi", "0:1:0"]).is_err());
}

#[test]
fn unknown_flags_and_bad_numbers_are_usage_errors() {
    assert!(parse(&["run", "--phi", "1.0", "--frobnicate"]).is_err());
    assert!(parse(&["run", "--phi", "abc"]).is_err());
    assert!(parse(&["run", "--phi", "1.0", "--stats", "quark"]).is_err());
    assert!(parse(&["run", "--phi", "1.0", "--tol", "-1e-9"]).is_err());
}

#[test]
fn verify_subcommand_enables_all_checks() {
    let spec = table_spec(&["verify", "--phi", "0:6.28:8"]);
    assert!(spec.verify);
    assert!(spec.cross_check);
    assert_eq!(spec.phis.len(), 8);
}

#[test]
fn sweep_csv_has_one_row_per_point_and_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let spec = table_spec(&[
        "sweep",
        "--stats",
        "boson,fermion",
        "--phi",
        "0:6.283185307179586:16",
        "--out",
        path.to_str().unwrap(),
    ]);
    let mut sink = Vec::new();
    execute(&Action::Table(spec), &mut sink).unwrap();
    assert!(sink.is_empty(), "csv goes to the file, not stdout");
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 16);
    assert_eq!(
        lines[0],
        "stats,phi,w_both_v,w_both_e,w_one_each,p_same_cond,p_cross_cond,\
         p_same_closed,p_cross_closed,max_pattern_dev"
    );
    assert!(lines[1].starts_with("boson,"));
    assert!(lines[17].starts_with("fermion,"));
}

#[test]
fn identical_specs_give_byte_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("a.csv"), dir.path().join("b.csv")];
    for path in &paths {
        let spec = table_spec(&[
            "sweep",
            "--phi",
            "0:6.283185307179586:16",
            "--patterns",
            "--out",
            path.to_str().unwrap(),
        ]);
        execute(&Action::Table(spec), &mut Vec::new()).unwrap();
    }
    let a = std::fs::read(&paths[0]).unwrap();
    let b = std::fs::read(&paths[1]).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn fermion_row_at_pi_has_unit_same_index_conditional() {
    let spec = table_spec(&[
        "run",
        "--stats",
        "fermion",
        "--phi",
        "3.14159265358979323846",
    ]);
    let mut sink = Vec::new();
    execute(&Action::Table(spec), &mut sink).unwrap();
    let text = String::from_utf8(sink).unwrap();
    let row = text.lines().nth(1).expect("one data row");
    let cells: Vec<&str> = row.split(',').collect();
    let p_same_cond: f64 = cells[5].parse().unwrap();
    let p_cross_cond: f64 = cells[6].parse().unwrap();
    assert!((p_same_cond - 1.0).abs() < 1e-12);
    assert!(p_cross_cond.abs() < 1e-12);
}

#[test]
fn patterns_flag_appends_ten_columns() {
    let spec = table_spec(&["run", "--phi", "0.3", "--patterns"]);
    let mut sink = Vec::new();
    execute(&Action::Table(spec), &mut sink).unwrap();
    let text = String::from_utf8(sink).unwrap();
    for line in text.lines() {
        assert_eq!(line.split(',').count(), 20);
    }
    let header = text.lines().next().unwrap();
    assert!(header.contains("p_D1_D1p"));
}

#[test]
fn verification_passes_on_the_real_pipeline() {
    let spec = table_spec(&["verify", "--phi", "0:6.283185307179586:16"]);
    let mut sink = Vec::new();
    execute(&Action::Table(spec), &mut sink).unwrap();
    let text = String::from_utf8(sink).unwrap();
    assert!(text.contains("max |simulated - oracle|"));
    assert!(text.contains("max |simulated - closed-form|"));
    assert!(text.contains("max |simulated - labeled|"));
    assert!(text.trim_end().ends_with("PASS"));
}

#[test]
fn unwritable_output_is_an_io_error_with_exit_code_two() {
    let spec = table_spec(&["run", "--phi", "0.1", "--out", "/nonexistent-dir/out.csv"]);
    let err = execute(&Action::Table(spec), &mut Vec::new()).unwrap_err();
    assert!(matches!(err, CliError::Io(_)));
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn decompose_prints_the_component_tables() {
    let action = parse(&["decompose", "--phi", "0"]).unwrap();
    let mut sink = Vec::new();
    execute(&action, &mut sink).unwrap();
    let text = String::from_utf8(sink).unwrap();
    assert!(text.contains("initial state"));
    assert!(text.contains("same-region component"));
    assert!(text.contains("one-each component"));
    assert!(text.contains("symmetric projection"));
    assert!(text.contains("(A, B)  +0.707107+0.000000i"));
    assert!(text.contains("(D1, D1')  +0.500000+0.000000i"));
}

#[test]
fn binary_runs_end_to_end() {
    let exe = env!("CARGO_BIN_EXE_twinsim");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");

    let ok = Command::new(exe)
        .args([
            "verify",
            "--phi",
            "0:6.283185307179586:8",
            "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        ok.status.success(),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    assert!(String::from_utf8_lossy(&ok.stdout).contains("PASS"));
    assert!(path.exists());

    let io_err = Command::new(exe)
        .args(["run", "--phi", "0.1", "--out", "/nonexistent-dir/out.csv"])
        .output()
        .unwrap();
    assert_eq!(io_err.status.code(), Some(2));

    let usage = Command::new(exe)
        .args(["sweep", "--phi", "0:1:0"])
        .output()
        .unwrap();
    assert!(!usage.status.success());
}
