//! Black-box tests of the command-line binary: exit codes, output
//! determinism, and the erase-then-run pipeline.

use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_cvf")
}

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("corpus")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn exit_codes_reflect_verdicts() {
    let ok = run(&["verify", &corpus("faa_two_threads.cvf")]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("Verified"));

    let bad = run(&["verify", &corpus("mutants/assert_three.cvf")]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("unprovable equality"));

    let explore = run(&["explore", "--depth", "64", &corpus("faa_two_threads.cvf")]);
    assert_eq!(explore.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&explore.stdout).contains("0 -> 2"));

    let stuck = run(&["explore", &corpus("mutants/assert_zero.cvf")]);
    assert_eq!(stuck.status.code(), Some(1));

    let crosscheck = run(&["crosscheck", &corpus("mutants/assert_three.cvf")]);
    assert_eq!(
        crosscheck.status.code(),
        Some(0),
        "both tools rejecting is not the fatal quadrant"
    );
}

#[test]
fn parse_and_io_errors_use_reserved_exit_codes() {
    let tmp = std::env::temp_dir().join("cvf_cli_parse_error.cvf");
    std::fs::write(&tmp, "let = in").unwrap();
    let parse_err = run(&["verify", &tmp.to_string_lossy()]);
    assert_eq!(parse_err.status.code(), Some(2));
    let missing = run(&["verify", "/nonexistent/never.cvf"]);
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn structured_output_is_byte_identical_across_runs_and_jobs() {
    for sub in [
        vec!["verify", "--format", "structured"],
        vec!["explore", "--format", "structured"],
        vec!["crosscheck", "--format", "structured"],
    ] {
        let mut args = sub.clone();
        let path = corpus("faa_two_threads.cvf");
        args.push(&path);
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.stdout, b.stdout, "{sub:?} must be deterministic");
    }
    let one = run(&[
        "explore",
        "--jobs",
        "1",
        "--format",
        "structured",
        &corpus("faa_two_threads.cvf"),
    ]);
    let four = run(&[
        "explore",
        "--jobs",
        "4",
        "--format",
        "structured",
        &corpus("faa_two_threads.cvf"),
    ]);
    assert_eq!(
        one.stdout, four.stdout,
        "job count must not affect the output"
    );
}

#[test]
fn erase_then_run_equals_run_directly() {
    let direct = run(&["run", &corpus("faa_two_threads.cvf")]);
    let erased = run(&["erase", &corpus("faa_two_threads.cvf")]);
    let mut piped = Command::new(bin())
        .args(["run", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .expect("spawn");
    use std::io::Write as _;
    piped
        .stdin
        .take()
        .unwrap()
        .write_all(&erased.stdout)
        .unwrap();
    let piped = piped.wait_with_output().unwrap();
    assert_eq!(direct.stdout, piped.stdout);
    assert_eq!(direct.status.code(), piped.status.code());
    assert!(String::from_utf8_lossy(&direct.stdout).contains("({0 -> 2}, 0)"));
}

#[test]
fn run_reports_stuck_programs_with_nonzero_exit() {
    let out = run(&["run", &corpus("mutants/assert_zero.cvf")]);
    assert_eq!(out.status.code(), Some(1));
}
