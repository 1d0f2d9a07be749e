use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use pkgilp::external::{run_external, Dialect, ExternalError, ExternalSolverSpec};
use pkgilp_core::cudf::parse_document;
use pkgilp_core::emit::{emit_lp, emit_opb, var_token};
use pkgilp_core::encoder::{build_model, CriteriaMode, Weighting};
use pkgilp_core::{solve_bruteforce, IlpModel, SolveStatus};

const CAR: &str = include_str!("../../core/tests/data/car.cudf");

fn car_model() -> IlpModel {
    let (u, r) = parse_document(CAR).unwrap();
    build_model(
        &u,
        &u.initial_configuration(),
        &r,
        CriteriaMode::Criterion2,
        Weighting::Strict,
    )
}

fn script(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
    path.display().to_string()
}

#[test]
fn opb_oracle_answer_is_rechecked() {
    let dir = tempfile::tempdir().unwrap();
    let m = car_model();
    let oracle = solve_bruteforce(&m).unwrap().best.unwrap();
    let mut answer = String::from("c fake solver\no -999\ns OPTIMUM FOUND\nv");
    for (i, &on) in oracle.assignment.values.iter().enumerate() {
        let _ = write!(answer, " {}x{}", if on { "" } else { "-" }, i + 1);
    }
    answer.push('\n');
    std::fs::write(dir.path().join("answer"), answer).unwrap();
    let copy = dir.path().join("seen.opb");
    let s = script(
        dir.path(),
        "fake.sh",
        &format!(
            "cp \"$1\" '{}'\ncat '{}'",
            copy.display(),
            dir.path().join("answer").display()
        ),
    );
    let spec = ExternalSolverSpec::new(format!("sh {s} {{input}}"), Dialect::Opb).unwrap();
    let out = run_external(&spec, &m, Duration::from_secs(30)).unwrap();
    assert_eq!(out.status, SolveStatus::Optimal);
    assert_eq!(out.objective(), Some(oracle.objective));
    assert_eq!(std::fs::read_to_string(copy).unwrap(), emit_opb(&m));
}

#[test]
fn lp_answer_through_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let m = car_model();
    let oracle = solve_bruteforce(&m).unwrap().best.unwrap();
    let mut answer = String::from("optimal\n");
    for (i, id) in m.variables().iter().enumerate() {
        let _ = writeln!(answer, "{} {}", var_token(id), u8::from(oracle.assignment.values[i]));
    }
    std::fs::write(dir.path().join("answer"), answer).unwrap();
    let copy = dir.path().join("seen.lp");
    let s = script(
        dir.path(),
        "fake.sh",
        &format!(
            "cp \"$1\" '{}'\ncp '{}' \"$2\"\necho noise",
            copy.display(),
            dir.path().join("answer").display()
        ),
    );
    let spec = ExternalSolverSpec::new(format!("sh {s} {{input}} {{output}}"), Dialect::Lp).unwrap();
    let out = run_external(&spec, &m, Duration::from_secs(30)).unwrap();
    assert_eq!(out.status, SolveStatus::Optimal);
    assert_eq!(out.objective(), Some(oracle.objective));
    assert_eq!(std::fs::read_to_string(copy).unwrap(), emit_lp(&m));
}

#[test]
fn unsat_marker_means_infeasible() {
    let spec = ExternalSolverSpec::new("echo 's UNSATISFIABLE' # {input}", Dialect::Opb).unwrap();
    let out = run_external(&spec, &car_model(), Duration::from_secs(30)).unwrap();
    assert_eq!(out.status, SolveStatus::Infeasible);
    assert!(out.best.is_none());
}

#[test]
fn slow_solver_is_killed() {
    let spec = ExternalSolverSpec::new("sleep 30; echo {input}", Dialect::Opb).unwrap();
    let start = Instant::now();
    let out = run_external(&spec, &car_model(), Duration::from_millis(300)).unwrap();
    assert_eq!(out.status, SolveStatus::TimedOut);
    assert!(out.best.is_none());
    assert!(out.stats.elapsed >= Duration::from_millis(300));
    assert!(start.elapsed() < Duration::from_secs(10));
}

#[test]
fn garbage_is_a_protocol_error() {
    let spec = ExternalSolverSpec::new("echo 'hello {input}'", Dialect::Opb).unwrap();
    let err = run_external(&spec, &car_model(), Duration::from_secs(30)).unwrap_err();
    assert!(matches!(err, ExternalError::Protocol(_)), "{err}");
}

#[test]
fn infeasible_assignment_is_a_protocol_error() {
    // All zeros leaves the install request unsatisfied.
    let spec = ExternalSolverSpec::new("echo 's OPTIMUM FOUND'; echo v; : {input}", Dialect::Opb).unwrap();
    let err = run_external(&spec, &car_model(), Duration::from_secs(30)).unwrap_err();
    assert!(matches!(err, ExternalError::Protocol(_)), "{err}");
}

#[test]
fn crash_without_answer_is_a_failed_run() {
    let spec = ExternalSolverSpec::new("echo boom >&2; exit 3; : {input}", Dialect::Lp).unwrap();
    match run_external(&spec, &car_model(), Duration::from_secs(30)).unwrap_err() {
        ExternalError::FailedRun { stderr, .. } => assert_eq!(stderr, "boom"),
        other => panic!("unexpected {other}"),
    }
}
