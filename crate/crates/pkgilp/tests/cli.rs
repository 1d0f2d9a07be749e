use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_pkgilp");

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn car() -> String {
    data("car.cudf").display().to_string()
}

#[test]
fn solve_output_validates() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve", &car()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("package: bicycle\nversion: 7\ninstalled: true\n"));
    let sol = write(dir.path(), "sol", &text);
    let v = run(&["validate", &car(), &sol]);
    assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
    assert!(stdout(&v).contains("removed functionalities: 1; changed units: 3"));
}

#[test]
fn lex_and_aggregate_report_the_same_pair() {
    let agg = run(&["solve", "--criteria", "aggregate", &car()]);
    let lex = run(&["solve", "--criteria", "lex", &car()]);
    assert_eq!(stderr(&agg), stderr(&lex));
    assert_eq!(lex.status.code(), Some(0));
}

#[test]
fn providerless_install_fails() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "p.cudf",
        "package: a\nversion: 1\n\nrequest: \ninstall: nothing-provides-this\n",
    );
    let out = run(&["solve", &f]);
    assert_eq!(out.status.code(), Some(10));
    assert_eq!(stdout(&out), "FAIL\n");
    let fail = write(dir.path(), "fail", "FAIL\n");
    assert_eq!(run(&["validate", &f, &fail]).status.code(), Some(0));
    // Declaring a solvable problem unsolvable is wrong.
    assert_eq!(run(&["validate", &car(), &fail]).status.code(), Some(2));
}

#[test]
fn broken_solution_names_the_violation() {
    let dir = tempfile::tempdir().unwrap();
    let base = std::fs::read_to_string(data("car.cudf")).unwrap();
    let keep = base.split("request").next().unwrap().to_string();
    let f = write(dir.path(), "keep.cudf", &keep);
    let out = run(&["solve", &f]);
    assert_eq!(out.status.code(), Some(0));
    let good = stdout(&out);
    assert!(good.contains("package: turbo\n"));
    let broken = good.replace("package: turbo\nversion: 1\ninstalled: true\n", "");
    let sol = write(dir.path(), "sol", &broken);
    let v = run(&["validate", &f, &sol]);
    assert_eq!(v.status.code(), Some(2));
    assert!(
        stdout(&v).contains("violation: gasoline-engine_1: unsatisfied dependency `turbo`"),
        "{}",
        stdout(&v)
    );
}

#[test]
fn stdin_input() {
    let mut child = Command::new(BIN)
        .args(["solve", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(std::fs::read(data("car.cudf")).unwrap().as_slice())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), stdout(&run(&["solve", &car()])));
}

#[test]
fn encode_formats() {
    let lp = run(&["encode", &car()]);
    assert_eq!(lp.status.code(), Some(0));
    let text = stdout(&lp);
    assert!(text.contains("\n - gasoline%2Dengine_1 + turbo_1 >= 0\n"));
    assert!(text
        .contains("\n 3 gasoline%2Dengine_1 + gasoline%2Dengine_2 + electric%2Dengine_1 + electric%2Dengine_2 <= 3\n"));
    let dir = tempfile::tempdir().unwrap();
    let names = dir.path().join("names");
    let opb = run(&["encode", "--format", "opb", "--names", names.to_str().unwrap(), &car()]);
    assert!(stdout(&opb).starts_with("* #variable= 24 #constraint= "));
    let map = std::fs::read_to_string(names).unwrap();
    assert_eq!(map.lines().next(), Some("x1 car_1"));
    assert_eq!(map.lines().count(), 24);
    assert_eq!(run(&["encode", "--criteria", "lex", &car()]).status.code(), Some(1));
}

#[test]
fn parse_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.cudf", "package: a\nversion: one\n");
    let out = run(&["solve", &f]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("line 2: invalid version `one`"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn gen_is_seeded() {
    let a = run(&["gen", &car(), "--install", "1", "--upgrade", "2", "--seed", "1"]);
    let b = run(&["gen", &car(), "--install", "1", "--upgrade", "2", "--seed", "1"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let request = text.split("request: \n").nth(1).unwrap();
    assert!(request.starts_with("install: "));
    assert_eq!(request.lines().nth(1).unwrap().split(", ").count(), 2);
    let too_many = run(&["gen", &car(), "--install", "50"]);
    assert_eq!(too_many.status.code(), Some(1));
}

#[test]
fn synth_then_gen_thirty_installs() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("base.cudf");
    let s = run(&["synth", "--units", "500", "--seed", "4", "-o", base.to_str().unwrap()]);
    assert_eq!(s.status.code(), Some(0));
    let g = run(&["gen", base.to_str().unwrap(), "--install", "30", "--seed", "9"]);
    let text = stdout(&g);
    let install = text.lines().find(|l| l.starts_with("install: ")).unwrap();
    assert_eq!(install.split(", ").count(), 30);
}

#[test]
fn bench_over_tiny_instances() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("runs.tsv");
    let out = run(&[
        "bench",
        &car(),
        "--base",
        &car(),
        "--count",
        "2",
        "--install",
        "1",
        "--jobs",
        "2",
        "--timeout",
        "60",
        "--records",
        records.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let table = stdout(&out);
    let timeouts = table.lines().find(|l| l.starts_with("nb time out")).unwrap();
    assert!(timeouts.ends_with(" 0"), "{table}");
    let tsv = std::fs::read_to_string(records).unwrap();
    assert_eq!(tsv.lines().count(), 3);
    assert!(tsv.lines().all(|l| l.split('\t').count() == 5));
}
