use std::path::Path;
use std::process::{Command, Output};

fn mstc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mstc"))
        .args(args)
        .env_remove("MSTC_GLOBAL_TL")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const TRIANGLE: &str = "3 3 1\n1 2 1\n2 3 2\n1 3 3\n1 3\n";

#[test]
fn solve_feasible_prints_tree() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "tri.txt", TRIANGLE);
    let trace = dir.path().join("trace.jsonl");
    let out = mstc(&[
        "solve",
        &f,
        "--seed",
        "3",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["weight"], 3.0);
    assert_eq!(v["edges"], serde_json::json!([1, 2]));
    assert!(trace.exists());
}

#[test]
fn trace_lines_are_json() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "sq.txt",
        "4 5 2\n1 2 1\n2 3 1\n3 4 1\n1 4 5\n1 3 6\n1 2\n2 3\n",
    );
    let trace = dir.path().join("t.jsonl");
    let out = mstc(&["solve", &f, "--trace", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    for line in std::fs::read_to_string(&trace).unwrap().lines() {
        let rec: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in ["p", "k", "bucket_size", "status", "w_star", "elapsed_s"] {
            assert!(rec.get(key).is_some(), "missing {key} in {line}");
        }
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let infeasible = write(dir.path(), "inf.txt", "3 2 1\n1 2 1\n2 3 2\n1 2\n");
    assert_eq!(mstc(&["solve", &infeasible]).status.code(), Some(3));

    let bad = write(dir.path(), "bad.txt", "3 3 0\n1 2 1\n2 2 1\n1 3 3\n");
    let out = mstc(&["solve", &bad]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.txt"));

    assert_eq!(mstc(&["solve", "/nonexistent/file"]).status.code(), Some(4));
    let f = write(dir.path(), "tri.txt", TRIANGLE);
    assert_eq!(mstc(&["solve", &f, "--alpha=-1"]).status.code(), Some(4));
    assert_eq!(
        mstc(&["solve", &f, "--format", "xml"]).status.code(),
        Some(4)
    );
}

#[test]
fn global_limit_from_env() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "tri.txt", TRIANGLE);
    let out = Command::new(env!("CARGO_BIN_EXE_mstc"))
        .args(["solve", &f])
        .env("MSTC_GLOBAL_TL", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn convert_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let src = write(
        dir.path(),
        "in.txt",
        "# comment\n4 4 2\n1 2 1.5\n2 3 2\n3 4 1\n1 4 7\n1 2\n3 4\n",
    );
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    assert_eq!(
        mstc(&["convert", &src, a.to_str().unwrap()]).status.code(),
        Some(0)
    );
    assert_eq!(
        mstc(&["convert", a.to_str().unwrap(), b.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let (ta, tb) = (
        std::fs::read_to_string(&a).unwrap(),
        std::fs::read_to_string(&b).unwrap(),
    );
    assert_eq!(ta, tb);
    assert!(ta.starts_with("4 4 2\n"));
}

#[test]
fn lp_and_milp_exports() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "tri.txt", TRIANGLE);
    let lp = mstc(&["lp-dump", &f]);
    assert_eq!(lp.status.code(), Some(0));
    let text = String::from_utf8(lp.stdout).unwrap();
    assert!(text.contains("Minimize") && text.trim_end().ends_with("End"));

    let out = dir.path().join("m.lp");
    assert_eq!(
        mstc(&["milp-export", &f, "--out", out.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.contains("Binaries"));
}

#[test]
fn bench_writes_csv_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst");
    std::fs::create_dir(&inst).unwrap();
    write(&inst, "tri.txt", TRIANGLE);
    write(&inst, "broken.txt", "2 1 0\n1 1 4\n");
    let refs = write(dir.path(), "ref.csv", "id,ub\ntri,3\n");
    let table = dir.path().join("table.txt");
    let out = mstc(&[
        "bench",
        inst.to_str().unwrap(),
        "--seeds",
        "2",
        "--ref",
        &refs,
        "--table",
        table.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "id,n,m,C,seed,ub,ub_time_s,total_time_s,gap_pct,status"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("broken,") && lines[1].contains("error"));
    assert!(lines[3].starts_with("tri,3,3,1,1,3,") && lines[3].ends_with(",0.00,feasible"));
    let table = std::fs::read_to_string(table).unwrap();
    assert!(table.contains("%best"));
}
