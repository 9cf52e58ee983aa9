use std::process::{Command, Output};

fn hardy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardy-cert"))
        .args(args)
        .env("HARDY_CERT_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn norm_table_ends_with_status() {
    let o = hardy(&["norm", "--N", "2", "--p", "2", "--method", "eigen"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("# norm\n"), "{s}");
    assert!(s.ends_with("status: ok\n"), "{s}");
    assert!(s.contains("1.1441228056353"), "{s}");
}

#[test]
fn csv_header_and_rows() {
    let o = hardy(&[
        "conditions",
        "--weights",
        "constant",
        "--condition",
        "cor14",
        "--p",
        "2",
        "--L",
        "1",
        "--N",
        "5",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let mut lines = s.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("command,"), "{header}");
    let width = header.split(',').count();
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    for r in rows {
        assert!(r.starts_with("conditions,"));
        assert_eq!(r.split(',').count(), width, "{r}");
    }
}

#[test]
fn jsonl_records_parse() {
    let o = hardy(&[
        "wirtinger",
        "--a",
        "1",
        "--b",
        "2",
        "--N",
        "20",
        "--format",
        "jsonl",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let recs: Vec<serde_json::Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let last = recs.last().unwrap();
    assert_eq!(last["record"], "summary");
    assert_eq!(last["ok"], true);
    assert_eq!(last["rows"].as_u64().unwrap() as usize, recs.len() - 1);
    assert!(recs[..recs.len() - 1].iter().all(|r| r["record"] == "row"));
}

#[test]
fn violated_condition_exits_one() {
    let o = hardy(&[
        "conditions",
        "--condition",
        "cor14",
        "--p",
        "1.01",
        "--L",
        "0.5",
        "--N",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("violated-at(1"));
}

#[test]
fn predicted_counterexamples_exit_zero() {
    let o = hardy(&["counterexample"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("[expected]"), "{s}");
    assert!(!s.contains("[failure]"), "{s}");
}

#[test]
fn bad_input_exits_two() {
    for args in [
        &["norm", "--weights", "power:-1.5"][..],
        &["norm", "--p", "abc"],
        &["norm", "--format", "xml"],
        &["norm", "--config", "/nonexistent/run.cfg"],
    ] {
        let o = hardy(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn config_error_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, "command = norm\n# comment\nN = 10\nbogus = 1\n").unwrap();
    let o = hardy(&["norm", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(
        &path,
        "command = norm\nN = 2\np = 2\nmethod = eigen\nformat = csv\n",
    )
    .unwrap();
    let base = hardy(&["norm", "--config", path.to_str().unwrap()]);
    let over = hardy(&["norm", "--config", path.to_str().unwrap(), "--N", "3"]);
    assert_eq!(base.status.code(), Some(0));
    assert_eq!(over.status.code(), Some(0));
    assert!(stdout(&base).contains(",2,"));
    assert!(stdout(&over).contains(",3,"));
}

#[test]
fn reruns_are_identical() {
    let args = [
        "carleman",
        "--weights",
        "power:0.5",
        "--N",
        "80",
        "--restarts",
        "5",
        "--seed",
        "3",
        "--format",
        "csv",
    ];
    let a = hardy(&args);
    let b = hardy(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let o = hardy(&[
        "certify",
        "--N",
        "200",
        "--p",
        "2",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("command,"));
}
