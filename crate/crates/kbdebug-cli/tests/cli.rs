use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use kbdebug::logic::Dpi;
use kbdebug::session::{start_session, submit_answer, Reply, SessionConfig};

fn fixture(name: &str) -> &'static str {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR")).leak()
}

fn debug(args: &[&str], stdin: &str, envs: &[(&str, &str)]) -> (bool, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_debug"));
    cmd.args(args).env_remove("KBDEBUG_SERVER").env_remove("KBDEBUG_DATA_DIR");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let mut child = cmd.stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    (out.status.success(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn path(p: &PathBuf) -> &str {
    p.to_str().unwrap()
}

#[test]
fn two_no_answers_on_example1() {
    let (ok, out, err) = debug(&["interactive", "--dpi", fixture("example1.json")], "n\nn\n", &[]);
    assert!(ok, "{err}");
    assert!(out.contains("    C(w)\n"));
    assert!(out.contains("status: converged"));
    assert!(out.contains("diagnosis: [1]\n  remove 1: A sub B"));
}

#[test]
fn end_of_input_aborts() {
    let (ok, out, _) = debug(&["interactive", "--dpi", fixture("example1.json")], "", &[]);
    assert!(ok);
    assert!(out.contains("status: aborted"));
    assert!(!out.contains("diagnosis:"));
}

#[test]
fn skip_then_answers() {
    let (ok, out, _) = debug(&["interactive", "--dpi", fixture("example1.json")], "s\nmaybe\nn\nn\nn\n", &[]);
    assert!(ok);
    assert!(out.contains("expected y, n or s, got 'maybe'"));
    assert!(out.contains("query 2:"));
    assert!(out.contains("status: converged"));
}

#[test]
fn snapshot_is_byte_identical_to_a_library_run() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("snap.json");
    let data = dir.path().join("data");
    let args = [
        "interactive",
        "--dpi",
        fixture("example2.json"),
        "--faults",
        fixture("example2.faults.json"),
        "--snapshot",
        snap.to_str().unwrap(),
    ];
    let (ok, _, err) = debug(&args, "y\ns\ny\nn\ny\n", &[("KBDEBUG_DATA_DIR", data.to_str().unwrap())]);
    assert!(ok, "{err}");

    let model = serde_json::from_str(&std::fs::read_to_string(fixture("example2.faults.json")).unwrap()).unwrap();
    let dpi = Dpi::from_json(&std::fs::read_to_string(fixture("example2.json")).unwrap()).unwrap();
    let mut state = start_session(dpi, SessionConfig { fault_model: model, ..SessionConfig::default() }).unwrap();
    for r in [Reply::Yes, Reply::Skip, Reply::Yes, Reply::No, Reply::Yes] {
        if submit_answer(&mut state, r).is_err() {
            break;
        }
    }
    let expected = serde_json::to_string_pretty(&state).unwrap() + "\n";
    assert_eq!(std::fs::read_to_string(&snap).unwrap(), expected);
    // the embedded server kept its record in the data directory
    assert_eq!(std::fs::read_dir(&data).unwrap().count(), 1);
}

fn csv_rows(file: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(file).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn batch_on_the_rio_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.csv");
    let rio = fixture("rio.json");
    let faults = fixture("rio.faults.json");
    for (target, strategies, expected) in [
        ("rio.target-d2.json", "ent,spl", vec![("ent", "4"), ("spl", "3")]),
        ("rio.target-d6.json", "ent", vec![("ent", "2")]),
    ] {
        let t = fixture(target);
        let args = ["batch", "--dpi", rio, "--faults", faults, "--target", t, "--strategy", strategies, "--sigma", "1", "--out", path(&out)];
        let (ok, _, err) = debug(&args, "", &[]);
        assert!(ok, "{err}");
        let rows = csv_rows(&out);
        let got: Vec<(&str, &str)> = rows.iter().map(|r| (r[0].as_str(), r[2].as_str())).collect();
        assert_eq!(got, expected);
        assert!(rows.iter().all(|r| r[4] == "converged" && r[1] == r[3]));
    }
}

#[test]
fn batch_example2_static_mode() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.csv");
    let args = [
        "batch",
        "--dpi",
        fixture("example2.json"),
        "--faults",
        fixture("example2.faults.json"),
        "--target",
        fixture("example2.target-d4.json"),
        "--sigma",
        "0.95",
        "--mode",
        "static",
        "--out",
        path(&out),
    ];
    let (ok, stdout, err) = debug(&args, "", &[]);
    assert!(ok, "{err}");
    assert!(stdout.contains("ent: runs 1 min 2 avg 2.00 max 2"), "{stdout}");
    assert_eq!(csv_rows(&out)[0][..4], ["ent", "2 4", "2", "2 4"]);
}

#[test]
fn batch_reports_a_bad_target_per_row() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("targets.json");
    std::fs::write(&t, "[[1], [1, 2]]").unwrap();
    let out = dir.path().join("report.csv");
    let args = ["batch", "--dpi", fixture("example1.json"), "--target", t.to_str().unwrap(), "--strategy", "rnd", "--seed", "42", "--out", path(&out)];
    let (ok, _, err) = debug(&args, "", &[]);
    assert!(ok, "{err}");
    let rows = csv_rows(&out);
    assert_eq!(rows[0][0], "rnd");
    assert_eq!(rows[0][3], "1");
    assert!(rows[1][6].contains("not a minimal diagnosis"));
}

#[test]
fn solve_against_an_external_server() {
    let dir = tempfile::tempdir().unwrap();
    let addr = kbdebug_service::spawn_background(dir.path()).unwrap();
    let url = format!("http://{addr}");
    let args = ["solve", "--dpi", fixture("example2.json"), "--faults", fixture("example2.faults.json"), "--n", "2"];
    let (ok, out, err) = debug(&args, "", &[("KBDEBUG_SERVER", &url)]);
    assert!(ok, "{err}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with(" 1. 0.6523  [3]"), "{out}");
    assert!(lines[1].contains("[2 4]"));
}

#[test]
fn bad_input_fails_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"kb": ["A sub B", "A sub (foo B)"]}"#).unwrap();
    let (ok, _, err) = debug(&["interactive", "--dpi", bad.to_str().unwrap()], "", &[]);
    assert!(!ok);
    assert!(err.contains("kb[1]: line 1"), "{err}");
}
