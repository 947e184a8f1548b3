use serde_json::Value;
use std::process::Command;

fn wildadlv(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_wildadlv"))
        .args(args)
        .env("WILDADLV_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn strip_elapsed(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("elapsed_ms");
            m.values_mut().for_each(strip_elapsed);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_elapsed),
        _ => {}
    }
}

#[test]
fn usage_errors_name_the_constraint() {
    let out = wildadlv(&["verify", "--f", "1", "--d", "2", "--n", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("d must be odd"));
    let out = wildadlv(&["verify", "--f", "1", "--d", "3", "--n", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2n > d required"));
    let out = wildadlv(&["verify", "--suite", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_report_is_deterministic() {
    let run = || {
        let out = wildadlv(&[
            "verify", "--f", "1", "--d", "1", "--n", "1", "--seed", "7", "--json", "-",
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let mut v: Value = serde_json::from_slice(&out.stdout).unwrap();
        strip_elapsed(&mut v);
        v
    };
    let a = run();
    assert_eq!(a, run());
    assert_eq!(a["pass"], Value::Bool(true));
    let names: Vec<&str> = a["suites"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["tower", "groups", "points", "traces", "theorem"]);
    let check = &a["suites"][0]["checks"][0];
    for key in ["name", "anchor", "status", "expected", "actual"] {
        assert!(check.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn enumerate_and_theorem_commands() {
    let out = wildadlv(&["enumerate", "--limit", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().count(), 5);
    assert!(text
        .lines()
        .all(|l| l.starts_with("a=") && l.contains(" C=")));

    let out = wildadlv(&["theorem", "--exhaustive", "--json", "-"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], Value::Bool(true));
    assert_eq!(v["elements"], 128);

    let out = wildadlv(&["traces", "--theta", "1", "--g-samples", "5", "--json", "-"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
}
