use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_schreier"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    if let Some(s) = stdin {
        child.stdin.take().unwrap().write_all(s.as_bytes()).unwrap();
    }
    drop(child.stdin.take());
    child.wait_with_output().unwrap()
}

fn report(args: &[&str], stdin: Option<&str>) -> Value {
    let out = run(args, stdin);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    serde_json::from_str(text.trim()).unwrap()
}

#[test]
fn build_then_analyze_petersen() {
    let out = run(&["build", "petersen"], None);
    let graph = String::from_utf8(out.stdout).unwrap();
    let r = report(&["analyze", "-"], Some(&graph));
    assert_eq!(r["transitive"], true);
    assert_eq!(r["x_transitive"], false);
    assert_eq!(r["x_orbit_blocks"].as_array().unwrap().len(), 2);
    assert_eq!(r["radius_limited"], false);
}

#[test]
fn analyze_window_reports_failing_letter() {
    let r = report(&["analyze", "@fig2", "--window", "12"], None);
    assert_eq!(r["failing_letters"], serde_json::json!(["x^-1"]));
    assert_eq!(r["radius_limited"], true);
}

#[test]
fn iso_reports_a_length_isomorphism() {
    let r = report(&["iso", "@an:7", "@circulant:7:1,2"], None);
    assert_eq!(r["iso"], true);
    let r = report(&["iso", "@petersen", "@petersen", "--radius", "3"], None);
    assert_eq!(r["gamma"]["properties_hold"], true);
}

#[test]
fn cover_reports_qi_constants() {
    let r = report(&["cover", "fig4", "--window", "8"], None);
    assert_eq!(r["found"], true);
    assert_eq!(r["degree"], 2);
    assert_eq!(r["qi"]["A"], 1);
    assert_eq!(r["qi"]["B"], r["max_fiber_diameter"]);
    let r = report(&["cover", "@petersen", "@fig2"], None);
    assert_eq!(r["found"], false);
}

#[test]
fn ends_of_fig3() {
    assert_eq!(report(&["ends", "fig3"], None)["ends"], 4);
    assert_eq!(report(&["ends", "fig3-base"], None)["ends"], 2);
}

#[test]
fn schreierize_verdicts_exit_zero() {
    let r = report(&["schreierize", "-"], Some(r#"{"vertices":2,"edges":[[0,1],[0,1],[0,1]]}"#));
    assert_eq!(r["schreier"], true);
    let r = report(&["schreierize", "-"], Some(r#"{"vertices":3,"edges":[[0,1],[1,2]]}"#));
    assert_eq!(r["schreier"], false);
}

#[test]
fn export_dot() {
    let out = run(&["export", "--format", "dot", "@petersen"], None);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("digraph"));
}

#[test]
fn input_errors_exit_nonzero() {
    assert!(!run(&["build", "nope"], None).status.success());
    assert!(!run(&["analyze", "-"], Some("not json")).status.success());
    assert!(!run(&["analyze", "@petersen", "--max-vertices", "5"], None).status.success());
    assert!(!run(&["schreierize", "-"], Some(r#"{"vertices":1,"edges":[[0,3]]}"#)).status.success());
}
