//! Runs every example binary; `cargo test` builds them alongside the tests.

use std::path::PathBuf;
use std::process::Command;

fn example_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().join("examples")
}

fn run_example(name: &str) -> String {
    let path = example_dir().join(format!("{name}{}", std::env::consts::EXE_SUFFIX));
    let out = Command::new(&path)
        .output()
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(
        out.status.success(),
        "{name} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn flat_ces() {
    let out = run_example("flat_ces");
    assert!(out.contains("e(1, p)          = 0.8\n"));
    assert!(out.contains("konus((4,1) -> (1,4)) = 1\n"));
}

#[test]
fn armington_two_stage() {
    let out = run_example("armington_two_stage");
    assert!(out.contains("sector shares     [0.7, 0.3]"));
    assert!(out.contains("spent 100.000000000000"));
}

#[test]
fn cobb_douglas() {
    let out = run_example("cobb_douglas");
    assert!(out.contains("e(1, (1,1)) = 1.842022775037313"));
    assert!(out.contains("p = [10.0, 0.1]: shares [0.3, 0.7]"));
}

#[test]
fn inequalities() {
    let out = run_example("inequalities");
    assert_eq!(out.lines().count(), 8);
    assert!(!out.contains("relative gap -1"));
}

#[test]
fn oracle_check() {
    let out = run_example("oracle_check");
    assert_eq!(out.matches("violations 0").count(), 4);
}

#[test]
fn level_sets() {
    let out = run_example("level_sets");
    assert!(out.starts_with("x1,x2,r\n"));
    assert_eq!(out.lines().count(), 1 + 8 * 25);
}

#[test]
fn scenario_file() {
    let out = run_example("scenario_file");
    assert!(out.contains("3 goods, 2 nodes"));
    assert!(out.contains("rejected: "));
    assert!(out.contains("\"command\": \"index\""));
}
