//! End-to-end checks of the command-line surface: subcommands, exit codes,
//! and deterministic output.

use std::path::Path;
use std::process::{Command, Output};

fn steiner(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steiner"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

const TINY: &str = "33D32945 STP File, STP Format Version 1.0\n\
SECTION Graph\nNodes 3\nEdges 2\nE 1 2 2\nE 2 3 3\nEND\n\
SECTION Terminals\nTerminals 2\nT 1\nT 3\nEND\nEOF\n";

const SPLIT: &str = "SECTION Graph\nNodes 4\nEdges 2\nE 1 2 1\nE 3 4 1\nEND\n\
SECTION Terminals\nTerminals 2\nT 1\nT 3\nEND\nEOF\n";

#[test]
fn solve_reports_the_optimum() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tiny.stp"), TINY).unwrap();
    let out = steiner(&["solve", "tiny.stp", "--algo", "rbc", "--report", "csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let row = stdout.lines().nth(1).unwrap();
    assert!(row.starts_with("tiny,rbc,"), "{row}");
    assert!(row.contains(",ok,5,"), "{row}");
}

#[test]
fn zero_timeout_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tiny.stp"), TINY).unwrap();
    let out = steiner(&["solve", "tiny.stp", "--timeout", "0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn infeasible_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("split.stp"), SPLIT).unwrap();
    let out = steiner(&["solve", "split.stp"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn parse_and_usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("broken.stp"), "SECTION Graph\nNodes x\n").unwrap();
    let out = steiner(&["solve", "broken.stp"], dir.path());
    assert_eq!(out.status.code(), Some(1));

    let out = steiner(&["solve", "missing.stp"], dir.path());
    assert_eq!(out.status.code(), Some(1));

    let out = steiner(&["solve"], dir.path());
    assert_eq!(out.status.code(), Some(1));

    let out = steiner(&["solve", "broken.stp", "--algo", "nope"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gen_is_deterministic_and_solvable() {
    let dir = tempfile::tempdir().unwrap();
    let mut plain = String::from("c ring with a chord\np edge 8 9\n");
    for i in 1..=8u32 {
        let j = if i == 8 { 1 } else { i + 1 };
        plain.push_str(&format!("e {i} {j}\n"));
    }
    plain.push_str("e 1 5\n");
    std::fs::write(dir.path().join("ring.gr"), plain).unwrap();

    let args = ["gen", "ring.gr", "--weights", "1:10", "--terminals", "0.4", "--seed", "7"];
    let first = steiner(&args, dir.path());
    let second = steiner(&args, dir.path());
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout, "same seed, same bytes");

    let other_seed = steiner(
        &["gen", "ring.gr", "--weights", "1:10", "--terminals", "0.4", "--seed", "8"],
        dir.path(),
    );
    assert_ne!(first.stdout, other_seed.stdout);

    std::fs::write(dir.path().join("ring.stp"), &first.stdout).unwrap();
    let solved = steiner(&["compare", "ring.stp", "--report", "json"], dir.path());
    assert!(solved.status.success());
    let text = String::from_utf8(solved.stdout).unwrap();
    assert!(text.contains("\"Optimum\""), "{text}");
}

#[test]
fn validate_td_passes_and_exports() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tiny.stp"), TINY).unwrap();
    let out = steiner(
        &["validate-td", "tiny.stp", "--export", "td.txt"],
        dir.path(),
    );
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("ok"), "{stdout}");
    let exported = std::fs::read_to_string(dir.path().join("td.txt")).unwrap();
    assert!(exported.contains("bag 0:"), "{exported}");
}

#[test]
fn compare_csv_is_deterministic_outside_timings() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tiny.stp"), TINY).unwrap();
    let args = ["compare", "tiny.stp", "--report", "csv"];
    let a = steiner(&args, dir.path());
    let b = steiner(&args, dir.path());
    assert!(a.status.success() && b.status.success());
    let strip = |bytes: &[u8]| {
        let text = String::from_utf8(bytes.to_vec()).unwrap();
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        let keep: Vec<usize> = header
            .iter()
            .enumerate()
            .filter(|(_, h)| !h.ends_with("_ms"))
            .map(|(i, _)| i)
            .collect();
        let mut out = Vec::new();
        for line in std::iter::once(header.join(",")).chain(lines.map(str::to_string)) {
            let cells: Vec<&str> = line.split(',').collect();
            let kept: Vec<&str> = keep.iter().map(|&i| cells[i]).collect();
            out.push(kept.join(","));
        }
        out.join("\n")
    };
    assert_eq!(strip(&a.stdout), strip(&b.stdout));
}
