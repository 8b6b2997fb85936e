use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use netseg::io::{read_result, read_sequence};
use netseg::{full_mdl, Error};

fn netseg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netseg")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = netseg(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_detect_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&["generate", "--setting", "1", "--nodes", "80-90", "--seed", "3", "--out", path(&data)]);
    assert!(data.join("truth.txt").exists() && data.join("spec.json").exists());

    let snaps = data.join("snapshots");
    let first = dir.path().join("a.json");
    let second = dir.path().join("b.json");
    ok(&["detect", "--input", path(&snaps), "--seed", "9", "--out", path(&first)]);
    ok(&["detect", "--input", path(&snaps), "--seed", "9", "--out", path(&second)]);
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());

    let seq = read_sequence(&snaps).unwrap();
    let result = read_result(&first).unwrap();
    let s = result.segmentation(&seq).unwrap();
    assert!((full_mdl(&seq, &s, &result.config.mdl).unwrap() - result.mdl).abs() < 1e-6);

    let report = dir.path().join("report");
    ok(&["eval", "--truth", path(&data.join("truth.txt")), "--result", path(&first), "--result", path(&second), "--out", path(&report)]);
    let freq = fs::read_to_string(report.join("frequency.csv")).unwrap();
    assert_eq!(freq.lines().count(), seq.len() + 1);
    assert_eq!(result.change_points, vec![6, 14, 17, 23, 29]);
    let nmi = fs::read_to_string(report.join("nmi.csv")).unwrap();
    assert!(nmi.starts_with("result,nmi") && nmi.contains("overall,1.000000"), "{nmi}");
}

#[test]
fn generate_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&["generate", "--setting", "2", "--nodes", "20-25", "--seed", "5", "--out", path(out)]);
    }
    assert_eq!(fs::read(a.join("truth.txt")).unwrap(), fs::read(b.join("truth.txt")).unwrap());
    let names: Vec<_> = fs::read_dir(a.join("snapshots")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 30);
    for name in names {
        let x = fs::read(a.join("snapshots").join(&name)).unwrap();
        let y = fs::read(b.join("snapshots").join(&name)).unwrap();
        assert_eq!(x, y, "{name:?}");
    }
}

#[test]
fn one_snapshot_detects_no_change_points() {
    let dir = tempfile::tempdir().unwrap();
    let snaps = dir.path().join("snaps");
    fs::create_dir(&snaps).unwrap();
    fs::write(snaps.join("t001.tsv"), "a\tb\nb\tc\nc\ta\nc\td\n").unwrap();
    let out = dir.path().join("r.json");
    ok(&["detect", "--input", path(&snaps), "--out", path(&out)]);
    let r = read_result(&out).unwrap();
    assert!(r.change_points.is_empty());
    assert_eq!(r.segments.len(), 1);
}

#[test]
fn eval_of_the_truth_against_itself_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let snaps = dir.path().join("snaps");
    fs::create_dir(&snaps).unwrap();
    let cliques = "a\tb\na\tc\nb\tc\nd\te\nd\tf\ne\tf\n";
    fs::write(snaps.join("t001.tsv"), cliques).unwrap();
    fs::write(snaps.join("t002.tsv"), cliques).unwrap();
    let out = dir.path().join("r.json");
    ok(&["detect", "--input", path(&snaps), "--out", path(&out)]);
    let r = read_result(&out).unwrap();

    let truth = dir.path().join("truth.txt");
    let mut text = String::from("tau:\nsegment 1:");
    for (label, k) in &r.labeled_partitions()[0] {
        text.push_str(&format!(" {label}={k}"));
    }
    text.push('\n');
    fs::write(&truth, text).unwrap();
    let stdout = ok(&["eval", "--truth", path(&truth), "--result", path(&out)]).stdout;
    let stdout = String::from_utf8(stdout).unwrap();
    assert!(stdout.contains("overall,1.000000"), "{stdout}");
}

#[test]
fn simulate_writes_three_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    ok(&["simulate", "--setting", "1", "--nodes", "30-32", "--trials", "2", "--seed", "1", "--out", path(&out)]);
    let trials = fs::read_to_string(out.join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 3);
    let nmi = fs::read_to_string(out.join("nmi.csv")).unwrap();
    assert!(nmi.lines().last().unwrap().starts_with("mean,"));
    assert_eq!(fs::read_to_string(out.join("frequency.csv")).unwrap().lines().count(), 31);
}

#[test]
fn exit_codes_follow_error_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");

    // Bad configuration.
    assert_eq!(netseg(&["simulate", "--setting", "9", "--seed", "1", "--out", path(&out)]).status.code(), Some(2));
    assert_eq!(netseg(&["simulate", "--setting", "1", "--trials", "0", "--seed", "1", "--out", path(&out)]).status.code(), Some(2));
    assert_eq!(netseg(&["generate", "--setting", "1", "--out", path(&out)]).status.code(), Some(2));
    assert_eq!(netseg(&["detect", "--input", "/nonexistent/snaps", "--out", path(&out)]).status.code(), Some(2));

    // Bad data.
    let snaps = dir.path().join("snaps");
    fs::create_dir(&snaps).unwrap();
    fs::write(snaps.join("t001.tsv"), "a\ta\n").unwrap();
    let run = netseg(&["detect", "--input", path(&snaps), "--out", path(&out)]);
    assert_eq!(run.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&run.stderr).starts_with("error: "));

    // Internal invariant violations have their own status.
    assert_eq!(Error::Invariant("x".into()).exit_code(), 4);
}
