use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qlight(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlight")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn manifest(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_accepts_examples_and_rejects_fixtures() {
    for entry in fs::read_dir(manifest("examples/plans")).unwrap() {
        let path = entry.unwrap().path();
        let out = qlight(&["validate", s(&path)]);
        assert_eq!(code(&out), 0, "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
    }
    let mut n = 0;
    for entry in fs::read_dir(manifest("tests/fixtures/plans")).unwrap() {
        let path = entry.unwrap().path();
        let out = qlight(&["validate", s(&path)]);
        assert_eq!(code(&out), 2, "{}", path.display());
        assert!(String::from_utf8_lossy(&out.stderr).contains("line "), "{}", path.display());
        n += 1;
    }
    assert_eq!(n, 5);
}

#[test]
fn run_twice_gives_identical_reports() {
    let plan = manifest("examples/plans/delocalized_addition.toml");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(code(&qlight(&["run", s(&plan), "--out", s(a.path())])), 0);
    assert_eq!(code(&qlight(&["run", s(&plan), "--out", s(b.path())])), 0);
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 4);
    for name in names {
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap());
    }
}

#[test]
fn flags_override_seed_and_cutoff() {
    let plan = manifest("examples/plans/delocalized_addition.toml");
    let dir = tempfile::tempdir().unwrap();
    let out = qlight(&["run", s(&plan), "--out", s(dir.path()), "--seed", "77", "--cutoff", "18"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(report.starts_with("seed = 77\n"));
    assert!(report.contains("# cutoff = 18\n"));
}

#[test]
fn impossible_herald_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("vacuum.toml");
    fs::write(&plan, "[space]\nmodes = 1\ncutoff = 4\n\n[[stage]]\nop = \"subtract\"\nmode = 0\n").unwrap();
    let out = qlight(&["run", s(&plan), "--out", s(&dir.path().join("out"))]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn io_failures_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&qlight(&["validate", s(&dir.path().join("missing.toml"))])), 4);

    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let plan = manifest("examples/plans/kerr.toml");
    assert_eq!(code(&qlight(&["run", s(&plan), "--out", s(&blocker.join("out"))])), 4);
}

#[test]
fn oracles_are_listed_and_runnable() {
    let out = qlight(&["oracle", "list"]);
    assert_eq!(code(&out), 0);
    let names = String::from_utf8(out.stdout).unwrap();
    assert!(names.lines().any(|l| l == "epr"));
    let out = qlight(&["oracle", "wigner-anchors"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8(out.stdout).unwrap().contains("wigner-anchors.vacuum.origin = 3.18309886183790"));
    assert_eq!(code(&qlight(&["oracle", "nonsense"])), 2);
}
