use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.scenario"))
}

fn solovay(args: &[&str], env: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_solovay"));
    cmd.args(args).env_remove("SOLOVAY_OUT_DIR");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn listing(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    v.sort();
    v
}

#[test]
fn run_prints_report_and_exits_zero() {
    let path = scenario("least-degree");
    let out = solovay(&["run", path.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("local-from-beta"));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("elapsed "));
}

#[test]
fn csv_dir_flag_and_env_write_the_same_files() {
    let path = scenario("prop4-separation");
    let (flag, env) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let a = solovay(&["run", path.to_str().unwrap(), "--csv-dir", flag.path().to_str().unwrap()], &[]);
    let b = solovay(&["run", path.to_str().unwrap()], &[("SOLOVAY_OUT_DIR", env.path())]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let names = listing(flag.path());
    assert!(names.contains(&"prop4-separation.report.txt".to_string()));
    assert!(names.iter().any(|n| n.ends_with(".csv")));
    assert_eq!(names, listing(env.path()));
    for n in &names {
        assert_eq!(std::fs::read(flag.path().join(n)).unwrap(), std::fs::read(env.path().join(n)).unwrap(), "{n}");
    }
}

#[test]
fn depth_override_and_task_filter() {
    let path = scenario("least-degree");
    let out = solovay(&["run", path.to_str().unwrap(), "--depth", "6", "--task", "k-lipschitz"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("k-lipschitz") && !text.contains("local-from-beta"));
}

#[test]
fn check_and_errors() {
    let path = scenario("extraction");
    let out = solovay(&["check", path.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("extraction: "));

    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.scenario");
    assert_eq!(solovay(&["run", missing.to_str().unwrap()], &[]).status.code(), Some(3));
    assert_eq!(solovay(&["check", missing.to_str().unwrap()], &[]).status.code(), Some(3));

    let bad = dir.path().join("bad.scenario");
    std::fs::write(&bad, "[budget]\ndepth = many\n").unwrap();
    let out = solovay(&["run", bad.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 2"));
}
