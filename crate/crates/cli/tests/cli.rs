use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const CONFIG: &str = "\
omega1 = 50
omega2 = 50
g1_re = 0.5
g2_im = 0.5
d = 5
n1_max = 8
n2_max = 8
samples = 5
r_final = 0.2
scenario = effective
";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dressed-squeeze"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run_config(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "a.conf",
        &CONFIG.replace("scenario = effective", "scenario = interaction"),
    );
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert_eq!(run_config(&cfg, &a, &[]).status.code(), Some(0));
    assert_eq!(run_config(&cfg, &b, &[]).status.code(), Some(0));
    let (a, b) = (fs::read(a).unwrap(), fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn stdout_is_used_without_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.conf", CONFIG);
    let out = run(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,n1,n2,re_a1a2,im_a1a2,M_fixed,M_min,"));
    assert_eq!(text.lines().count(), 6);
    assert!(String::from_utf8(out.stderr).unwrap().contains("min_M_min"));
}

#[test]
fn scenario_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.conf", CONFIG);
    let out = dir.path().join("o.csv");
    let res = run_config(&cfg, &out, &["--scenario", "full"]);
    assert_eq!(res.status.code(), Some(0));
    assert!(String::from_utf8(res.stderr).unwrap().contains("scenario = full"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.csv");
    let bad = write_config(dir.path(), "bad.conf", &format!("{CONFIG}colour = blue\n"));
    let res = run_config(&bad, &out, &[]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8(res.stderr).unwrap().contains("line 11"));

    let zero = write_config(dir.path(), "zero.conf", &CONFIG.replace("n1_max = 8", "n1_max = 0"));
    assert_eq!(run_config(&zero, &out, &[]).status.code(), Some(2));
    let good = write_config(dir.path(), "good.conf", CONFIG);
    assert_eq!(run_config(&good, &out, &["--scenario", "sweep"]).status.code(), Some(2));
    assert_eq!(
        run_config(&dir.path().join("missing.conf"), &out, &[]).status.code(),
        Some(2)
    );
}

#[test]
fn truncation_guard_exits_with_three_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "t.conf",
        &CONFIG
            .replace("n1_max = 8\nn2_max = 8", "n1_max = 3\nn2_max = 3")
            .replace("r_final = 0.2", "r_final = 1.5"),
    );
    let out = dir.path().join("o.csv");
    assert_eq!(run_config(&cfg, &out, &[]).status.code(), Some(3));
    assert_eq!(fs::read_to_string(out).unwrap().lines().count(), 6);
}

#[test]
fn numerical_failure_exits_with_four() {
    // A zero drive leaves no dressed basis to start from.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "z.conf",
        &CONFIG
            .replace("omega1 = 50\nomega2 = 50", "omega1 = 0\nomega2 = 0")
            .replace("r_final = 0.2", "t_final = 1"),
    );
    assert_eq!(run_config(&cfg, &dir.path().join("o.csv"), &[]).status.code(), Some(4));
}
