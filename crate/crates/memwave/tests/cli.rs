//! End-to-end checks of the `memwave` binary: catalog listing, config
//! validation, determinism of numeric outputs, and exit codes.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_memwave"))
}

const SIMULATE_CONFIG: &str = "
[experiment]
kind = simulate
seed = 11

[domain]
kind = interval
length = 3.141592653589793
n_max = 4
gamma = both

[grid]
t_end = 1.0
n_steps = 400

[kernel]
kind = exponential
amplitude = 1.0
rate = 1.0

[problem]
alpha = 0.1
source = maccamy

[simulate]
initial = 1.0, 0.5
field_points = 11
time_stride = 100

[output]
dir = out
";

#[test]
fn list_prints_the_catalog() {
    let out = bin().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "appendix-identities",
        "maccamy-equivalence",
        "direct-inequality-memory",
        "perp-probe-sweep",
    ] {
        assert!(text.contains(name), "missing {name} in:\n{text}");
    }
}

#[test]
fn malformed_config_exits_nonzero_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, SIMULATE_CONFIG.replace("t_end = 1.0", "t_end = -1.0")).unwrap();
    let out_dir = dir.path().join("results");
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("t_end"), "stderr: {stderr}");
    assert!(!out_dir.exists(), "no partial outputs on config errors");
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().to_string();
                files.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.cfg");
    std::fs::write(&cfg, SIMULATE_CONFIG).unwrap();
    for outname in ["a", "b"] {
        let status = bin()
            .arg("run")
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join(outname))
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = read_all(&dir.path().join("a"));
    let b = read_all(&dir.path().join("b"));
    assert_eq!(a.len(), b.len());
    for ((name_a, bytes_a), (name_b, bytes_b)) in a.iter().zip(&b) {
        assert_eq!(name_a, name_b);
        assert_eq!(bytes_a, bytes_b, "{name_a} differs between reruns");
    }
    // The run actually produced the documented artifacts.
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    for expected in ["report.txt", "report.json", "field.csv", "trace.csv", "eigen.csv"] {
        assert!(names.contains(&expected), "missing {expected}: {names:?}");
    }
}

#[test]
fn check_single_experiment_reports_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("check")
        .arg("deflation-identity")
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS deflation-identity"));
    assert!(dir
        .path()
        .join("deflation-identity")
        .join("report.json")
        .exists());
}

#[test]
fn check_unknown_experiment_fails() {
    let out = bin().arg("check").arg("no-such-thing").output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("no-such-thing"));
}

#[test]
fn failed_assertion_under_check_exits_nonzero() {
    // An identity check with an impossible tolerance must fail the run
    // when --check is set, and still write the report.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.cfg");
    let text = SIMULATE_CONFIG
        .replace("kind = simulate", "kind = identities")
        .replace("dir = out", "dir = out\ntolerance = 1e-30");
    std::fs::write(&cfg, text).unwrap();
    let out_dir = dir.path().join("tight-out");
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .arg("--check")
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("FAIL"), "{stdout}");
    assert!(out_dir.join("report.json").exists());

    // Without --check the same run reports but exits zero.
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn steer_config_runs_and_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("steer.cfg");
    let text = SIMULATE_CONFIG
        .replace("kind = simulate", "kind = steer")
        .replace("n_max = 4", "n_max = 8")
        .replace("kind = exponential", "kind = zero")
        .replace("source = maccamy", "source = direct")
        + "
[steer]
initial = 1.0
target = 0, 1.0
n_modes = 4
";
    std::fs::write(&cfg, text).unwrap();
    let out_dir = dir.path().join("steer-out");
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .arg("--check")
        .output()
        .unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{stdout}");
    assert!(out_dir.join("control.csv").exists());
    assert!(out_dir.join("gram_spectrum.csv").exists());
    assert!(out_dir.join("report.json").exists());
}
