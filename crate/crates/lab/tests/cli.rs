mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{LINEAR, TOY};

fn lab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vlasov-lab"))
        .args(args)
        .current_dir(cwd)
        .env_remove(vlasov_lab::OUTPUT_DIR_VAR)
        .output()
        .expect("binary runs")
}

fn text(o: &Output) -> String {
    format!(
        "{}{}",
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    )
}

#[test]
fn selftest_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lab(&["selftest"], tmp.path());
    assert!(o.status.success(), "{}", text(&o));
    assert!(!text(&o).contains("FAIL"));
}

#[test]
fn simulate_fit_and_compare() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("toy.toml"), TOY).unwrap();
    std::fs::write(dir.join("linear.toml"), LINEAR).unwrap();

    let o = lab(&["simulate", "toy.toml", "--output", "toy"], dir);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    assert!(dir.join("toy/omega.csv").is_file());
    let o = lab(
        &[
            "--threads",
            "2",
            "simulate",
            "linear.toml",
            "--output",
            "lin",
        ],
        dir,
    );
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));

    let o = lab(
        &[
            "fit",
            "toy/omega.csv",
            "--model",
            "exponential",
            "--window",
            "0,12",
            "--column",
            "omega",
        ],
        dir,
    );
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let fit: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(fit["rate"].as_f64().is_some());

    let o = lab(
        &[
            "compare",
            "toy/report.json",
            "toy/report.json",
            "--relation",
            "rate ratio = 1 ± 0.01",
        ],
        dir,
    );
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let o = lab(
        &[
            "compare",
            "toy/report.json",
            "toy/report.json",
            "--relation",
            "rate ratio = 2 ± 0.01",
        ],
        dir,
    );
    assert_eq!(o.status.code(), Some(1), "{}", text(&o));
    let o = lab(
        &[
            "compare",
            "toy/report.json",
            "lin/report.json",
            "--relation",
            "rate ratio = 1 ± 0.1",
        ],
        dir,
    );
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));
}

#[test]
fn default_output_dir_and_environment_override() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("toy.toml"), TOY).unwrap();
    let o = lab(&["simulate", "toy.toml"], dir);
    assert!(o.status.success(), "{}", text(&o));
    let runs: Vec<_> = std::fs::read_dir(dir.join("runs")).unwrap().collect();
    assert_eq!(runs.len(), 1);

    let o = Command::new(env!("CARGO_BIN_EXE_vlasov-lab"))
        .args(["simulate", "toy.toml"])
        .current_dir(dir)
        .env(vlasov_lab::OUTPUT_DIR_VAR, "pinned")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", text(&o));
    assert!(dir.join("pinned/report.json").is_file());
}

#[test]
fn bad_input_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("bad.toml"), "kind = \"toy-coupled\"\nseed = 1\n").unwrap();
    let o = lab(&["simulate", "bad.toml"], dir);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o).contains("toy"), "{}", text(&o));
    let o = lab(&["simulate", "missing.toml"], dir);
    assert_eq!(o.status.code(), Some(2));
}
