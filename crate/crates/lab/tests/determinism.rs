mod common;

use common::{config, dir_contents, LINEAR, NONLINEAR, TOY};
use vlasov_core::exec::Serial;
use vlasov_lab::harness::{output_dir, run};
use vlasov_lab::{RayonExecutor, OUTPUT_DIR_VAR};

fn assert_reproducible(text: &str) {
    let cfg = config(text);
    let tmp = tempfile::tempdir().unwrap();
    let dirs = [
        tmp.path().join("a"),
        tmp.path().join("b"),
        tmp.path().join("c"),
    ];
    run(&cfg, &dirs[0], &Serial).unwrap();
    run(&cfg, &dirs[1], &Serial).unwrap();
    run(&cfg, &dirs[2], &RayonExecutor::new(3).unwrap()).unwrap();
    let first = dir_contents(&dirs[0]);
    assert!(first.len() >= 3);
    assert_eq!(first, dir_contents(&dirs[1]), "rerun differs");
    assert_eq!(first, dir_contents(&dirs[2]), "thread count changes output");
}

#[test]
fn toy_runs_are_byte_identical() {
    assert_reproducible(TOY);
}

#[test]
fn linear_runs_are_byte_identical() {
    assert_reproducible(LINEAR);
}

#[test]
fn nonlinear_runs_are_byte_identical() {
    assert_reproducible(NONLINEAR);
}

#[test]
fn output_dir_follows_config_then_environment() {
    let mut cfg = config(TOY);
    let default = output_dir(&cfg);
    assert!(default.starts_with("runs"));
    assert!(default.to_string_lossy().contains(&cfg.hash()[..12]));
    cfg.output_dir = Some("elsewhere".into());
    assert_eq!(output_dir(&cfg), std::path::PathBuf::from("elsewhere"));
    // the only test in this binary touching the variable
    std::env::set_var(OUTPUT_DIR_VAR, "override");
    let dir = output_dir(&cfg);
    std::env::remove_var(OUTPUT_DIR_VAR);
    assert_eq!(dir, std::path::PathBuf::from("override"));
}

#[test]
fn hash_ignores_format_and_output_dir() {
    let a = config(TOY);
    let json = serde_json::to_string(&a).unwrap();
    let mut b = vlasov_lab::ExperimentConfig::from_json(&json).unwrap();
    b.output_dir = Some("x".into());
    assert_eq!(a.hash(), b.hash());
    let mut c = a.clone();
    c.seed += 1;
    assert_ne!(a.hash(), c.hash());
}
