mod common;

use common::{config, LINEAR, NONLINEAR, TOY};
use vlasov_core::exec::Serial;
use vlasov_core::observables::DecayModel;
use vlasov_lab::harness::{bisect_data_scale, simulate};
use vlasov_lab::report::CheckKind;
use vlasov_lab::{compare, HarnessError};

#[test]
fn linear_run_fits_one_exponential() {
    let out = simulate(&config(LINEAR), &Serial).unwrap();
    let r = &out.report;
    assert!(r.passed, "{}", r.summary());
    assert_eq!(r.fits.len(), 1);
    assert_eq!(r.fits[0].model, DecayModel::Exponential);
    assert_eq!(r.metrics["particles"], 3000.0);
    for name in [
        "mass-conservation",
        "speed-conservation",
        "reduction-idempotence",
    ] {
        let c = r
            .get_check(name)
            .unwrap_or_else(|| panic!("{name} missing"));
        assert_eq!(c.kind, CheckKind::Invariant);
        assert!(c.passed, "{name}");
    }
    // exact conservation under the free flow
    assert_eq!(r.get_check("mass-conservation").unwrap().residual, 0.0);
    assert_eq!(r.get_check("speed-conservation").unwrap().residual, 0.0);
}

#[test]
fn nonlinear_run_records_its_invariants() {
    let out = simulate(&config(NONLINEAR), &Serial).unwrap();
    let r = &out.report;
    assert!(r.failure.is_none(), "{}", r.summary());
    for name in [
        "mass-conservation",
        "energy-drift",
        "reduction-idempotence",
        "zero-mean",
    ] {
        let c = r
            .get_check(name)
            .unwrap_or_else(|| panic!("{name} missing"));
        assert!(c.passed, "{name}: {}", r.summary());
    }
    assert!(r.get_check("support-band").is_some());
    assert!(r.get_check("h-infinity-plateau").is_some());
    assert_eq!(r.metrics["steps_completed"], 10.0);
    let names: Vec<&str> = out.artifacts.iter().map(|a| a.name()).collect();
    for f in [
        "potential.csv",
        "radial.csv",
        "checkpoint.csv",
        "phi_grid.csv",
    ] {
        assert!(names.contains(&f), "{f}");
    }
    // the plateau table exists only when a plateau was found
    let plateau = r.get_check("h-infinity-plateau").unwrap().passed;
    assert_eq!(names.contains(&"h_infinity.csv"), plateau);
}

#[test]
fn null_section_capture_is_reported_with_its_step() {
    let text = NONLINEAR
        .replace("normalization = 0.1", "normalization = 40.0")
        .replace(
            "zero_mean_samples = 512",
            "zero_mean_samples = 512, r_floor = 0.6",
        )
        .replace("t_end = 1.0", "t_end = 4.0");
    let out = simulate(&config(&text), &Serial).unwrap();
    let f = out
        .report
        .failure
        .as_ref()
        .expect("the strong field drives speeds to the floor");
    assert_eq!(f.kind, "null-section capture");
    assert!(f.step.is_some() && f.particle.is_some());
    assert!(!out.report.passed);
}

#[test]
fn toy_run_conserves_its_mean() {
    let out = simulate(&config(TOY), &Serial).unwrap();
    let r = &out.report;
    assert!(r.passed, "{}", r.summary());
    assert!(r.get_check("mean-conservation").unwrap().residual <= 1e-12);
    let omega = out.artifacts[0].series("omega").unwrap();
    assert_eq!(omega.len(), 13);
}

#[test]
fn bisection_brackets_the_band_edge() {
    let mut cfg = config(NONLINEAR);
    cfg.outputs = Default::default();
    cfg.t_end = 0.4;
    let b = bisect_data_scale(&cfg, 0.05, 400.0, 3, &Serial).unwrap();
    assert!(b.probes.iter().any(|p| !p.in_band));
    assert!(b
        .probes
        .iter()
        .filter(|p| p.in_band)
        .all(|p| p.mass <= b.mass));
    assert!(b
        .probes
        .iter()
        .filter(|p| !p.in_band)
        .all(|p| p.mass > b.mass));
    assert!(matches!(
        bisect_data_scale(&config(TOY), 0.1, 1.0, 2, &Serial),
        Err(HarnessError::Config(_))
    ));
}

#[test]
fn compare_rejects_mismatched_kinds() {
    let a = simulate(&config(TOY), &Serial).unwrap().report;
    let b = simulate(&config(LINEAR), &Serial).unwrap().report;
    assert!(matches!(
        compare(&a, &b, "rate ratio = 1 ± 0.1"),
        Err(HarnessError::Incompatible(..))
    ));
    let v = compare(&a, &a, "rate ratio = 1 ± 1e-12").unwrap();
    assert!(v.passed);
    assert!(matches!(
        compare(&a, &a, "rate is nice"),
        Err(HarnessError::Relation(_))
    ));
}

#[test]
fn invalid_configs_are_rejected() {
    let broken = TOY.replace("steps = 12", "steps = 0");
    assert!(vlasov_lab::ExperimentConfig::from_toml(&broken)
        .unwrap()
        .validate()
        .is_err());
    assert!(vlasov_lab::ExperimentConfig::from_toml("kind = \"warp-drive\"\nseed = 1").is_err());
    assert!(vlasov_lab::ExperimentConfig::from_toml(&format!("{TOY}\nbogus = 1")).is_err());
}
