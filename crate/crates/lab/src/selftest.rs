//! Quick invariant suites, one small run per experiment family.

use vlasov_core::exec::Executor;
use vlasov_core::geometry::build_bolza;

use crate::config::ExperimentConfig;
use crate::harness::simulate;
use crate::report::{CheckKind, CheckResult};
use crate::HarnessError;

const LINEAR: &str = r#"
kind = "linear-mixing"
seed = 1
particles = 2000
t_end = 2.0
record_every = 0.25
initial = { r_band = [0.5, 2.0], speed = { kind = "fixed", r = 1.0 }, background = 1.0, bumps = [
    { center = { re = 0.0, im = 0.0 }, direction = 0.0, spatial_width = 0.7, amplitude = 5.0 },
] }
observable = { bump = { center = { re = 0.0, im = 0.0 }, direction = 0.0, spatial_width = 0.7, amplitude = 1.0 } }
"#;

const NONLINEAR: &str = r#"
kind = "nonlinear-damping"
seed = 2
particles = 300
dt = 0.1
t_end = 1.0
record_every = 0.1
kernel = { amplitude = 1.0 }
initial = { r_band = [0.7, 1.4285714285714286], speed = { kind = "smooth" }, normalization = 0.1, bumps = [
    { center = { re = 0.0, im = 0.0 }, direction = 0.0, spatial_width = 0.5, angular_width = 0.5, amplitude = 4.0 },
] }
nonlinear = { bins = { lo = 0.7, hi = 1.4285714285714286, count = 4, ramp = 0.05 }, zero_mean_samples = 1024 }
"#;

const TOY: &str = r#"
kind = "toy-coupled"
seed = 3
[toy]
n = 64
epsilon = 1.0
steps = 8
phi = [{ k = [1, 2], amplitude = 1.0 }]
stream = [{ k = [1, 0], amplitude = 0.05 }, { k = [0, 1], amplitude = 0.05, phase = 0.7 }]
initial = { kind = "noise", mean = 1.0, amplitude = 1.0 }
"#;

/// Geometry checks plus the invariant checks of one small run of each kind,
/// named `<suite>/<check>`.
pub fn selftest<E: Executor>(exec: &E) -> Result<Vec<CheckResult>, HarnessError> {
    let surface = build_bolza().map_err(|e| HarnessError::Config(e.to_string()))?;
    let area = 4.0 * std::f64::consts::PI;
    let mut out = vec![
        invariant("geometry/relator", surface.relator_residual(), 1e-9),
        invariant(
            "geometry/area",
            (surface.area_by_quadrature(16) - area).abs() / area,
            5e-3,
        ),
    ];
    for (suite, text) in [("linear", LINEAR), ("nonlinear", NONLINEAR), ("toy", TOY)] {
        let cfg = ExperimentConfig::from_toml(text)?;
        let report = simulate(&cfg, exec)?.report;
        let stopped = if report.failure.is_some() { 1.0 } else { 0.0 };
        out.push(invariant(&format!("{suite}/completed"), stopped, 0.0));
        for c in report
            .checks
            .into_iter()
            .filter(|c| c.kind == CheckKind::Invariant)
        {
            out.push(CheckResult {
                name: format!("{suite}/{}", c.name),
                ..c
            });
        }
    }
    Ok(out)
}

fn invariant(name: &str, residual: f64, tolerance: f64) -> CheckResult {
    CheckResult {
        name: name.into(),
        kind: CheckKind::Invariant,
        passed: residual <= tolerance,
        residual,
        tolerance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use vlasov_core::exec::Serial;

    #[test]
    fn suites_pass() {
        let checks = selftest(&Serial).unwrap();
        for c in &checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(checks.iter().any(|c| c.name == "nonlinear/energy-drift"));
        assert!(checks.iter().any(|c| c.name == "toy/mean-conservation"));
    }
}
