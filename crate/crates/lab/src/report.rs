//! Run reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use vlasov_core::observables::{DecayFit, DecayModel};

use crate::config::ExperimentKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// Fails the run when violated.
    Invariant,
    /// Recorded for inspection only.
    Diagnostic,
}

/// One check: passes when `residual <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub kind: CheckKind,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedFit {
    /// Column of the series that was fitted.
    pub series: String,
    pub model: DecayModel,
    pub window: (f64, f64),
    pub fit: Option<DecayFit>,
    pub error: Option<String>,
}

/// Where and why the dynamics stopped early.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub kind: String,
    pub step: Option<usize>,
    pub time: Option<f64>,
    pub particle: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub kind: ExperimentKind,
    pub config_hash: String,
    pub passed: bool,
    /// Output files, relative to the output directory.
    pub files: Vec<String>,
    pub fits: Vec<NamedFit>,
    pub checks: Vec<CheckResult>,
    pub metrics: BTreeMap<String, f64>,
    pub failure: Option<RunFailure>,
    /// Kept out of the file so reruns stay byte-identical.
    #[serde(skip)]
    pub wall_time_s: f64,
}

/// JSON has no infinities; the largest finite value stands in for them.
fn finite(v: f64) -> f64 {
    if v.is_nan() {
        f64::MAX
    } else {
        v.clamp(-f64::MAX, f64::MAX)
    }
}

impl RunReport {
    pub fn new(kind: ExperimentKind, config_hash: String) -> Self {
        Self {
            kind,
            config_hash,
            passed: false,
            files: Vec::new(),
            fits: Vec::new(),
            checks: Vec::new(),
            metrics: BTreeMap::new(),
            failure: None,
            wall_time_s: 0.0,
        }
    }

    /// Records a check. Names must be unique within a report.
    pub fn check(&mut self, name: &str, kind: CheckKind, residual: f64, tolerance: f64) {
        debug_assert!(
            self.checks.iter().all(|c| c.name != name),
            "duplicate check {name}"
        );
        let passed = residual <= tolerance;
        self.checks.push(CheckResult {
            name: name.into(),
            kind,
            passed,
            residual: finite(residual),
            tolerance: finite(tolerance),
        });
    }

    /// Non-finite metrics are dropped.
    pub fn metric(&mut self, name: &str, value: f64) {
        if value.is_finite() {
            self.metrics.insert(name.into(), value);
        }
    }

    pub fn get_check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// The first successful fit.
    pub fn primary_fit(&self) -> Option<&DecayFit> {
        self.fits.iter().find_map(|f| f.fit.as_ref())
    }

    /// Sets `passed`: no invariant violated and no early stop.
    pub fn finish(&mut self) {
        self.passed = self.failure.is_none()
            && self
                .checks
                .iter()
                .all(|c| c.passed || c.kind == CheckKind::Diagnostic);
    }

    /// One line per check and fit, for terminals.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} {} [{}]\n",
            self.kind.name(),
            &self.config_hash[..12.min(self.config_hash.len())],
            if self.passed { "ok" } else { "FAILED" }
        );
        for c in &self.checks {
            let tag = match (c.passed, c.kind) {
                (true, _) => "ok",
                (false, CheckKind::Invariant) => "FAIL",
                (false, CheckKind::Diagnostic) => "warn",
            };
            s += &format!(
                "  {tag:4} {:<28} residual {:.3e} (tolerance {:.3e})\n",
                c.name, c.residual, c.tolerance
            );
        }
        for f in &self.fits {
            match (&f.fit, &f.error) {
                (Some(fit), _) => {
                    s += &format!(
                        "  fit  {:<10} {:<13} rate {:.4} exponent {:.4} r² {:.4} ({} samples)\n",
                        f.series,
                        f.model.name(),
                        fit.rate,
                        fit.exponent,
                        fit.r_squared,
                        fit.samples
                    )
                }
                (None, e) => {
                    s += &format!(
                        "  fit  {:<10} {:<13} {}\n",
                        f.series,
                        f.model.name(),
                        e.as_deref().unwrap_or("no result")
                    )
                }
            }
        }
        if let Some(fail) = &self.failure {
            s += &format!("  stopped: {}\n", fail.message);
        }
        s
    }
}
