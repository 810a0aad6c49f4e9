//! Experiment configuration, loaded from TOML or JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vlasov_core::coupled_map::{CatMapSpec, Interpolation, StreamMode, DEFAULT_STAGGER};
use vlasov_core::kinetics::{InitialDataSpec, DEFAULT_R_FLOOR};
use vlasov_core::observables::{DecayModel, ObservableSpec};
use vlasov_core::potential::KernelProfile;

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Free flow of a fixed-speed ensemble, one correlation series.
    LinearMixing,
    /// Free flow with speeds spread down towards the null section.
    RadialSuperposition,
    /// Self-consistent flow under the mean-field potential.
    NonlinearDamping,
    /// The coupled cat map on the torus.
    ToyCoupled,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::LinearMixing => "linear-mixing",
            ExperimentKind::RadialSuperposition => "radial-superposition",
            ExperimentKind::NonlinearDamping => "nonlinear-damping",
            ExperimentKind::ToyCoupled => "toy-coupled",
        }
    }

    fn default_model(self) -> DecayModel {
        match self {
            ExperimentKind::RadialSuperposition => DecayModel::Algebraic,
            _ => DecayModel::Exponential,
        }
    }
}

/// Interaction kernel block. `s_max` defaults to half the injectivity radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    #[serde(default)]
    pub profile: KernelProfile,
    #[serde(default)]
    pub s_max: Option<f64>,
    pub amplitude: f64,
}

/// One requested fit. The series defaults to the kind's primary column and
/// the floor to the run's estimated noise floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    #[serde(default)]
    pub series: Option<String>,
    pub model: DecayModel,
    pub window: (f64, f64),
    #[serde(default)]
    pub floor: Option<f64>,
}

/// Speed bins for the radial pairings; `count` equal bins on `[lo, hi]`
/// unless explicit `edges` are given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinsConfig {
    #[serde(default)]
    pub edges: Vec<f64>,
    #[serde(default)]
    pub lo: f64,
    #[serde(default)]
    pub hi: f64,
    #[serde(default)]
    pub count: usize,
    #[serde(default)]
    pub ramp: f64,
}

impl BinsConfig {
    pub fn resolve(&self) -> Vec<f64> {
        if !self.edges.is_empty() {
            return self.edges.clone();
        }
        vlasov_core::observables::uniform_edges(self.lo, self.hi, self.count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearConfig {
    pub bins: BinsConfig,
    #[serde(default = "grid_resolution")]
    pub grid_resolution: usize,
    #[serde(default = "r_floor")]
    pub r_floor: f64,
    /// Largest tolerated relative drift of the total energy.
    #[serde(default = "energy_tolerance")]
    pub energy_tolerance: f64,
    /// Uniform surface points for the zero-mean check of `Φ(u0)`.
    #[serde(default = "zero_mean_samples")]
    pub zero_mean_samples: usize,
}

fn grid_resolution() -> usize {
    16
}

fn r_floor() -> f64 {
    DEFAULT_R_FLOOR
}

fn energy_tolerance() -> f64 {
    1e-3
}

fn zero_mean_samples() -> usize {
    4096
}

/// A Fourier mode `amplitude · cos(2π k·x + phase)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub k: [i64; 2],
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ToyInitial {
    /// Independent Gaussian node values, seeded from the experiment seed.
    Noise { mean: f64, amplitude: f64 },
    /// A finite Fourier sum.
    Modes { mean: f64, modes: Vec<ModeConfig> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyConfig {
    #[serde(default = "toy_grid")]
    pub n: usize,
    #[serde(default)]
    pub map: CatMapSpec,
    pub epsilon: f64,
    pub steps: usize,
    /// Coupling observable `φ`; its grid mean is removed.
    pub phi: Vec<ModeConfig>,
    /// Stream function of the drift field.
    #[serde(default)]
    pub stream: Vec<StreamMode>,
    pub initial: ToyInitial,
    /// Order `s` of the weak norm.
    #[serde(default = "weak_order")]
    pub order: f64,
    #[serde(default)]
    pub interpolation: Interpolation,
    #[serde(default = "stagger")]
    pub stagger: (f64, f64),
}

fn toy_grid() -> usize {
    256
}

fn weak_order() -> f64 {
    2.0
}

fn stagger() -> (f64, f64) {
    DEFAULT_STAGGER
}

/// Optional extra artifacts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputOptions {
    /// Final ensemble as a checkpoint file.
    #[serde(default)]
    pub checkpoint: bool,
    /// Final `Φ` on the domain grid.
    #[serde(default)]
    pub phi_grid: bool,
    /// The surface description used.
    #[serde(default)]
    pub surface: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    /// Particle count; unused by the toy map.
    #[serde(default)]
    pub particles: usize,
    /// Transport step of the nonlinear flow.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub t_end: f64,
    /// Time between recorded samples.
    #[serde(default)]
    pub record_every: f64,
    /// Surface description file; the Bolza surface when absent.
    #[serde(default)]
    pub surface: Option<PathBuf>,
    #[serde(default)]
    pub kernel: Option<KernelConfig>,
    #[serde(default)]
    pub initial: Option<InitialDataSpec>,
    #[serde(default)]
    pub observable: Option<ObservableSpec>,
    #[serde(default)]
    pub nonlinear: Option<NonlinearConfig>,
    #[serde(default)]
    pub toy: Option<ToyConfig>,
    #[serde(default)]
    pub fits: Vec<FitConfig>,
    #[serde(default)]
    pub outputs: OutputOptions,
    /// Not part of the hash; overridden by `VLASOV_OUTPUT_DIR`.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let cfg = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json(&text)?,
            Some("toml") => Self::from_toml(&text)?,
            _ => {
                return Err(HarnessError::Config(format!(
                    "{}: expected a .toml or .json file",
                    path.display()
                )))
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Hex SHA-256 of the canonical JSON form: keys sorted, output directory
    /// dropped. Independent of key order and of the file format.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = None;
        let value = serde_json::to_value(&c).expect("config is serializable");
        let canonical = serde_json::to_string(&value).expect("value is serializable");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    /// Fits to perform, with the kind's default model over the whole run when
    /// none are configured.
    pub fn fits_or_default(&self) -> Vec<FitConfig> {
        if !self.fits.is_empty() {
            return self.fits.clone();
        }
        let end = match (&self.kind, &self.toy) {
            (ExperimentKind::ToyCoupled, Some(t)) => t.steps as f64,
            _ => self.t_end,
        };
        vec![FitConfig {
            series: None,
            model: self.kind.default_model(),
            window: (0.0, end),
            floor: None,
        }]
    }

    /// Number of `dt` steps and the recording stride in steps.
    pub fn step_counts(&self) -> Result<(usize, usize), HarnessError> {
        let dt = self
            .dt
            .ok_or_else(|| HarnessError::Config("dt is required".into()))?;
        let steps = whole_multiple(self.t_end, dt, "t_end")?;
        let stride = whole_multiple(self.record_every, dt, "record_every")?;
        if stride == 0 {
            return Err(HarnessError::Config(
                "record_every must be at least dt".into(),
            ));
        }
        Ok((steps, stride))
    }

    /// Recording times `0, record_every, …` up to `t_end`.
    pub fn record_times(&self) -> Result<Vec<f64>, HarnessError> {
        let count = whole_multiple(self.t_end, self.record_every, "t_end")?;
        Ok((0..=count).map(|k| k as f64 * self.record_every).collect())
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let need = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(HarnessError::Config(format!(
                    "{} experiment: {what}",
                    self.kind.name()
                )))
            }
        };
        for f in &self.fits {
            need(f.window.0 < f.window.1, "fit windows need lo < hi")?;
        }
        match self.kind {
            ExperimentKind::ToyCoupled => {
                let t = self.toy.as_ref();
                need(t.is_some(), "a [toy] block is required")?;
                need(
                    t.is_some_and(|t| t.steps >= 1),
                    "toy.steps must be at least 1",
                )?;
            }
            kind => {
                need(self.particles >= 1, "particles must be at least 1")?;
                need(self.initial.is_some(), "an [initial] block is required")?;
                need(
                    self.t_end > 0.0 && self.record_every > 0.0,
                    "t_end and record_every must be positive",
                )?;
                if kind == ExperimentKind::NonlinearDamping {
                    need(self.kernel.is_some(), "a [kernel] block is required")?;
                    need(self.nonlinear.is_some(), "a [nonlinear] block is required")?;
                    need(self.dt.is_some_and(|d| d > 0.0), "dt must be positive")?;
                    self.step_counts()?;
                } else {
                    need(
                        self.observable.is_some(),
                        "an [observable] block is required",
                    )?;
                    self.record_times()?;
                }
            }
        }
        Ok(())
    }
}

fn whole_multiple(total: f64, unit: f64, what: &str) -> Result<usize, HarnessError> {
    let q = total / unit;
    let k = q.round();
    if !(unit > 0.0) || !q.is_finite() || (q - k).abs() > 1e-9 * k.max(1.0) {
        return Err(HarnessError::Config(format!(
            "{what} = {total} is not a whole multiple of {unit}"
        )));
    }
    Ok(k as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = r#"
        kind = "toy-coupled"
        seed = 3
        [toy]
        epsilon = 0.0
        steps = 10
        phi = [{ k = [1, 2], amplitude = 1.0 }]
        initial = { kind = "noise", mean = 0.0, amplitude = 1.0 }
    "#;

    #[test]
    fn hash_ignores_key_order_and_format() {
        let a = ExperimentConfig::from_toml(TOY).unwrap();
        let reordered = r#"
            seed = 3
            kind = "toy-coupled"
            [toy]
            initial = { amplitude = 1.0, kind = "noise", mean = 0.0 }
            phi = [{ amplitude = 1.0, k = [1, 2] }]
            steps = 10
            epsilon = 0.0
        "#;
        let b = ExperimentConfig::from_toml(reordered).unwrap();
        let c = ExperimentConfig::from_json(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash(), c.hash());
        let mut d = a.clone();
        d.seed = 4;
        assert_ne!(a.hash(), d.hash());
        d.seed = 3;
        d.output_dir = Some("elsewhere".into());
        assert_eq!(a.hash(), d.hash());
    }

    #[test]
    fn validation() {
        let a = ExperimentConfig::from_toml(TOY).unwrap();
        assert!(a.validate().is_ok());
        assert_eq!(a.fits_or_default()[0].window, (0.0, 10.0));
        let mut b = a.clone();
        b.kind = ExperimentKind::LinearMixing;
        assert!(b.validate().is_err());
        assert!(
            ExperimentConfig::from_toml("kind = \"toy-coupled\"\nseed = 1\nbogus = 2").is_err()
        );
    }

    #[test]
    fn multiples() {
        assert_eq!(whole_multiple(20.0, 0.1, "t").unwrap(), 200);
        assert!(whole_multiple(1.05, 0.1, "t").is_err());
    }
}
