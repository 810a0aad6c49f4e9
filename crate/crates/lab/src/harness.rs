//! Experiment orchestration.
//!
//! [`simulate`] is a pure function of the configuration: it returns the report
//! and the tables to write. [`run`] writes them, single-threaded, at the end.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use vlasov_core::coupled_map::{coupled_step, run_toy, CouplingSpec, TorusField, ToyError};
use vlasov_core::exec::Executor;
use vlasov_core::geometry::{build_bolza, SurfaceModel};
use vlasov_core::kinetics::{
    energy, free_advance, support_bounds, uniform_frame, Ensemble, InitialData, KineticsError,
    Stepper,
};
use vlasov_core::observables::{
    bootstrap_floor, correlation_terms, equilibrium_pairing, fit_decay, h_infinity_estimate,
    last_quartile, linear_trend, DriftAccumulator, Observable, ObservableError, RadialBins,
    RadialHistory, TimeSeries, BOOTSTRAP_RESAMPLES, DRIFT_ROUNDING,
};
use vlasov_core::potential::{domain_grid, KernelSpec, MeanField, PotentialField};
use vlasov_core::rng;

use crate::config::{ExperimentConfig, ExperimentKind, ModeConfig, ToyInitial};
use crate::report::{CheckKind, NamedFit, RunFailure, RunReport};
use crate::{io, HarnessError};

/// Seed purpose of the zero-mean sample points.
const ZERO_MEAN_PURPOSE: u64 = 0x7a65_726f;
/// Standard errors allowed for the Monte Carlo mean of `Φ(u0)`.
const ZERO_MEAN_SIGMAS: f64 = 4.0;
/// Absolute tolerance of the toy map's mean and constant checks.
pub const TOY_MEAN_TOLERANCE: f64 = 1e-12;

/// A file produced by a run.
#[derive(Debug, Clone)]
pub enum Artifact {
    Table {
        name: String,
        header: Vec<String>,
        rows: Vec<Vec<f64>>,
    },
    Json {
        name: String,
        value: serde_json::Value,
    },
    Checkpoint {
        name: String,
        ensemble: Ensemble,
    },
}

impl Artifact {
    pub fn name(&self) -> &str {
        match self {
            Artifact::Table { name, .. }
            | Artifact::Json { name, .. }
            | Artifact::Checkpoint { name, .. } => name,
        }
    }

    fn table(name: &str, header: &[&str], rows: Vec<Vec<f64>>) -> Self {
        Artifact::Table {
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows,
        }
    }

    /// A column of a table as a series against its first column.
    pub fn series(&self, column: &str) -> Option<TimeSeries> {
        let Artifact::Table { header, rows, .. } = self else {
            return None;
        };
        let c = header.iter().position(|h| h == column)?;
        let times = rows.iter().map(|r| r[0]).collect();
        let values = rows.iter().map(|r| r[c]).collect();
        Some(TimeSeries::new(times, values).ok()?.with_label(column))
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: RunReport,
    pub artifacts: Vec<Artifact>,
}

pub const FITS_FILE: &str = "fits.json";
pub const REPORT_FILE: &str = "report.json";

/// The configured surface, or the Bolza surface.
pub fn load_surface(cfg: &ExperimentConfig) -> Result<SurfaceModel, HarnessError> {
    match &cfg.surface {
        Some(path) => io::read_surface(path),
        None => build_bolza().map_err(|e| HarnessError::Config(format!("surface: {e}"))),
    }
}

/// `VLASOV_OUTPUT_DIR`, else the configured directory, else
/// `runs/<kind>-<hash prefix>`.
pub fn output_dir(cfg: &ExperimentConfig) -> PathBuf {
    if let Some(dir) = std::env::var_os(crate::OUTPUT_DIR_VAR) {
        return dir.into();
    }
    cfg.output_dir.clone().unwrap_or_else(|| {
        Path::new("runs").join(format!("{}-{}", cfg.kind.name(), &cfg.hash()[..12]))
    })
}

fn context<E: std::fmt::Display>(what: &'static str) -> impl Fn(E) -> HarnessError {
    move |e| HarnessError::Config(format!("{what}: {e}"))
}

/// Runs the experiment without touching the file system.
pub fn simulate<E: Executor>(cfg: &ExperimentConfig, exec: &E) -> Result<Outcome, HarnessError> {
    cfg.validate()?;
    let start = Instant::now();
    let surface = load_surface(cfg)?;
    let mut out = match cfg.kind {
        ExperimentKind::LinearMixing | ExperimentKind::RadialSuperposition => {
            linear(cfg, &surface, exec)?
        }
        ExperimentKind::NonlinearDamping => nonlinear(cfg, &surface, exec)?,
        ExperimentKind::ToyCoupled => toy(cfg, exec)?,
    };
    if cfg.outputs.surface {
        let value = serde_json::to_value(surface.description())
            .map_err(|e| HarnessError::Format(e.to_string()))?;
        out.artifacts.push(Artifact::Json {
            name: "surface.json".into(),
            value,
        });
    }
    out.report.files = out.artifacts.iter().map(|a| a.name().to_string()).collect();
    out.report
        .files
        .extend([FITS_FILE.to_string(), REPORT_FILE.to_string()]);
    out.report.finish();
    out.report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Runs the experiment and writes every artifact, `fits.json` and
/// `report.json` into `dir`.
pub fn run<E: Executor>(
    cfg: &ExperimentConfig,
    dir: &Path,
    exec: &E,
) -> Result<RunReport, HarnessError> {
    let out = simulate(cfg, exec)?;
    write_outcome(&out, dir)?;
    Ok(out.report)
}

pub fn write_outcome(out: &Outcome, dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    for a in &out.artifacts {
        let path = dir.join(a.name());
        match a {
            Artifact::Table { header, rows, .. } => {
                let header: Vec<&str> = header.iter().map(String::as_str).collect();
                io::write_table(&path, &header, rows)?
            }
            Artifact::Json { value, .. } => io::write_json(&path, value)?,
            Artifact::Checkpoint { ensemble, .. } => {
                io::write_checkpoint(&path, ensemble, &out.report.config_hash)?
            }
        }
    }
    io::write_json(&dir.join(FITS_FILE), &out.report.fits)?;
    io::write_json(&dir.join(REPORT_FILE), &out.report)
}

/// Performs the configured fits on the columns of `table`.
fn fit_table(
    cfg: &ExperimentConfig,
    table: &Artifact,
    primary: &str,
    default_floor: f64,
) -> Vec<NamedFit> {
    cfg.fits_or_default()
        .into_iter()
        .map(|f| {
            let column = f.series.clone().unwrap_or_else(|| primary.to_string());
            let floor = f.floor.unwrap_or(default_floor);
            let (fit, error) = match table.series(&column) {
                None => (None, Some(format!("no series `{column}`"))),
                Some(s) => match fit_decay(&s, f.model, f.window, floor) {
                    Ok(fit) => (Some(fit), None),
                    Err(e) => (None, Some(e.to_string())),
                },
            };
            NamedFit {
                series: column,
                model: f.model,
                window: f.window,
                fit,
                error,
            }
        })
        .collect()
}

/// Zero when the bit patterns agree, else the (nonzero) difference.
fn bit_residual(a: f64, b: f64) -> f64 {
    if a.to_bits() == b.to_bits() {
        0.0
    } else {
        (a - b).abs().max(f64::MIN_POSITIVE)
    }
}

/// Particles whose frame is not a fixed point of the domain reduction.
fn reduction_defects<E: Executor>(e: &Ensemble, surface: &SurfaceModel, exec: &E) -> usize {
    let ps = e.particles();
    exec.map_indexed(ps.len(), |i| {
        let mut g = *ps[i].frame();
        !matches!(surface.reduce_frame(&mut g), Ok(0)) || g != *ps[i].frame()
    })
    .into_iter()
    .filter(|bad| *bad)
    .count()
}

fn failure_from_kinetics(err: &KineticsError, step: usize, time: f64) -> RunFailure {
    let (kind, particle) = match err {
        KineticsError::NullSectionCapture { particle, .. } => {
            ("null-section capture", Some(*particle))
        }
        KineticsError::Reduction { particle, .. } => ("reduction", Some(*particle)),
        _ => ("kinetics", None),
    };
    RunFailure {
        kind: kind.into(),
        step: Some(step),
        time: Some(time),
        particle,
        message: format!("step {step} (t = {time}): {err}"),
    }
}

fn linear<E: Executor>(
    cfg: &ExperimentConfig,
    surface: &SurfaceModel,
    exec: &E,
) -> Result<Outcome, HarnessError> {
    let spec = cfg.initial.as_ref().expect("validated");
    let init = InitialData::new(spec, surface).map_err(context("initial"))?;
    let obs = Observable::new(cfg.observable.as_ref().expect("validated"), surface)
        .map_err(context("observable"))?;
    let times = cfg.record_times()?;
    let mut e = init
        .sample(surface, cfg.particles, cfg.seed, exec)
        .map_err(context("sampling"))?;
    let mass0 = e.current_mass();
    let speeds0: Vec<u64> = e.particles().iter().map(|p| p.r().to_bits()).collect();
    let mut report = RunReport::new(cfg.kind, cfg.hash());
    // Free flow: any configured kernel is ignored.
    report.metric("coupling", 0.0);
    report.metric("equilibrium", equilibrium_pairing(&e, &obs));

    let mut rows = Vec::with_capacity(times.len());
    let mut terms = Vec::new();
    let mut now = 0.0;
    for (k, &t) in times.iter().enumerate() {
        if let Err(err) = free_advance(&mut e, surface, t - now, exec) {
            report.failure = Some(failure_from_kinetics(&err, k, t));
            break;
        }
        now = t;
        terms = correlation_terms(&e, &obs, exec);
        rows.push(vec![t, terms.iter().sum::<f64>()]);
    }
    let floor = bootstrap_floor(&terms, BOOTSTRAP_RESAMPLES, e.seed());
    report.metric("noise_floor", floor);
    report.metric("particles", e.len() as f64);

    report.check(
        "mass-conservation",
        CheckKind::Invariant,
        bit_residual(e.current_mass(), mass0),
        0.0,
    );
    let moved = e
        .particles()
        .iter()
        .zip(&speeds0)
        .filter(|(p, r)| p.r().to_bits() != **r)
        .count();
    report.check(
        "speed-conservation",
        CheckKind::Invariant,
        moved as f64,
        0.0,
    );
    report.check(
        "reduction-idempotence",
        CheckKind::Invariant,
        reduction_defects(&e, surface, exec) as f64,
        0.0,
    );

    let table = Artifact::table("correlation.csv", &["t", "correlation"], rows);
    report.fits = fit_table(cfg, &table, "correlation", floor);
    Ok(Outcome {
        report,
        artifacts: vec![table],
    })
}

/// Monte Carlo mean of `Φ` at uniform surface points against its standard
/// error: `(|mean|, tolerance)`.
fn zero_mean_residual<E: Executor>(
    field: &PotentialField,
    surface: &SurfaceModel,
    samples: usize,
    seed: u64,
    exec: &E,
) -> Result<(f64, f64), HarnessError> {
    let seed = rng::derive_seed(seed, ZERO_MEAN_PURPOSE);
    let radius = surface.circumradius();
    let values = exec.map_indexed(samples, |i| {
        let mut r = rng::stream(seed, i as u64);
        uniform_frame(surface, radius, &mut r).map(|g| field.evaluate_phi(g.base_point()))
    });
    let values: Vec<f64> = values
        .into_iter()
        .collect::<Result<_, _>>()
        .map_err(context("zero-mean sampling"))?;
    let m = samples as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Ok((
        mean.abs(),
        ZERO_MEAN_SIGMAS * (var / m).sqrt() + 1e-12 * scale,
    ))
}

fn nonlinear<E: Executor>(
    cfg: &ExperimentConfig,
    surface: &SurfaceModel,
    exec: &E,
) -> Result<Outcome, HarnessError> {
    let spec = cfg.initial.as_ref().expect("validated");
    let nl = cfg.nonlinear.as_ref().expect("validated");
    let kc = cfg.kernel.as_ref().expect("validated");
    let init = InitialData::new(spec, surface).map_err(context("initial"))?;
    let s_max = kc.s_max.unwrap_or(0.5 * surface.injectivity_radius);
    let kernel =
        KernelSpec::new(kc.profile, s_max, kc.amplitude, surface).map_err(context("kernel"))?;
    let mut stepper = Stepper::new(MeanField::new(surface, kernel), nl.r_floor);
    let grid = domain_grid(surface, nl.grid_resolution).map_err(context("grid"))?;
    let bins = RadialBins::new(nl.bins.resolve(), nl.bins.ramp).map_err(context("bins"))?;
    let (steps, stride) = cfg.step_counts()?;
    let dt = cfg.dt.expect("validated");

    let mut e = init
        .sample(surface, cfg.particles, cfg.seed, exec)
        .map_err(context("sampling"))?;
    let mass0 = e.current_mass();
    let mut report = RunReport::new(cfg.kind, cfg.hash());
    let (zm, zm_tol) = zero_mean_residual(
        stepper.field(&e, exec),
        surface,
        nl.zero_mean_samples,
        cfg.seed,
        exec,
    )?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut history = RadialHistory {
        bins: bins.clone(),
        times: Vec::new(),
        masses: Vec::new(),
    };
    let planned: Vec<f64> = (0..=steps).step_by(stride).map(|k| k as f64 * dt).collect();
    let mut drift_acc = DriftAccumulator::new(&bins, last_quartile(&planned), e.len()).ok();
    for k in 0..=steps {
        let t = k as f64 * dt;
        if k > 0 {
            if let Err(err) = stepper.step(&mut e, surface, dt, exec) {
                report.failure = Some(failure_from_kinetics(&err, k, t));
                break;
            }
        }
        if k % stride == 0 {
            let field = stepper.field(&e, exec);
            let (c0, c1) = field.norms_on(&grid, exec);
            let floor = field.noise_floor_on(&grid, exec);
            let en = energy(&e, field, exec);
            let (lo, hi) = support_bounds(&e);
            rows.push(vec![t, c0, c1, floor, lo, hi, en]);
            history.times.push(t);
            history.masses.push(bins.pairings(&e));
            if let Some(acc) = drift_acc.as_mut() {
                acc.record(t, &e).map_err(context("drift accumulation"))?;
            }
        }
    }

    let col = |c: usize| rows.iter().map(move |r| r[c]);
    let r_min = col(4).fold(f64::INFINITY, f64::min);
    let r_max = col(5).fold(f64::NEG_INFINITY, f64::max);
    let floor = col(3).fold(0.0, f64::max);
    let e0 = rows[0][6];
    let drift =
        col(6).map(|v| (v - e0).abs()).fold(0.0, f64::max) / e0.abs().max(f64::MIN_POSITIVE);

    report.check(
        "mass-conservation",
        CheckKind::Invariant,
        bit_residual(e.current_mass(), mass0),
        0.0,
    );
    report.check(
        "energy-drift",
        CheckKind::Invariant,
        drift,
        nl.energy_tolerance,
    );
    report.check(
        "reduction-idempotence",
        CheckKind::Invariant,
        reduction_defects(&e, surface, exec) as f64,
        0.0,
    );
    report.check("zero-mean", CheckKind::Invariant, zm, zm_tol);
    // Speeds must stay inside (r0/2, 2/r0), r0 the lower edge of the band.
    let r0 = spec.r_band.0;
    report.check(
        "support-band",
        CheckKind::Diagnostic,
        (0.5 * r0 / r_min).max(r_max * r0 / 2.0),
        1.0,
    );

    let mut artifacts = Vec::new();
    let total: f64 = history.masses[0].iter().sum();
    // Resampling standard errors when the whole planned record exists.
    let resampled = drift_acc
        .as_ref()
        .filter(|a| a.is_complete() && history.times.len() == planned.len());
    match h_infinity_estimate(&history, resampled) {
        Ok(est) => {
            let ratio = est
                .drift
                .iter()
                .zip(&est.drift_stderr)
                .map(|(d, s)| d.abs() / (3.0 * s + DRIFT_ROUNDING * total.abs()))
                .fold(0.0, f64::max);
            report.check("h-infinity-plateau", CheckKind::Diagnostic, ratio, 1.0);
            let norm = est.corrections.iter().map(|c| c * c).sum::<f64>().sqrt();
            report.metric("correction_norm", norm);
            let rows = (0..bins.len())
                .map(|b| {
                    let (lo, hi) = (bins.edges[b], bins.edges[b + 1]);
                    vec![
                        lo,
                        hi,
                        est.profile.masses[b],
                        est.corrections[b],
                        est.drift[b],
                        est.drift_stderr[b],
                    ]
                })
                .collect();
            let header = ["lo", "hi", "plateau", "correction", "drift", "drift_stderr"];
            artifacts.push(Artifact::table("h_infinity.csv", &header, rows));
        }
        Err(err) => {
            let ratio = match err {
                ObservableError::NoPlateau { drift, stderr, .. } => {
                    drift.abs() / (3.0 * stderr + DRIFT_ROUNDING * total.abs())
                }
                _ => f64::INFINITY,
            };
            report.check("h-infinity-plateau", CheckKind::Diagnostic, ratio, 1.0);
        }
    }

    report.metric("r_min", r_min);
    report.metric("r_max", r_max);
    report.metric("r0", r0);
    report.metric("noise_floor", floor);
    report.metric("energy_drift", drift);
    report.metric("mass", mass0);
    report.metric("coupling", kernel.amplitude());
    report.metric("steps_completed", ((rows.len() - 1) * stride) as f64);

    let header = [
        "t",
        "phi_c0",
        "phi_c1",
        "noise_floor",
        "r_min",
        "r_max",
        "energy",
    ];
    let table = Artifact::table("potential.csv", &header, rows);
    report.fits = fit_table(cfg, &table, "phi_c0", floor);
    artifacts.insert(0, table);
    let mut radial_header = vec!["t".to_string()];
    radial_header.extend((0..bins.len()).map(|b| format!("bin_{b}")));
    let radial_rows = history
        .times
        .iter()
        .zip(&history.masses)
        .map(|(t, m)| std::iter::once(*t).chain(m.iter().copied()).collect())
        .collect();
    artifacts.insert(
        1,
        Artifact::Table {
            name: "radial.csv".into(),
            header: radial_header,
            rows: radial_rows,
        },
    );

    if cfg.outputs.phi_grid {
        let field = stepper.field(&e, exec);
        let values = exec.map_indexed(grid.len(), |i| field.evaluate_phi(grid[i]));
        let rows = grid
            .iter()
            .zip(values)
            .map(|(p, v)| vec![p.re, p.im, v])
            .collect();
        artifacts.push(Artifact::table("phi_grid.csv", &["x", "y", "phi"], rows));
    }
    if cfg.outputs.checkpoint {
        artifacts.push(Artifact::Checkpoint {
            name: "checkpoint.csv".into(),
            ensemble: e,
        });
    }
    Ok(Outcome { report, artifacts })
}

fn mode_sum(
    n: usize,
    stagger: (f64, f64),
    mean: f64,
    modes: &[ModeConfig],
) -> Result<TorusField, ToyError> {
    TorusField::from_fn(n, stagger, |x, y| {
        mean + modes
            .iter()
            .map(|m| {
                m.amplitude * (2.0 * PI * (m.k[0] as f64 * x + m.k[1] as f64 * y) + m.phase).cos()
            })
            .sum::<f64>()
    })
}

fn toy<E: Executor>(cfg: &ExperimentConfig, exec: &E) -> Result<Outcome, HarnessError> {
    let t = cfg.toy.as_ref().expect("validated");
    let phi = mode_sum(t.n, t.stagger, 0.0, &t.phi)
        .map_err(context("toy phi"))?
        .remove_mean();
    let u0 = match &t.initial {
        ToyInitial::Noise { mean, amplitude } => {
            TorusField::noise(t.n, t.stagger, *mean, *amplitude, cfg.seed)
        }
        ToyInitial::Modes { mean, modes } => mode_sum(t.n, t.stagger, *mean, modes),
    }
    .map_err(context("toy initial data"))?;
    t.map.validate().map_err(context("toy map"))?;
    let coupling =
        CouplingSpec::new(phi, t.stream.clone(), t.epsilon).map_err(context("toy coupling"))?;
    let mut report = RunReport::new(cfg.kind, cfg.hash());
    report.metric("lyapunov", t.map.lyapunov());
    report.metric("coupling", t.epsilon);

    let toy_failure = |err: ToyError| RunFailure {
        kind: "toy".into(),
        step: Some(0),
        time: Some(0.0),
        particle: None,
        message: err.to_string(),
    };
    let c = u0.mean();
    let constant_defect = TorusField::constant(t.n, t.stagger, c)
        .and_then(|k| coupled_step(&k, &t.map, &coupling, t.interpolation, exec))
        .map(|v| v.values().iter().fold(0.0f64, |a, x| a.max((x - c).abs())));
    let mut rows = Vec::new();
    match constant_defect {
        Ok(d) => report.check(
            "constant-preservation",
            CheckKind::Invariant,
            d,
            TOY_MEAN_TOLERANCE,
        ),
        Err(err) => report.failure = Some(toy_failure(err)),
    }
    if report.failure.is_none() {
        match run_toy(
            &u0,
            &t.map,
            &coupling,
            t.steps,
            t.order,
            t.interpolation,
            exec,
        ) {
            Ok(run) => {
                report.check(
                    "mean-conservation",
                    CheckKind::Invariant,
                    run.mean_defect,
                    TOY_MEAN_TOLERANCE,
                );
                let w0 = run.omega.values[0];
                let peak = run.omega.values.iter().fold(0.0f64, |a, v| a.max(*v));
                report.check(
                    "no-blowup",
                    CheckKind::Diagnostic,
                    peak / w0.max(f64::MIN_POSITIVE),
                    10.0,
                );
                report.metric("omega0", w0);
                report.metric("mean_defect", run.mean_defect);
                let (slope, _) = linear_trend(&run.weak_norm.times, &run.weak_norm.values);
                report.metric("weak_norm_trend", slope);
                rows = (0..run.omega.len())
                    .map(|k| {
                        vec![
                            run.omega.times[k],
                            run.omega.values[k],
                            run.weak_norm.values[k],
                        ]
                    })
                    .collect();
            }
            Err(err) => report.failure = Some(toy_failure(err)),
        }
    }
    let table = Artifact::table("omega.csv", &["step", "omega", "weak_norm"], rows);
    report.fits = fit_table(cfg, &table, "omega", 0.0);
    Ok(Outcome {
        report,
        artifacts: vec![table],
    })
}

/// One probe of [`bisect_data_scale`].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Probe {
    pub mass: f64,
    pub in_band: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Bisection {
    /// Largest probed total mass whose run kept its speeds in band.
    pub mass: f64,
    pub probes: Vec<Probe>,
}

/// Bisects the total mass of the initial data between `lo` and `hi` for the
/// largest value whose nonlinear run neither stops early nor leaves the speed
/// band `(r0/2, 2/r0)`. The weak-coupling regime lies below the result.
pub fn bisect_data_scale<E: Executor>(
    cfg: &ExperimentConfig,
    lo: f64,
    hi: f64,
    iterations: usize,
    exec: &E,
) -> Result<Bisection, HarnessError> {
    if cfg.kind != ExperimentKind::NonlinearDamping {
        return Err(HarnessError::Config(
            "bisection needs a nonlinear-damping config".into(),
        ));
    }
    if !(0.0 < lo && lo < hi) {
        return Err(HarnessError::Config(format!(
            "bisection bracket ({lo}, {hi}) is not ordered"
        )));
    }
    let mut probes = Vec::new();
    let mut probe = |mass: f64| -> Result<bool, HarnessError> {
        let mut c = cfg.clone();
        c.initial
            .as_mut()
            .expect("nonlinear configs carry initial data")
            .normalization = Some(mass);
        c.outputs = Default::default();
        let report = simulate(&c, exec)?.report;
        let in_band =
            report.failure.is_none() && report.get_check("support-band").is_some_and(|k| k.passed);
        probes.push(Probe { mass, in_band });
        Ok(in_band)
    };
    if !probe(lo)? {
        return Err(HarnessError::Unavailable(format!(
            "mass {lo} already leaves the speed band"
        )));
    }
    let (mut good, mut bad) = (lo, hi);
    if probe(hi)? {
        good = hi;
    } else {
        for _ in 0..iterations {
            let mid = 0.5 * (good + bad);
            if probe(mid)? {
                good = mid;
            } else {
                bad = mid;
            }
        }
    }
    Ok(Bisection { mass: good, probes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use vlasov_core::exec::Serial;

    #[test]
    fn toy_run_reports_checks_once() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            kind = "toy-coupled"
            seed = 5
            [toy]
            n = 32
            epsilon = 0.5
            steps = 6
            phi = [{ k = [1, 1], amplitude = 1.0 }]
            stream = [{ k = [1, 0], amplitude = 0.05, phase = 0.0 }]
            initial = { kind = "noise", mean = 1.0, amplitude = 0.3 }
            "#,
        )
        .unwrap();
        let out = simulate(&cfg, &Serial).unwrap();
        let names: Vec<&str> = out.report.checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(
            names,
            ["constant-preservation", "mean-conservation", "no-blowup"]
        );
        assert!(out.report.passed, "{}", out.report.summary());
        assert_eq!(out.report.files, ["omega.csv", "fits.json", "report.json"]);
        assert_eq!(out.report.fits.len(), 1);
    }

    #[test]
    fn bit_residuals() {
        assert_eq!(bit_residual(1.0, 1.0), 0.0);
        assert!(bit_residual(0.0, -0.0) > 0.0);
    }
}
