//! Test functions on phase space, correlations and their decay.

mod fit;
mod radial;

pub use fit::{fit_decay, linear_trend, DecayFit, DecayModel, MIN_FIT_SAMPLES};
pub use radial::{
    h_infinity_estimate, h_lin_profile, last_quartile, uniform_edges, DriftAccumulator,
    PlateauEstimate, RadialBins, RadialHistory, RadialProfile, DRIFT_ROUNDING,
};

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::exec::Executor;
use crate::geometry::SurfaceModel;
use crate::kinetics::{free_advance, Ensemble, InitialData, KineticsError, Particle};
use crate::phase::{BumpError, BumpParams, PhaseBump};
use crate::rng;

/// Resamples used for the bootstrap noise floor.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

const BOOTSTRAP_PURPOSE: u64 = 0xB0B5_7A4B;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ObservableError {
    #[error("fit window ({lo}, {hi}) is empty")]
    Window { lo: f64, hi: f64 },
    #[error(
        "only {found} usable samples, at least {needed} required; run longer or use more particles"
    )]
    InsufficientData { found: usize, needed: usize },
    #[error("least-squares system is singular")]
    Degenerate,
    #[error("times must be strictly increasing and match the values")]
    Series,
    #[error("bin edges must be non-negative and strictly increasing")]
    Edges,
    #[error("ramp width {ramp} is negative or wider than a bin")]
    Ramp { ramp: f64 },
    #[error("speed {r} lies outside the bins")]
    Uncovered { r: f64 },
    #[error("radial window must satisfy 0 <= lo < hi and ramp >= 0")]
    RadialWindow,
    #[error("bin {bin} has not settled: drift {drift:e} against standard error {stderr:e}")]
    NoPlateau { bin: usize, drift: f64, stderr: f64 },
    #[error(transparent)]
    Bump(#[from] BumpError),
    #[error(transparent)]
    Kinetics(#[from] KineticsError),
}

/// A scalar quantity sampled at strictly increasing times.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub label: String,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self, ObservableError> {
        if times.len() != values.len() || times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(ObservableError::Series);
        }
        Ok(Self {
            times,
            values,
            label: String::new(),
        })
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.into();
        self
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// C² step from 0 at `t ≤ 0` to 1 at `t ≥ 1`.
#[inline]
fn smootherstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (t * (6.0 * t - 15.0) + 10.0)
    }
}

/// Smoothed indicator of `[lo, hi]` in the speed, with transitions of width
/// `ramp` centred on each end; `ramp = 0` gives the sharp indicator of `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RadialWindow {
    pub lo: f64,
    pub hi: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub ramp: f64,
}

impl RadialWindow {
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        if self.ramp == 0.0 {
            return if r >= self.lo && r < self.hi {
                1.0
            } else {
                0.0
            };
        }
        let rise = smootherstep((r - self.lo) / self.ramp + 0.5);
        let fall = 1.0 - smootherstep((r - self.hi) / self.ramp + 0.5);
        rise * fall
    }

    fn validate(&self) -> Result<(), ObservableError> {
        if !(self.lo >= 0.0 && self.hi > self.lo && self.ramp >= 0.0 && self.hi.is_finite()) {
            return Err(ObservableError::RadialWindow);
        }
        Ok(())
    }
}

/// `ψ(x, ξ₁, r) = bump(x, ξ₁) · window(r)`; absent parts are identically one.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObservableSpec {
    #[cfg_attr(feature = "serde", serde(default))]
    pub bump: Option<BumpParams>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub radial: Option<RadialWindow>,
}

/// Built observable.
#[derive(Debug, Clone)]
pub struct Observable {
    bump: Option<PhaseBump>,
    window: Option<RadialWindow>,
    angular_mean: f64,
}

impl Observable {
    pub fn new(spec: &ObservableSpec, surface: &SurfaceModel) -> Result<Self, ObservableError> {
        if let Some(w) = &spec.radial {
            w.validate()?;
        }
        let bump = spec.bump.map(|b| b.build(surface)).transpose()?;
        let angular_mean = bump
            .as_ref()
            .map_or(1.0, |b| b.integral(surface) / (2.0 * PI * surface.area));
        Ok(Self {
            bump,
            window: spec.radial,
            angular_mean,
        })
    }

    /// Mean of the angular factor over `M₁`.
    pub fn angular_mean(&self) -> f64 {
        self.angular_mean
    }

    #[inline]
    pub fn window(&self, r: f64) -> f64 {
        self.window.map_or(1.0, |w| w.value(r))
    }

    #[inline]
    pub fn value(&self, p: &Particle) -> f64 {
        let rad = self.window(p.r());
        if rad == 0.0 {
            return 0.0;
        }
        rad * self.bump.as_ref().map_or(1.0, |b| b.value(p.frame()))
    }

    /// `ψ̄(r)`: the angular average at speed `r`.
    #[inline]
    pub fn radial_average(&self, r: f64) -> f64 {
        self.window(r) * self.angular_mean
    }
}

/// `⟨u, ψ⟩ = Σ w ψ`.
pub fn pair<E: Executor>(e: &Ensemble, obs: &Observable, exec: &E) -> f64 {
    let ps = e.particles();
    let vals = exec.map_indexed(ps.len(), |i| ps[i].w() * obs.value(&ps[i]));
    vals.into_iter().sum()
}

/// `m(ψ) = Σ w ψ̄(r)`, the pairing with the radial equilibrium.
pub fn equilibrium_pairing(e: &Ensemble, obs: &Observable) -> f64 {
    e.particles()
        .iter()
        .map(|p| p.w() * obs.radial_average(p.r()))
        .sum()
}

/// Per-particle contributions `w (ψ - ψ̄(r))` to the correlation.
pub fn correlation_terms<E: Executor>(e: &Ensemble, obs: &Observable, exec: &E) -> Vec<f64> {
    let ps = e.particles();
    exec.map_indexed(ps.len(), |i| {
        let p = &ps[i];
        p.w() * (obs.value(p) - obs.radial_average(p.r()))
    })
}

/// Three standard deviations of the bootstrap distribution of `Σ terms`.
pub fn bootstrap_floor(terms: &[f64], resamples: usize, seed: u64) -> f64 {
    let n = terms.len();
    if n == 0 || resamples < 2 {
        return 0.0;
    }
    let mut rng = rng::stream(rng::derive_seed(seed, BOOTSTRAP_PURPOSE), 0);
    let sums: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| terms[rng.random_range(0..n)]).sum::<f64>())
        .collect();
    let mean = sums.iter().sum::<f64>() / resamples as f64;
    let var = sums.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (resamples - 1) as f64;
    3.0 * var.sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSeries {
    pub series: TimeSeries,
    pub noise_floor: f64,
    /// `m(ψ)`, fixed along the free flow.
    pub equilibrium: f64,
}

/// `C(t) = ⟨u(t), ψ⟩ - m(ψ)` along the free flow of an ensemble, sampled at
/// the increasing times `t_grid` (measured from the ensemble's current time).
/// The ensemble is left at the last time, where the noise floor is
/// bootstrapped.
pub fn correlation_series_from<E: Executor>(
    e: &mut Ensemble,
    obs: &Observable,
    surface: &SurfaceModel,
    t_grid: &[f64],
    exec: &E,
) -> Result<CorrelationSeries, ObservableError> {
    if t_grid.is_empty() || t_grid.windows(2).any(|w| !(w[0] < w[1])) || !(t_grid[0] >= 0.0) {
        return Err(ObservableError::Series);
    }
    let equilibrium = equilibrium_pairing(e, obs);
    let mut values = Vec::with_capacity(t_grid.len());
    let mut now = 0.0;
    let mut terms = Vec::new();
    for &t in t_grid {
        free_advance(e, surface, t - now, exec)?;
        now = t;
        terms = correlation_terms(e, obs, exec);
        values.push(terms.iter().sum::<f64>());
    }
    let noise_floor = bootstrap_floor(&terms, BOOTSTRAP_RESAMPLES, e.seed());
    Ok(CorrelationSeries {
        series: TimeSeries::new(t_grid.to_vec(), values)?,
        noise_floor,
        equilibrium,
    })
}

/// Samples `n` particles from `init` and records their correlation with `ψ`
/// under the free flow.
pub fn correlation_series<E: Executor>(
    init: &InitialData,
    obs: &Observable,
    surface: &SurfaceModel,
    t_grid: &[f64],
    n: usize,
    seed: u64,
    exec: &E,
) -> Result<CorrelationSeries, ObservableError> {
    let mut e = init.sample(surface, n, seed, exec)?;
    correlation_series_from(&mut e, obs, surface, t_grid, exec)
}
