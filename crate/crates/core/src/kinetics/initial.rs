//! Initial densities `u0(r, z₁) = h(r) a(z₁) / vol(M₁)` and their sampling.
//!
//! Densities are taken with respect to the Liouville measure `r dr dL₁`, so
//! the speed of a sample is drawn from `r h(r)` and its unit phase point from
//! `a`. With this normalization `h_lin = h · mean(a)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

// float methods for no_std builds; inherent ones shadow these when std is linked
#[allow(unused_imports)]
use num_traits::Float;

use rand::Rng;

use super::{Ensemble, KineticsError, Particle};
use crate::exec::Executor;
use crate::geometry::{MoebiusElement, SurfaceModel};
use crate::phase::{poly_bump, BumpParams, PhaseBump};
use crate::quadrature::GaussLegendre;
use crate::rng;

/// Rejection budget per sample.
pub const MAX_PROPOSALS: usize = 1_000_000;

/// Shape of the radial factor `h` on the speed band.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum SpeedProfile {
    /// All mass at one speed.
    Fixed { r: f64 },
    /// `h` constant on the band.
    Flat,
    /// `h(r) = b(2(r - mid)/(hi - lo))` with `b` the polynomial bump; vanishes
    /// smoothly at both band edges.
    Smooth,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InitialDataSpec {
    /// Open support interval of the speeds.
    pub r_band: (f64, f64),
    pub speed: SpeedProfile,
    /// Overall factor of `h`.
    #[cfg_attr(feature = "serde", serde(default = "one"))]
    pub level: f64,
    /// Constant part of the angular factor `a`.
    #[cfg_attr(feature = "serde", serde(default))]
    pub background: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub bumps: Vec<BumpParams>,
    /// Total mass to rescale to; the analytic mass of the density when absent.
    #[cfg_attr(feature = "serde", serde(default))]
    pub normalization: Option<f64>,
}

#[cfg(feature = "serde")]
fn one() -> f64 {
    1.0
}

impl InitialDataSpec {
    /// Uniform angular factor with the given speed profile.
    pub fn uniform(r_band: (f64, f64), speed: SpeedProfile) -> Self {
        Self {
            r_band,
            speed,
            level: 1.0,
            background: 1.0,
            bumps: Vec::new(),
            normalization: None,
        }
    }
}

/// Validated initial density with its bumps built against a surface.
#[derive(Debug, Clone)]
pub struct InitialData {
    spec: InitialDataSpec,
    bumps: Vec<PhaseBump>,
    component_mass: Vec<f64>,
    mean_angular: f64,
    radial_mass: f64,
    circumradius: f64,
}

impl InitialData {
    pub fn new(spec: &InitialDataSpec, surface: &SurfaceModel) -> Result<Self, KineticsError> {
        let (lo, hi) = spec.r_band;
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(KineticsError::InvalidSpec(
                "speed band must satisfy 0 <= lo < hi < inf",
            ));
        }
        if !(spec.level > 0.0 && spec.level.is_finite()) {
            return Err(KineticsError::InvalidSpec("radial level must be positive"));
        }
        if !(spec.background >= 0.0 && spec.background.is_finite()) {
            return Err(KineticsError::InvalidSpec(
                "angular background must be non-negative",
            ));
        }
        if let Some(m) = spec.normalization {
            if !(m > 0.0 && m.is_finite()) {
                return Err(KineticsError::InvalidSpec(
                    "normalization must be a positive mass",
                ));
            }
        }
        if let SpeedProfile::Fixed { r } = spec.speed {
            if !(r > lo && r < hi) {
                return Err(KineticsError::InvalidSpec(
                    "fixed speed must lie inside the band",
                ));
            }
        }
        let bumps = spec
            .bumps
            .iter()
            .map(|b| b.build(surface))
            .collect::<Result<Vec<_>, _>>()
            .map_err(KineticsError::Bump)?;
        let vol = 2.0 * PI * surface.area;
        let mut component_mass = Vec::with_capacity(bumps.len() + 1);
        component_mass.push(spec.background * vol);
        component_mass.extend(bumps.iter().map(|b| b.integral(surface)));
        let angular_total: f64 = component_mass.iter().sum();
        if !(angular_total > 0.0) {
            return Err(KineticsError::InvalidSpec("angular factor has zero mass"));
        }
        let radial_mass = match spec.speed {
            SpeedProfile::Fixed { .. } => spec.level,
            SpeedProfile::Flat => spec.level * 0.5 * (hi * hi - lo * lo),
            SpeedProfile::Smooth => {
                let gl = GaussLegendre::new(32);
                gl.integrate_composite(lo, hi, 4, |r| r * spec.radial_density(r))
            }
        };
        Ok(Self {
            spec: spec.clone(),
            bumps,
            component_mass,
            mean_angular: angular_total / vol,
            radial_mass,
            circumradius: surface.circumradius(),
        })
    }

    pub fn spec(&self) -> &InitialDataSpec {
        &self.spec
    }

    pub fn bumps(&self) -> &[PhaseBump] {
        &self.bumps
    }

    /// `mean(a)` over `M₁`.
    pub fn mean_angular(&self) -> f64 {
        self.mean_angular
    }

    /// `∫ r h(r) dr`.
    pub fn radial_mass(&self) -> f64 {
        self.radial_mass
    }

    /// Mass of the density before any normalization.
    pub fn analytic_mass(&self) -> f64 {
        self.radial_mass * self.mean_angular
    }

    /// Mass carried by a sampled ensemble.
    pub fn total_mass(&self) -> f64 {
        self.spec
            .normalization
            .unwrap_or_else(|| self.analytic_mass())
    }

    /// Factor applied to the analytic density by the normalization.
    pub fn mass_scale(&self) -> f64 {
        self.total_mass() / self.analytic_mass()
    }

    /// Angular factor `a` at a reduced frame.
    pub fn angular(&self, frame: &MoebiusElement) -> f64 {
        self.spec.background + self.bumps.iter().map(|b| b.value(frame)).sum::<f64>()
    }

    /// Sample of `n` equal-weight particles; particle `i` uses random stream `i`.
    pub fn sample<E: Executor>(
        &self,
        surface: &SurfaceModel,
        n: usize,
        seed: u64,
        exec: &E,
    ) -> Result<Ensemble, KineticsError> {
        if n == 0 {
            return Err(KineticsError::InvalidSpec(
                "at least one particle is required",
            ));
        }
        let w = self.total_mass() / n as f64;
        let drawn = exec.map_indexed(n, |i| {
            let mut rng = rng::stream(seed, i as u64);
            let r = self.sample_speed(&mut rng)?;
            let frame = self.sample_frame(surface, &mut rng)?;
            Particle::new(frame, r, w)
        });
        let particles = drawn.into_iter().collect::<Result<Vec<_>, _>>()?;
        Ok(Ensemble::new(particles, seed))
    }

    fn sample_speed<R: Rng>(&self, rng: &mut R) -> Result<f64, KineticsError> {
        let (lo, hi) = self.spec.r_band;
        match self.spec.speed {
            SpeedProfile::Fixed { r } => Ok(r),
            SpeedProfile::Flat => {
                for _ in 0..MAX_PROPOSALS {
                    let u: f64 = rng.random();
                    let r = (lo * lo + u * (hi * hi - lo * lo)).sqrt();
                    if r > lo && r < hi {
                        return Ok(r);
                    }
                }
                Err(KineticsError::Sampling {
                    proposals: MAX_PROPOSALS,
                })
            }
            SpeedProfile::Smooth => {
                let top = hi * self.spec.level;
                for _ in 0..MAX_PROPOSALS {
                    let r = lo + (hi - lo) * rng.random::<f64>();
                    let accept = r * self.spec.radial_density(r) / top;
                    if rng.random::<f64>() < accept {
                        return Ok(r);
                    }
                }
                Err(KineticsError::Sampling {
                    proposals: MAX_PROPOSALS,
                })
            }
        }
    }

    fn sample_frame<R: Rng>(
        &self,
        surface: &SurfaceModel,
        rng: &mut R,
    ) -> Result<MoebiusElement, KineticsError> {
        let total: f64 = self.component_mass.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut pick = 0;
        for (k, m) in self.component_mass.iter().enumerate() {
            if u < *m || k + 1 == self.component_mass.len() {
                pick = k;
                break;
            }
            u -= m;
        }
        // skip trailing zero-mass components picked by rounding
        while self.component_mass[pick] == 0.0 && pick > 0 {
            pick -= 1;
        }
        let mut frame = match pick.checked_sub(1).map(|k| &self.bumps[k]) {
            Some(b) if b.spatial_width().is_some() => bump_frame(b, rng)?,
            _ => uniform_frame(surface, self.circumradius, rng)?,
        };
        surface
            .reduce_frame(&mut frame)
            .map_err(KineticsError::from)?;
        Ok(frame)
    }
}

impl InitialDataSpec {
    /// `h(r)`; zero outside the band. For a fixed speed this is the point mass
    /// and evaluates to zero everywhere.
    pub fn radial_density(&self, r: f64) -> f64 {
        let (lo, hi) = self.r_band;
        if !(r > lo && r < hi) {
            return 0.0;
        }
        match self.speed {
            SpeedProfile::Fixed { .. } => 0.0,
            SpeedProfile::Flat => self.level,
            SpeedProfile::Smooth => {
                let mid = 0.5 * (lo + hi);
                self.level * poly_bump(2.0 * (r - mid) / (hi - lo))
            }
        }
    }
}

/// Frame with base point uniform on the domain and uniform direction.
pub fn uniform_frame<R: Rng>(
    surface: &SurfaceModel,
    circumradius: f64,
    rng: &mut R,
) -> Result<MoebiusElement, KineticsError> {
    let ch = circumradius.cosh() - 1.0;
    for _ in 0..MAX_PROPOSALS {
        let s = (1.0 + rng.random::<f64>() * ch).acosh();
        let alpha = 2.0 * PI * rng.random::<f64>();
        let p = crate::geometry::DiskPoint::at_distance(s, alpha);
        if surface.contains(p) {
            let theta = 2.0 * PI * rng.random::<f64>();
            return Ok(MoebiusElement::frame_at(p, theta)?);
        }
    }
    Err(KineticsError::Sampling {
        proposals: MAX_PROPOSALS,
    })
}

/// Frame drawn from the normalized shape of a bump.
fn bump_frame<R: Rng>(bump: &PhaseBump, rng: &mut R) -> Result<MoebiusElement, KineticsError> {
    let ws = bump.spatial_width().expect("spatial bumps only");
    let top = ws.sinh();
    let mut s = None;
    for _ in 0..MAX_PROPOSALS {
        let x = ws * rng.random::<f64>();
        if rng.random::<f64>() * top < poly_bump(x / ws) * x.sinh() {
            s = Some(x);
            break;
        }
    }
    let s = s.ok_or(KineticsError::Sampling {
        proposals: MAX_PROPOSALS,
    })?;
    let alpha = 2.0 * PI * rng.random::<f64>();
    let phi = match bump.angular_width() {
        None => 2.0 * PI * rng.random::<f64>() - PI,
        Some(wa) => {
            let mut out = None;
            for _ in 0..MAX_PROPOSALS {
                let x = wa * (2.0 * rng.random::<f64>() - 1.0);
                if rng.random::<f64>() < poly_bump(x / wa) {
                    out = Some(x);
                    break;
                }
            }
            out.ok_or(KineticsError::Sampling {
                proposals: MAX_PROPOSALS,
            })?
        }
    };
    // moving radially from the centre keeps the transported direction at chart angle 0
    Ok(bump
        .center()
        .compose(&MoebiusElement::rotation(alpha))
        .compose(&MoebiusElement::translation(s))
        .compose(&MoebiusElement::rotation(phi - alpha)))
}
