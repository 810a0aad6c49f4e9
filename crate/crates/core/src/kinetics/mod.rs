//! Particle transport under the characteristics of `{H + Φ(u), ·}`.
//!
//! A particle carries a frame (base point and unit direction), a speed `r`
//! and a weight. Between kicks it rides the geodesic flow at speed `r`; a kick
//! updates the momentum `r ξ₁` by `-dt ∇Φ`. Weights never change.

mod initial;

pub use initial::{uniform_frame, InitialData, InitialDataSpec, SpeedProfile, MAX_PROPOSALS};

use alloc::vec::Vec;

// float methods for no_std builds; inherent ones shadow these when std is linked
#[allow(unused_imports)]
use num_traits::Float;

use crate::exec::Executor;
use crate::geometry::{DiskPoint, GeometryError, MoebiusElement, SurfaceModel, Tangent};
use crate::phase::BumpError;
use crate::potential::{MeanField, PotentialField, ScalarField};

/// Default lower bound on speeds after a kick.
pub const DEFAULT_R_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KineticsError {
    #[error("invalid initial data: {0}")]
    InvalidSpec(&'static str),
    #[error("rejection sampling gave up after {proposals} proposals")]
    Sampling { proposals: usize },
    #[error(transparent)]
    Bump(BumpError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("particle needs positive finite speed and weight, got r = {r}, w = {w}")]
    InvalidParticle { r: f64, w: f64 },
    #[error("null-section capture: particle {particle} slowed to r = {r:e}")]
    NullSectionCapture { particle: usize, r: f64 },
    #[error("particle {particle}: {source}")]
    Reduction {
        particle: usize,
        source: GeometryError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    frame: MoebiusElement,
    r: f64,
    w: f64,
}

impl Particle {
    pub fn new(frame: MoebiusElement, r: f64, w: f64) -> Result<Self, KineticsError> {
        if !(r > 0.0 && r.is_finite() && w > 0.0 && w.is_finite()) {
            return Err(KineticsError::InvalidParticle { r, w });
        }
        Ok(Self { frame, r, w })
    }

    #[inline]
    pub fn frame(&self) -> &MoebiusElement {
        &self.frame
    }

    #[inline]
    pub fn r(&self) -> f64 {
        self.r
    }

    #[inline]
    pub fn w(&self) -> f64 {
        self.w
    }

    #[inline]
    pub fn position(&self) -> DiskPoint {
        self.frame.base_point()
    }

    /// Same particle at speed `λ r`.
    pub fn with_scaled_speed(&self, lambda: f64) -> Result<Self, KineticsError> {
        Self::new(self.frame, self.r * lambda, self.w)
    }

    /// Free flow for time `dt`, split into legs no longer than the domain
    /// circumradius with a reduction after each leg.
    pub fn drift(&mut self, surface: &SurfaceModel, dt: f64) -> Result<(), GeometryError> {
        let length = self.r * dt;
        if length == 0.0 {
            return Ok(());
        }
        let legs = (length.abs() / surface.circumradius()).ceil().max(1.0);
        let leg = length / legs;
        for _ in 0..legs as usize {
            self.frame = self.frame.geodesic_advance(leg);
            surface.reduce_frame(&mut self.frame)?;
        }
        Ok(())
    }

    /// Momentum update `r ξ₁ ← r ξ₁ - dt g`. Returns the offending speed if it
    /// falls below `r_floor`; the particle is left untouched in that case.
    #[inline]
    pub fn kick(&mut self, g: Tangent, dt: f64, r_floor: f64) -> Result<(), f64> {
        if (g.x == 0.0 && g.y == 0.0) || dt == 0.0 {
            return Ok(());
        }
        let e = self.frame.direction();
        let v = e.scale(self.r) + g.scale(-dt);
        let r_new = v.norm();
        if !(r_new >= r_floor) {
            return Err(r_new);
        }
        let turn = (e.x * v.y - e.y * v.x).atan2(e.dot(v));
        self.frame = self.frame.rotate_direction(turn);
        self.r = r_new;
        Ok(())
    }
}

/// Weighted particles approximating the density `u(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    particles: Vec<Particle>,
    time: f64,
    seed: u64,
    total_mass: f64,
}

impl Ensemble {
    pub fn new(particles: Vec<Particle>, seed: u64) -> Self {
        Self::from_parts(particles, 0.0, seed)
    }

    pub fn from_parts(particles: Vec<Particle>, time: f64, seed: u64) -> Self {
        let total_mass = particles.iter().map(|p| p.w).sum();
        Self {
            particles,
            time,
            seed,
            total_mass,
        }
    }

    #[inline]
    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Mass cached at construction.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// `Σ w` recomputed in particle order.
    pub fn current_mass(&self) -> f64 {
        self.particles.iter().map(|p| p.w).sum()
    }

    /// Base points and weights, the push-forward `π_* u`.
    pub fn sources(&self) -> Vec<(DiskPoint, f64)> {
        self.particles.iter().map(|p| (p.position(), p.w)).collect()
    }

    /// Copy with every speed multiplied by `lambda`.
    pub fn with_scaled_speeds(&self, lambda: f64) -> Result<Self, KineticsError> {
        let particles = self
            .particles
            .iter()
            .map(|p| p.with_scaled_speed(lambda))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            particles,
            ..self.clone()
        })
    }
}

/// Geodesic flow of every particle for time `dt`.
pub fn free_advance<E: Executor>(
    e: &mut Ensemble,
    surface: &SurfaceModel,
    dt: f64,
    exec: &E,
) -> Result<(), KineticsError> {
    let out = exec.update_indexed(&mut e.particles, |_, p| p.drift(surface, dt));
    first_error(out, |particle, source| KineticsError::Reduction {
        particle,
        source,
    })?;
    e.time += dt;
    Ok(())
}

/// Kicks every particle with the gradient of a frozen field.
pub fn kick<E: Executor, F: ScalarField>(
    e: &mut Ensemble,
    field: &F,
    dt: f64,
    r_floor: f64,
    exec: &E,
) -> Result<(), KineticsError> {
    let grads = gradients(e, field, exec);
    apply_kicks(e, &grads, dt, r_floor)
}

/// `∇Φ` at every particle position.
pub fn gradients<E: Executor, F: ScalarField>(e: &Ensemble, field: &F, exec: &E) -> Vec<Tangent> {
    let ps = &e.particles;
    exec.map_indexed(ps.len(), |i| field.gradient(ps[i].position()))
}

fn apply_kicks(
    e: &mut Ensemble,
    grads: &[Tangent],
    dt: f64,
    r_floor: f64,
) -> Result<(), KineticsError> {
    // validate first so a capture leaves the ensemble untouched
    let mut trial = e.particles.clone();
    for (i, (p, g)) in trial.iter_mut().zip(grads).enumerate() {
        p.kick(*g, dt, r_floor)
            .map_err(|r| KineticsError::NullSectionCapture { particle: i, r })?;
    }
    e.particles = trial;
    Ok(())
}

fn first_error<T>(
    results: Vec<Result<T, GeometryError>>,
    wrap: impl Fn(usize, GeometryError) -> KineticsError,
) -> Result<(), KineticsError> {
    for (i, r) in results.into_iter().enumerate() {
        if let Err(err) = r {
            return Err(wrap(i, err));
        }
    }
    Ok(())
}

/// Kick-drift-kick integrator for the self-consistent dynamics.
///
/// Each step kicks by half a step with the field of the current positions,
/// drifts, rebuilds the field at the new positions and kicks again. The field
/// built at the end of a step is reused for the first kick of the next one,
/// so every step costs one field build.
#[derive(Debug, Clone)]
pub struct Stepper {
    mean_field: MeanField,
    r_floor: f64,
    cache: Option<(f64, PotentialField, Vec<Tangent>)>,
}

impl Stepper {
    pub fn new(mean_field: MeanField, r_floor: f64) -> Self {
        Self {
            mean_field,
            r_floor,
            cache: None,
        }
    }

    pub fn mean_field(&self) -> &MeanField {
        &self.mean_field
    }

    pub fn r_floor(&self) -> f64 {
        self.r_floor
    }

    /// Drops cached fields; needed after modifying the ensemble externally.
    pub fn invalidate(&mut self) {
        self.cache = None;
    }

    /// Field of the current ensemble, reusing the cached one when valid.
    pub fn field<E: Executor>(&mut self, e: &Ensemble, exec: &E) -> &PotentialField {
        self.refresh(e, exec);
        &self.cache.as_ref().expect("refreshed").1
    }

    fn refresh<E: Executor>(&mut self, e: &Ensemble, exec: &E) {
        let valid = matches!(&self.cache, Some((t, _, g)) if *t == e.time && g.len() == e.len());
        if !valid {
            let field = self.mean_field.build(&e.sources(), exec);
            let grads = gradients(e, &field, exec);
            self.cache = Some((e.time, field, grads));
        }
    }

    pub fn step<E: Executor>(
        &mut self,
        e: &mut Ensemble,
        surface: &SurfaceModel,
        dt: f64,
        exec: &E,
    ) -> Result<(), KineticsError> {
        if self.mean_field.kernel().is_inert() {
            return free_advance(e, surface, dt, exec);
        }
        self.refresh(e, exec);
        let (_, _, grads) = self.cache.take().expect("refreshed");
        apply_kicks(e, &grads, 0.5 * dt, self.r_floor)?;
        free_advance(e, surface, dt, exec)?;
        self.refresh(e, exec);
        let grads = &self.cache.as_ref().expect("refreshed").2;
        apply_kicks(e, grads, 0.5 * dt, self.r_floor)
    }
}

/// One step with a fresh [`Stepper`].
pub fn step<E: Executor>(
    e: &mut Ensemble,
    mean_field: &MeanField,
    surface: &SurfaceModel,
    dt: f64,
    r_floor: f64,
    exec: &E,
) -> Result<(), KineticsError> {
    Stepper::new(mean_field.clone(), r_floor).step(e, surface, dt, exec)
}

/// Smallest and largest speed.
pub fn support_bounds(e: &Ensemble) -> (f64, f64) {
    e.particles
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.r), hi.max(p.r))
        })
}

/// `Σ w (r²/2 + Φ/2)`: the conserved energy of the self-consistent system.
pub fn energy<E: Executor>(e: &Ensemble, field: &PotentialField, exec: &E) -> f64 {
    let ps = &e.particles;
    let phi = exec.map_indexed(ps.len(), |i| field.evaluate_phi(ps[i].position()));
    ps.iter()
        .zip(phi)
        .map(|(p, f)| p.w * (0.5 * p.r * p.r + 0.5 * f))
        .sum()
}
