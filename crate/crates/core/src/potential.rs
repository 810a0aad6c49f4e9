//! Smooth zero-mean mean-field interaction on the surface.
//!
//! The kernel is `K(x, y) = ε (k(d(x, y)) - c)` with `k` compactly supported
//! in `[0, s_max]` and `c` chosen so that `K(x, ·)` integrates to zero. A
//! [`PotentialField`] is an immutable snapshot of weighted source points with
//! their relevant images under the covering group binned on a Euclidean grid.

use alloc::vec::Vec;
use core::f64::consts::PI;

// float methods for no_std builds; inherent ones shadow these when std is linked
#[allow(unused_imports)]
use num_traits::Float;

use crate::exec::Executor;
use crate::geometry::{
    grad_distance_parts, half_sinh_sqr, DiskPoint, MoebiusElement, SurfaceModel, Tangent,
};
use crate::phase::{poly_bump, poly_bump_deriv};
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PotentialError {
    #[error("kernel support {s_max} must be positive and below the injectivity radius {limit}")]
    Support { s_max: f64, limit: f64 },
    #[error("kernel amplitude {0} is not finite")]
    Amplitude(f64),
    #[error("grid resolution {0} is below the minimum of 16")]
    GridResolution(usize),
}

/// Radial profile `k(s)` of the interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum KernelProfile {
    /// `(1 - (s/s_max)²)³`.
    #[default]
    Bump,
    /// Indicator of `[0, s_max)`; not smooth, kept for closed-form checks.
    Constant,
    Zero,
}

impl KernelProfile {
    #[inline]
    pub fn value(self, s: f64, s_max: f64) -> f64 {
        match self {
            KernelProfile::Bump => poly_bump(s / s_max),
            KernelProfile::Constant => {
                if s < s_max {
                    1.0
                } else {
                    0.0
                }
            }
            KernelProfile::Zero => 0.0,
        }
    }

    #[inline]
    pub fn derivative(self, s: f64, s_max: f64) -> f64 {
        match self {
            KernelProfile::Bump => poly_bump_deriv(s / s_max) / s_max,
            KernelProfile::Constant | KernelProfile::Zero => 0.0,
        }
    }
}

/// `c = (2π / area) ∫₀^{s_max} k(s) sinh(s) ds`.
pub fn zero_mean_constant(
    profile: KernelProfile,
    s_max: f64,
    surface: &SurfaceModel,
) -> Result<f64, PotentialError> {
    if !(s_max > 0.0 && s_max < surface.injectivity_radius) {
        return Err(PotentialError::Support {
            s_max,
            limit: surface.injectivity_radius,
        });
    }
    let ball = match profile {
        KernelProfile::Zero => 0.0,
        KernelProfile::Constant => 2.0 * PI * (s_max.cosh() - 1.0),
        KernelProfile::Bump => {
            let gl = GaussLegendre::new(32);
            2.0 * PI * gl.integrate_composite(0.0, s_max, 4, |s| profile.value(s, s_max) * s.sinh())
        }
    };
    Ok(ball / surface.area)
}

/// Validated kernel with its cached zero-mean constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    profile: KernelProfile,
    s_max: f64,
    amplitude: f64,
    c: f64,
}

impl KernelSpec {
    pub fn new(
        profile: KernelProfile,
        s_max: f64,
        amplitude: f64,
        surface: &SurfaceModel,
    ) -> Result<Self, PotentialError> {
        if !amplitude.is_finite() {
            return Err(PotentialError::Amplitude(amplitude));
        }
        let c = zero_mean_constant(profile, s_max, surface)?;
        Ok(Self {
            profile,
            s_max,
            amplitude,
            c,
        })
    }

    /// Bump profile with support half the injectivity radius.
    pub fn default_bump(amplitude: f64, surface: &SurfaceModel) -> Result<Self, PotentialError> {
        Self::new(
            KernelProfile::Bump,
            0.5 * surface.injectivity_radius,
            amplitude,
            surface,
        )
    }

    pub fn profile(&self) -> KernelProfile {
        self.profile
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn zero_mean_constant(&self) -> f64 {
        self.c
    }

    /// Same kernel with a different amplitude.
    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Self { amplitude, ..*self }
    }

    /// `true` when the field is identically zero.
    pub fn is_inert(&self) -> bool {
        self.amplitude == 0.0 || self.profile == KernelProfile::Zero
    }

    /// `K` as a function of the distance between the two points.
    #[inline]
    pub fn kernel(&self, s: f64) -> f64 {
        self.amplitude * (self.profile.value(s, self.s_max) - self.c)
    }
}

/// A scalar field on the surface with a surface gradient.
pub trait ScalarField: Sync {
    fn value(&self, x: DiskPoint) -> f64;
    /// Gradient in orthonormal chart components.
    fn gradient(&self, x: DiskPoint) -> Tangent;
}

/// Builder holding everything about the interaction that does not depend on
/// the sources.
#[derive(Debug, Clone)]
pub struct MeanField {
    kernel: KernelSpec,
    lifts: Vec<MoebiusElement>,
    keep_sqr: f64,
    half: f64,
    bins: usize,
}

/// Default number of bins per axis.
pub const DEFAULT_BINS: usize = 32;

impl MeanField {
    pub fn new(surface: &SurfaceModel, kernel: KernelSpec) -> Self {
        Self::with_bins(surface, kernel, DEFAULT_BINS)
    }

    pub fn with_bins(surface: &SurfaceModel, kernel: KernelSpec, bins: usize) -> Self {
        let r = surface.circumradius();
        let reach = r + kernel.s_max;
        let lifts = surface.lifts_within(2.0 * r + kernel.s_max);
        Self {
            kernel,
            lifts,
            keep_sqr: (0.5 * reach).sinh().powi(2),
            half: (0.5 * reach).tanh(),
            bins: bins.max(1),
        }
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    /// Snapshot of the potential generated by weighted points of the domain.
    pub fn build<E: Executor>(&self, sources: &[(DiskPoint, f64)], exec: &E) -> PotentialField {
        let total_weight: f64 = sources.iter().map(|s| s.1).sum();
        let mut field = PotentialField {
            kernel: self.kernel,
            total_weight,
            weight_sqr: sources.iter().map(|s| s.1 * s.1).sum(),
            source_count: sources.len(),
            ghosts: Vec::new(),
            starts: Vec::new(),
            half: self.half,
            bins: self.bins,
            ball_sqr: (0.5 * self.kernel.s_max).sinh().powi(2),
        };
        if self.kernel.is_inert() || sources.is_empty() {
            field.starts = alloc::vec![0; self.bins * self.bins + 1];
            return field;
        }
        let images: Vec<Vec<(DiskPoint, f64)>> = exec.map_indexed(sources.len(), |j| {
            let (p, w) = sources[j];
            self.lifts
                .iter()
                .map(|g| g.apply_unchecked(p))
                .filter(|q| half_sinh_sqr(DiskPoint::ORIGIN, *q) <= self.keep_sqr)
                .map(|q| (q, w))
                .collect()
        });
        // counting sort into bins, stable in source order
        let nb = self.bins * self.bins;
        let mut counts = alloc::vec![0usize; nb + 1];
        let mut cells = Vec::new();
        for list in &images {
            for (q, _) in list {
                let c = field.cell_of(*q);
                counts[c + 1] += 1;
                cells.push(c);
            }
        }
        for i in 0..nb {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut ghosts = alloc::vec![(DiskPoint::ORIGIN, 0.0); cells.len()];
        for ((q, w), c) in images.iter().flatten().zip(&cells) {
            ghosts[fill[*c]] = (*q, *w);
            fill[*c] += 1;
        }
        field.ghosts = ghosts;
        field.starts = counts;
        field
    }
}

/// Immutable snapshot of `Φ(u)` for a fixed set of sources.
#[derive(Debug, Clone)]
pub struct PotentialField {
    kernel: KernelSpec,
    total_weight: f64,
    weight_sqr: f64,
    source_count: usize,
    ghosts: Vec<(DiskPoint, f64)>,
    starts: Vec<usize>,
    half: f64,
    bins: usize,
    ball_sqr: f64,
}

impl PotentialField {
    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// Number of source images kept after culling.
    pub fn ghost_count(&self) -> usize {
        self.ghosts.len()
    }

    #[inline]
    fn axis_cell(&self, v: f64) -> usize {
        let t = (v + self.half) / (2.0 * self.half) * self.bins as f64;
        (t.max(0.0) as usize).min(self.bins - 1)
    }

    #[inline]
    fn cell_of(&self, q: DiskPoint) -> usize {
        self.axis_cell(q.im) * self.bins + self.axis_cell(q.re)
    }

    /// Visits every ghost with `d(x, ghost) < s_max`, passing `(ghost, w, sinh²(d/2))`.
    #[inline]
    fn for_each_near(&self, x: DiskPoint, mut f: impl FnMut(DiskPoint, f64, f64)) {
        if self.ghosts.is_empty() {
            return;
        }
        // the hyperbolic ball is a Euclidean disk; bound it by its box
        let rz = x.norm_sqr().sqrt();
        let dz = 2.0 * rz.atanh();
        let s = self.kernel.s_max;
        let p1 = (0.5 * (dz + s)).tanh();
        let p2 = (0.5 * (dz - s)).tanh();
        let (ux, uy) = if rz > 0.0 {
            (x.re / rz, x.im / rz)
        } else {
            (1.0, 0.0)
        };
        let cm = 0.5 * (p1 + p2);
        let rad = 0.5 * (p1 - p2) * (1.0 + 1e-9) + 1e-12;
        let (cx, cy) = (ux * cm, uy * cm);
        let (i0, i1) = (self.axis_cell(cx - rad), self.axis_cell(cx + rad));
        let (j0, j1) = (self.axis_cell(cy - rad), self.axis_cell(cy + rad));
        for j in j0..=j1 {
            let row = j * self.bins;
            let lo = self.starts[row + i0];
            let hi = self.starts[row + i1 + 1];
            for &(q, w) in &self.ghosts[lo..hi] {
                let h = half_sinh_sqr(x, q);
                if h < self.ball_sqr {
                    f(q, w, h);
                }
            }
        }
    }

    /// `Φ(x)` at a point of the fundamental domain.
    pub fn evaluate_phi(&self, x: DiskPoint) -> f64 {
        if self.kernel.is_inert() {
            return 0.0;
        }
        let k = &self.kernel;
        let mut acc = 0.0;
        self.for_each_near(x, |_, w, h| {
            acc += w * k.profile.value(2.0 * h.sqrt().asinh(), k.s_max);
        });
        k.amplitude * (acc - k.c * self.total_weight)
    }

    /// Surface gradient of `Φ` at a point of the fundamental domain.
    pub fn grad_phi(&self, x: DiskPoint) -> Tangent {
        if self.kernel.is_inert() {
            return Tangent::ZERO;
        }
        let k = &self.kernel;
        let (mut gx, mut gy) = (0.0, 0.0);
        self.for_each_near(x, |q, w, h| {
            let dx = x.re - q.re;
            let dy = x.im - q.im;
            let e = (dx * dx + dy * dy).sqrt();
            if e == 0.0 {
                return;
            }
            let kp = k.profile.derivative(2.0 * h.sqrt().asinh(), k.s_max);
            let g = grad_distance_parts(x, q, dx, dy, e);
            gx += w * kp * g.x;
            gy += w * kp * g.y;
        });
        Tangent::new(k.amplitude * gx, k.amplitude * gy)
    }

    /// Sup norms of `Φ` and `|∇Φ|` over [`domain_grid`].
    pub fn phi_norms<E: Executor>(
        &self,
        surface: &SurfaceModel,
        grid_resolution: usize,
        exec: &E,
    ) -> Result<(f64, f64), PotentialError> {
        let grid = domain_grid(surface, grid_resolution)?;
        Ok(self.norms_on(&grid, exec))
    }

    /// Sup norms of `Φ` and `|∇Φ|` over the given points.
    pub fn norms_on<E: Executor>(&self, grid: &[DiskPoint], exec: &E) -> (f64, f64) {
        if self.kernel.is_inert() || self.total_weight == 0.0 && self.ghosts.is_empty() {
            return (0.0, 0.0);
        }
        let vals = exec.map_indexed(grid.len(), |i| {
            (
                self.evaluate_phi(grid[i]).abs(),
                self.grad_phi(grid[i]).norm(),
            )
        });
        vals.into_iter()
            .fold((0.0, 0.0), |(a, b), (v, g)| (a.max(v), b.max(g)))
    }
}

impl PotentialField {
    /// Standard deviation of `Φ(x)` under resampling the sources with
    /// replacement, in closed form: `Σ tᵢ² - (Σ tᵢ)²/n` with `tᵢ` the
    /// contribution of source `i`. A source has at most one image within
    /// `s_max < inj` of `x`, so the near sum is per source.
    pub fn resampling_stddev(&self, x: DiskPoint) -> f64 {
        if self.kernel.is_inert() || self.source_count == 0 {
            return 0.0;
        }
        let k = &self.kernel;
        let mut near = 0.0;
        let mut acc = 0.0;
        self.for_each_near(x, |_, w, h| {
            let v = k.profile.value(2.0 * h.sqrt().asinh(), k.s_max);
            acc += w * v;
            near += w * w * ((v - k.c) * (v - k.c) - k.c * k.c);
        });
        let sum_sqr = near + k.c * k.c * self.weight_sqr;
        let mean = acc - k.c * self.total_weight;
        let var = sum_sqr - mean * mean / self.source_count as f64;
        k.amplitude.abs() * var.max(0.0).sqrt()
    }

    /// Level below which `‖Φ‖_{C⁰}` over `grid` is indistinguishable from
    /// sampling noise: the largest resampling deviation times
    /// [`sup_noise_quantile`] of the number of points.
    pub fn noise_floor_on<E: Executor>(&self, grid: &[DiskPoint], exec: &E) -> f64 {
        let sd = exec.map_indexed(grid.len(), |i| self.resampling_stddev(grid[i]));
        sup_noise_quantile(grid.len()) * sd.into_iter().fold(0.0, f64::max)
    }
}

/// Two-sided Gaussian tail `P(|Z| > z)`.
fn two_sided_tail(z: f64) -> f64 {
    libm::erfc(z / core::f64::consts::SQRT_2)
}

/// Multiple of σ that the largest of `m` centred Gaussians of deviation at
/// most σ exceeds with probability at most `P(|Z| > 3)`, by the union bound.
/// Equals 3 for a single point; about 4.57 for five hundred.
pub fn sup_noise_quantile(m: usize) -> f64 {
    let target = two_sided_tail(3.0) / m.max(1) as f64;
    let (mut lo, mut hi) = (0.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if two_sided_tail(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl ScalarField for PotentialField {
    fn value(&self, x: DiskPoint) -> f64 {
        self.evaluate_phi(x)
    }

    fn gradient(&self, x: DiskPoint) -> Tangent {
        self.grad_phi(x)
    }
}

/// Quasi-uniform points covering the fundamental domain.
///
/// Rings at hyperbolic radii `(i + ½) h`, `h = circumradius / resolution`,
/// carry about `2π sinh(s) / h` equally spaced points each; points outside the
/// domain are dropped. The origin is included.
pub fn domain_grid(
    surface: &SurfaceModel,
    resolution: usize,
) -> Result<Vec<DiskPoint>, PotentialError> {
    if resolution < 16 {
        return Err(PotentialError::GridResolution(resolution));
    }
    let h = surface.circumradius() / resolution as f64;
    let mut pts = alloc::vec![DiskPoint::ORIGIN];
    for i in 0..resolution {
        let s = (i as f64 + 0.5) * h;
        let m = ((2.0 * PI * s.sinh() / h).ceil() as usize).max(8);
        // offset alternate rings to avoid radial alignment
        let shift = if i % 2 == 0 { 0.0 } else { 0.5 };
        for j in 0..m {
            let a = 2.0 * PI * (j as f64 + shift) / m as f64;
            let p = DiskPoint::at_distance(s, a);
            if surface.contains(p) {
                pts.push(p);
            }
        }
    }
    Ok(pts)
}

/// Reference evaluation summing over every source and every short lift.
pub fn brute_force_phi(
    kernel: &KernelSpec,
    surface: &SurfaceModel,
    sources: &[(DiskPoint, f64)],
    x: DiskPoint,
) -> f64 {
    let lifts = surface.lifts_within(2.0 * surface.circumradius() + kernel.s_max);
    let mut acc = 0.0;
    let mut total = 0.0;
    for &(p, w) in sources {
        total += w;
        for g in &lifts {
            let d = crate::geometry::distance(x, g.apply_unchecked(p));
            if d < kernel.s_max {
                acc += w * kernel.profile.value(d, kernel.s_max);
            }
        }
    }
    kernel.amplitude * (acc - kernel.c * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Serial;
    use crate::geometry::build_bolza;

    #[test]
    fn constants() {
        let s = build_bolza().unwrap();
        let sm = 0.5 * s.injectivity_radius;
        assert_eq!(
            zero_mean_constant(KernelProfile::Zero, sm, &s).unwrap(),
            0.0
        );
        let c1 = zero_mean_constant(KernelProfile::Constant, sm, &s).unwrap();
        assert!((c1 - 2.0 * PI * (sm.cosh() - 1.0) / s.area).abs() < 1e-14);
        assert!(zero_mean_constant(KernelProfile::Bump, s.injectivity_radius, &s).is_err());
    }

    #[test]
    fn empty_and_single_source() {
        let s = build_bolza().unwrap();
        let k = KernelSpec::default_bump(0.3, &s).unwrap();
        let mf = MeanField::new(&s, k);
        let empty = mf.build(&[], &Serial);
        let x = DiskPoint::new(0.1, 0.2);
        assert_eq!(empty.evaluate_phi(x), 0.0);
        assert_eq!(empty.grad_phi(x), Tangent::ZERO);
        let one = mf.build(&[(x, 1.0)], &Serial);
        let expect = 0.3 * (1.0 - k.zero_mean_constant());
        assert!((one.evaluate_phi(x) - expect).abs() < 1e-14);
        assert_eq!(one.grad_phi(x), Tangent::ZERO);
    }

    #[test]
    fn sup_quantile() {
        assert!((sup_noise_quantile(1) - 3.0).abs() < 1e-12);
        let z = sup_noise_quantile(547);
        assert!((z - 4.5675).abs() < 1e-3, "{z}");
        assert!(sup_noise_quantile(5000) > z);
    }

    #[test]
    fn grid_covers_domain() {
        let s = build_bolza().unwrap();
        let g = domain_grid(&s, 16).unwrap();
        assert!(g.iter().all(|p| s.contains(*p)));
        assert!(g.len() > 300);
        assert!(domain_grid(&s, 8).is_err());
    }
}
