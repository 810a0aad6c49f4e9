//! Mean-field coupled cat map acting on grid densities of the unit torus.
//!
//! One step pulls the density back through `Ψ = F_{ε ω(u)} ∘ T`, where `T` is
//! a hyperbolic toral automorphism and `F_τ` the time-`τ` flow of a
//! divergence-free field `V`. The coupling `ω(u) = ∫ u φ` is evaluated before
//! the step. Pullbacks use semi-Lagrangian cubic interpolation (or an exact
//! spectral remap of the linear part); the interpolation defect of the mean
//! is removed after every step.

pub mod fft;

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand_distr::{Distribution, StandardNormal};

use crate::exec::Executor;
use crate::observables::TimeSeries;
use crate::rng;

/// Largest number of flow sub-steps per map step.
pub const MAX_SUBSTEPS: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ToyError {
    #[error("grid size {0} must be a power of two and at least 8")]
    GridSize(usize),
    #[error("grids of size {0} and {1} are not conformable")]
    Mismatch(usize, usize),
    #[error("map matrix has determinant {0}, expected 1")]
    Determinant(i64),
    #[error("map matrix has trace {0}; hyperbolicity needs |trace| > 2")]
    NotHyperbolic(i64),
    #[error("coupling observable has mean {0:e}, expected 0")]
    PhiMean(f64),
    #[error("stream mode ({0}, {1}) is not resolved by the grid")]
    Unresolved(i64, i64),
    #[error("discrete divergence of the drift field is {0:e}")]
    Divergence(f64),
    #[error("flow displacement needs {required} sub-steps, more than the cap {MAX_SUBSTEPS}")]
    Cfl { required: usize },
    #[error("steps must be at least 1")]
    Steps,
}

/// Real values on the nodes `((i + sx)/n, (j + sy)/n)` of the unit torus,
/// stored row-major in `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusField {
    n: usize,
    stagger: (f64, f64),
    values: Vec<f64>,
}

/// Default node offset: integer nodes along `x`, cell centres along `y`.
///
/// With both offsets zero the integer map sends nodes to nodes and the
/// pullback is an exact permutation, which never mixes.
pub const DEFAULT_STAGGER: (f64, f64) = (0.0, 0.5);

impl TorusField {
    pub fn new(n: usize, stagger: (f64, f64), values: Vec<f64>) -> Result<Self, ToyError> {
        if !n.is_power_of_two() || n < 8 {
            return Err(ToyError::GridSize(n));
        }
        if values.len() != n * n {
            return Err(ToyError::Mismatch(n * n, values.len()));
        }
        Ok(Self { n, stagger, values })
    }

    pub fn from_fn(
        n: usize,
        stagger: (f64, f64),
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, ToyError> {
        let values = (0..n * n)
            .map(|k| {
                let (x, y) = node(n, stagger, k / n, k % n);
                f(x, y)
            })
            .collect();
        Self::new(n, stagger, values)
    }

    pub fn constant(n: usize, stagger: (f64, f64), c: f64) -> Result<Self, ToyError> {
        Self::new(n, stagger, alloc::vec![c; n * n])
    }

    /// `mean + amplitude · N(0, 1)` independently at every node.
    pub fn noise(
        n: usize,
        stagger: (f64, f64),
        mean: f64,
        amplitude: f64,
        seed: u64,
    ) -> Result<Self, ToyError> {
        let mut rng = rng::stream(seed, 0);
        let values = (0..n * n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                mean + amplitude * z
            })
            .collect();
        Self::new(n, stagger, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stagger(&self) -> (f64, f64) {
        self.stagger
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        node(self.n, self.stagger, i, j)
    }

    /// Grid average in index order.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn remove_mean(mut self) -> Self {
        let m = self.mean();
        for v in &mut self.values {
            *v -= m;
        }
        self
    }

    /// `αu + βv`.
    pub fn combine(&self, alpha: f64, other: &TorusField, beta: f64) -> Result<Self, ToyError> {
        self.conformable(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Ok(Self {
            values,
            ..self.clone()
        })
    }

    fn conformable(&self, other: &TorusField) -> Result<(), ToyError> {
        if self.n != other.n || self.stagger != other.stagger {
            return Err(ToyError::Mismatch(self.n, other.n));
        }
        Ok(())
    }

    /// Tensor-product cubic Lagrange interpolation at a point of the torus.
    /// Interpolates deviations from the first node value so a constant field
    /// is reproduced exactly.
    #[inline]
    pub fn interpolate(&self, x: f64, y: f64) -> f64 {
        let n = self.n;
        let base = self.values[0];
        let gx = x * n as f64 - self.stagger.0;
        let gy = y * n as f64 - self.stagger.1;
        let fx = gx.floor();
        let fy = gy.floor();
        let wx = cubic_weights(gx - fx);
        let wy = cubic_weights(gy - fy);
        let ix = (fx as i64).rem_euclid(n as i64) as usize;
        let iy = (fy as i64).rem_euclid(n as i64) as usize;
        let mut acc = 0.0;
        for (a, wa) in wx.iter().enumerate() {
            let row = ((ix + n + a - 1) % n) * n;
            let mut inner = 0.0;
            for (b, wb) in wy.iter().enumerate() {
                inner += wb * (self.values[row + (iy + n + b - 1) % n] - base);
            }
            acc += wa * inner;
        }
        base + acc
    }

    /// Normalized Fourier coefficients `û(k)` with `u(x) = Σ û(k) e^{2πi k·x}`,
    /// indexed like the raw transform.
    pub fn fourier(&self) -> Vec<Complex64> {
        let n = self.n;
        let mut data: Vec<Complex64> = self
            .values
            .iter()
            .map(|v| Complex64::new(*v, 0.0))
            .collect();
        fft::fft2(&mut data, n, false);
        let norm = 1.0 / (n * n) as f64;
        for a in 0..n {
            for b in 0..n {
                let k = (fft::frequency(a, n), fft::frequency(b, n));
                data[a * n + b] *= norm * self.stagger_phase(k, -1.0);
            }
        }
        data
    }

    #[inline]
    fn stagger_phase(&self, k: (i64, i64), sign: f64) -> Complex64 {
        let arg =
            2.0 * PI * (k.0 as f64 * self.stagger.0 + k.1 as f64 * self.stagger.1) / self.n as f64;
        Complex64::from_polar(1.0, sign * arg)
    }
}

/// Reduces a coordinate to `[0, 1)`.
#[inline]
fn wrap_unit(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

#[inline]
fn node(n: usize, stagger: (f64, f64), i: usize, j: usize) -> (f64, f64) {
    (
        (i as f64 + stagger.0) / n as f64,
        (j as f64 + stagger.1) / n as f64,
    )
}

/// Lagrange weights for nodes at offsets -1, 0, 1, 2 and fractional position `t`.
#[inline]
fn cubic_weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// Integer matrix `T` of a toral automorphism.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CatMapSpec {
    pub matrix: [[i64; 2]; 2],
}

impl Default for CatMapSpec {
    fn default() -> Self {
        Self {
            matrix: [[2, 1], [1, 1]],
        }
    }
}

impl CatMapSpec {
    pub fn validate(&self) -> Result<(), ToyError> {
        let [[a, b], [c, d]] = self.matrix;
        let det = a * d - b * c;
        if det != 1 {
            return Err(ToyError::Determinant(det));
        }
        if (a + d).abs() <= 2 {
            return Err(ToyError::NotHyperbolic(a + d));
        }
        Ok(())
    }

    /// Expansion rate `log λ_max` of the map.
    pub fn lyapunov(&self) -> f64 {
        let tr = (self.matrix[0][0] + self.matrix[1][1]) as f64;
        ((tr.abs() + (tr * tr - 4.0).sqrt()) / 2.0).ln()
    }

    #[inline]
    fn apply_inverse(&self, x: f64, y: f64) -> (f64, f64) {
        let [[a, b], [c, d]] = self.matrix;
        let (a, b, c, d) = (a as f64, b as f64, c as f64, d as f64);
        (wrap_unit(d * x - b * y), wrap_unit(-c * x + a * y))
    }

    /// Image of a frequency under `k ↦ T^{-T} k`, so that
    /// `e^{2πi k·T^{-1}x} = e^{2πi k'·x}`.
    fn dual_inverse(&self, k: (i64, i64)) -> (i64, i64) {
        let [[a, b], [c, d]] = self.matrix;
        (d * k.0 - c * k.1, -b * k.0 + a * k.1)
    }
}

/// One Fourier mode `A cos(2π k·x + phase)` of the stream function.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StreamMode {
    pub k: [i64; 2],
    pub amplitude: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub phase: f64,
}

/// Coupling observable `φ`, drift field `V = (∂_y ψ, -∂_x ψ)` and strength `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpec {
    phi: TorusField,
    stream: Vec<StreamMode>,
    epsilon: f64,
    max_speed: f64,
}

impl CouplingSpec {
    pub fn new(phi: TorusField, stream: Vec<StreamMode>, epsilon: f64) -> Result<Self, ToyError> {
        let mean = phi.mean();
        if mean.abs() > 1e-12 {
            return Err(ToyError::PhiMean(mean));
        }
        let half = (phi.n / 2) as i64;
        for m in &stream {
            if m.k[0].abs() >= half || m.k[1].abs() >= half {
                return Err(ToyError::Unresolved(m.k[0], m.k[1]));
            }
        }
        let max_speed = stream
            .iter()
            .map(|m| {
                2.0 * PI * m.amplitude.abs() * ((m.k[0] * m.k[0] + m.k[1] * m.k[1]) as f64).sqrt()
            })
            .sum();
        let spec = Self {
            phi,
            stream,
            epsilon,
            max_speed,
        };
        let div = spec.divergence();
        if div > 1e-10 {
            return Err(ToyError::Divergence(div));
        }
        Ok(spec)
    }

    pub fn phi(&self) -> &TorusField {
        &self.phi
    }

    pub fn stream(&self) -> &[StreamMode] {
        &self.stream
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self {
            epsilon,
            ..self.clone()
        }
    }

    /// Upper bound on `|V|`.
    pub fn max_speed(&self) -> f64 {
        self.max_speed
    }

    #[inline]
    pub fn velocity(&self, x: f64, y: f64) -> (f64, f64) {
        let (mut vx, mut vy) = (0.0, 0.0);
        for m in &self.stream {
            let arg = 2.0 * PI * (m.k[0] as f64 * x + m.k[1] as f64 * y) + m.phase;
            let s = -2.0 * PI * m.amplitude * arg.sin();
            vx += s * m.k[1] as f64;
            vy -= s * m.k[0] as f64;
        }
        (vx, vy)
    }

    /// Largest nodal value of the spectral divergence of `V` sampled on the grid.
    pub fn divergence(&self) -> f64 {
        let n = self.phi.n;
        let mut vx = Vec::with_capacity(n * n);
        let mut vy = Vec::with_capacity(n * n);
        for k in 0..n * n {
            let (x, y) = self.phi.node(k / n, k % n);
            let (a, b) = self.velocity(x, y);
            vx.push(Complex64::new(a, 0.0));
            vy.push(Complex64::new(b, 0.0));
        }
        fft::fft2(&mut vx, n, false);
        fft::fft2(&mut vy, n, false);
        let mut div: Vec<Complex64> = (0..n * n)
            .map(|k| {
                let (kx, ky) = (
                    fft::frequency(k / n, n) as f64,
                    fft::frequency(k % n, n) as f64,
                );
                Complex64::new(0.0, 2.0 * PI) * (vx[k] * kx + vy[k] * ky)
            })
            .collect();
        fft::fft2(&mut div, n, true);
        let norm = 1.0 / (n * n) as f64;
        div.iter().map(|z| z.norm() * norm).fold(0.0, f64::max)
    }

    /// Point reached from `(x, y)` by flowing along `V` for time `tau`, with
    /// RK4 sub-steps keeping each displacement below half a grid cell.
    fn flow(&self, x: f64, y: f64, tau: f64, substeps: usize) -> (f64, f64) {
        let h = tau / substeps as f64;
        let (mut x, mut y) = (x, y);
        for _ in 0..substeps {
            let k1 = self.velocity(x, y);
            let k2 = self.velocity(x + 0.5 * h * k1.0, y + 0.5 * h * k1.1);
            let k3 = self.velocity(x + 0.5 * h * k2.0, y + 0.5 * h * k2.1);
            let k4 = self.velocity(x + h * k3.0, y + h * k3.1);
            x += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            y += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        }
        (wrap_unit(x), wrap_unit(y))
    }

    fn substeps(&self, tau: f64) -> Result<usize, ToyError> {
        let cell = 1.0 / self.phi.n as f64;
        let need = (tau.abs() * self.max_speed / (0.5 * cell)).ceil();
        let need = if need.is_finite() {
            (need as usize).max(1)
        } else {
            usize::MAX
        };
        if need > MAX_SUBSTEPS {
            return Err(ToyError::Cfl { required: need });
        }
        Ok(need)
    }
}

/// How the pullback is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Interpolation {
    /// Semi-Lagrangian cubic interpolation of the whole map.
    #[default]
    Cubic,
    /// Exact remap of resolved Fourier modes under `T`, with modes leaving the
    /// grid band dropped; the `V` flow still uses cubic interpolation.
    Spectral,
}

/// `ω(u) = ∫ u φ` by the grid rule.
pub fn omega(u: &TorusField, phi: &TorusField) -> Result<f64, ToyError> {
    u.conformable(phi)?;
    let s: f64 = u.values.iter().zip(&phi.values).map(|(a, b)| a * b).sum();
    Ok(s / u.values.len() as f64)
}

/// `(Σ_{k≠0} |û(k)|² (1 + |k|²)^{-s})^{1/2}`.
pub fn weak_norm(u: &TorusField, s: f64) -> f64 {
    let n = u.n;
    let c = u.fourier();
    let mut acc = 0.0;
    for a in 0..n {
        for b in 0..n {
            if a == 0 && b == 0 {
                continue;
            }
            let (kx, ky) = (fft::frequency(a, n) as f64, fft::frequency(b, n) as f64);
            acc += c[a * n + b].norm_sqr() * (1.0 + kx * kx + ky * ky).powf(-s);
        }
    }
    acc.sqrt()
}

fn spectral_pullback(u: &TorusField, map: &CatMapSpec) -> TorusField {
    let n = u.n;
    let half = (n / 2) as i64;
    let c = u.fourier();
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); n * n];
    for a in 0..n {
        for b in 0..n {
            let k = (fft::frequency(a, n), fft::frequency(b, n));
            if k.0 == -half || k.1 == -half {
                continue;
            }
            let k2 = map.dual_inverse(k);
            if k2.0.abs() >= half || k2.1.abs() >= half {
                continue;
            }
            let ia = k2.0.rem_euclid(n as i64) as usize;
            let ib = k2.1.rem_euclid(n as i64) as usize;
            out[ia * n + ib] = c[a * n + b] * u.stagger_phase(k2, 1.0);
        }
    }
    fft::fft2(&mut out, n, true);
    TorusField {
        values: out.iter().map(|z| z.re).collect(),
        ..u.clone()
    }
}

/// One step `u ↦ u ∘ Ψ^{-1}` followed by the mean correction.
pub fn coupled_step<E: Executor>(
    u: &TorusField,
    map: &CatMapSpec,
    coupling: &CouplingSpec,
    interp: Interpolation,
    exec: &E,
) -> Result<TorusField, ToyError> {
    map.validate()?;
    u.conformable(&coupling.phi)?;
    let n = u.n;
    let tau = coupling.epsilon * omega(u, &coupling.phi)?;
    let moving = tau != 0.0 && !coupling.stream.is_empty();
    let substeps = if moving { coupling.substeps(tau)? } else { 1 };
    let back = |x: f64, y: f64| {
        if moving {
            coupling.flow(x, y, -tau, substeps)
        } else {
            (x, y)
        }
    };
    let remapped;
    let (source, linear_done) = match interp {
        Interpolation::Cubic => (u, false),
        Interpolation::Spectral => {
            remapped = spectral_pullback(u, map);
            if !moving {
                return Ok(mean_corrected(remapped, u.mean()));
            }
            (&remapped, true)
        }
    };
    let rows = exec.map_indexed(n, |i| {
        (0..n)
            .map(|j| {
                let (x, y) = u.node(i, j);
                let (x, y) = back(x, y);
                let (x, y) = if linear_done {
                    (x, y)
                } else {
                    map.apply_inverse(x, y)
                };
                source.interpolate(x, y)
            })
            .collect::<Vec<f64>>()
    });
    let values = rows.into_iter().flatten().collect();
    Ok(mean_corrected(
        TorusField {
            values,
            ..u.clone()
        },
        u.mean(),
    ))
}

fn mean_corrected(mut v: TorusField, target: f64) -> TorusField {
    let defect = target - v.mean();
    if defect != 0.0 {
        for x in &mut v.values {
            *x += defect;
        }
    }
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyRun {
    /// `|ω(u_k)|` at steps `k = 0, 1, …`.
    pub omega: TimeSeries,
    pub weak_norm: TimeSeries,
    /// Largest `|mean(u_k) - mean(u_0)|` seen.
    pub mean_defect: f64,
    /// Step at which `|ω|` exceeded ten times its initial value, if it did.
    pub blowup: Option<usize>,
    pub last: TorusField,
}

/// Iterates [`coupled_step`] up to `steps` times, recording `|ω|` and the weak
/// norm of order `order` before each step and after the last.
pub fn run_toy<E: Executor>(
    u0: &TorusField,
    map: &CatMapSpec,
    coupling: &CouplingSpec,
    steps: usize,
    order: f64,
    interp: Interpolation,
    exec: &E,
) -> Result<ToyRun, ToyError> {
    if steps == 0 {
        return Err(ToyError::Steps);
    }
    let mean0 = u0.mean();
    let w0 = omega(u0, &coupling.phi)?.abs();
    let mut times = Vec::with_capacity(steps + 1);
    let mut om = Vec::with_capacity(steps + 1);
    let mut wn = Vec::with_capacity(steps + 1);
    let mut u = u0.clone();
    let mut mean_defect: f64 = 0.0;
    let mut blowup = None;
    for k in 0..=steps {
        let w = omega(&u, &coupling.phi)?.abs();
        times.push(k as f64);
        om.push(w);
        wn.push(weak_norm(&u, order));
        mean_defect = mean_defect.max((u.mean() - mean0).abs());
        if w > 10.0 * w0 {
            blowup = Some(k);
            break;
        }
        if k < steps {
            u = coupled_step(&u, map, coupling, interp, exec)?;
        }
    }
    Ok(ToyRun {
        omega: TimeSeries {
            times: times.clone(),
            values: om,
            label: "omega".into(),
        },
        weak_norm: TimeSeries {
            times,
            values: wn,
            label: "weak_norm".into(),
        },
        mean_defect,
        blowup,
        last: u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Serial;

    fn quiet(n: usize) -> CouplingSpec {
        let phi = TorusField::from_fn(n, DEFAULT_STAGGER, |x, y| (2.0 * PI * (x + 2.0 * y)).cos())
            .unwrap();
        CouplingSpec::new(phi.remove_mean(), alloc::vec![], 0.0).unwrap()
    }

    #[test]
    fn constant_is_fixed() {
        let u = TorusField::constant(16, DEFAULT_STAGGER, 0.7).unwrap();
        let c = quiet(16);
        for interp in [Interpolation::Cubic, Interpolation::Spectral] {
            let v = coupled_step(&u, &CatMapSpec::default(), &c, interp, &Serial).unwrap();
            if interp == Interpolation::Cubic {
                assert_eq!(v, u);
            } else {
                assert!(v.values.iter().all(|x| (x - 0.7).abs() < 1e-14));
            }
        }
    }

    #[test]
    fn map_validation() {
        assert!(CatMapSpec::default().validate().is_ok());
        assert_eq!(
            CatMapSpec {
                matrix: [[1, 1], [0, 1]]
            }
            .validate(),
            Err(ToyError::NotHyperbolic(2))
        );
        assert_eq!(
            CatMapSpec {
                matrix: [[2, 1], [1, 2]]
            }
            .validate(),
            Err(ToyError::Determinant(3))
        );
    }

    #[test]
    fn divergence_free_and_mean_checked() {
        let n = 32;
        let phi = TorusField::from_fn(n, DEFAULT_STAGGER, |x, _| (2.0 * PI * x).sin()).unwrap();
        let stream = alloc::vec![StreamMode {
            k: [1, 2],
            amplitude: 0.1,
            phase: 0.3
        }];
        let c = CouplingSpec::new(phi.clone().remove_mean(), stream, 1.0).unwrap();
        assert!(c.divergence() < 1e-12);
        let biased = TorusField::from_fn(n, DEFAULT_STAGGER, |_, _| 0.1).unwrap();
        assert!(matches!(
            CouplingSpec::new(biased, alloc::vec![], 1.0),
            Err(ToyError::PhiMean(_))
        ));
        let far = alloc::vec![StreamMode {
            k: [16, 0],
            amplitude: 0.1,
            phase: 0.0
        }];
        assert!(CouplingSpec::new(phi.remove_mean(), far, 1.0).is_err());
    }

    #[test]
    fn cfl_cap() {
        let n = 32;
        let phi = TorusField::from_fn(n, DEFAULT_STAGGER, |x, _| (2.0 * PI * x).cos()).unwrap();
        let stream = alloc::vec![StreamMode {
            k: [1, 0],
            amplitude: 1.0,
            phase: 0.0
        }];
        let c = CouplingSpec::new(phi.clone().remove_mean(), stream, 1e3).unwrap();
        let u = phi
            .combine(
                1.0,
                &TorusField::constant(n, DEFAULT_STAGGER, 1.0).unwrap(),
                1.0,
            )
            .unwrap();
        let err = coupled_step(
            &u,
            &CatMapSpec::default(),
            &c,
            Interpolation::Cubic,
            &Serial,
        )
        .unwrap_err();
        assert!(matches!(err, ToyError::Cfl { .. }));
    }
}
