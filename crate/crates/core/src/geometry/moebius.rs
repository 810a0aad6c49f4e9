//! Unit-determinant Möbius frames and points of the Poincaré disk.
//!
//! A frame is stored as a real `SL(2,R)` matrix acting on the upper
//! half-plane; every action is conjugated by the Cayley map `w ↦ (w-i)/(w+i)`
//! so that the observable coordinates live in the unit disk. The frame `g`
//! represents the unit tangent vector obtained by pushing forward the unit
//! vector at the origin pointing along the positive real axis.

use core::fmt;

// float methods for no_std builds; inherent ones shadow these when std is linked
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use super::GeometryError;

/// Points closer than this to the unit circle are rejected.
pub const BOUNDARY_GUARD: f64 = 1e-9;

/// A point of the Poincaré disk.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiskPoint {
    pub re: f64,
    pub im: f64,
}

impl DiskPoint {
    pub const ORIGIN: DiskPoint = DiskPoint { re: 0.0, im: 0.0 };

    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    /// Point at Euclidean radius `radius` and polar angle `angle`.
    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Self::new(radius * angle.cos(), radius * angle.sin())
    }

    /// Point at hyperbolic distance `s` from the origin in direction `angle`.
    pub fn at_distance(s: f64, angle: f64) -> Self {
        Self::from_polar((0.5 * s).tanh(), angle)
    }

    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    #[inline]
    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    #[inline]
    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z.re, z.im)
    }

    /// Conformal factor `2 / (1 - |z|²)` of the disk metric.
    #[inline]
    pub fn conformal_factor(self) -> f64 {
        2.0 / (1.0 - self.norm_sqr())
    }

    pub fn is_inside(self) -> bool {
        self.norm_sqr() < 1.0
    }
}

/// A tangent vector expressed in the orthonormal basis `(∂x, ∂y) / λ(z)`
/// of the disk chart, so its hyperbolic norm is the Euclidean norm of the
/// components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tangent {
    pub x: f64,
    pub y: f64,
}

impl Tangent {
    pub const ZERO: Tangent = Tangent { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(angle: f64) -> Self {
        Self::new(angle.cos(), angle.sin())
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    #[inline]
    pub fn dot(self, other: Tangent) -> f64 {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn scale(self, s: f64) -> Tangent {
        Tangent::new(self.x * s, self.y * s)
    }

    /// Euclidean components of this vector in the disk chart at `at`.
    pub fn to_euclidean(self, at: DiskPoint) -> (f64, f64) {
        let inv = 1.0 / at.conformal_factor();
        (self.x * inv, self.y * inv)
    }
}

/// Real 2×2 matrix of unit determinant.
#[derive(Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MoebiusElement {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl fmt::Debug for MoebiusElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{:e}, {:e}], [{:e}, {:e}]]",
            self.a, self.b, self.c, self.d
        )
    }
}

impl Default for MoebiusElement {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl MoebiusElement {
    pub const IDENTITY: MoebiusElement = MoebiusElement {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Builds an element from raw entries, rescaling to unit determinant.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, GeometryError> {
        let det = a * d - b * c;
        if !(det > 0.0) || !det.is_finite() {
            return Err(GeometryError::Degenerate { det });
        }
        Ok(Self { a, b, c, d }.renormalized())
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    fn renormalized(self) -> Self {
        let s = 1.0 / self.det().sqrt();
        Self {
            a: self.a * s,
            b: self.b * s,
            c: self.c * s,
            d: self.d * s,
        }
    }

    /// Hyperbolic translation of length `t` along the real diameter.
    pub fn translation(t: f64) -> Self {
        let e = (0.5 * t).exp();
        Self {
            a: e,
            b: 0.0,
            c: 0.0,
            d: 1.0 / e,
        }
    }

    /// Rotation about the origin by `angle` (acting on directions by `+angle`).
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = (0.5 * angle).sin_cos();
        Self {
            a: c,
            b: s,
            c: -s,
            d: c,
        }
    }

    /// Matrix product `self · other`, renormalized to determinant one.
    pub fn compose(&self, other: &MoebiusElement) -> MoebiusElement {
        Self {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
        .renormalized()
    }

    pub fn inverse(&self) -> MoebiusElement {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    /// Translation length of a hyperbolic element; zero for elliptic or
    /// parabolic ones.
    pub fn translation_length(&self) -> f64 {
        let t = 0.5 * self.trace().abs();
        if t <= 1.0 {
            0.0
        } else {
            2.0 * t.acosh()
        }
    }

    /// Coefficients `(α, β)` of the conjugated disk map
    /// `z ↦ (αz + β) / (β̄z + ᾱ)`.
    #[inline]
    pub fn disk_coefficients(&self) -> (Complex64, Complex64) {
        let alpha = Complex64::new(0.5 * (self.a + self.d), 0.5 * (self.b - self.c));
        let beta = Complex64::new(0.5 * (self.a - self.d), -0.5 * (self.b + self.c));
        (alpha, beta)
    }

    /// Inverse of [`disk_coefficients`](Self::disk_coefficients).
    pub fn from_disk_coefficients(
        alpha: Complex64,
        beta: Complex64,
    ) -> Result<Self, GeometryError> {
        Self::new(
            alpha.re + beta.re,
            alpha.im - beta.im,
            -alpha.im - beta.im,
            alpha.re - beta.re,
        )
    }

    /// Isometric action on the disk.
    pub fn apply(&self, z: DiskPoint) -> Result<DiskPoint, GeometryError> {
        if z.norm_sqr() > (1.0 - BOUNDARY_GUARD) * (1.0 - BOUNDARY_GUARD) {
            return Err(GeometryError::NearBoundary {
                radius: z.norm_sqr().sqrt(),
            });
        }
        Ok(self.apply_unchecked(z))
    }

    #[inline]
    pub(crate) fn apply_unchecked(&self, z: DiskPoint) -> DiskPoint {
        let (alpha, beta) = self.disk_coefficients();
        let z = z.to_complex();
        DiskPoint::from_complex((alpha * z + beta) / (beta.conj() * z + alpha.conj()))
    }

    /// Base point of the frame, i.e. the image of the origin.
    #[inline]
    pub fn base_point(&self) -> DiskPoint {
        let (alpha, beta) = self.disk_coefficients();
        DiskPoint::from_complex(beta / alpha.conj())
    }

    /// Polar angle of the frame direction in the disk chart at its base point.
    #[inline]
    pub fn direction_angle(&self) -> f64 {
        let (alpha, _) = self.disk_coefficients();
        2.0 * alpha.im.atan2(alpha.re)
    }

    /// Unit direction of the frame in orthonormal chart components.
    pub fn direction(&self) -> Tangent {
        let (alpha, _) = self.disk_coefficients();
        // arg(α²) computed without trigonometry
        let n = alpha.norm_sqr();
        Tangent::new(
            (alpha.re * alpha.re - alpha.im * alpha.im) / n,
            2.0 * alpha.re * alpha.im / n,
        )
    }

    /// Unit-speed geodesic flow: right multiplication by `diag(e^{t/2}, e^{-t/2})`.
    pub fn geodesic_advance(&self, t: f64) -> MoebiusElement {
        let e = (0.5 * t).exp();
        let inv = 1.0 / e;
        Self {
            a: self.a * e,
            b: self.b * inv,
            c: self.c * e,
            d: self.d * inv,
        }
        .renormalized()
    }

    /// Turns the frame direction by `angle` while keeping its base point.
    pub fn rotate_direction(&self, angle: f64) -> MoebiusElement {
        self.compose(&Self::rotation(angle))
    }

    /// Frame based at `p` pointing in chart direction `angle`.
    pub fn frame_at(p: DiskPoint, angle: f64) -> Result<Self, GeometryError> {
        if !p.is_inside() {
            return Err(GeometryError::NearBoundary {
                radius: p.norm_sqr().sqrt(),
            });
        }
        let s = 2.0 * p.norm_sqr().sqrt().atanh();
        let phi = p.im.atan2(p.re);
        let base = Self::rotation(phi).compose(&Self::translation(s));
        Ok(base.rotate_direction(angle - phi))
    }

    /// Largest absolute entry difference, up to the global sign ambiguity of PSL(2,R).
    pub fn distance_to(&self, other: &MoebiusElement) -> f64 {
        let plus = (self.a - other.a)
            .abs()
            .max((self.b - other.b).abs())
            .max((self.c - other.c).abs())
            .max((self.d - other.d).abs());
        let minus = (self.a + other.a)
            .abs()
            .max((self.b + other.b).abs())
            .max((self.c + other.c).abs())
            .max((self.d + other.d).abs());
        plus.min(minus)
    }
}

/// Hyperbolic distance in the disk.
#[inline]
pub fn distance(z: DiskPoint, w: DiskPoint) -> f64 {
    let dx = z.re - w.re;
    let dy = z.im - w.im;
    let num = (dx * dx + dy * dy).sqrt();
    let den = ((1.0 - z.norm_sqr()) * (1.0 - w.norm_sqr())).sqrt();
    2.0 * (num / den).asinh()
}

/// `sinh²(d/2)` for the hyperbolic distance `d`; monotone in `d` and cheap.
#[inline]
pub fn half_sinh_sqr(z: DiskPoint, w: DiskPoint) -> f64 {
    let dx = z.re - w.re;
    let dy = z.im - w.im;
    (dx * dx + dy * dy) / ((1.0 - z.norm_sqr()) * (1.0 - w.norm_sqr()))
}

/// Unit gradient of `distance(·, y)` at `z`, pointing away from `y`.
pub fn grad_distance(z: DiskPoint, y: DiskPoint) -> Result<Tangent, GeometryError> {
    let dx = z.re - y.re;
    let dy = z.im - y.im;
    let e = (dx * dx + dy * dy).sqrt();
    if e == 0.0 {
        return Err(GeometryError::Coincident);
    }
    Ok(grad_distance_parts(z, y, dx, dy, e))
}

#[inline]
pub(crate) fn grad_distance_parts(z: DiskPoint, y: DiskPoint, dx: f64, dy: f64, e: f64) -> Tangent {
    let az = 1.0 - z.norm_sqr();
    let s = (az * (1.0 - y.norm_sqr())).sqrt();
    let q = e / s;
    let inv = 1.0 / (1.0 + q * q).sqrt();
    let radial = az / (e * s);
    Tangent::new(
        inv * (dx * radial + q * z.re),
        inv * (dy * radial + q * z.im),
    )
}

impl core::ops::Add for Tangent {
    type Output = Tangent;

    #[inline]
    fn add(self, other: Tangent) -> Tangent {
        Tangent::new(self.x + other.x, self.y + other.y)
    }
}
