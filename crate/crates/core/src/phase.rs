//! Localized bump functions on the unit tangent bundle `M₁` of the surface.
//!
//! A bump is centred at a frame `c`. Its spatial factor depends on the
//! quotient distance between the base points; its angular factor compares the
//! particle direction with the parallel transport of the centre direction
//! along the connecting geodesic.

use alloc::vec::Vec;
use core::f64::consts::PI;

// float methods for no_std builds; inherent ones shadow these when std is linked
#[allow(unused_imports)]
use num_traits::Float;

use crate::geometry::{
    distance, half_sinh_sqr, DiskPoint, GeometryError, MoebiusElement, SurfaceModel,
};
use crate::quadrature::GaussLegendre;

/// `(1 - x²)³` on `|x| < 1`, zero outside: C² with compact support.
#[inline]
pub fn poly_bump(x: f64) -> f64 {
    let y = 1.0 - x * x;
    if y <= 0.0 {
        0.0
    } else {
        y * y * y
    }
}

/// Derivative of [`poly_bump`].
#[inline]
pub fn poly_bump_deriv(x: f64) -> f64 {
    let y = 1.0 - x * x;
    if y <= 0.0 {
        0.0
    } else {
        -6.0 * x * y * y
    }
}

/// Integral of `poly_bump(φ / w)` over `φ ∈ [-w, w]`.
pub fn angular_bump_integral(width: f64) -> f64 {
    32.0 / 35.0 * width
}

/// Integral of `poly_bump(s / w)` over a geodesic ball of radius `w`.
pub fn spatial_bump_integral(width: f64) -> f64 {
    let gl = GaussLegendre::new(24);
    2.0 * PI * gl.integrate_composite(0.0, width, 4, |s| poly_bump(s / width) * s.sinh())
}

/// Wraps an angle into `(-π, π]`.
#[inline]
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut x = a % two_pi;
    if x <= -PI {
        x += two_pi;
    } else if x > PI {
        x -= two_pi;
    }
    x
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BumpError {
    #[error("spatial width {width} must be positive and below the injectivity radius {limit}")]
    SpatialWidth { width: f64, limit: f64 },
    #[error("angular width {width} must lie in (0, π]")]
    AngularWidth { width: f64 },
    #[error("an angular factor needs a spatial factor to anchor the centre direction")]
    UnanchoredAngle,
    #[error("bump amplitude {0} must be finite and non-negative")]
    Amplitude(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Plain parameters of a [`PhaseBump`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BumpParams {
    /// Base point of the centre frame.
    pub center: DiskPoint,
    /// Chart direction of the centre frame.
    #[cfg_attr(feature = "serde", serde(default))]
    pub direction: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub spatial_width: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub angular_width: Option<f64>,
    pub amplitude: f64,
}

impl BumpParams {
    pub fn build(&self, surface: &SurfaceModel) -> Result<PhaseBump, BumpError> {
        let frame = MoebiusElement::frame_at(self.center, self.direction)?;
        PhaseBump::new(
            surface,
            frame,
            self.spatial_width,
            self.angular_width,
            self.amplitude,
        )
    }
}

/// `amplitude · b(d(x, c)/w_s) · b(∠(ξ, c)/w_θ)` on `M₁`; a missing width means
/// the corresponding factor is identically one.
#[derive(Debug, Clone)]
pub struct PhaseBump {
    center: MoebiusElement,
    spatial_width: Option<f64>,
    angular_width: Option<f64>,
    amplitude: f64,
    lifts: Vec<MoebiusElement>,
    lift_inverses: Vec<MoebiusElement>,
    threshold: f64,
}

impl PhaseBump {
    pub fn new(
        surface: &SurfaceModel,
        center: MoebiusElement,
        spatial_width: Option<f64>,
        angular_width: Option<f64>,
        amplitude: f64,
    ) -> Result<Self, BumpError> {
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(BumpError::Amplitude(amplitude));
        }
        if let Some(w) = spatial_width {
            if !(w > 0.0 && w < surface.injectivity_radius) {
                return Err(BumpError::SpatialWidth {
                    width: w,
                    limit: surface.injectivity_radius,
                });
            }
        }
        if let Some(w) = angular_width {
            if !(w > 0.0 && w <= PI) {
                return Err(BumpError::AngularWidth { width: w });
            }
            if spatial_width.is_none() {
                return Err(BumpError::UnanchoredAngle);
            }
        }
        let (center, _) = surface.reduce(&center)?;
        let mut lifts = Vec::new();
        let mut threshold = f64::INFINITY;
        if let Some(w) = spatial_width {
            let reach = surface.circumradius() + w;
            for g in surface.lifts_within(reach + surface.circumradius()) {
                let l = g.compose(&center);
                if distance(DiskPoint::ORIGIN, l.base_point()) <= reach {
                    lifts.push(l);
                }
            }
            threshold = (0.5 * w).sinh().powi(2);
        }
        let lift_inverses = lifts.iter().map(|l| l.inverse()).collect();
        Ok(Self {
            center,
            spatial_width,
            angular_width,
            amplitude,
            lifts,
            lift_inverses,
            threshold,
        })
    }

    /// Bump with no spatial or angular dependence.
    pub fn constant(amplitude: f64) -> Self {
        Self {
            center: MoebiusElement::IDENTITY,
            spatial_width: None,
            angular_width: None,
            amplitude,
            lifts: Vec::new(),
            lift_inverses: Vec::new(),
            threshold: f64::INFINITY,
        }
    }

    pub fn center(&self) -> MoebiusElement {
        self.center
    }

    pub fn spatial_width(&self) -> Option<f64> {
        self.spatial_width
    }

    pub fn angular_width(&self) -> Option<f64> {
        self.angular_width
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Value at a frame whose base point lies in the fundamental domain.
    #[inline]
    pub fn value(&self, frame: &MoebiusElement) -> f64 {
        let Some(w) = self.spatial_width else {
            return self.amplitude;
        };
        let p = frame.base_point();
        for (k, l) in self.lifts.iter().enumerate() {
            let q = half_sinh_sqr(p, l.base_point());
            if q < self.threshold {
                let d = 2.0 * q.sqrt().asinh();
                let mut v = self.amplitude * poly_bump(d / w);
                if let Some(wa) = self.angular_width {
                    let rel = self.lift_inverses[k].compose(frame);
                    v *= poly_bump(wrap_angle(rel.direction_angle()) / wa);
                }
                return v;
            }
        }
        0.0
    }

    /// Integral of the bump against the Liouville measure `dvol dθ` of `M₁`.
    pub fn integral(&self, surface: &SurfaceModel) -> f64 {
        let spatial = self
            .spatial_width
            .map_or(surface.area, spatial_bump_integral);
        let angular = self.angular_width.map_or(2.0 * PI, angular_bump_integral);
        self.amplitude * spatial * angular
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_bolza;

    #[test]
    fn bump_shape() {
        assert_eq!(poly_bump(0.0), 1.0);
        assert_eq!(poly_bump(1.0), 0.0);
        assert_eq!(poly_bump(-1.5), 0.0);
        assert_eq!(poly_bump_deriv(0.0), 0.0);
        let h = 1e-6;
        let fd = (poly_bump(0.4 + h) - poly_bump(0.4 - h)) / (2.0 * h);
        assert!((fd - poly_bump_deriv(0.4)).abs() < 1e-8);
    }

    #[test]
    fn angular_integral_closed_form() {
        let gl = GaussLegendre::new(20);
        let w = 1.3;
        let v = gl.integrate(-w, w, |x| poly_bump(x / w));
        assert!((v - angular_bump_integral(w)).abs() < 1e-13);
    }

    #[test]
    fn wrap() {
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((wrap_angle(7.0) - (7.0 - 2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn peak_at_center_and_invariance_under_generators() {
        let s = build_bolza().unwrap();
        let c = MoebiusElement::frame_at(DiskPoint::new(0.55, 0.2), 0.4).unwrap();
        let b = PhaseBump::new(&s, c, Some(0.8), Some(1.0), 2.0).unwrap();
        let (cr, _) = s.reduce(&c).unwrap();
        assert!((b.value(&cr) - 2.0).abs() < 1e-12);
        // same phase point seen through another fundamental-domain copy
        let probe = c.geodesic_advance(0.3).rotate_direction(0.2);
        let (p1, _) = s.reduce(&probe).unwrap();
        for g in &s.generators {
            let (p2, _) = s.reduce(&g.compose(&probe)).unwrap();
            assert!((b.value(&p1) - b.value(&p2)).abs() < 1e-10);
        }
        assert!(b.value(&p1) > 0.0);
    }

    #[test]
    fn rejects_bad_widths() {
        let s = build_bolza().unwrap();
        let c = MoebiusElement::IDENTITY;
        assert!(PhaseBump::new(&s, c, Some(5.0), None, 1.0).is_err());
        assert!(PhaseBump::new(&s, c, None, Some(1.0), 1.0).is_err());
        assert!(PhaseBump::new(&s, c, Some(0.5), Some(4.0), 1.0).is_err());
    }
}
