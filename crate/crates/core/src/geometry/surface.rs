//! The Bolza surface: regular hyperbolic octagon with interior angles π/4 and
//! opposite-side identifications.

use alloc::vec::Vec;
use core::f64::consts::PI;

// float methods for no_std builds; inherent ones shadow these when std is linked
#[allow(unused_imports)]
use num_traits::Float;

use super::moebius::{distance, DiskPoint, MoebiusElement};
use super::GeometryError;
use crate::quadrature::GaussLegendre;

/// Generator indices forming the single defining relation of the group.
pub const RELATOR: [usize; 8] = [0, 5, 2, 7, 4, 1, 6, 3];

/// Maximum number of generator applications accepted by [`SurfaceModel::reduce`].
pub const MAX_REDUCTION_STEPS: usize = 64;

/// Points violating a side bisector by no more than this are inside.
const SIDE_TOLERANCE: f64 = 1e-12;

/// Compact hyperbolic surface given by a Dirichlet octagon centred at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceModel {
    /// Side pairings; `generators[(k + 4) % 8]` is the inverse of `generators[k]`.
    pub generators: [MoebiusElement; 8],
    pub domain_vertices: [DiskPoint; 8],
    pub injectivity_radius: f64,
    pub area: f64,
    centers: [DiskPoint; 8],
    circumradius: f64,
}

/// Plain description of a surface, used for serialization.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SurfaceDescription {
    pub generators: [[f64; 4]; 8],
    pub domain_vertices: [[f64; 2]; 8],
    pub injectivity_radius: f64,
    pub area: f64,
}

/// Builds the Bolza surface.
pub fn build_bolza() -> Result<SurfaceModel, GeometryError> {
    // inradius ρ of the regular octagon with angle π/4: cosh ρ = cot(π/8)
    let cot = 1.0 / (PI / 8.0).tan();
    let inradius = cot.acosh();
    let circumradius = (cot * cot).acosh();

    let mut generators = [MoebiusElement::IDENTITY; 8];
    for (k, g) in generators.iter_mut().enumerate() {
        let angle = k as f64 * PI / 4.0;
        *g = MoebiusElement::rotation(angle)
            .compose(&MoebiusElement::translation(2.0 * inradius))
            .compose(&MoebiusElement::rotation(-angle));
    }
    let mut domain_vertices = [DiskPoint::ORIGIN; 8];
    for (k, v) in domain_vertices.iter_mut().enumerate() {
        *v = DiskPoint::at_distance(circumradius, PI / 8.0 + k as f64 * PI / 4.0);
    }
    SurfaceModel::from_parts(generators, domain_vertices)
}

impl SurfaceModel {
    /// Validates the side pairings and derives area and injectivity radius.
    pub fn from_parts(
        generators: [MoebiusElement; 8],
        domain_vertices: [DiskPoint; 8],
    ) -> Result<Self, GeometryError> {
        let mut centers = [DiskPoint::ORIGIN; 8];
        for (c, g) in centers.iter_mut().zip(generators.iter()) {
            *c = g.base_point();
        }
        let circumradius = domain_vertices
            .iter()
            .map(|v| distance(DiskPoint::ORIGIN, *v))
            .fold(0.0, f64::max);
        let mut model = SurfaceModel {
            generators,
            domain_vertices,
            injectivity_radius: 0.0,
            area: 0.0,
            centers,
            circumradius,
        };
        let residual = model.relator_residual();
        if !(residual <= 1e-6) {
            return Err(GeometryError::Construction { residual });
        }
        for k in 0..8 {
            let r = generators[k]
                .compose(&generators[(k + 4) % 8])
                .distance_to(&MoebiusElement::IDENTITY);
            if !(r <= 1e-6) {
                return Err(GeometryError::Construction { residual: r });
            }
        }
        model.injectivity_radius = model.short_translation_length() / 2.0;
        model.area = model.area_by_quadrature(32);
        Ok(model)
    }

    pub fn from_description(desc: &SurfaceDescription) -> Result<Self, GeometryError> {
        let mut gens = [MoebiusElement::IDENTITY; 8];
        for (g, m) in gens.iter_mut().zip(desc.generators.iter()) {
            *g = MoebiusElement::new(m[0], m[1], m[2], m[3])?;
        }
        let mut verts = [DiskPoint::ORIGIN; 8];
        for (v, p) in verts.iter_mut().zip(desc.domain_vertices.iter()) {
            *v = DiskPoint::new(p[0], p[1]);
        }
        Self::from_parts(gens, verts)
    }

    pub fn description(&self) -> SurfaceDescription {
        let mut generators = [[0.0; 4]; 8];
        for (m, g) in generators.iter_mut().zip(self.generators.iter()) {
            *m = [g.a, g.b, g.c, g.d];
        }
        let mut domain_vertices = [[0.0; 2]; 8];
        for (p, v) in domain_vertices.iter_mut().zip(self.domain_vertices.iter()) {
            *p = [v.re, v.im];
        }
        SurfaceDescription {
            generators,
            domain_vertices,
            injectivity_radius: self.injectivity_radius,
            area: self.area,
        }
    }

    /// Distance from the identity of the relator product.
    pub fn relator_residual(&self) -> f64 {
        RELATOR
            .iter()
            .fold(MoebiusElement::IDENTITY, |acc, &k| {
                acc.compose(&self.generators[k])
            })
            .distance_to(&MoebiusElement::IDENTITY)
    }

    /// Hyperbolic distance from the origin to the farthest domain vertex.
    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    /// Images of the origin under the side pairings.
    pub fn neighbor_centers(&self) -> &[DiskPoint; 8] {
        &self.centers
    }

    fn short_translation_length(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..8 {
            best = best.min(self.generators[i].translation_length());
            for j in 0..8 {
                if j == (i + 4) % 8 {
                    continue;
                }
                let w = self.generators[i].compose(&self.generators[j]);
                let l = w.translation_length();
                if l > 0.0 {
                    best = best.min(l);
                }
            }
        }
        best
    }

    /// Euclidean radius of the domain boundary along the ray at `angle`.
    pub fn boundary_radius(&self, angle: f64) -> f64 {
        let mut best = 1.0;
        for c in &self.centers {
            let a = c.norm_sqr().sqrt();
            let cos = (angle - c.im.atan2(c.re)).cos();
            let disc = cos * cos - a * a;
            if cos > 0.0 && disc >= 0.0 {
                let rho = (cos - disc.sqrt()) / a;
                if rho < best {
                    best = rho;
                }
            }
        }
        best
    }

    /// Hyperbolic area of the domain from a polar Gauss–Legendre quadrature of
    /// the area form `4 / (1 - |z|²)²` with one panel per half side.
    pub fn area_by_quadrature(&self, order: usize) -> f64 {
        let gl = GaussLegendre::new(order);
        let mut breaks: Vec<f64> = Vec::with_capacity(17);
        for v in &self.domain_vertices {
            breaks.push(v.im.atan2(v.re));
        }
        for c in &self.centers {
            breaks.push(c.im.atan2(c.re));
        }
        for b in breaks.iter_mut() {
            if *b < 0.0 {
                *b += 2.0 * PI;
            }
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.push(breaks[0] + 2.0 * PI);
        breaks
            .windows(2)
            .map(|w| {
                gl.integrate(w[0], w[1], |theta| {
                    let r2 = self.boundary_radius(theta).powi(2);
                    2.0 * r2 / (1.0 - r2)
                })
            })
            .sum()
    }

    /// Largest violation of the Dirichlet side conditions, with its side index.
    #[inline]
    fn worst_side(&self, z: DiskPoint) -> (usize, f64) {
        let zz = z.norm_sqr();
        let mut worst = (0, f64::NEG_INFINITY);
        for (k, c) in self.centers.iter().enumerate() {
            let dx = z.re - c.re;
            let dy = z.im - c.im;
            let v = zz * (1.0 - c.norm_sqr()) - (dx * dx + dy * dy);
            if v > worst.1 {
                worst = (k, v);
            }
        }
        worst
    }

    /// Closed-domain membership; boundary ties count as inside.
    pub fn contains(&self, z: DiskPoint) -> bool {
        self.worst_side(z).1 <= SIDE_TOLERANCE
    }

    /// Moves a frame into the fundamental domain, returning the reduced frame
    /// and the generator indices applied (in order, each acting on the left).
    pub fn reduce(&self, g: &MoebiusElement) -> Result<(MoebiusElement, Vec<u8>), GeometryError> {
        let mut word = Vec::new();
        let mut frame = *g;
        self.reduce_with(&mut frame, |k| word.push(k as u8))?;
        Ok((frame, word))
    }

    /// In-place variant of [`reduce`](Self::reduce) that skips the word.
    #[inline]
    pub fn reduce_frame(&self, g: &mut MoebiusElement) -> Result<usize, GeometryError> {
        let mut n = 0;
        self.reduce_with(g, |_| n += 1)?;
        Ok(n)
    }

    fn reduce_with(
        &self,
        g: &mut MoebiusElement,
        mut record: impl FnMut(usize),
    ) -> Result<(), GeometryError> {
        for _ in 0..=MAX_REDUCTION_STEPS {
            let z = g.base_point();
            if !(z.norm_sqr() < 1.0) {
                return Err(GeometryError::NearBoundary {
                    radius: z.norm_sqr().sqrt(),
                });
            }
            let (k, v) = self.worst_side(z);
            if v <= SIDE_TOLERANCE {
                return Ok(());
            }
            let inv = (k + 4) % 8;
            *g = self.generators[inv].compose(g);
            record(inv);
        }
        Err(GeometryError::ReductionFailure {
            steps: MAX_REDUCTION_STEPS,
        })
    }

    /// Reduces a bare point.
    pub fn reduce_point(&self, z: DiskPoint) -> Result<DiskPoint, GeometryError> {
        let mut g = MoebiusElement::frame_at(z, 0.0)?;
        self.reduce_frame(&mut g)?;
        Ok(g.base_point())
    }

    /// All group elements `γ` with `d(0, γ·0) ≤ radius`, identity first.
    ///
    /// Enumerated breadth-first over generator words, exploring one
    /// circumradius beyond `radius` so every tile meeting the ball is reached
    /// through side-adjacent tiles.
    pub fn lifts_within(&self, radius: f64) -> Vec<MoebiusElement> {
        let explore = radius + self.circumradius + 0.5;
        let mut seen: Vec<(DiskPoint, MoebiusElement)> = Vec::new();
        seen.push((DiskPoint::ORIGIN, MoebiusElement::IDENTITY));
        let mut frontier = 0;
        while frontier < seen.len() {
            let g = seen[frontier].1;
            frontier += 1;
            for gen in &self.generators {
                let h = g.compose(gen);
                let p = h.base_point();
                if distance(DiskPoint::ORIGIN, p) > explore {
                    continue;
                }
                // the group acts freely, so γ·0 identifies γ
                let dup = seen.iter().any(|(q, _)| {
                    let dx = q.re - p.re;
                    let dy = q.im - p.im;
                    dx * dx + dy * dy < 1e-18
                });
                if !dup {
                    seen.push((p, h));
                }
            }
        }
        let mut out: Vec<(f64, MoebiusElement)> = seen
            .into_iter()
            .map(|(p, g)| (distance(DiskPoint::ORIGIN, p), g))
            .filter(|(d, _)| *d <= radius)
            .collect();
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        out.into_iter().map(|(_, g)| g).collect()
    }

    /// Identity, the eight generators and all reduced words of length two.
    pub fn short_lifts(&self) -> Vec<MoebiusElement> {
        let mut out = Vec::with_capacity(65);
        out.push(MoebiusElement::IDENTITY);
        out.extend_from_slice(&self.generators);
        for i in 0..8 {
            for j in 0..8 {
                if j != (i + 4) % 8 {
                    out.push(self.generators[i].compose(&self.generators[j]));
                }
            }
        }
        out
    }

    /// Distance in the quotient between two points of the domain, minimised
    /// over [`short_lifts`](Self::short_lifts).
    pub fn quotient_distance(&self, x: DiskPoint, y: DiskPoint) -> f64 {
        self.short_lifts()
            .iter()
            .map(|g| distance(x, g.apply_unchecked(y)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Hyperbolic diameter bound of the domain.
    pub fn diameter(&self) -> f64 {
        2.0 * self.circumradius
    }
}
