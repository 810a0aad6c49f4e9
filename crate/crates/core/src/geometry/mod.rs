//! Exact hyperbolic geometry on the Bolza surface.

mod moebius;
mod surface;

pub(crate) use moebius::grad_distance_parts;
pub use moebius::{
    distance, grad_distance, half_sinh_sqr, DiskPoint, MoebiusElement, Tangent, BOUNDARY_GUARD,
};
pub use surface::{build_bolza, SurfaceDescription, SurfaceModel, MAX_REDUCTION_STEPS, RELATOR};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("matrix has non-positive or non-finite determinant {det}")]
    Degenerate { det: f64 },
    #[error("point at Euclidean radius {radius} is too close to the disk boundary")]
    NearBoundary { radius: f64 },
    #[error("gradient of distance undefined at coincident points")]
    Coincident,
    #[error("surface construction failed: relator residual {residual:e}")]
    Construction { residual: f64 },
    #[error(
        "fundamental-domain reduction did not terminate within {steps} generator applications"
    )]
    ReductionFailure { steps: usize },
}
