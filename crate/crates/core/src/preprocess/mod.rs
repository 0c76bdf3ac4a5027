//! Projection to screen space, shape classification and the coarse
//! bounding-box predicates used for binning and Stage 1 testing.

mod bounds;
mod project;
mod sh;

pub use bounds::{
    aabb_rect, bound_sigmas, obb_hits_subtile, rect_hits_tile, Level, PixelRect, TileCoords,
    ALPHA_MIN, MINITILE, SUBTILE, TILE,
};
pub use project::{
    covariance_3d, project, project_scene, Projected, ProjectionCounts, Splat2D, Sym2, DILATION,
    GUARD_BAND, MAX_ALPHA, MIN_DETERMINANT,
};
pub use sh::{evaluate_sh, SH_C0};

use serde::{Deserialize, Serialize};

/// Screen-space axis ratio at or above which a splat is spiky.
pub const SPIKY_AXIS_RATIO: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    Smooth,
    Spiky,
}

/// Classifies by the ratio of ellipse semi-axes `√(λ1/λ2)`; exactly 3 is
/// spiky. The comparison is done as `λ1 ≥ 9·λ2` so the boundary is exact.
pub fn classify_shape(lambda: [f64; 2]) -> Shape {
    if lambda[0] >= SPIKY_AXIS_RATIO * SPIKY_AXIS_RATIO * lambda[1] {
        Shape::Spiky
    } else {
        Shape::Smooth
    }
}
