//! EWA projection of 3D Gaussians to screen-space splats.

use rayon::prelude::*;
use serde::Serialize;

use super::{classify_shape, evaluate_sh, Shape, ALPHA_MIN};
use crate::scene_io::{Camera, Gaussian3D};

/// Added to both diagonal entries of the projected covariance (px²).
pub const DILATION: f64 = 0.3;
/// Projected means farther than this multiple of the half-frame are culled.
pub const GUARD_BAND: f64 = 1.3;
/// Dilated covariances with a determinant at or below this are dropped.
pub const MIN_DETERMINANT: f64 = 1e-12;
/// Upper clamp on per-pixel α.
pub const MAX_ALPHA: f64 = 0.99;

/// Symmetric 2×2 matrix stored as `(xx, xy, yy)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Sym2 { xx, xy, yy }
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn inverse(&self) -> Option<Sym2> {
        let det = self.det();
        if !(det > MIN_DETERMINANT) || !det.is_finite() {
            return None;
        }
        Some(Sym2::new(self.yy / det, -self.xy / det, self.xx / det))
    }

    /// `½ dᵀ M d`, the exponent of the 2D Gaussian when `M` is a conic.
    pub fn half_quadratic(&self, dx: f64, dy: f64) -> f64 {
        0.5 * (self.xx * dx * dx + self.yy * dy * dy) + self.xy * dx * dy
    }

    /// Eigenvalues `(λ1, λ2)` with `λ1 ≥ λ2`, and the unit eigenvector of λ1.
    pub fn eigen(&self) -> ([f64; 2], [f64; 2]) {
        let mid = 0.5 * (self.xx + self.yy);
        let half_diff = 0.5 * (self.xx - self.yy);
        let disc = half_diff.hypot(self.xy);
        let l1 = mid + disc;
        let l2 = if l1 > 0.0 { self.det() / l1 } else { mid - disc };
        let v = if self.xx >= self.yy {
            [l1 - self.yy, self.xy]
        } else {
            [self.xy, l1 - self.xx]
        };
        let n = v[0].hypot(v[1]);
        let dir = if n > 0.0 && n.is_finite() {
            [v[0] / n, v[1] / n]
        } else {
            [1.0, 0.0]
        };
        ([l1, l2], dir)
    }
}

/// A Gaussian projected to the image plane.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Splat2D {
    /// Index of the source Gaussian in the scene.
    pub id: u32,
    /// Mean μ′ in pixel coordinates.
    pub mu: [f64; 2],
    /// Dilated screen-space covariance Σ′.
    pub cov: Sym2,
    /// Σ′⁻¹.
    pub conic: Sym2,
    /// Camera-space z.
    pub depth: f64,
    pub opacity: f64,
    pub color: [f64; 3],
    /// Eigenvalues of Σ′, `λ1 ≥ λ2 > 0` (px²).
    pub lambda: [f64; 2],
    /// Unit major-axis direction.
    pub axis_dir: [f64; 2],
    pub spiky: bool,
}

impl Splat2D {
    /// Builds a splat from an already dilated covariance. Returns `None` for
    /// degenerate covariances.
    pub fn from_covariance(
        id: u32,
        mu: [f64; 2],
        cov: Sym2,
        depth: f64,
        opacity: f64,
        color: [f64; 3],
    ) -> Option<Splat2D> {
        let conic = cov.inverse()?;
        let (lambda, axis_dir) = cov.eigen();
        if !(lambda[1] > 0.0) {
            return None;
        }
        Some(Splat2D {
            id,
            mu,
            cov,
            conic,
            depth,
            opacity,
            color,
            lambda,
            axis_dir,
            spiky: classify_shape(lambda) == Shape::Spiky,
        })
    }

    /// Gaussian exponent `½ (p−μ′)ᵀ Σ′⁻¹ (p−μ′)` at pixel `(x, y)`.
    pub fn exponent_at(&self, x: f64, y: f64) -> f64 {
        self.conic.half_quadratic(x - self.mu[0], y - self.mu[1])
    }

    /// Blending weight `min(0.99, o·e^(−E))` at pixel `(x, y)`.
    pub fn alpha_at(&self, x: f64, y: f64) -> f64 {
        (self.opacity * (-self.exponent_at(x, y)).exp()).min(MAX_ALPHA)
    }

    /// Whether the renderer blends this splat at `(x, y)` (α ≥ 1/255).
    pub fn contributes_at(&self, x: f64, y: f64) -> bool {
        self.alpha_at(x, y) >= ALPHA_MIN
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Projected {
    Splat(Splat2D),
    /// Outside the depth range or the guard band.
    Culled,
    /// Non-invertible covariance after dilation.
    Degenerate,
}

impl Projected {
    pub fn into_splat(self) -> Option<Splat2D> {
        match self {
            Projected::Splat(s) => Some(s),
            _ => None,
        }
    }
}

fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// World-space covariance `R · diag(s²) · Rᵀ`.
pub fn covariance_3d(g: &Gaussian3D) -> [[f64; 3]; 3] {
    let r = g.rotation_matrix();
    let s = g.scale();
    let mut rs = r;
    for row in rs.iter_mut() {
        for (v, sc) in row.iter_mut().zip(s) {
            *v *= sc * sc;
        }
    }
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| rs[i][k] * r[j][k]).sum();
        }
    }
    out
}

/// Projects one Gaussian. The splat id is set to 0; [`project_scene`]
/// assigns scene indices.
pub fn project(g: &Gaussian3D, cam: &Camera) -> Projected {
    let mean = g.mean.map(|v| v as f64);
    let [tx, ty, tz] = cam.to_camera(mean);
    if !(tz >= cam.near && tz <= cam.far) {
        return Projected::Culled;
    }
    let u = cam.fx * tx / tz + cam.cx;
    let v = cam.fy * ty / tz + cam.cy;
    let half_w = cam.width as f64 / 2.0;
    let half_h = cam.height as f64 / 2.0;
    if !((u - half_w).abs() <= GUARD_BAND * half_w && (v - half_h).abs() <= GUARD_BAND * half_h) {
        return Projected::Culled;
    }

    // Jacobian of the perspective map at the mean, rows padded to 3×3.
    let jac = [
        [cam.fx / tz, 0.0, -cam.fx * tx / (tz * tz)],
        [0.0, cam.fy / tz, -cam.fy * ty / (tz * tz)],
        [0.0, 0.0, 0.0],
    ];
    let t = mat_mul(&jac, &cam.rotation());
    let sigma = covariance_3d(g);
    let ts = mat_mul(&t, &sigma);
    let entry = |i: usize, j: usize| -> f64 { (0..3).map(|k| ts[i][k] * t[j][k]).sum() };
    let cov = Sym2::new(entry(0, 0) + DILATION, entry(0, 1), entry(1, 1) + DILATION);
    if ![cov.xx, cov.xy, cov.yy].iter().all(|v| v.is_finite()) {
        return Projected::Degenerate;
    }

    let center = cam.center();
    let d = [mean[0] - center[0], mean[1] - center[1], mean[2] - center[2]];
    let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let dir = if n > 0.0 { d.map(|c| c / n) } else { [0.0, 0.0, 1.0] };
    let color = evaluate_sh(g.sh_dc, &g.sh_rest, dir, 3);

    match Splat2D::from_covariance(0, [u, v], cov, tz, g.opacity(), color) {
        Some(s) => Projected::Splat(s),
        None => Projected::Degenerate,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ProjectionCounts {
    pub visible: usize,
    pub culled: usize,
    pub degenerate: usize,
}

/// Projects a whole scene (in parallel), keeping input order. Splat ids are
/// scene indices.
pub fn project_scene(scene: &[Gaussian3D], cam: &Camera) -> (Vec<Splat2D>, ProjectionCounts) {
    let results: Vec<Projected> = scene.par_iter().map(|g| project(g, cam)).collect();
    let mut counts = ProjectionCounts::default();
    let mut splats = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Projected::Splat(mut s) => {
                s.id = i as u32;
                splats.push(s);
                counts.visible += 1;
            }
            Projected::Culled => counts.culled += 1,
            Projected::Degenerate => counts.degenerate += 1,
        }
    }
    (splats, counts)
}
