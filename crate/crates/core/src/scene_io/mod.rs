//! Scene input and report output: trained checkpoints in the binary PLY
//! layout, deterministic synthetic scenes, and image / table writers.

mod output;
mod ply;
mod synth;

pub use output::{
    encode_channel, read_image, write_image, write_json, write_csv, write_metadata, write_table,
    ImageBuffer, ReportMetadata,
};
pub use ply::{load_ply, read_ply, write_ply, write_ply_to, PLY_PROPERTIES};
pub use synth::{generate_scene, AnisotropyLaw, Bounds, OpacityLaw, SceneSpec};

use serde::{Deserialize, Serialize};

/// Number of higher-order SH coefficients stored per Gaussian (degrees 1..=3,
/// 15 per channel).
pub const SH_REST_LEN: usize = 45;
/// Higher-order SH coefficients per color channel.
pub const SH_REST_PER_CHANNEL: usize = 15;

/// A trained scene primitive as stored in a checkpoint.
///
/// Values are kept exactly as stored: opacity as a logit, scales as logs,
/// the rotation quaternion un-normalized. Activations are applied during
/// projection.
#[derive(Clone, Debug, PartialEq)]
pub struct Gaussian3D {
    pub mean: [f32; 3],
    pub log_scale: [f32; 3],
    /// Quaternion in (w, x, y, z) order.
    pub rotation: [f32; 4],
    pub opacity_logit: f32,
    pub sh_dc: [f32; 3],
    /// Channel-major: `sh_rest[c * 15 + k]` is coefficient `k + 1` of channel `c`.
    pub sh_rest: [f32; SH_REST_LEN],
}

impl Gaussian3D {
    pub fn opacity(&self) -> f64 {
        sigmoid(self.opacity_logit as f64)
    }

    pub fn scale(&self) -> [f64; 3] {
        self.log_scale.map(|s| (s as f64).exp())
    }

    /// Unit quaternion; a zero quaternion maps to identity.
    pub fn unit_rotation(&self) -> [f64; 4] {
        let q = self.rotation.map(|v| v as f64);
        let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
        if n == 0.0 || !n.is_finite() {
            [1.0, 0.0, 0.0, 0.0]
        } else {
            q.map(|v| v / n)
        }
    }

    /// Rotation matrix of the normalized quaternion, row-major.
    pub fn rotation_matrix(&self) -> [[f64; 3]; 3] {
        let [w, x, y, z] = self.unit_rotation();
        [
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ]
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Pinhole camera with a rigid world-to-camera transform.
///
/// Camera space is x right, y down, z forward; pixel `(i, j)` sits at the
/// integer coordinate `(i, j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Camera {
    pub width: u32,
    pub height: u32,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Rows of the 3×4 matrix `[R | t]`.
    #[serde(default = "identity_pose")]
    pub world_to_cam: [[f64; 4]; 3],
    #[serde(default = "default_near")]
    pub near: f64,
    #[serde(default = "default_far")]
    pub far: f64,
}

fn identity_pose() -> [[f64; 4]; 3] {
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
    ]
}

fn default_near() -> f64 {
    0.01
}

fn default_far() -> f64 {
    100.0
}

impl Default for Camera {
    fn default() -> Self {
        Camera::fronto_parallel(256, 256, 256.0)
    }
}

impl Camera {
    /// Camera at the origin looking down +z with the principal point at the
    /// frame center.
    pub fn fronto_parallel(width: u32, height: u32, focal: f64) -> Self {
        Camera {
            width,
            height,
            fx: focal,
            fy: focal,
            cx: width as f64 / 2.0,
            cy: height as f64 / 2.0,
            world_to_cam: identity_pose(),
            near: default_near(),
            far: default_far(),
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        use crate::Error;
        if self.width == 0 || self.height == 0 {
            return Err(Error::Parameter("camera width and height must be positive".into()));
        }
        if !(self.fx > 0.0 && self.fy > 0.0 && self.fx.is_finite() && self.fy.is_finite()) {
            return Err(Error::Parameter("focal lengths must be positive and finite".into()));
        }
        if !(self.near > 0.0 && self.near < self.far) {
            return Err(Error::Parameter(format!(
                "camera needs 0 < near < far, got near={} far={}",
                self.near, self.far
            )));
        }
        if self.world_to_cam.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("world_to_cam has non-finite entries".into()));
        }
        Ok(())
    }

    /// Width padded up to a whole number of 16-pixel tiles.
    pub fn padded_width(&self) -> u32 {
        self.width.div_ceil(16) * 16
    }

    pub fn padded_height(&self) -> u32 {
        self.height.div_ceil(16) * 16
    }

    pub fn tiles_x(&self) -> u32 {
        self.padded_width() / 16
    }

    pub fn tiles_y(&self) -> u32 {
        self.padded_height() / 16
    }

    pub fn to_camera(&self, p: [f64; 3]) -> [f64; 3] {
        let m = &self.world_to_cam;
        [0, 1, 2].map(|r| m[r][0] * p[0] + m[r][1] * p[1] + m[r][2] * p[2] + m[r][3])
    }

    pub fn rotation(&self) -> [[f64; 3]; 3] {
        let m = &self.world_to_cam;
        [0, 1, 2].map(|r| [m[r][0], m[r][1], m[r][2]])
    }

    /// Camera center in world coordinates, `-Rᵀ t`.
    pub fn center(&self) -> [f64; 3] {
        let m = &self.world_to_cam;
        [0, 1, 2].map(|c| -(m[0][c] * m[0][3] + m[1][c] * m[1][3] + m[2][c] * m[2][3]))
    }
}
