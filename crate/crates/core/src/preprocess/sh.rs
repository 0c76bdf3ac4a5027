//! Real spherical harmonics up to degree 3 with the sign and ordering
//! conventions of the reference Gaussian splatting renderer.

use crate::scene_io::{SH_REST_LEN, SH_REST_PER_CHANNEL};

pub const SH_C0: f64 = 0.282_094_791_773_878_14;
const SH_C1: f64 = 0.488_602_511_902_919_9;
const SH_C2: [f64; 5] = [
    1.092_548_430_592_079_2,
    -1.092_548_430_592_079_2,
    0.315_391_565_252_520_05,
    -1.092_548_430_592_079_2,
    0.546_274_215_296_039_6,
];
const SH_C3: [f64; 7] = [
    -0.590_043_589_926_643_5,
    2.890_611_442_640_554,
    -0.457_045_799_464_465_8,
    0.373_176_332_590_115_4,
    -0.457_045_799_464_465_8,
    1.445_305_721_320_277,
    -0.590_043_589_926_643_5,
];

/// Values of the 15 non-constant basis functions at `dir`, zeroed beyond
/// `degree`.
fn basis(dir: [f64; 3], degree: u8) -> [f64; SH_REST_PER_CHANNEL] {
    let [x, y, z] = dir;
    let mut b = [0.0; SH_REST_PER_CHANNEL];
    if degree >= 1 {
        b[0] = -SH_C1 * y;
        b[1] = SH_C1 * z;
        b[2] = -SH_C1 * x;
    }
    if degree >= 2 {
        let (xx, yy, zz) = (x * x, y * y, z * z);
        b[3] = SH_C2[0] * x * y;
        b[4] = SH_C2[1] * y * z;
        b[5] = SH_C2[2] * (2.0 * zz - xx - yy);
        b[6] = SH_C2[3] * x * z;
        b[7] = SH_C2[4] * (xx - yy);
    }
    if degree >= 3 {
        let (xx, yy, zz) = (x * x, y * y, z * z);
        b[8] = SH_C3[0] * y * (3.0 * xx - yy);
        b[9] = SH_C3[1] * x * y * z;
        b[10] = SH_C3[2] * y * (4.0 * zz - xx - yy);
        b[11] = SH_C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
        b[12] = SH_C3[4] * x * (4.0 * zz - xx - yy);
        b[13] = SH_C3[5] * z * (xx - yy);
        b[14] = SH_C3[6] * x * (xx - 3.0 * yy);
    }
    b
}

/// View-dependent RGB: `0.5 + Σ coeff · basis(view_dir)` per channel, clamped
/// at zero from below. `degree` is capped at 3.
pub fn evaluate_sh(dc: [f32; 3], rest: &[f32; SH_REST_LEN], view_dir: [f64; 3], degree: u8) -> [f64; 3] {
    let b = basis(view_dir, degree.min(3));
    [0, 1, 2].map(|c| {
        let coeffs = &rest[c * SH_REST_PER_CHANNEL..(c + 1) * SH_REST_PER_CHANNEL];
        let higher: f64 = coeffs.iter().zip(&b).map(|(&k, &v)| k as f64 * v).sum();
        (0.5 + SH_C0 * dc[c] as f64 + higher).max(0.0)
    })
}
