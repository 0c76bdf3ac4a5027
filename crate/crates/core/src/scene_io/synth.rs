//! Deterministic synthetic scenes.
//!
//! Gaussians are placed in a slab facing a camera at the origin looking down
//! +z, with their two large axes in the image plane, so the screen-space axis
//! ratio is set directly by [`AnisotropyLaw`]. The generator is ChaCha8
//! (`rand_chacha` 0.9) seeded with [`SceneSpec::seed`]; only raw `u64` draws
//! are taken from it, so scenes are identical across platforms.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{logit, Gaussian3D, SH_REST_LEN, SH_REST_PER_CHANNEL};
use crate::preprocess::SH_C0;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

/// Controls the in-plane axis ratio of generated Gaussians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnisotropyLaw {
    /// Probability that a Gaussian draws its axis ratio from `spiky_ratio`.
    pub spiky_fraction: f64,
    pub spiky_ratio: [f64; 2],
    pub smooth_ratio: [f64; 2],
}

impl Default for AnisotropyLaw {
    fn default() -> Self {
        AnisotropyLaw {
            spiky_fraction: 0.5,
            spiky_ratio: [5.0, 10.0],
            smooth_ratio: [1.0, 2.0],
        }
    }
}

/// Uniform activated opacity in `[min, max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OpacityLaw {
    pub min: f64,
    pub max: f64,
}

impl Default for OpacityLaw {
    fn default() -> Self {
        OpacityLaw { min: 0.1, max: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneSpec {
    pub seed: u64,
    pub count: usize,
    pub bounds: Bounds,
    pub anisotropy: AnisotropyLaw,
    pub opacity: OpacityLaw,
    /// Log-uniform range of the major-axis standard deviation (world units).
    pub scale: [f64; 2],
    /// Highest SH degree given random coefficients (0 = constant color).
    pub sh_degree: u8,
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            seed: 0,
            count: 2000,
            bounds: Bounds {
                min: [-2.5, -2.5, 4.0],
                max: [2.5, 2.5, 8.0],
            },
            anisotropy: AnisotropyLaw::default(),
            opacity: OpacityLaw::default(),
            scale: [0.04, 0.2],
            sh_degree: 0,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let b = &self.bounds;
        if (0..3).any(|i| !(b.max[i] > b.min[i]) || !b.min[i].is_finite() || !b.max[i].is_finite()) {
            return Err(Error::Parameter(format!(
                "scene bounds have zero volume: min={:?} max={:?}",
                b.min, b.max
            )));
        }
        let a = &self.anisotropy;
        if !(0.0..=1.0).contains(&a.spiky_fraction) {
            return Err(Error::Parameter("spiky_fraction must lie in [0, 1]".into()));
        }
        for (name, r) in [("spiky_ratio", a.spiky_ratio), ("smooth_ratio", a.smooth_ratio)] {
            if !(r[0] >= 1.0 && r[1] >= r[0] && r[1].is_finite()) {
                return Err(Error::Parameter(format!("{name} must satisfy 1 <= lo <= hi")));
            }
        }
        let o = &self.opacity;
        if !(o.min > 0.0 && o.max < 1.0 + f64::EPSILON && o.min <= o.max) {
            return Err(Error::Parameter("opacity range must lie in (0, 1]".into()));
        }
        if !(self.scale[0] > 0.0 && self.scale[1] >= self.scale[0] && self.scale[1].is_finite()) {
            return Err(Error::Parameter("scale range must satisfy 0 < lo <= hi".into()));
        }
        if self.sh_degree > 3 {
            return Err(Error::Parameter("sh_degree must be at most 3".into()));
        }
        Ok(())
    }
}

struct Draw(ChaCha8Rng);

impl Draw {
    /// Uniform in [0, 1) from the top 53 bits of one `u64`.
    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }
}

pub fn generate_scene(spec: &SceneSpec) -> Result<Vec<Gaussian3D>> {
    spec.validate()?;
    let mut rng = Draw(ChaCha8Rng::seed_from_u64(spec.seed));
    let b = &spec.bounds;
    let a = &spec.anisotropy;
    let (ln_lo, ln_hi) = (spec.scale[0].ln(), spec.scale[1].ln());
    let dc_span = 0.5 / SH_C0;
    let rest_used = match spec.sh_degree {
        0 => 0,
        d => (d as usize + 1) * (d as usize + 1) - 1,
    };

    let mut out = Vec::with_capacity(spec.count);
    for _ in 0..spec.count {
        let mean = [0, 1, 2].map(|i| rng.range(b.min[i], b.max[i]) as f32);
        let ratio_range = if rng.unit() < a.spiky_fraction {
            a.spiky_ratio
        } else {
            a.smooth_ratio
        };
        let ratio = rng.range(ratio_range[0], ratio_range[1]);
        let major = rng.range(ln_lo, ln_hi).exp();
        let minor = major / ratio;
        let theta = rng.range(0.0, std::f64::consts::PI);
        let opacity = rng.range(spec.opacity.min, spec.opacity.max).clamp(1e-6, 1.0 - 1e-6);
        let sh_dc = [0, 1, 2].map(|_| rng.range(-dc_span, dc_span) as f32);
        let mut sh_rest = [0.0f32; SH_REST_LEN];
        for c in 0..3 {
            for k in 0..rest_used {
                sh_rest[c * SH_REST_PER_CHANNEL + k] = rng.range(-0.1, 0.1) as f32;
            }
        }
        out.push(Gaussian3D {
            mean,
            log_scale: [major.ln() as f32, minor.ln() as f32, minor.ln() as f32],
            rotation: [(theta / 2.0).cos() as f32, 0.0, 0.0, (theta / 2.0).sin() as f32],
            opacity_logit: logit(opacity) as f32,
            sh_dc,
            sh_rest,
        });
    }
    Ok(out)
}
