//! Run configuration: one JSON document, optionally patched by dotted
//! `key=value` overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::cat::{NumericProfile, SamplingMode};
use crate::pipesim::PipeConfig;
use crate::rasterizer::{RenderConfig, Strategy};
use crate::scene_io::{generate_scene, load_ply, Camera, Gaussian3D, SceneSpec};
use crate::{Error, Result};

/// Where the Gaussians come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SceneSource {
    Ply(PathBuf),
    Synthetic(SceneSpec),
}

impl Default for SceneSource {
    fn default() -> Self {
        SceneSource::Synthetic(SceneSpec::default())
    }
}

impl SceneSource {
    pub fn load(&self) -> Result<Vec<Gaussian3D>> {
        match self {
            SceneSource::Ply(path) => load_ply(path),
            SceneSource::Synthetic(spec) => generate_scene(spec),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    TileAabb,
    SubtileObb,
    #[default]
    HierCat,
    Exhaustive,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageFormat {
    #[default]
    Png,
    Ppm,
}

impl ImageFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ImageFormat::Png => "png",
            ImageFormat::Ppm => "ppm",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scene: SceneSource,
    pub camera: Camera,
    pub strategy: StrategyKind,
    /// Leader sampling for `hier_cat`.
    pub sampling: SamplingMode,
    /// Test arithmetic for `hier_cat`.
    pub profile: NumericProfile,
    pub pipe: PipeConfig,
    pub output_dir: PathBuf,
    pub background: [f64; 3],
    pub early_termination: bool,
    pub image_format: ImageFormat,
    /// Strategies for `compare`, e.g. `"tile_aabb"` or
    /// `"hier_cat:uniform_sparse:full8"`.
    pub compare: Vec<String>,
    /// FIFO depths for `sweep-fifo`.
    pub depths: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scene: SceneSource::default(),
            camera: Camera::default(),
            strategy: StrategyKind::default(),
            sampling: SamplingMode::default(),
            profile: NumericProfile::default(),
            pipe: PipeConfig::default(),
            output_dir: PathBuf::from("out"),
            background: [0.0; 3],
            early_termination: true,
            image_format: ImageFormat::default(),
            compare: ["tile_aabb", "subtile_obb", "hier_cat:uniform_dense", "hier_cat", "hier_cat:uniform_sparse"]
                .map(String::from)
                .to_vec(),
            depths: vec![1, 2, 4, 8, 16, 32, 64, 128],
        }
    }
}

impl RunConfig {
    /// Reads a config file (or the defaults when `path` is `None`) and
    /// applies `overrides` in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
        let mut value = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io_at(p, e))?;
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
            None => serde_json::to_value(RunConfig::default())?,
        };
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: RunConfig = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.camera.validate().map_err(as_config)?;
        self.pipe.validate()?;
        if self.background.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config("background must be finite".into()));
        }
        if let SceneSource::Synthetic(spec) = &self.scene {
            spec.validate().map_err(as_config)?;
        }
        for s in &self.compare {
            parse_strategy(s, self)?;
        }
        Ok(())
    }

    pub fn strategy(&self) -> Strategy {
        match self.strategy {
            StrategyKind::TileAabb => Strategy::TileAabb,
            StrategyKind::SubtileObb => Strategy::SubtileObb,
            StrategyKind::Exhaustive => Strategy::Exhaustive,
            StrategyKind::HierCat => Strategy::HierCat {
                mode: self.sampling,
                profile: self.profile,
            },
        }
    }

    pub fn render_config(&self) -> RenderConfig {
        RenderConfig {
            background: self.background,
            early_termination: self.early_termination,
            record_trace: false,
        }
    }

    /// SHA-256 of the canonical JSON form, as lowercase hex. The output
    /// directory is left out so that reruns elsewhere hash the same.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("output_dir");
        }
        let json = serde_json::to_vec(&value).expect("config serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Parameter(m) => Error::Config(m),
        other => other,
    }
}

/// Parses `tile_aabb`, `subtile_obb`, `exhaustive`, `hier_cat`,
/// `hier_cat:<mode>` or `hier_cat:<mode>:<profile>`; omitted parts come
/// from `cfg`.
pub fn parse_strategy(s: &str, cfg: &RunConfig) -> Result<Strategy> {
    let mut parts = s.split(':');
    let head = parts.next().unwrap_or_default();
    let kind: StrategyKind = from_name(head, "strategy")?;
    let strategy = match kind {
        StrategyKind::HierCat => {
            let mode = match parts.next() {
                Some(m) => from_name(m, "sampling mode")?,
                None => cfg.sampling,
            };
            let profile = match parts.next() {
                Some(p) => from_name(p, "numeric profile")?,
                None => cfg.profile,
            };
            Strategy::HierCat { mode, profile }
        }
        _ => RunConfig {
            strategy: kind,
            ..RunConfig::default()
        }
        .strategy(),
    };
    if parts.next().is_some() {
        return Err(Error::Config(format!("malformed strategy `{s}`")));
    }
    Ok(strategy)
}

fn from_name<T: for<'de> Deserialize<'de>>(name: &str, what: &str) -> Result<T> {
    serde_json::from_value(Value::String(name.to_string())).map_err(|_| Error::Config(format!("unknown {what} `{name}`")))
}

/// Applies `a.b.c=value`. The value is parsed as JSON when possible and
/// taken as a string otherwise. Missing intermediate objects are created so
/// that unknown keys are reported by name when the result is deserialized.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("override key `{path}` is malformed")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    for (i, key) in keys.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("cannot set `{path}`: `{}` is not an object", keys[..i].join("."))))?;
        if i + 1 == keys.len() {
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        node = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("override path has at least one key")
}
