//! Tile-based functional renderer.
//!
//! Splats are binned into 16×16 tiles, stably depth-sorted per tile and
//! blended front to back. The [`Strategy`] decides which pixels of a tile a
//! splat is evaluated at; blending itself is always double precision.

mod binning;
mod tile;
mod trace;

pub use binning::{bin_gaussians, depth_sort, Binning, Duplicates};
pub use tile::{render_tile, TileOutput};
pub use trace::{FrameTrace, TileTrace, TraceItem, TRACE_VERSION};

use rayon::prelude::*;
use serde::Serialize;

use crate::cat::{NumericProfile, PreparedSplat, SamplingMode};
use crate::preprocess::{project_scene, ProjectionCounts, Splat2D, TileCoords, TILE};
use crate::scene_io::{Camera, Gaussian3D, ImageBuffer};
use crate::{Error, Result};

/// A pixel is retired once its transmittance drops below this value.
pub const T_MIN: f64 = 1e-4;

/// Which pixels a binned splat is evaluated at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Every pixel of every tile the AABB touches.
    TileAabb,
    /// Pixels of the 8×8 sub-tiles passing the oriented-box test.
    SubtileObb,
    /// Sub-tile AABB, then the mini-tile contribution test.
    HierCat { mode: SamplingMode, profile: NumericProfile },
    /// Sub-tile AABB, then a mini-tile is kept iff one of its 16 pixels
    /// receives α ≥ 1/255. Reference for what culling may safely skip.
    Exhaustive,
}

impl Strategy {
    pub fn label(&self) -> String {
        match self {
            Strategy::TileAabb => "tile_aabb".into(),
            Strategy::SubtileObb => "subtile_obb".into(),
            Strategy::HierCat { mode, profile } => format!("hier_cat[{},{}]", mode.name(), profile.name()),
            Strategy::Exhaustive => "exhaustive".into(),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderConfig {
    pub background: [f64; 3],
    /// Retire pixels whose transmittance falls below [`T_MIN`].
    pub early_termination: bool,
    /// Record per-tile work traces for the pipeline simulator.
    pub record_trace: bool,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            background: [0.0; 3],
            early_termination: true,
            record_trace: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RenderStats {
    pub width: u32,
    pub height: u32,
    /// Row-major, one entry per output pixel: splats whose α was evaluated
    /// there (including evaluations below the 1/255 threshold).
    #[serde(skip)]
    pub per_pixel_gaussians: Vec<u32>,
    pub duplicates: Duplicates,
    /// Binned list entries never visited because their tile had retired
    /// every pixel.
    pub skipped_early_term: u64,
    pub degenerate: u64,
    pub culled: u64,
    pub visible: u64,
}

impl RenderStats {
    pub fn mean_per_pixel(&self) -> f64 {
        if self.per_pixel_gaussians.is_empty() {
            return 0.0;
        }
        let total: u64 = self.per_pixel_gaussians.iter().map(|&c| c as u64).sum();
        total as f64 / self.per_pixel_gaussians.len() as f64
    }

    pub fn max_per_pixel(&self) -> u32 {
        self.per_pixel_gaussians.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub struct Frame {
    pub image: ImageBuffer,
    pub stats: RenderStats,
    pub trace: Option<FrameTrace>,
}

/// Splats plus per-strategy precomputation shared by all tiles.
pub(crate) struct FrameContext<'a> {
    pub splats: &'a [Splat2D],
    pub prepared: Option<Vec<PreparedSplat>>,
    pub strategy: Strategy,
    pub padded: (u32, u32),
}

/// Renders already projected splats.
pub fn render_splats(splats: &[Splat2D], cam: &Camera, strategy: Strategy, cfg: &RenderConfig) -> Result<Frame> {
    cam.validate()?;
    let binning = bin_gaussians(splats, cam, strategy);
    let prepared = match strategy {
        Strategy::HierCat { profile, .. } => Some(splats.iter().map(|s| PreparedSplat::from_splat(s, profile)).collect()),
        _ => None,
    };
    let ctx = FrameContext {
        splats,
        prepared,
        strategy,
        padded: (cam.padded_width(), cam.padded_height()),
    };

    let (tx, ty) = (cam.tiles_x(), cam.tiles_y());
    let outputs: Vec<TileOutput> = (0..tx * ty)
        .into_par_iter()
        .map(|i| {
            let tile = (i % tx, i / tx);
            let sorted = depth_sort(&binning.lists[i as usize], splats);
            tile::render_tile_ctx(&ctx, tile, &sorted, cfg)
        })
        .collect();

    let (w, h) = (cam.width, cam.height);
    let mut image = ImageBuffer::filled(w as usize, h as usize, cfg.background);
    let mut stats = RenderStats {
        width: w,
        height: h,
        per_pixel_gaussians: vec![0; (w * h) as usize],
        duplicates: binning.duplicates,
        ..Default::default()
    };
    let mut tiles = Vec::new();
    for (i, out) in outputs.into_iter().enumerate() {
        let (ox, oy) = TileCoords::new((i as u32 % tx, i as u32 / tx), 0, 0).tile_origin();
        for ly in 0..TILE {
            for lx in 0..TILE {
                let (x, y) = ((ox + lx) as u32, (oy + ly) as u32);
                if x < w && y < h {
                    let k = (ly * TILE + lx) as usize;
                    image.set(x as usize, y as usize, out.pixels[k]);
                    stats.per_pixel_gaussians[(y * w + x) as usize] = out.counts[k];
                }
            }
        }
        stats.skipped_early_term += out.skipped_early_term;
        if let Some(t) = out.trace {
            tiles.push(t);
        }
    }
    let trace = cfg.record_trace.then(|| FrameTrace {
        version: TRACE_VERSION,
        width: w,
        height: h,
        strategy: strategy.label(),
        tiles,
    });
    Ok(Frame { image, stats, trace })
}

/// Projects, bins, sorts and renders a scene.
pub fn render_frame(scene: &[Gaussian3D], cam: &Camera, strategy: Strategy, cfg: &RenderConfig) -> Result<Frame> {
    cam.validate()?;
    let (splats, counts) = project_scene(scene, cam);
    let mut frame = render_splats(&splats, cam, strategy, cfg)?;
    let ProjectionCounts {
        visible,
        culled,
        degenerate,
    } = counts;
    frame.stats.visible = visible as u64;
    frame.stats.culled = culled as u64;
    frame.stats.degenerate = degenerate as u64;
    Ok(frame)
}

/// Peak signal-to-noise ratio over all channels of images in `[0, 1]`;
/// `+∞` for identical images.
pub fn psnr(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    if (a.width, a.height) != (b.width, b.height) {
        return Err(Error::Parameter(format!(
            "image sizes differ: {}x{} vs {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    if a.pixels.is_empty() {
        return Err(Error::Parameter("cannot compare empty images".into()));
    }
    let sum: f64 = a
        .pixels
        .iter()
        .zip(&b.pixels)
        .flat_map(|(p, q)| (0..3).map(move |c| (p[c] - q[c]).powi(2)))
        .sum();
    let mse = sum / (a.pixels.len() * 3) as f64;
    Ok(if mse == 0.0 { f64::INFINITY } else { 10.0 * (1.0 / mse).log10() })
}
