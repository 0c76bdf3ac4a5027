//! Tile hierarchy and the coarse (Stage 1) intersection predicates.

use serde::{Deserialize, Serialize};

use super::Splat2D;

pub const TILE: i32 = 16;
pub const SUBTILE: i32 = 8;
pub const MINITILE: i32 = 4;
/// α below this is treated as no contribution.
pub const ALPHA_MIN: f64 = 1.0 / 255.0;

/// Granularity of a cell in the tile hierarchy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    Tile,
    Subtile,
    Minitile,
}

impl Level {
    pub fn size(self) -> i32 {
        match self {
            Level::Tile => TILE,
            Level::Subtile => SUBTILE,
            Level::Minitile => MINITILE,
        }
    }
}

/// Address of a cell: a 16×16 tile, one of its four 8×8 sub-tiles and one of
/// that sub-tile's four 4×4 mini-tiles. Quadrants are numbered row-major
/// (0 top-left, 1 top-right, 2 bottom-left, 3 bottom-right).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct TileCoords {
    pub tile: (u32, u32),
    pub subtile: u8,
    pub minitile: u8,
}

impl TileCoords {
    pub fn new(tile: (u32, u32), subtile: u8, minitile: u8) -> Self {
        debug_assert!(subtile < 4 && minitile < 4);
        TileCoords {
            tile,
            subtile,
            minitile,
        }
    }

    pub fn tile_origin(&self) -> (i32, i32) {
        (self.tile.0 as i32 * TILE, self.tile.1 as i32 * TILE)
    }

    pub fn subtile_origin(&self) -> (i32, i32) {
        let (x, y) = self.tile_origin();
        let s = self.subtile as i32;
        (x + (s & 1) * SUBTILE, y + (s >> 1) * SUBTILE)
    }

    pub fn minitile_origin(&self) -> (i32, i32) {
        let (x, y) = self.subtile_origin();
        let m = self.minitile as i32;
        (x + (m & 1) * MINITILE, y + (m >> 1) * MINITILE)
    }

    /// Top-left pixel of the cell at `level`.
    pub fn origin(&self, level: Level) -> (i32, i32) {
        match level {
            Level::Tile => self.tile_origin(),
            Level::Subtile => self.subtile_origin(),
            Level::Minitile => self.minitile_origin(),
        }
    }

    /// Mini-tile index within the tile, `subtile * 4 + minitile` (0..16).
    pub fn minitile_in_tile(&self) -> usize {
        self.subtile as usize * 4 + self.minitile as usize
    }

    /// Coordinates of mini-tile `index` (0..16) of `tile`.
    pub fn from_tile_minitile(tile: (u32, u32), index: usize) -> Self {
        TileCoords::new(tile, (index / 4) as u8, (index % 4) as u8)
    }

    /// Coordinates of the tile containing pixel `(x, y)`.
    pub fn containing(x: u32, y: u32) -> Self {
        let tx = x / TILE as u32;
        let ty = y / TILE as u32;
        let lx = (x % TILE as u32) as u8;
        let ly = (y % TILE as u32) as u8;
        let subtile = (lx / 8) + 2 * (ly / 8);
        let minitile = ((lx % 8) / 4) + 2 * ((ly % 8) / 4);
        TileCoords::new((tx, ty), subtile, minitile)
    }
}

/// Inclusive integer pixel rectangle. An empty rectangle has
/// `x_min > x_max` (see [`PixelRect::EMPTY`]).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PixelRect {
    pub x_min: i32,
    pub x_max: i32,
    pub y_min: i32,
    pub y_max: i32,
}

impl PixelRect {
    pub const EMPTY: PixelRect = PixelRect {
        x_min: 1,
        x_max: 0,
        y_min: 1,
        y_max: 0,
    };

    pub fn is_empty(&self) -> bool {
        self.x_min > self.x_max || self.y_min > self.y_max
    }

    /// Pixel span of a hierarchy cell.
    pub fn of_cell(coords: &TileCoords, level: Level) -> Self {
        let (x, y) = coords.origin(level);
        let n = level.size() - 1;
        PixelRect {
            x_min: x,
            x_max: x + n,
            y_min: y,
            y_max: y + n,
        }
    }

    pub fn overlaps(&self, other: &PixelRect) -> bool {
        !self.is_empty()
            && !other.is_empty()
            && self.x_min <= other.x_max
            && other.x_min <= self.x_max
            && self.y_min <= other.y_max
            && other.y_min <= self.y_max
    }

    /// Number of `size`-aligned cells the rectangle touches.
    pub fn cells_touched(&self, size: i32) -> u64 {
        if self.is_empty() {
            return 0;
        }
        let nx = self.x_max.div_euclid(size) - self.x_min.div_euclid(size) + 1;
        let ny = self.y_max.div_euclid(size) - self.y_min.div_euclid(size) + 1;
        nx as u64 * ny as u64
    }
}

/// Half-extent of the bounding region in standard deviations: the 3σ rule,
/// widened for opaque splats so the region always covers every pixel with
/// α ≥ 1/255 (where `½ dᵀΣ⁻¹d ≤ ln(255·o)`). The widened reach carries a
/// relative slack of 1e-9 so rounding never excludes a boundary pixel.
pub fn bound_sigmas(opacity: f64) -> f64 {
    let reach = (2.0 * (opacity / ALPHA_MIN).ln()).max(0.0).sqrt() * (1.0 + 1e-9);
    reach.max(3.0)
}

/// Axis-aligned pixel bounds from the marginal standard deviations of the
/// dilated covariance, rounded to the nearest pixel index and clipped to a
/// `width × height` frame. Every integer pixel inside the continuous box is
/// included.
pub fn aabb_rect(s: &Splat2D, width: u32, height: u32) -> PixelRect {
    let k = bound_sigmas(s.opacity);
    let rx = k * s.cov.xx.sqrt();
    let ry = k * s.cov.yy.sqrt();
    let x_lo = (s.mu[0] - rx).round();
    let x_hi = (s.mu[0] + rx).round();
    let y_lo = (s.mu[1] - ry).round();
    let y_hi = (s.mu[1] + ry).round();
    let (w, h) = (width as f64 - 1.0, height as f64 - 1.0);
    if !(x_hi >= 0.0 && y_hi >= 0.0 && x_lo <= w && y_lo <= h) {
        return PixelRect::EMPTY;
    }
    PixelRect {
        x_min: x_lo.max(0.0) as i32,
        x_max: x_hi.min(w) as i32,
        y_min: y_lo.max(0.0) as i32,
        y_max: y_hi.min(h) as i32,
    }
}

/// Closed-interval overlap of `rect` with the cell `t` at `level`.
pub fn rect_hits_tile(rect: &PixelRect, t: &TileCoords, level: Level) -> bool {
    rect.overlaps(&PixelRect::of_cell(t, level))
}

/// Separating-axis test of the sub-tile's pixel square against the oriented
/// box of the splat.
///
/// Candidate axes are x, y, the major axis and the minor axis. On the major
/// and minor axes the box half-extents are `k·√λ1` and `k·√λ2`; on x and y
/// the splat's projection is its marginal half-extent `k·σ`, so the tested
/// region is the oriented box intersected with the axis-aligned box and a
/// pass always implies a sub-tile AABB pass.
pub fn obb_hits_subtile(s: &Splat2D, t: &TileCoords) -> bool {
    let (x0, y0) = t.subtile_origin();
    let half = (SUBTILE - 1) as f64 / 2.0;
    let center = [x0 as f64 + half, y0 as f64 + half];
    let d = [s.mu[0] - center[0], s.mu[1] - center[1]];
    let k = bound_sigmas(s.opacity);
    let [ux, uy] = s.axis_dir;

    let axes = [
        ([1.0, 0.0], k * s.cov.xx.sqrt()),
        ([0.0, 1.0], k * s.cov.yy.sqrt()),
        ([ux, uy], k * s.lambda[0].sqrt()),
        ([-uy, ux], k * s.lambda[1].sqrt()),
    ];
    axes.iter().all(|(n, splat_r)| {
        let square_r = half * (n[0].abs() + n[1].abs());
        (n[0] * d[0] + n[1] * d[1]).abs() <= square_r + splat_r
    })
}
