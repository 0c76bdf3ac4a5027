use serde::{Deserialize, Serialize};

use super::Strategy;
use crate::preprocess::{aabb_rect, obb_hits_subtile, PixelRect, Splat2D, TileCoords, MINITILE, SUBTILE, TILE};
use crate::scene_io::Camera;

/// Binned copies of splats at each cell size, counted from the AABB.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Duplicates {
    pub tile16: u64,
    pub subtile8: u64,
    pub minitile4: u64,
}

impl Duplicates {
    fn add_rect(&mut self, r: &PixelRect) {
        self.tile16 += r.cells_touched(TILE);
        self.subtile8 += r.cells_touched(SUBTILE);
        self.minitile4 += r.cells_touched(MINITILE);
    }
}

#[derive(Clone, Debug)]
pub struct Binning {
    pub tiles_x: u32,
    pub tiles_y: u32,
    /// Row-major per-tile lists of splat indices, in input order.
    pub lists: Vec<Vec<u32>>,
    pub duplicates: Duplicates,
}

impl Binning {
    pub fn list(&self, tile: (u32, u32)) -> &[u32] {
        &self.lists[(tile.1 * self.tiles_x + tile.0) as usize]
    }
}

/// Assigns splats to tiles by the strategy's coarse predicate: the AABB for
/// every strategy except [`Strategy::SubtileObb`], which requires one of the
/// tile's sub-tiles to pass the oriented-box test.
pub fn bin_gaussians(splats: &[Splat2D], cam: &Camera, strategy: Strategy) -> Binning {
    let (pw, ph) = (cam.padded_width(), cam.padded_height());
    let (tiles_x, tiles_y) = (cam.tiles_x(), cam.tiles_y());
    let mut lists = vec![Vec::new(); (tiles_x * tiles_y) as usize];
    let mut duplicates = Duplicates::default();

    for (i, s) in splats.iter().enumerate() {
        let rect = aabb_rect(s, pw, ph);
        if rect.is_empty() {
            continue;
        }
        duplicates.add_rect(&rect);
        for ty in rect.y_min / TILE..=rect.y_max / TILE {
            for tx in rect.x_min / TILE..=rect.x_max / TILE {
                let tile = (tx as u32, ty as u32);
                let keep = match strategy {
                    Strategy::SubtileObb => (0..4).any(|st| obb_hits_subtile(s, &TileCoords::new(tile, st, 0))),
                    _ => true,
                };
                if keep {
                    lists[(tile.1 * tiles_x + tile.0) as usize].push(i as u32);
                }
            }
        }
    }
    Binning {
        tiles_x,
        tiles_y,
        lists,
        duplicates,
    }
}

/// Stable ascending sort of a tile list by camera depth.
pub fn depth_sort(list: &[u32], splats: &[Splat2D]) -> Vec<u32> {
    let mut out = list.to_vec();
    out.sort_by(|&a, &b| splats[a as usize].depth.total_cmp(&splats[b as usize].depth));
    out
}
