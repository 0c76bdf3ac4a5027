use super::trace::{TileTrace, TraceItem};
use super::{FrameContext, RenderConfig, Strategy, T_MIN};
use crate::cat::{cat_test_prepared, exhaustive_mask, MiniTileMask, PreparedSplat, Sampling};
use crate::preprocess::{
    aabb_rect, obb_hits_subtile, rect_hits_tile, Level, Splat2D, TileCoords, ALPHA_MIN, MINITILE, TILE,
};

const PIXELS: usize = (TILE * TILE) as usize;

#[derive(Clone, Debug)]
pub struct TileOutput {
    /// Row-major 16×16 colors.
    pub pixels: Vec<[f64; 3]>,
    pub counts: Vec<u32>,
    pub skipped_early_term: u64,
    pub trace: Option<TileTrace>,
}

/// Renders one tile from a depth-sorted list. AABBs are clipped to the
/// frame ending at this tile's bottom-right corner.
pub fn render_tile(tile: (u32, u32), sorted: &[Splat2D], strategy: Strategy, cfg: &RenderConfig) -> TileOutput {
    let prepared = match strategy {
        Strategy::HierCat { profile, .. } => Some(sorted.iter().map(|s| PreparedSplat::from_splat(s, profile)).collect()),
        _ => None,
    };
    let ctx = FrameContext {
        splats: sorted,
        prepared,
        strategy,
        padded: ((tile.0 + 1) * TILE as u32, (tile.1 + 1) * TILE as u32),
    };
    let order: Vec<u32> = (0..sorted.len() as u32).collect();
    render_tile_ctx(&ctx, tile, &order, cfg)
}

struct Selection {
    /// Bit `subtile * 4 + minitile`.
    active: u16,
    stage1: u8,
    masks: [MiniTileMask; 4],
    sampling: Sampling,
}

fn expand(masks: &[MiniTileMask; 4]) -> u16 {
    masks.iter().enumerate().fold(0u16, |acc, (st, m)| acc | (m.0 as u16) << (4 * st))
}

fn select(ctx: &FrameContext, idx: usize, tile: (u32, u32)) -> Selection {
    let s = &ctx.splats[idx];
    let rect = aabb_rect(s, ctx.padded.0, ctx.padded.1);
    let mut stage1 = 0u8;
    for st in 0..4u8 {
        if rect_hits_tile(&rect, &TileCoords::new(tile, st, 0), Level::Subtile) {
            stage1 |= 1 << st;
        }
    }
    let passing = |st: u8| stage1 >> st & 1 == 1;
    let mut masks = [MiniTileMask::NONE; 4];
    let mut sampling = Sampling::Dense;
    match ctx.strategy {
        Strategy::TileAabb => {
            masks = [MiniTileMask::ALL; 4];
        }
        Strategy::SubtileObb => {
            for st in 0..4u8 {
                if obb_hits_subtile(s, &TileCoords::new(tile, st, 0)) {
                    masks[st as usize] = MiniTileMask::ALL;
                }
            }
        }
        Strategy::HierCat { mode, .. } => {
            let prepared = &ctx.prepared.as_ref().expect("prepared splats")[idx];
            sampling = mode.sampling_for(s.spiky);
            for st in (0..4u8).filter(|&st| passing(st)) {
                masks[st as usize] = cat_test_prepared(prepared, s.spiky, &TileCoords::new(tile, st, 0), mode).mask;
            }
        }
        Strategy::Exhaustive => {
            for st in (0..4u8).filter(|&st| passing(st)) {
                masks[st as usize] = exhaustive_mask(s, &TileCoords::new(tile, st, 0));
            }
        }
    }
    Selection {
        active: expand(&masks),
        stage1,
        masks,
        sampling,
    }
}

pub(crate) fn render_tile_ctx(ctx: &FrameContext, tile: (u32, u32), sorted: &[u32], cfg: &RenderConfig) -> TileOutput {
    let mut t = vec![1.0f64; PIXELS];
    let mut accum = vec![[0.0f64; 3]; PIXELS];
    let mut counts = vec![0u32; PIXELS];
    let mut alive = vec![true; PIXELS];
    let mut alive_in_minitile = [16u8; 16];
    let mut alive_total = PIXELS;
    let mut skipped = 0u64;
    let mut trace = cfg.record_trace.then(|| TileTrace {
        tile,
        items: Vec::with_capacity(sorted.len()),
        death: [None; 16],
        evaluated: Vec::new(),
    });

    for (pos, &idx) in sorted.iter().enumerate() {
        if alive_total == 0 && trace.is_none() {
            skipped += (sorted.len() - pos) as u64;
            break;
        }
        let sel = select(ctx, idx as usize, tile);
        if let Some(tr) = trace.as_mut() {
            tr.items.push(TraceItem {
                position: pos as u32,
                id: ctx.splats[idx as usize].id,
                stage1: sel.stage1,
                masks: sel.masks,
                sampling: sel.sampling,
            });
        }
        if alive_total == 0 {
            skipped += 1;
            continue;
        }
        let s = &ctx.splats[idx as usize];
        for m in 0..16usize {
            if sel.active >> m & 1 == 0 || alive_in_minitile[m] == 0 {
                continue;
            }
            if let Some(tr) = trace.as_mut() {
                tr.evaluated.push((pos as u32, m as u8));
            }
            let (x0, y0) = TileCoords::from_tile_minitile(tile, m).minitile_origin();
            let (ox, oy) = TileCoords::new(tile, 0, 0).tile_origin();
            for dy in 0..MINITILE {
                for dx in 0..MINITILE {
                    let (x, y) = (x0 + dx, y0 + dy);
                    let k = ((y - oy) * TILE + (x - ox)) as usize;
                    if !alive[k] {
                        continue;
                    }
                    counts[k] += 1;
                    let a = s.alpha_at(x as f64, y as f64);
                    if a < ALPHA_MIN {
                        continue;
                    }
                    for c in 0..3 {
                        accum[k][c] += t[k] * s.color[c] * a;
                    }
                    t[k] *= 1.0 - a;
                    if cfg.early_termination && t[k] < T_MIN {
                        alive[k] = false;
                        alive_total -= 1;
                        alive_in_minitile[m] -= 1;
                        if alive_in_minitile[m] == 0 {
                            if let Some(tr) = trace.as_mut() {
                                tr.death[m] = Some(pos as u32);
                            }
                        }
                    }
                }
            }
        }
    }

    let pixels = (0..PIXELS)
        .map(|k| std::array::from_fn(|c| accum[k][c] + t[k] * cfg.background[c]))
        .collect();
    TileOutput {
        pixels,
        counts,
        skipped_early_term: skipped,
        trace,
    }
}
