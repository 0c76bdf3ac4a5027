use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cat::{MiniTileMask, Sampling};
use crate::error::Error;
use crate::Result;

pub const TRACE_VERSION: u32 = 1;

/// One entry of a tile's depth-sorted list as seen by the culling pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceItem {
    /// Index in the tile's sorted list.
    pub position: u32,
    pub id: u32,
    /// Sub-tiles passing the sub-tile AABB test (bit per sub-tile).
    pub stage1: u8,
    /// Mini-tiles the strategy kept, per sub-tile.
    pub masks: [MiniTileMask; 4],
    pub sampling: Sampling,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileTrace {
    pub tile: (u32, u32),
    pub items: Vec<TraceItem>,
    /// Per mini-tile (`subtile * 4 + minitile`): list position of the splat
    /// during which its last live pixel retired.
    pub death: [Option<u32>; 16],
    /// `(position, mini-tile)` pairs the renderer evaluated at ≥ 1 live pixel,
    /// in processing order.
    pub evaluated: Vec<(u32, u8)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameTrace {
    pub version: u32,
    pub width: u32,
    pub height: u32,
    pub strategy: String,
    pub tiles: Vec<TileTrace>,
}

impl FrameTrace {
    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io_at(path, e))?;
        serde_json::to_writer(std::io::BufWriter::new(f), self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<FrameTrace> {
        let bytes = std::fs::read(path).map_err(|e| Error::io_at(path, e))?;
        let t: FrameTrace = serde_json::from_slice(&bytes).map_err(|e| Error::Format(format!("trace: {e}")))?;
        if t.version != TRACE_VERSION {
            return Err(Error::Format(format!("unsupported trace version {}", t.version)));
        }
        Ok(t)
    }
}
