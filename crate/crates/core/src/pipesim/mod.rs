//! Cycle-level model of the culling and rasterization stage.
//!
//! Each of the four rendering cores owns one sub-tile of the current tile.
//! Its CTU tests one splat per one or two cycles (two PRs per cycle) and
//! pushes the splat id into the FIFO of every mini-tile the test kept; each
//! FIFO is drained by a VRU pair at one splat per cycle. The per-mini-tile
//! early-termination points come from the functional render that produced
//! the trace, so both agree on the work set.

mod core;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use self::core::{run_core, CoreItem, CoreParams, CHANNELS};
use crate::cat::Sampling;
use crate::rasterizer::{FrameTrace, TileTrace};
use crate::{Error, Result};

const CORES: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipeConfig {
    pub rendering_cores: usize,
    pub channels_per_core: usize,
    pub vrus_per_channel: usize,
    /// Entries per mini-tile feature FIFO.
    pub fifo_depth: usize,
    /// Results the CTU can hold (in flight plus parked).
    pub ctu_fifo_depth: usize,
    pub prtus_per_ctu: usize,
    /// Cycles from CTU intake to the earliest VRU pop, for a one-cycle test.
    pub ctu_latency: u32,
    /// Cycles a VRU pair is occupied per splat (initiation interval).
    pub vru_interval: u32,
    /// `false` bypasses the CTU: every mini-tile of each sub-tile passing the
    /// AABB test receives the splat.
    pub ctu_enabled: bool,
}

impl Default for PipeConfig {
    fn default() -> Self {
        PipeConfig {
            rendering_cores: 4,
            channels_per_core: 4,
            vrus_per_channel: 2,
            fifo_depth: 16,
            ctu_fifo_depth: 8,
            prtus_per_ctu: 2,
            ctu_latency: 3,
            vru_interval: 1,
            ctu_enabled: true,
        }
    }
}

impl PipeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.rendering_cores != CORES {
            return bad(format!("pipe.rendering_cores must be 4 (one per sub-tile), got {}", self.rendering_cores));
        }
        if self.channels_per_core != CHANNELS {
            return bad(format!(
                "pipe.channels_per_core must be 4 (one per mini-tile), got {}",
                self.channels_per_core
            ));
        }
        if self.vrus_per_channel != 2 {
            return bad(format!(
                "pipe.vrus_per_channel must be 2 (8 pixels each, 16 per mini-tile), got {}",
                self.vrus_per_channel
            ));
        }
        for (name, v) in [
            ("fifo_depth", self.fifo_depth),
            ("ctu_fifo_depth", self.ctu_fifo_depth),
            ("prtus_per_ctu", self.prtus_per_ctu),
            ("ctu_latency", self.ctu_latency as usize),
            ("vru_interval", self.vru_interval as usize),
        ] {
            if v == 0 {
                return bad(format!("pipe.{name} must be at least 1"));
            }
        }
        Ok(())
    }

    /// CTU occupancy for one splat.
    pub fn ctu_cost(&self, sampling: Sampling) -> u32 {
        if !self.ctu_enabled {
            return 1;
        }
        sampling.prs_per_subtile().div_ceil(self.prtus_per_ctu) as u32
    }

    fn core_params(&self) -> CoreParams {
        CoreParams {
            fifo_depth: self.fifo_depth,
            ctu_fifo_depth: self.ctu_fifo_depth,
            latency: if self.ctu_enabled { self.ctu_latency } else { 1 },
            vru_interval: self.vru_interval,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PipeStats {
    pub cycles: u64,
    pub ctu_stall_cycles: u64,
    pub ctu_active_cycles: u64,
    /// Stall cycles over active cycles, summed over all CTUs.
    pub stall_rate: f64,
    /// Fraction of cycles each channel's VRUs were rendering
    /// (`subtile * 4 + minitile`).
    pub vru_busy: Vec<f64>,
    pub processed_per_channel: Vec<u64>,
    pub pushes: u64,
    pub pops: u64,
    pub discards: u64,
}

/// Per-channel pop order of one tile.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TileLog {
    /// Indexed by `subtile * 4 + minitile`; `(position, id)` pairs.
    pub channels: Vec<Vec<(u32, u32)>>,
}

#[derive(Default)]
struct Tally {
    vru_interval: u32,
    cycles: u64,
    stall: u64,
    active: u64,
    pushes: u64,
    pops: u64,
    discards: u64,
    per_channel: Vec<u64>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.vru_interval = other.vru_interval;
        self.cycles += other.cycles;
        self.stall += other.stall;
        self.active += other.active;
        self.pushes += other.pushes;
        self.pops += other.pops;
        self.discards += other.discards;
        if self.per_channel.is_empty() {
            self.per_channel = other.per_channel;
        } else {
            for (a, b) in self.per_channel.iter_mut().zip(other.per_channel) {
                *a += b;
            }
        }
        self
    }

    fn into_stats(self) -> PipeStats {
        let per_channel = if self.per_channel.is_empty() {
            vec![0; CORES * CHANNELS]
        } else {
            self.per_channel
        };
        let busy = per_channel
            .iter()
            .map(|&p| {
                if self.cycles == 0 {
                    0.0
                } else {
                    (p * self.vru_interval as u64) as f64 / self.cycles as f64
                }
            })
            .collect();
        PipeStats {
            cycles: self.cycles,
            ctu_stall_cycles: self.stall,
            ctu_active_cycles: self.active,
            stall_rate: if self.active == 0 { 0.0 } else { self.stall as f64 / self.active as f64 },
            vru_busy: busy,
            processed_per_channel: per_channel,
            pushes: self.pushes,
            pops: self.pops,
            discards: self.discards,
        }
    }
}

fn simulate_tile_inner(trace: &TileTrace, cfg: &PipeConfig) -> Result<(Tally, TileLog)> {
    let params = cfg.core_params();
    let mut tally = Tally {
        vru_interval: cfg.vru_interval,
        per_channel: vec![0; CORES * CHANNELS],
        ..Default::default()
    };
    let mut log = TileLog {
        channels: vec![Vec::new(); CORES * CHANNELS],
    };
    for st in 0..CORES {
        let items: Vec<CoreItem> = trace
            .items
            .iter()
            .filter(|it| it.stage1 >> st & 1 == 1)
            .map(|it| CoreItem {
                position: it.position,
                id: it.id,
                mask: if cfg.ctu_enabled { it.masks[st].0 } else { 0xF },
                cost: cfg.ctu_cost(it.sampling),
            })
            .collect();
        let death = std::array::from_fn(|m| trace.death[st * CHANNELS + m]);
        let run = run_core(&items, death, params);
        for ch in 0..CHANNELS {
            if run.pushes[ch] != run.pops[ch] + run.discards[ch] {
                return Err(Error::Invariant(format!(
                    "tile {:?} channel {}: {} pushes != {} pops + {} discards",
                    trace.tile,
                    st * CHANNELS + ch,
                    run.pushes[ch],
                    run.pops[ch],
                    run.discards[ch]
                )));
            }
        }
        tally.cycles = tally.cycles.max(run.cycles);
        tally.stall += run.stall_cycles;
        tally.active += run.active_cycles;
        for ch in 0..CHANNELS {
            tally.pushes += run.pushes[ch];
            tally.pops += run.pops[ch];
            tally.discards += run.discards[ch];
            tally.per_channel[st * CHANNELS + ch] = run.pops[ch];
        }
        for (ch, l) in run.log.into_iter().enumerate() {
            log.channels[st * CHANNELS + ch] = l;
        }
    }
    Ok((tally, log))
}

/// Simulates one tile; its four cores run concurrently, so the tile takes
/// as long as the slowest core.
pub fn simulate_tile(trace: &TileTrace, cfg: &PipeConfig) -> Result<PipeStats> {
    cfg.validate()?;
    Ok(simulate_tile_inner(trace, cfg)?.0.into_stats())
}

/// Like [`simulate_tile`], also returning every channel's pop order.
pub fn simulate_tile_logged(trace: &TileTrace, cfg: &PipeConfig) -> Result<(PipeStats, TileLog)> {
    cfg.validate()?;
    let (t, log) = simulate_tile_inner(trace, cfg)?;
    Ok((t.into_stats(), log))
}

/// Simulates every tile in sequence; frame cycles are the sum over tiles.
pub fn simulate_frame(trace: &FrameTrace, cfg: &PipeConfig) -> Result<PipeStats> {
    cfg.validate()?;
    let tallies = trace
        .tiles
        .par_iter()
        .map(|t| simulate_tile_inner(t, cfg).map(|r| r.0))
        .collect::<Result<Vec<_>>>()?;
    Ok(tallies.into_iter().fold(Tally::default(), Tally::merge).into_stats())
}

/// `base.cycles / test.cycles`.
pub fn speedup(base: &PipeStats, test: &PipeStats) -> Result<f64> {
    if test.cycles == 0 {
        return Err(Error::Parameter("speedup: test run has zero cycles".into()));
    }
    Ok(base.cycles as f64 / test.cycles as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub depth: usize,
    pub cycles: u64,
    pub stall_rate: f64,
    pub speedup: f64,
}

/// Runs the frame once per FIFO depth, everything else fixed; speedups are
/// relative to the first depth.
pub fn sweep_fifo_depth(trace: &FrameTrace, cfg: &PipeConfig, depths: &[usize]) -> Result<Vec<SweepRow>> {
    if depths.is_empty() {
        return Err(Error::Parameter("no FIFO depths given".into()));
    }
    if depths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter(format!("FIFO depths must be strictly increasing: {depths:?}")));
    }
    let runs = depths
        .par_iter()
        .map(|&d| {
            let c = PipeConfig {
                fifo_depth: d,
                ..cfg.clone()
            };
            simulate_frame(trace, &c)
        })
        .collect::<Result<Vec<_>>>()?;
    runs.iter()
        .zip(depths)
        .map(|(r, &depth)| {
            Ok(SweepRow {
                depth,
                cycles: r.cycles,
                stall_rate: r.stall_rate,
                speedup: speedup(&runs[0], r)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cat::MiniTileMask;
    use crate::rasterizer::TraceItem;

    fn tile(items: Vec<TraceItem>) -> TileTrace {
        TileTrace {
            tile: (0, 0),
            items,
            death: [None; 16],
            evaluated: Vec::new(),
        }
    }

    fn item(position: u32, stage1: u8, masks: [u8; 4], sampling: Sampling) -> TraceItem {
        TraceItem {
            position,
            id: position,
            stage1,
            masks: masks.map(MiniTileMask),
            sampling,
        }
    }

    #[test]
    fn hierarchy_is_enforced() {
        for cfg in [
            PipeConfig {
                rendering_cores: 2,
                ..Default::default()
            },
            PipeConfig {
                channels_per_core: 8,
                ..Default::default()
            },
            PipeConfig {
                vrus_per_channel: 1,
                ..Default::default()
            },
            PipeConfig {
                fifo_depth: 0,
                ..Default::default()
            },
        ] {
            assert!(matches!(simulate_tile(&tile(vec![]), &cfg), Err(Error::Config(_))));
        }
    }

    #[test]
    fn one_minitile_per_splat() {
        let n = 30;
        for (sampling, expect) in [(Sampling::Sparse, n + 3), (Sampling::Dense, 2 * n + 3)] {
            let items = (0..n as u32).map(|p| item(p, 0b0001, [0b0001, 0, 0, 0], sampling)).collect();
            let s = simulate_tile(&tile(items), &PipeConfig::default()).unwrap();
            assert_eq!(s.cycles, expect);
            assert_eq!(s.ctu_stall_cycles, 0);
            assert!(s.cycles >= *s.processed_per_channel.iter().max().unwrap());
        }
    }

    #[test]
    fn speedup_cases() {
        let a = PipeStats {
            cycles: 100,
            ..Default::default()
        };
        let b = PipeStats {
            cycles: 50,
            ..Default::default()
        };
        assert_eq!(speedup(&a, &a).unwrap(), 1.0);
        assert_eq!(speedup(&a, &b).unwrap(), 2.0);
        assert!(matches!(speedup(&a, &PipeStats::default()), Err(Error::Parameter(_))));
    }

    #[test]
    fn ctu_helps_when_most_work_is_culled() {
        // Every splat passes all four sub-tiles; the CTU keeps one mini-tile
        // of one sub-tile for every tenth splat.
        let items: Vec<_> = (0..200u32)
            .map(|p| {
                let keep = if p % 10 == 0 { 0b0001 } else { 0 };
                item(p, 0xF, [keep, 0, 0, 0], Sampling::Sparse)
            })
            .collect();
        let trace = FrameTrace {
            version: crate::rasterizer::TRACE_VERSION,
            width: 16,
            height: 16,
            strategy: "test".into(),
            tiles: vec![tile(items)],
        };
        let on = simulate_frame(&trace, &PipeConfig::default()).unwrap();
        let off = simulate_frame(
            &trace,
            &PipeConfig {
                ctu_enabled: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(on.pops, 20);
        assert_eq!(off.pops, 200 * 16);
        assert!(off.processed_per_channel.iter().zip(&on.processed_per_channel).all(|(a, b)| b <= a));
        // With single-cycle VRUs both runs are bound by intake, one splat per
        // cycle, and the CTU only adds its pipeline latency (the last
        // splat, #199, drains out of the CTU at cycle 201).
        assert_eq!(off.cycles, 201);
        assert_eq!(on.cycles, 202);

        // Once rendering a splat costs more than testing it, culling pays.
        let slow = |ctu_enabled| PipeConfig {
            vru_interval: 8,
            ctu_enabled,
            ..Default::default()
        };
        let on = simulate_frame(&trace, &slow(true)).unwrap();
        let off = simulate_frame(&trace, &slow(false)).unwrap();
        assert!(speedup(&off, &on).unwrap() > 1.0);
    }

    #[test]
    fn sweep_rules() {
        let items = (0..20u32).map(|p| item(p, 0b0001, [0b0011, 0, 0, 0], Sampling::Sparse)).collect();
        let trace = FrameTrace {
            version: crate::rasterizer::TRACE_VERSION,
            width: 16,
            height: 16,
            strategy: "test".into(),
            tiles: vec![tile(items)],
        };
        let cfg = PipeConfig::default();
        assert!(sweep_fifo_depth(&trace, &cfg, &[]).is_err());
        assert!(sweep_fifo_depth(&trace, &cfg, &[4, 4]).is_err());
        let rows = sweep_fifo_depth(&trace, &cfg, &[16]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].speedup, 1.0);
        let single = FrameTrace {
            tiles: vec![tile(vec![item(0, 0b0001, [0b1111, 0, 0, 0], Sampling::Dense)])],
            ..trace
        };
        let rows = sweep_fifo_depth(&single, &cfg, &[1, 2, 8, 128]).unwrap();
        assert!(rows.iter().all(|r| r.cycles == rows[0].cycles && r.stall_rate == rows[0].stall_rate));
    }
}
