//! One rendering core: a CTU feeding four mini-tile FIFOs, each drained by
//! a VRU pair.
//!
//! Phases inside a cycle: VRU pops, CTU intake, CTU completions into the
//! internal result queue, then pushes from the head of that queue.

use std::collections::VecDeque;

pub(crate) const CHANNELS: usize = 4;

#[derive(Clone, Copy, Debug)]
pub(crate) struct CoreItem {
    pub position: u32,
    pub id: u32,
    /// Target channels (bit per mini-tile of the sub-tile).
    pub mask: u8,
    /// Cycles the CTU is occupied by this item.
    pub cost: u32,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct CoreParams {
    pub fifo_depth: usize,
    pub ctu_fifo_depth: usize,
    /// Cycles from intake to the earliest pop for a one-cycle item.
    pub latency: u32,
    /// Cycles a channel is occupied per popped splat.
    pub vru_interval: u32,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct CoreRun {
    pub cycles: u64,
    pub stall_cycles: u64,
    pub active_cycles: u64,
    pub pushes: [u64; CHANNELS],
    pub pops: [u64; CHANNELS],
    pub discards: [u64; CHANNELS],
    /// `(position, id)` in pop order per channel.
    pub log: [Vec<(u32, u32)>; CHANNELS],
}

struct Pending {
    ready: u64,
    item: CoreItem,
}

pub(crate) fn run_core(items: &[CoreItem], death: [Option<u32>; CHANNELS], p: CoreParams) -> CoreRun {
    let mut run = CoreRun::default();
    let mut next = 0usize;
    let mut busy_until = 0u64;
    let mut inflight: VecDeque<Pending> = VecDeque::new();
    let mut queue: VecDeque<(u8, CoreItem)> = VecDeque::new();
    let mut fifos: [VecDeque<(u32, u32)>; CHANNELS] = Default::default();
    let mut dead = [false; CHANNELS];
    let mut vru_free = [0u64; CHANNELS];
    let mut cycle = 0u64;

    loop {
        let pending_work = next < items.len() || !inflight.is_empty() || !queue.is_empty();
        if !pending_work && fifos.iter().all(|f| f.is_empty()) && vru_free.iter().all(|&f| f <= cycle) {
            break;
        }
        if pending_work {
            run.active_cycles += 1;
        }

        for ch in 0..CHANNELS {
            if dead[ch] || vru_free[ch] > cycle {
                continue;
            }
            let Some(&(pos, id)) = fifos[ch].front() else { continue };
            match death[ch] {
                Some(d) if pos > d => {
                    run.discards[ch] += fifos[ch].len() as u64;
                    fifos[ch].clear();
                    dead[ch] = true;
                }
                d => {
                    fifos[ch].pop_front();
                    vru_free[ch] = cycle + p.vru_interval as u64;
                    run.pops[ch] += 1;
                    run.log[ch].push((pos, id));
                    if d == Some(pos) {
                        run.discards[ch] += fifos[ch].len() as u64;
                        fifos[ch].clear();
                        dead[ch] = true;
                    }
                }
            }
        }
        if dead.iter().all(|&d| d) {
            next = items.len();
        }

        if next < items.len() && cycle >= busy_until {
            let room = inflight.len() + queue.len() < p.ctu_fifo_depth;
            if queue.is_empty() && room {
                let item = items[next];
                next += 1;
                busy_until = cycle + item.cost as u64;
                inflight.push_back(Pending {
                    ready: cycle + (item.cost + p.latency) as u64 - 2,
                    item,
                });
            } else {
                run.stall_cycles += 1;
            }
        }

        while inflight.front().is_some_and(|f| f.ready <= cycle) {
            let done = inflight.pop_front().unwrap();
            if done.item.mask != 0 {
                queue.push_back((done.item.mask, done.item));
            }
        }

        if let Some((remaining, item)) = queue.front_mut() {
            for ch in 0..CHANNELS {
                if *remaining >> ch & 1 == 0 {
                    continue;
                }
                if dead[ch] {
                    run.pushes[ch] += 1;
                    run.discards[ch] += 1;
                } else if fifos[ch].len() < p.fifo_depth {
                    fifos[ch].push_back((item.position, item.id));
                    run.pushes[ch] += 1;
                } else {
                    continue;
                }
                *remaining &= !(1 << ch);
            }
            if *remaining == 0 {
                queue.pop_front();
            }
        }

        cycle += 1;
    }
    run.cycles = cycle;
    run
}
