//! Mini-tile contribution-aware test (CAT).
//!
//! A splat that survives the sub-tile AABB test is evaluated at a few
//! *leader pixels* per 4×4 mini-tile. Leaders are grouped four at a time
//! into pixel rectangles (PRs) whose corner weights share intermediate
//! terms, and each corner is compared with the splat's shared threshold
//! `ln(255·o)`. A mini-tile is kept when any of its leaders contributes.
//!
//! Corner weights can be computed exactly or with binary16 / FP8 rounding
//! of every intermediate ([`NumericProfile`]).

use serde::{Deserialize, Serialize};

use crate::numeric::{Arith, Format};
use crate::preprocess::{Splat2D, Sym2, TileCoords, MINITILE};

/// How leader pixels are chosen per splat.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    UniformDense,
    UniformSparse,
    /// Dense for smooth splats, sparse for spiky ones.
    #[default]
    SmoothFocused,
    /// Dense for spiky splats, sparse for smooth ones.
    SpikyFocused,
}

impl SamplingMode {
    pub const ALL: [SamplingMode; 4] = [
        SamplingMode::UniformDense,
        SamplingMode::UniformSparse,
        SamplingMode::SmoothFocused,
        SamplingMode::SpikyFocused,
    ];

    pub fn sampling_for(self, spiky: bool) -> Sampling {
        match (self, spiky) {
            (SamplingMode::UniformDense, _) => Sampling::Dense,
            (SamplingMode::UniformSparse, _) => Sampling::Sparse,
            (SamplingMode::SmoothFocused, false) | (SamplingMode::SpikyFocused, true) => Sampling::Dense,
            (SamplingMode::SmoothFocused, true) | (SamplingMode::SpikyFocused, false) => Sampling::Sparse,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SamplingMode::UniformDense => "uniform_dense",
            SamplingMode::UniformSparse => "uniform_sparse",
            SamplingMode::SmoothFocused => "smooth_focused",
            SamplingMode::SpikyFocused => "spiky_focused",
        }
    }
}

/// Leader pattern of a single mini-tile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// The four corner pixels.
    Dense,
    /// The two main-diagonal corners (top-left, bottom-right).
    Sparse,
}

impl Sampling {
    /// Pixel rectangles per sub-tile.
    pub fn prs_per_subtile(self) -> usize {
        match self {
            Sampling::Dense => 4,
            Sampling::Sparse => 2,
        }
    }

    pub fn leaders_per_subtile(self) -> usize {
        self.prs_per_subtile() * 4
    }
}

/// Arithmetic used for the PR weights and the threshold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericProfile {
    /// Everything in binary16.
    Full16,
    /// Everything in FP8-E4M3, including the coordinate differences.
    Full8,
    /// Coordinate differences in binary16, then FP8 for the quadratic terms.
    #[default]
    Mixed,
    /// Unrounded double precision; the reference path.
    Exact,
}

impl NumericProfile {
    pub const ALL: [NumericProfile; 4] = [
        NumericProfile::Full16,
        NumericProfile::Full8,
        NumericProfile::Mixed,
        NumericProfile::Exact,
    ];

    /// (difference stage, accumulation stage)
    fn stages(self) -> (Arith, Arith) {
        match self {
            NumericProfile::Full16 => (Arith::Rounded(Format::Fp16), Arith::Rounded(Format::Fp16)),
            NumericProfile::Full8 => (Arith::Rounded(Format::Fp8), Arith::Rounded(Format::Fp8)),
            NumericProfile::Mixed => (Arith::Rounded(Format::Fp16), Arith::Rounded(Format::Fp8)),
            NumericProfile::Exact => (Arith::Exact, Arith::Exact),
        }
    }

    fn threshold_arith(self) -> Arith {
        match self {
            NumericProfile::Full16 | NumericProfile::Mixed => Arith::Rounded(Format::Fp16),
            NumericProfile::Full8 => Arith::Rounded(Format::Fp8),
            NumericProfile::Exact => Arith::Exact,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NumericProfile::Full16 => "full16",
            NumericProfile::Full8 => "full8",
            NumericProfile::Mixed => "mixed",
            NumericProfile::Exact => "exact",
        }
    }
}

/// Four leader pixels at the corners of an axis-aligned rectangle.
///
/// Corners are `p0 = p_top`, `p1 = (p_bot.x, p_top.y)`,
/// `p2 = (p_top.x, p_bot.y)`, `p3 = p_bot`; `owner[k]` is the mini-tile
/// (0..4 within the sub-tile) that corner `k` belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PixelRectangle {
    pub p_top: [i32; 2],
    pub p_bot: [i32; 2],
    pub owner: [u8; 4],
}

impl PixelRectangle {
    pub fn corners(&self) -> [[i32; 2]; 4] {
        let (t, b) = (self.p_top, self.p_bot);
        [t, [b[0], t[1]], [t[0], b[1]], b]
    }
}

/// One bit per mini-tile of a sub-tile (bit `m` for mini-tile `m`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MiniTileMask(pub u8);

impl MiniTileMask {
    pub const NONE: MiniTileMask = MiniTileMask(0);
    pub const ALL: MiniTileMask = MiniTileMask(0xF);

    pub fn get(self, m: usize) -> bool {
        self.0 >> m & 1 == 1
    }

    pub fn set(&mut self, m: usize) {
        self.0 |= 1 << m;
    }

    pub fn is_subset_of(self, other: MiniTileMask) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn count(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

/// Leader pixels of the mini-tile addressed by `minitile`.
pub fn leader_pixels(minitile: &TileCoords, sampling: Sampling) -> Vec<[i32; 2]> {
    let (x, y) = minitile.minitile_origin();
    let e = MINITILE - 1;
    match sampling {
        Sampling::Dense => vec![[x, y], [x + e, y], [x, y + e], [x + e, y + e]],
        Sampling::Sparse => vec![[x, y], [x + e, y + e]],
    }
}

/// Pixel rectangles covering the leaders of one sub-tile.
///
/// Dense: one PR per mini-tile on its four corners. Sparse: two PRs that
/// span all four mini-tiles, one through the top-left leaders and one
/// through the bottom-right leaders, each corner owned by a different
/// mini-tile.
pub fn form_prs(subtile: &TileCoords, sampling: Sampling) -> Vec<PixelRectangle> {
    let (x, y) = subtile.subtile_origin();
    let e = MINITILE - 1;
    match sampling {
        Sampling::Dense => (0..4u8)
            .map(|m| {
                let ox = x + (m as i32 & 1) * MINITILE;
                let oy = y + (m as i32 >> 1) * MINITILE;
                PixelRectangle {
                    p_top: [ox, oy],
                    p_bot: [ox + e, oy + e],
                    owner: [m; 4],
                }
            })
            .collect(),
        Sampling::Sparse => [0, e]
            .into_iter()
            .map(|off| PixelRectangle {
                p_top: [x + off, y + off],
                p_bot: [x + off + MINITILE, y + off + MINITILE],
                owner: [0, 1, 2, 3],
            })
            .collect(),
    }
}

/// `ln(255·o)`, shared by every leader of a splat. A value `≤ 0` means the
/// splat cannot reach α ≥ 1/255 anywhere.
pub fn shared_threshold(opacity: f64) -> f64 {
    (255.0 * opacity).ln()
}

/// Per-splat operands pre-rounded for a profile: the mean in the difference
/// format, the conic and ½ in the accumulation format, and the threshold.
#[derive(Clone, Copy, Debug)]
pub struct PreparedSplat {
    mu: [f64; 2],
    conic: Sym2,
    half: f64,
    threshold: f64,
    diff: Arith,
    acc: Arith,
}

impl PreparedSplat {
    pub fn new(mu: [f64; 2], conic: Sym2, opacity: f64, profile: NumericProfile) -> Self {
        let (diff, acc) = profile.stages();
        PreparedSplat {
            mu: mu.map(|v| diff.q(v)),
            conic: Sym2::new(acc.q(conic.xx), acc.q(conic.xy), acc.q(conic.yy)),
            half: acc.q(0.5),
            threshold: profile.threshold_arith().q(shared_threshold(opacity)),
            diff,
            acc,
        }
    }

    pub fn from_splat(s: &Splat2D, profile: NumericProfile) -> Self {
        PreparedSplat::new(s.mu, s.conic, s.opacity, profile)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Corner weights `E0..E3` of one pixel rectangle.
    pub fn weights(&self, pr: &PixelRectangle) -> [f64; 4] {
        let (diff, acc) = (self.diff, self.acc);
        let delta = |p: i32, m: f64| acc.q(diff.sub(diff.q(p as f64), m));
        let (dtx, dty) = (delta(pr.p_top[0], self.mu[0]), delta(pr.p_top[1], self.mu[1]));
        let (dbx, dby) = (delta(pr.p_bot[0], self.mu[0]), delta(pr.p_bot[1], self.mu[1]));

        let square = |d: f64, c: f64| acc.mul(acc.mul(self.half, acc.mul(d, d)), c);
        let sx_top = square(dtx, self.conic.xx);
        let sy_top = square(dty, self.conic.yy);
        let sx_bot = square(dbx, self.conic.xx);
        let sy_bot = square(dby, self.conic.yy);

        let cross = |a: f64, b: f64| acc.mul(acc.mul(a, b), self.conic.xy);
        let t0 = cross(dtx, dty);
        let t1 = cross(dbx, dty);
        let t2 = cross(dtx, dby);
        let t3 = cross(dbx, dby);

        let sum = |a: f64, b: f64, c: f64| acc.add(acc.add(a, b), c);
        [
            sum(sx_top, sy_top, t0),
            sum(sx_bot, sy_top, t1),
            sum(sx_top, sy_bot, t2),
            sum(sx_bot, sy_bot, t3),
        ]
    }
}

/// Corner weights of `pr` for a splat with mean `mu` and conic `conic`.
pub fn prtu_weights(mu: [f64; 2], conic: Sym2, pr: &PixelRectangle, profile: NumericProfile) -> [f64; 4] {
    // Opacity only feeds the threshold, which is unused here.
    PreparedSplat::new(mu, conic, 1.0, profile).weights(pr)
}

/// Result of testing one splat against one sub-tile.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CatOutcome {
    pub mask: MiniTileMask,
    pub sampling: Sampling,
    /// The threshold was ≤ 0, so no PR was evaluated.
    pub globally_skipped: bool,
}

/// Tests a splat that already passed the sub-tile AABB against the
/// sub-tile's mini-tiles. A corner contributes iff `E < ln(255·o)`.
pub fn cat_test_detailed(
    splat: &Splat2D,
    subtile: &TileCoords,
    mode: SamplingMode,
    profile: NumericProfile,
) -> CatOutcome {
    let prepared = PreparedSplat::from_splat(splat, profile);
    cat_test_prepared(&prepared, splat.spiky, subtile, mode)
}

pub fn cat_test_prepared(
    prepared: &PreparedSplat,
    spiky: bool,
    subtile: &TileCoords,
    mode: SamplingMode,
) -> CatOutcome {
    let sampling = mode.sampling_for(spiky);
    let threshold = prepared.threshold();
    if !(threshold > 0.0) {
        return CatOutcome {
            mask: MiniTileMask::NONE,
            sampling,
            globally_skipped: true,
        };
    }
    let mut mask = MiniTileMask::NONE;
    for pr in form_prs(subtile, sampling) {
        let e = prepared.weights(&pr);
        for k in 0..4 {
            if e[k] < threshold {
                mask.set(pr.owner[k] as usize);
            }
        }
    }
    CatOutcome {
        mask,
        sampling,
        globally_skipped: false,
    }
}

pub fn cat_test(splat: &Splat2D, subtile: &TileCoords, mode: SamplingMode, profile: NumericProfile) -> MiniTileMask {
    cat_test_detailed(splat, subtile, mode, profile).mask
}

/// Exhaustive oracle: a mini-tile is kept iff any of its 16 pixels receives
/// α ≥ 1/255 under the renderer's own α evaluation.
pub fn exhaustive_mask(splat: &Splat2D, subtile: &TileCoords) -> MiniTileMask {
    let mut mask = MiniTileMask::NONE;
    for m in 0..4u8 {
        let (x0, y0) = TileCoords { minitile: m, ..*subtile }.minitile_origin();
        let hit = (0..MINITILE).any(|dy| {
            (0..MINITILE).any(|dx| splat.contributes_at((x0 + dx) as f64, (y0 + dy) as f64))
        });
        if hit {
            mask.set(m as usize);
        }
    }
    mask
}
