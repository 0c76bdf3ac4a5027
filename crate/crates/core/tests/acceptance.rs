//! Acceptance checks, one line per criterion. Runs as a plain binary
//! (`harness = false`) so the report is always printed; exits non-zero if
//! any criterion fails.

use std::time::{Duration, Instant};

use minitile_splat::cat::{
    cat_test, cat_test_detailed, form_prs, leader_pixels, prtu_weights, MiniTileMask, NumericProfile,
    PixelRectangle, PreparedSplat, Sampling, SamplingMode,
};
use minitile_splat::pipesim::{simulate_tile_logged, sweep_fifo_depth, PipeConfig};
use minitile_splat::preprocess::{Splat2D, Sym2, TileCoords, ALPHA_MIN};
use minitile_splat::rasterizer::{psnr, render_frame, Frame, RenderConfig, Strategy};
use minitile_splat::scene_io::{generate_scene, Camera, Gaussian3D, SceneSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Pinned tolerances and sizes.
const C1_SAMPLES: usize = 100_000;
const C1_REL_TOL: f64 = 1e-9;
const C1_TIME_LIMIT: Duration = Duration::from_secs(5);
const SCENES: u64 = 20;
const SCENE_COUNT: usize = 2000;
const DENSE_COUNT: usize = 5000;
const C3_DENSE_RATIO: f64 = 0.5;
const C5_SAMPLES: usize = 100_000;
const ENSEMBLE: u64 = 10;
const C6_MAX_LOSS_DB: f64 = 0.3;
/// Reference-quality PSNR against captured images used to turn a PSNR
/// versus the exhaustive render into a loss in dB.
const C6_REFERENCE_PSNR_DB: f64 = 25.56;
const C7_MAX_GAP_DB: f64 = 1.0;
const C8_DEPTHS: [usize; 8] = [1, 2, 4, 8, 16, 32, 64, 128];
const C8_MIN_FRACTION: f64 = 0.9;
const C8_VRU_INTERVALS: [u32; 2] = [1, 4];
const C10_SAMPLES: usize = 10_000;
const C11_MAX_DEVIATION: f64 = 1e-4;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn camera() -> Camera {
    Camera::fronto_parallel(256, 256, 256.0)
}

fn scene(seed: u64, count: usize) -> Vec<Gaussian3D> {
    generate_scene(&SceneSpec {
        seed,
        count,
        ..Default::default()
    })
    .unwrap()
}

fn render(scene: &[Gaussian3D], strategy: Strategy) -> Frame {
    render_frame(scene, &camera(), strategy, &RenderConfig::default()).unwrap()
}

fn hier(mode: SamplingMode, profile: NumericProfile) -> Strategy {
    Strategy::HierCat { mode, profile }
}

/// Random splat with eigenvalues log-uniform in `[0.3, 200]` px².
fn random_splat(rng: &mut ChaCha8Rng, mu: [f64; 2], opacity: f64) -> Splat2D {
    let l1 = (rng.random_range(0.3f64.ln()..200f64.ln())).exp();
    let l2 = (rng.random_range(0.3f64.ln()..200f64.ln())).exp();
    let th = rng.random_range(0.0..std::f64::consts::PI);
    let (c, s) = (th.cos(), th.sin());
    let cov = Sym2::new(
        l1 * c * c + l2 * s * s,
        (l1 - l2) * c * s,
        l1 * s * s + l2 * c * c,
    );
    Splat2D::from_covariance(0, mu, cov, 1.0, opacity, [1.0; 3]).unwrap()
}

fn random_subtile(rng: &mut ChaCha8Rng) -> TileCoords {
    TileCoords::new((rng.random_range(0..8), rng.random_range(0..8)), rng.random_range(0..4), 0)
}

/// Mean near the sub-tile so that masks are non-trivial.
fn mean_near(rng: &mut ChaCha8Rng, t: &TileCoords) -> [f64; 2] {
    let (x, y) = t.subtile_origin();
    [
        x as f64 + rng.random_range(-12.0..20.0),
        y as f64 + rng.random_range(-12.0..20.0),
    ]
}

fn c1() -> Outcome {
    let pr = PixelRectangle {
        p_top: [1, 2],
        p_bot: [3, 4],
        owner: [0; 4],
    };
    let worked = prtu_weights([0.0, 0.0], Sym2::new(1.0, 0.0, 1.0), &pr, NumericProfile::Exact);
    if worked != [2.5, 6.5, 8.5, 12.5] {
        return Err(format!("worked example gave {worked:?}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..C1_SAMPLES {
        let mu = [rng.random_range(-50.0..300.0), rng.random_range(-50.0..300.0)];
        let l1 = rng.random_range(-7.0f64..2.5).exp();
        let l2 = rng.random_range(-7.0f64..2.5).exp();
        let th = rng.random_range(0.0..std::f64::consts::PI);
        let (c, s) = (th.cos(), th.sin());
        let conic = Sym2::new(l1 * c * c + l2 * s * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c);
        let top = [rng.random_range(0..256), rng.random_range(0..256)];
        let pr = PixelRectangle {
            p_top: top,
            p_bot: [top[0] + rng.random_range(0..9), top[1] + rng.random_range(0..9)],
            owner: [0; 4],
        };
        let e = prtu_weights(mu, conic, &pr, NumericProfile::Exact);
        for (k, p) in pr.corners().iter().enumerate() {
            let dx = p[0] as f64 - mu[0];
            let dy = p[1] as f64 - mu[1];
            let direct = 0.5 * (conic.xx * dx * dx + 2.0 * conic.xy * dx * dy + conic.yy * dy * dy);
            let rel = (e[k] - direct).abs() / direct.abs().max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
        }
    }
    let elapsed = start.elapsed();
    check(
        worst <= C1_REL_TOL && elapsed < C1_TIME_LIMIT,
        format!("worked example exact; {C1_SAMPLES} PRs, max rel err {worst:.2e} (tol {C1_REL_TOL:e}), {elapsed:.2?}"),
    )
}

struct SceneRuns {
    tile: Frame,
    obb: Frame,
    exhaustive: Frame,
    dense_exact: Frame,
    dense_mixed: Frame,
}

fn c2(runs: &[SceneRuns]) -> Outcome {
    let identical = runs.iter().filter(|r| r.exhaustive.image == r.tile.image).count();
    check(
        identical == runs.len(),
        format!("{identical}/{} scenes (256x256, {SCENE_COUNT} Gaussians) bit-identical", runs.len()),
    )
}

fn pointwise_le(a: &Frame, b: &Frame) -> usize {
    a.stats
        .per_pixel_gaussians
        .iter()
        .zip(&b.stats.per_pixel_gaussians)
        .filter(|(x, y)| x > y)
        .count()
}

fn c3(runs: &[SceneRuns]) -> Outcome {
    let mut violations = 0;
    let mut mixed_violations = 0;
    let mut means = [0.0; 3];
    for r in runs {
        violations += pointwise_le(&r.dense_exact, &r.obb) + pointwise_le(&r.obb, &r.tile);
        mixed_violations += pointwise_le(&r.dense_mixed, &r.obb);
        let m = [
            r.dense_exact.stats.mean_per_pixel(),
            r.obb.stats.mean_per_pixel(),
            r.tile.stats.mean_per_pixel(),
        ];
        if !(m[0] <= m[1] && m[1] <= m[2]) {
            violations += 1;
        }
        for i in 0..3 {
            means[i] += m[i] / runs.len() as f64;
        }
    }
    let dense = scene(1, DENSE_COUNT);
    let tile = render(&dense, Strategy::TileAabb);
    let h = render(&dense, hier(SamplingMode::UniformDense, NumericProfile::Exact));
    let ratio = h.stats.mean_per_pixel() / tile.stats.mean_per_pixel();
    check(
        violations == 0 && ratio <= C3_DENSE_RATIO,
        format!(
            "pointwise violations {violations}; mean per pixel hier_cat {:.2} <= obb {:.2} <= tile {:.2}; \
             {DENSE_COUNT}-Gaussian ratio {ratio:.3} (<= {C3_DENSE_RATIO}); \
             mixed-precision pixels above obb: {mixed_violations} (not asserted)",
            means[0], means[1], means[2]
        ),
    )
}

fn c4(frames: &[&Frame]) -> Outcome {
    let bad = frames
        .iter()
        .filter(|f| {
            let d = f.stats.duplicates;
            !(d.minitile4 >= d.subtile8 && d.subtile8 >= d.tile16)
        })
        .count();
    let d = frames[0].stats.duplicates;
    check(
        bad == 0,
        format!(
            "{} renders, {bad} violations; e.g. 16/8/4 = {}/{}/{}",
            frames.len(),
            d.tile16,
            d.subtile8,
            d.minitile4
        ),
    )
}

fn c5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = 0usize;
    let mut nonempty = 0usize;
    for _ in 0..C5_SAMPLES {
        let t = random_subtile(&mut rng);
        let mu = mean_near(&mut rng, &t);
        let o = rng.random_range(0.01..1.0);
        let s = random_splat(&mut rng, mu, o);
        for profile in NumericProfile::ALL {
            let ud = cat_test(&s, &t, SamplingMode::UniformDense, profile);
            let us = cat_test(&s, &t, SamplingMode::UniformSparse, profile);
            let sf = cat_test(&s, &t, SamplingMode::SmoothFocused, profile);
            let kf = cat_test(&s, &t, SamplingMode::SpikyFocused, profile);
            for adaptive in [sf, kf] {
                if !(us.is_subset_of(adaptive) && adaptive.is_subset_of(ud)) {
                    bad += 1;
                }
            }
            nonempty += usize::from(!ud.is_empty());
        }
    }
    for m in 0..4 {
        let t = TileCoords::new((3, 2), 1, m);
        let dense = leader_pixels(&t, Sampling::Dense);
        if !leader_pixels(&t, Sampling::Sparse).iter().all(|p| dense.contains(p)) {
            bad += 1;
        }
    }
    check(
        bad == 0,
        format!("{C5_SAMPLES} pairs x 4 profiles, {bad} violations ({nonempty} non-empty dense masks); sparse leaders within dense for all 4 positions"),
    )
}

/// Loss against ground truth when the culling error is independent of the
/// reference's own error at [`C6_REFERENCE_PSNR_DB`].
fn loss_db(psnr_vs_reference: f64) -> f64 {
    let mse = 10f64.powf(-psnr_vs_reference / 10.0);
    let mse_ref = 10f64.powf(-C6_REFERENCE_PSNR_DB / 10.0);
    10.0 * (1.0 + mse / mse_ref).log10()
}

fn mean_psnr(ensemble: &[(Vec<Gaussian3D>, Frame)], strategy: Strategy) -> f64 {
    ensemble
        .iter()
        .map(|(s, ex)| psnr(&render(s, strategy).image, &ex.image).unwrap())
        .sum::<f64>()
        / ensemble.len() as f64
}

fn c6(ensemble: &[(Vec<Gaussian3D>, Frame)]) -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for profile in [NumericProfile::Mixed, NumericProfile::Exact] {
        let ud = mean_psnr(ensemble, hier(SamplingMode::UniformDense, profile));
        let sf = mean_psnr(ensemble, hier(SamplingMode::SmoothFocused, profile));
        let us = mean_psnr(ensemble, hier(SamplingMode::UniformSparse, profile));
        let loss = loss_db(ud);
        ok &= ud >= sf && sf >= us && loss <= C6_MAX_LOSS_DB;
        details.push(format!(
            "{}: dense {ud:.2} >= smooth-focused {sf:.2} >= sparse {us:.2} dB, dense loss {loss:.4} dB",
            profile.name()
        ));
    }
    check(ok, format!("{} scenes; {}", ensemble.len(), details.join("; ")))
}

fn c7(ensemble: &[(Vec<Gaussian3D>, Frame)]) -> Outcome {
    let p = |mode, profile| mean_psnr(ensemble, hier(mode, profile));
    let sf = SamplingMode::SmoothFocused;
    let (mixed, full8, full16) = (
        p(sf, NumericProfile::Mixed),
        p(sf, NumericProfile::Full8),
        p(sf, NumericProfile::Full16),
    );
    let ud = SamplingMode::UniformDense;
    let (ud_mixed, ud_full8, ud_full16) = (
        p(ud, NumericProfile::Mixed),
        p(ud, NumericProfile::Full8),
        p(ud, NumericProfile::Full16),
    );
    check(
        mixed >= full8 && full16 - mixed <= C7_MAX_GAP_DB,
        format!(
            "smooth-focused: mixed {mixed:.2} >= full8 {full8:.2}, full16 {full16:.2} - mixed = {:.3} dB (<= {C7_MAX_GAP_DB}); \
             uniform-dense (not asserted): full16 {ud_full16:.2}, mixed {ud_mixed:.2}, full8 {ud_full8:.2}",
            full16 - mixed
        ),
    )
}

fn c8() -> Outcome {
    let dense = scene(1, DENSE_COUNT);
    let cfg = RenderConfig {
        record_trace: true,
        ..Default::default()
    };
    let frame = render_frame(&dense, &camera(), hier(SamplingMode::default(), NumericProfile::default()), &cfg).unwrap();
    let trace = frame.trace.unwrap();
    let mut ok = true;
    let mut details = Vec::new();
    for vi in C8_VRU_INTERVALS {
        let pipe = PipeConfig {
            vru_interval: vi,
            ..Default::default()
        };
        let rows = sweep_fifo_depth(&trace, &pipe, &C8_DEPTHS).unwrap();
        let speedup_mono = rows.windows(2).all(|w| w[1].speedup >= w[0].speedup);
        let stall_mono = rows.windows(2).all(|w| w[1].stall_rate <= w[0].stall_rate);
        let at16 = rows.iter().find(|r| r.depth == 16).unwrap().speedup;
        let at128 = rows.last().unwrap().speedup;
        let frac = at16 / at128;
        ok &= speedup_mono && stall_mono && frac >= C8_MIN_FRACTION;
        details.push(format!(
            "vru_interval {vi}: speedup@128 {at128:.4}, depth 16 reaches {:.1}%, stall {:.3} -> {:.3}, monotone {}",
            frac * 100.0,
            rows[0].stall_rate,
            rows.last().unwrap().stall_rate,
            speedup_mono && stall_mono
        ));
    }
    check(ok, details.join("; "))
}

fn c9() -> Outcome {
    let cfg = RenderConfig {
        record_trace: true,
        ..Default::default()
    };
    let mut tiles = 0usize;
    let mut items = 0usize;
    let mut bad = Vec::new();
    let cases = [(2u64, SCENE_COUNT), (3, SCENE_COUNT), (1, DENSE_COUNT)];
    for (seed, count) in cases {
        let s = scene(seed, count);
        for strategy in [
            hier(SamplingMode::default(), NumericProfile::default()),
            hier(SamplingMode::UniformDense, NumericProfile::Exact),
        ] {
            let trace = render_frame(&s, &camera(), strategy, &cfg).unwrap().trace.unwrap();
            for depth in [1, 16] {
                let pipe = PipeConfig {
                    fifo_depth: depth,
                    ..Default::default()
                };
                for t in &trace.tiles {
                    tiles += 1;
                    let (_, log) = match simulate_tile_logged(t, &pipe) {
                        Ok(r) => r,
                        Err(e) => {
                            bad.push(e.to_string());
                            continue;
                        }
                    };
                    let mut simulated: Vec<(u32, u8)> = Vec::new();
                    for (ch, pops) in log.channels.iter().enumerate() {
                        if pops.windows(2).any(|w| w[0].0 >= w[1].0) {
                            bad.push(format!("tile {:?} channel {ch} out of depth order", t.tile));
                        }
                        for &(pos, id) in pops {
                            if t.items[pos as usize].id != id {
                                bad.push(format!("tile {:?} id mismatch at {pos}", t.tile));
                            }
                            simulated.push((pos, ch as u8));
                        }
                    }
                    let mut rendered = t.evaluated.clone();
                    simulated.sort_unstable();
                    rendered.sort_unstable();
                    items += rendered.len();
                    if simulated != rendered {
                        bad.push(format!(
                            "tile {:?}: simulator {} items, renderer {}",
                            t.tile,
                            simulated.len(),
                            rendered.len()
                        ));
                    }
                }
            }
        }
    }
    check(
        bad.is_empty(),
        format!(
            "{tiles} tile runs, {items} (gaussian, mini-tile) items; mismatches {}{}",
            bad.len(),
            bad.first().map(|b| format!(", first: {b}")).unwrap_or_default()
        ),
    )
}

fn c10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut disagreements = 0usize;
    let mut decisions = 0usize;
    let mut contributing = 0usize;
    for _ in 0..C10_SAMPLES {
        let t = random_subtile(&mut rng);
        let mu = mean_near(&mut rng, &t);
        let o = rng.random_range(ALPHA_MIN..1.0);
        let s = random_splat(&mut rng, mu, o);
        let prepared = PreparedSplat::from_splat(&s, NumericProfile::Exact);
        for sampling in [Sampling::Dense, Sampling::Sparse] {
            let mut expected = MiniTileMask::NONE;
            for pr in form_prs(&t, sampling) {
                let e = prepared.weights(&pr);
                for (k, p) in pr.corners().iter().enumerate() {
                    let cat = e[k] < prepared.threshold();
                    let direct = s.alpha_at(p[0] as f64, p[1] as f64) >= ALPHA_MIN;
                    decisions += 1;
                    contributing += usize::from(direct);
                    disagreements += usize::from(cat != direct);
                    if direct {
                        expected.set(pr.owner[k] as usize);
                    }
                }
            }
            let mode = match sampling {
                Sampling::Dense => SamplingMode::UniformDense,
                Sampling::Sparse => SamplingMode::UniformSparse,
            };
            disagreements += usize::from(cat_test(&s, &t, mode, NumericProfile::Exact) != expected);
        }
    }
    let mut boundary_ok = true;
    for _ in 0..100 {
        let t = random_subtile(&mut rng);
        let (x, y) = t.subtile_origin();
        let s = random_splat(&mut rng, [x as f64 + 3.5, y as f64 + 3.5], 1.0 / 255.0);
        for profile in NumericProfile::ALL {
            let out = cat_test_detailed(&s, &t, SamplingMode::UniformDense, profile);
            boundary_ok &= out.globally_skipped && out.mask.is_empty();
        }
    }
    check(
        disagreements == 0 && boundary_ok,
        format!(
            "{decisions} leader decisions ({contributing} contributing), {disagreements} disagreements; o = 1/255 globally skipped: {boundary_ok}"
        ),
    )
}

fn c11(scenes: &[Vec<Gaussian3D>]) -> Outcome {
    let mut worst = 0.0f64;
    let off = RenderConfig {
        early_termination: false,
        ..Default::default()
    };
    let mut renders = 0;
    for s in scenes {
        for strategy in [Strategy::TileAabb, hier(SamplingMode::default(), NumericProfile::default())] {
            let a = render(s, strategy);
            let b = render_frame(s, &camera(), strategy, &off).unwrap();
            renders += 1;
            for (p, q) in a.image.pixels.iter().zip(&b.image.pixels) {
                for c in 0..3 {
                    worst = worst.max((p[c] - q[c]).abs());
                }
            }
        }
    }
    check(
        worst <= C11_MAX_DEVIATION,
        format!("{renders} render pairs, max deviation {worst:.3e} (<= {C11_MAX_DEVIATION:e})"),
    )
}

fn main() {
    let start = Instant::now();
    let scenes: Vec<_> = (0..SCENES).map(|seed| scene(seed, SCENE_COUNT)).collect();
    let runs: Vec<SceneRuns> = scenes
        .iter()
        .map(|s| SceneRuns {
            tile: render(s, Strategy::TileAabb),
            obb: render(s, Strategy::SubtileObb),
            exhaustive: render(s, Strategy::Exhaustive),
            dense_exact: render(s, hier(SamplingMode::UniformDense, NumericProfile::Exact)),
            dense_mixed: render(s, hier(SamplingMode::UniformDense, NumericProfile::Mixed)),
        })
        .collect();
    let ensemble: Vec<_> = (100..100 + ENSEMBLE)
        .map(|seed| {
            let s = scene(seed, SCENE_COUNT);
            let ex = render(&s, Strategy::Exhaustive);
            (s, ex)
        })
        .collect();
    let all_frames: Vec<&Frame> = runs
        .iter()
        .flat_map(|r| [&r.tile, &r.obb, &r.exhaustive, &r.dense_exact, &r.dense_mixed])
        .chain(ensemble.iter().map(|e| &e.1))
        .collect();

    let results: Vec<(&str, Outcome)> = vec![
        ("PR weights match direct exponent", c1()),
        ("exhaustive leaders == tile AABB image", c2(&runs)),
        ("workload refinement", c3(&runs)),
        ("duplicate monotonicity", c4(&all_frames)),
        ("mask monotonicity", c5()),
        ("sampling-mode quality ordering", c6(&ensemble)),
        ("mixed-precision quality ordering", c7(&ensemble)),
        ("FIFO depth sweep", c8()),
        ("simulator/renderer consistency", c9()),
        ("threshold semantics", c10()),
        ("early-termination residual", c11(&scenes)),
    ];
    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:2} [{tag}] {name}: {detail}", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed in {:.1?}", results.len() - failed, start.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
