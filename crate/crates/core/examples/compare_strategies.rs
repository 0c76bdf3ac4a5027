//! Per-pixel workload and quality of each culling strategy on one scene.

use minitile_splat::cat::{NumericProfile, SamplingMode};
use minitile_splat::rasterizer::{psnr, render_frame, RenderConfig, Strategy};
use minitile_splat::scene_io::{generate_scene, Camera, SceneSpec};

fn main() -> minitile_splat::Result<()> {
    let scene = generate_scene(&SceneSpec {
        count: 5000,
        ..Default::default()
    })?;
    let cam = Camera::default();
    let cfg = RenderConfig::default();
    let reference = render_frame(&scene, &cam, Strategy::Exhaustive, &cfg)?;

    let mut strategies = vec![Strategy::TileAabb, Strategy::SubtileObb];
    for mode in SamplingMode::ALL {
        strategies.push(Strategy::HierCat {
            mode,
            profile: NumericProfile::Mixed,
        });
    }
    strategies.push(Strategy::Exhaustive);

    println!("{:40} {:>10} {:>8} {:>10}", "strategy", "mean/px", "max/px", "PSNR dB");
    for s in strategies {
        let f = render_frame(&scene, &cam, s, &cfg)?;
        println!(
            "{:40} {:10.3} {:8} {:10.2}",
            s.label(),
            f.stats.mean_per_pixel(),
            f.stats.max_per_pixel(),
            psnr(&f.image, &reference.image)?
        );
    }
    Ok(())
}
