//! Renders a synthetic scene with the default culling strategy and writes a PNG.
//!
//! cargo run --example render_scene -- [count] [out.png]

use minitile_splat::cat::{NumericProfile, SamplingMode};
use minitile_splat::rasterizer::{render_frame, RenderConfig, Strategy};
use minitile_splat::scene_io::{generate_scene, write_image, Camera, SceneSpec};

fn main() -> minitile_splat::Result<()> {
    let mut args = std::env::args().skip(1);
    let count = args.next().and_then(|a| a.parse().ok()).unwrap_or(2000);
    let out = args.next().unwrap_or_else(|| "render.png".into());

    let scene = generate_scene(&SceneSpec {
        count,
        ..Default::default()
    })?;
    let strategy = Strategy::HierCat {
        mode: SamplingMode::default(),
        profile: NumericProfile::default(),
    };
    let frame = render_frame(&scene, &Camera::default(), strategy, &RenderConfig::default())?;
    write_image(&frame.image, &out)?;
    let s = &frame.stats;
    println!(
        "{} visible of {count}, {:.2} Gaussians per pixel (max {}), {} skipped after termination -> {out}",
        s.visible,
        s.mean_per_pixel(),
        s.max_per_pixel(),
        s.skipped_early_term
    );
    Ok(())
}
