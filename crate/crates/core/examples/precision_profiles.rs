//! Quality of the contribution test under each arithmetic profile.

use minitile_splat::cat::{NumericProfile, SamplingMode};
use minitile_splat::rasterizer::{psnr, render_frame, RenderConfig, Strategy};
use minitile_splat::scene_io::{generate_scene, Camera, SceneSpec};

fn main() -> minitile_splat::Result<()> {
    let cam = Camera::default();
    let cfg = RenderConfig::default();
    let seeds = 0..4u64;
    for mode in [SamplingMode::UniformDense, SamplingMode::SmoothFocused] {
        println!("{}", mode.name());
        for profile in NumericProfile::ALL {
            let mut total = 0.0;
            for seed in seeds.clone() {
                let scene = generate_scene(&SceneSpec {
                    seed,
                    ..Default::default()
                })?;
                let reference = render_frame(&scene, &cam, Strategy::Exhaustive, &cfg)?;
                let f = render_frame(&scene, &cam, Strategy::HierCat { mode, profile }, &cfg)?;
                total += psnr(&f.image, &reference.image)?;
            }
            println!("  {:8} {:8.2} dB", profile.name(), total / seeds.clone().count() as f64);
        }
    }
    Ok(())
}
