//! Records a frame's culling trace and sweeps the mini-tile FIFO depth in
//! the pipeline simulator, for fast and for slow volume-rendering units.

use minitile_splat::cat::{NumericProfile, SamplingMode};
use minitile_splat::pipesim::{sweep_fifo_depth, PipeConfig};
use minitile_splat::rasterizer::{render_frame, RenderConfig, Strategy};
use minitile_splat::scene_io::{generate_scene, Camera, SceneSpec};

fn main() -> minitile_splat::Result<()> {
    let scene = generate_scene(&SceneSpec {
        seed: 1,
        count: 5000,
        ..Default::default()
    })?;
    let cfg = RenderConfig {
        record_trace: true,
        ..Default::default()
    };
    let strategy = Strategy::HierCat {
        mode: SamplingMode::default(),
        profile: NumericProfile::default(),
    };
    let trace = render_frame(&scene, &Camera::default(), strategy, &cfg)?.trace.expect("recorded");

    for vru_interval in [1, 4] {
        let pipe = PipeConfig {
            vru_interval,
            ..Default::default()
        };
        println!("vru_interval {vru_interval}");
        for r in sweep_fifo_depth(&trace, &pipe, &[1, 2, 4, 8, 16, 32, 64, 128])? {
            println!(
                "  depth {:4}  cycles {:8}  stall {:.3}  speedup {:.4}",
                r.depth, r.cycles, r.stall_rate, r.speedup
            );
        }
    }
    Ok(())
}
