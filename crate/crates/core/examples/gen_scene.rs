//! Writes a synthetic scene as a 3DGS PLY checkpoint and reads it back.
//!
//! cargo run --example gen_scene -- [out.ply]

use minitile_splat::scene_io::{generate_scene, load_ply, write_ply, SceneSpec};

fn main() -> minitile_splat::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "scene.ply".into());
    let spec = SceneSpec {
        seed: 42,
        count: 1000,
        sh_degree: 3,
        ..Default::default()
    };
    let scene = generate_scene(&spec)?;
    write_ply(&out, &scene)?;
    let back = load_ply(&out)?;
    assert_eq!(back, scene);
    println!("{} Gaussians -> {out}", back.len());
    Ok(())
}
