use minitile_splat::scene_io::{generate_scene, load_ply, read_ply, write_ply, write_ply_to, SceneSpec};

#[test]
fn synthetic_scene_survives_a_file_roundtrip() {
    let spec = SceneSpec {
        seed: 7,
        count: 500,
        sh_degree: 3,
        ..Default::default()
    };
    let scene = generate_scene(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scene.ply");
    write_ply(&path, &scene).unwrap();
    assert_eq!(load_ply(&path).unwrap(), scene);
}

#[test]
fn truncated_file_is_a_format_error() {
    let scene = generate_scene(&SceneSpec {
        count: 4,
        ..Default::default()
    })
    .unwrap();
    let mut bytes = Vec::new();
    write_ply_to(&mut bytes, &scene).unwrap();
    bytes.truncate(bytes.len() - 10);
    let err = read_ply(&bytes).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}
