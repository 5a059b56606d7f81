//! Procedural depth maps: random scenes and rotated pose variants, saved as
//! 16-bit PGM.
//!
//! `cargo run --example scene_generation [out_dir]`

use std::path::PathBuf;

use spi3d::formats::save_depth;
use spi3d::scene::{augment_pose, gen_scene, SceneSpec};

fn main() -> spi3d::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("spi3d-scenes"));
    std::fs::create_dir_all(&out)?;
    for seed in 0..4 {
        let spec = SceneSpec::random(seed, 64, 64);
        for (k, pose) in augment_pose(&spec, 3, seed)?.iter().enumerate() {
            let depth = gen_scene(pose, 64, 64)?;
            let g = depth.grid();
            let (lo, hi) = g.data().iter().fold((1.0f64, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
            println!("scene {seed} pose {k} ({:+.1} deg): depth {lo:.3}..{hi:.3}", pose.pose_deg);
            save_depth(&depth, out.join(format!("scene{seed}_pose{k}.pgm")))?;
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}
