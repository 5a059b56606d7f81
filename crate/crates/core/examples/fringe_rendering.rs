//! Fringe projection forward model: sinusoidal fringes shifted by depth,
//! binarized and with additive noise.
//!
//! `cargo run --example fringe_rendering [out_dir]`

use std::path::PathBuf;

use spi3d::formats::save_intensity;
use spi3d::fringe::{add_noise, binarize, render_sinusoid, NoiseSpec, ProjectionGeometry, DEFAULT_THRESHOLD};
use spi3d::pipeline::DATASET_PHASE_GAIN;
use spi3d::scene::{gen_scene, SceneSpec};

fn main() -> spi3d::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("spi3d-fringes"));
    std::fs::create_dir_all(&out)?;
    let depth = gen_scene(&SceneSpec::random(7, 64, 64), 64, 64)?;
    let geom = ProjectionGeometry::new(15.0, 8.0)?.with_gain(DATASET_PHASE_GAIN)?;
    println!("largest lateral shift: {:.2} px", geom.shift(1.0));

    let sinus = render_sinusoid(&depth, &geom)?;
    let binary = binarize(&sinus, DEFAULT_THRESHOLD)?;
    let noisy = add_noise(&sinus, &NoiseSpec::new(0.04, 0.14, 1)?)?;
    for (name, img) in [("sinusoid", &sinus), ("binary", &binary), ("noisy", &noisy)] {
        let mean = img.grid().sum() / img.grid().data().len() as f64;
        println!("{name:>8}: {:?}, mean intensity {mean:.3}", img.kind());
        save_intensity(img.grid(), out.join(format!("{name}.pgm")))?;
    }
    println!("wrote {}", out.display());
    Ok(())
}
