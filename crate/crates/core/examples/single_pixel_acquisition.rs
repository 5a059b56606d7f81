//! Simulated single-pixel detector: one reading per projected window, then
//! the trace is reordered onto the low-resolution grid.
//!
//! `cargo run --example single_pixel_acquisition [out_dir]`

use std::path::PathBuf;

use spi3d::detector::{acquire, reorder, ReorderMode};
use spi3d::formats::{save_intensity, save_trace};
use spi3d::fringe::{binarize, render_sinusoid, ProjectionGeometry, DEFAULT_THRESHOLD};
use spi3d::pipeline::DATASET_PHASE_GAIN;
use spi3d::sampling::{make_sequence, make_window, Orientation, ScanOrder, WindowKind};
use spi3d::scene::{gen_scene, SceneSpec};

fn main() -> spi3d::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("spi3d-acquire"));
    std::fs::create_dir_all(&out)?;
    let depth = gen_scene(&SceneSpec::random(3, 64, 64), 64, 64)?;
    let geom = ProjectionGeometry::new(15.0, 8.0)?.with_gain(DATASET_PHASE_GAIN)?;
    let scene = binarize(&render_sinusoid(&depth, &geom)?, DEFAULT_THRESHOLD)?;

    for n in [2, 4, 16] {
        let set = make_window(n, WindowKind::Rect, Orientation::Vertical)?;
        let seq = make_sequence((64, 64), &set, ScanOrder::Swirl)?;
        let trace = acquire(&scene, &seq)?;
        let low = reorder(&trace, &seq, ReorderMode::Rounded)?;
        let (fy, fx) = set.tile();
        let up = low.grid().upsample_nearest(fy, fx);
        let ssim = spi_tensor::global_ssim(up.data(), scene.grid().data());
        println!("N {n:>2}: {} readings, low-res {:?}, ssim after upsampling {ssim:.4}", trace.len(), low.grid().dims());
        save_trace(&trace, out.join(format!("trace_n{n}.csv")))?;
        save_intensity(low.grid(), out.join(format!("lowres_n{n}.pgm")))?;
    }
    println!("wrote {}", out.display());
    Ok(())
}
