//! Trains the end-to-end network (low-res fringe to depth) on a small
//! synthesized dataset and saves the weights.
//!
//! `cargo run --release --example train_end_to_end [steps] [out_dir]`

use std::path::PathBuf;

use spi3d::manifest::build_manifest;
use spi3d::models::train::{initial, smoothed};
use spi3d::models::{train_end_to_end, Dataset, TrainConfig, TrainOptions, UNetConfig};
use spi3d::pipeline::{synthesize, SynthConfig};
use spi3d::scene::SceneSpec;
use spi_tensor::Checkpoint;

fn main() -> spi3d::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(60);
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("spi3d-e2e"));
    std::fs::create_dir_all(&out)?;

    let size = 32;
    let specs: Vec<_> = (0..24u64).map(|i| SceneSpec::random(i, size, size)).collect();
    let manifest = build_manifest(&specs, 0.75, 1)?;
    let synth = SynthConfig { size, ..SynthConfig::default() };
    let mut data = Dataset::new(size);
    for e in &manifest.entries {
        data.push_synthesized(e, &synthesize(e, &synth, 1)?)?;
    }

    let net = UNetConfig { levels: 3, resolution: size, ..UNetConfig::desk() };
    let cfg = TrainConfig { epochs: 1000, ..TrainConfig::default() };
    let run = train_end_to_end(&data, &net, &cfg, &TrainOptions { max_steps: Some(steps), ..Default::default() })?;
    for r in run.losses.iter().step_by((steps / 6).max(1)) {
        println!("step {:>4} epoch {:>3} loss {:.4}", r.step, r.epoch, r.loss);
    }
    println!("loss {:.4} -> {:.4}", initial(&run.losses, 5), smoothed(&run.losses, 5));
    Checkpoint::from_params(run.unet.params()).save(out.join("unet.spx"))?;
    println!("wrote {}", out.join("unet.spx").display());
    Ok(())
}
