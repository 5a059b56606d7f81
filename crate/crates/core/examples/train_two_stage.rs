//! Two-stage training: an adversarial generator super-resolves the low-res
//! fringe, then a second network maps fringes to depth.
//!
//! `cargo run --release --example train_two_stage [steps]`

use spi3d::manifest::build_manifest;
use spi3d::models::train::{initial, smoothed};
use spi3d::models::{train_two_stage, Dataset, DiscriminatorConfig, TrainConfig, TrainOptions, UNetConfig};
use spi3d::pipeline::{synthesize, SynthConfig};
use spi3d::scene::SceneSpec;

fn main() -> spi3d::Result<()> {
    let steps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(40);
    let size = 32;
    let specs: Vec<_> = (0..16u64).map(|i| SceneSpec::random(i, size, size)).collect();
    let manifest = build_manifest(&specs, 0.5, 1)?;
    let synth = SynthConfig { size, ..SynthConfig::default() };
    let mut data = Dataset::new(size);
    for e in &manifest.entries {
        data.push_synthesized(e, &synthesize(e, &synth, 1)?)?;
    }

    let net = UNetConfig { levels: 3, resolution: size, ..UNetConfig::desk() };
    let disc = DiscriminatorConfig { layers: 2, resolution: size, ..DiscriminatorConfig::desk() };
    let cfg = TrainConfig { epochs: 1000, ..TrainConfig::default() };
    let opts = TrainOptions { max_steps: Some(steps), ..Default::default() };
    let run = train_two_stage(&data, &net, &disc, &net, &cfg, &opts)?;
    for r in run.stage1.iter().step_by((steps / 5).max(1)) {
        println!(
            "step {:>4}: structural {:.4} discriminator {:.4} generator {:.3}",
            r.step,
            r.loss,
            r.loss_d.unwrap_or(f64::NAN),
            r.loss_g.unwrap_or(f64::NAN)
        );
    }
    println!("structural term {:.4} -> {:.4}", initial(&run.stage1, 5), smoothed(&run.stage1, 5));
    println!("depth stage loss {:.4} -> {:.4}", initial(&run.stage2, 5), smoothed(&run.stage2, 5));
    Ok(())
}
