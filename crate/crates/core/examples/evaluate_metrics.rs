//! Depth error metrics per sampling rate, for a briefly trained network and
//! for a constant mid-depth guess.
//!
//! `cargo run --release --example evaluate_metrics`

use spi3d::manifest::{build_manifest, Split};
use spi3d::metrics::{compare_reports, evaluate, EvalReport};
use spi3d::models::{train_end_to_end, Dataset, Reconstructor, TrainConfig, TrainOptions, UNetConfig};
use spi3d::pipeline::{synthesize, SynthConfig};
use spi3d::scene::SceneSpec;
use spi3d::{DepthMap, Grid};

fn main() -> spi3d::Result<()> {
    let size = 32;
    let specs: Vec<_> = (0..24u64).map(|i| SceneSpec::random(i, size, size)).collect();
    let manifest = build_manifest(&specs, 0.5, 1)?;
    let synth = SynthConfig { size, ..SynthConfig::default() };
    let mut train = Dataset::new(size);
    let mut test = Vec::new();
    for e in &manifest.entries {
        let s = synthesize(e, &synth, 1)?;
        match e.split {
            Split::Train => train.push_synthesized(e, &s)?,
            Split::Test => test.push((e.clone(), s)),
        }
    }

    let net = UNetConfig { levels: 3, resolution: size, ..UNetConfig::desk() };
    let cfg = TrainConfig { epochs: 1000, ..TrainConfig::default() };
    let run = train_end_to_end(&train, &net, &cfg, &TrainOptions { max_steps: Some(300), ..Default::default() })?;
    let model = Reconstructor::EndToEnd(run.unet);

    let mut learned = Vec::new();
    let mut flat = Vec::new();
    for (e, s) in &test {
        let pred = model.infer(&s.fringe_lo, cfg.leaky_slope)?.depth;
        let mut r = evaluate(&pred, &s.depth)?;
        r.id = e.scene_id;
        r.rate = e.rate;
        learned.push(r);
        let mut r = evaluate(&DepthMap::new(Grid::filled(size, size, 0.5))?, &s.depth)?;
        r.id = e.scene_id;
        r.rate = e.rate;
        flat.push(r);
    }
    let (learned, flat) = (EvalReport::aggregate(learned)?, EvalReport::aggregate(flat)?);
    println!("network:\n{}", learned.table());
    println!("constant guess:\n{}", flat.table());
    println!("network minus constant:\n{}", compare_reports(&flat, &learned)?.table());
    Ok(())
}
