//! Training loops. Every step draws its dropout stream from `(seed, step)`,
//! so a run is reproducible bit for bit.

use spi_tensor::{Adam, Tape, Tensor};

use super::config::{DiscriminatorConfig, TrainConfig, UNetConfig};
use super::data::{epoch_batches, Dataset, Example};
use super::discriminator::Discriminator;
use super::losses::{loss_discriminator, loss_generator, loss_unet};
use super::unet::{Mode, UNet};
use crate::error::{Error, Result};
use crate::formats::LossRecord;
use crate::rng;

#[derive(Debug, Clone, Default)]
pub struct TrainOptions {
    /// Stops after this many optimizer steps (per stage) when set.
    pub max_steps: Option<usize>,
    /// Skips discriminator updates in the adversarial stage.
    pub freeze_discriminator: bool,
    /// Starting discriminator instead of a freshly initialized one.
    pub discriminator: Option<Discriminator<f32>>,
}

#[derive(Debug, Clone)]
pub struct EndToEnd {
    pub unet: UNet<f32>,
    pub losses: Vec<LossRecord>,
}

#[derive(Debug, Clone)]
pub struct TwoStage {
    pub generator: UNet<f32>,
    pub discriminator: Discriminator<f32>,
    pub depth_net: UNet<f32>,
    /// Adversarial stage: `loss` is the structural term `1 - ssim`.
    pub stage1: Vec<LossRecord>,
    pub stage2: Vec<LossRecord>,
}

/// `(epoch, batch)` pairs in training order, truncated at `max_steps`.
fn schedule(data: &Dataset, cfg: &TrainConfig, max_steps: Option<usize>) -> Result<Vec<(usize, Vec<usize>)>> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Data("training split is empty".into()));
    }
    let limit = max_steps.unwrap_or(usize::MAX);
    let mut out = Vec::new();
    for epoch in 0..cfg.epochs {
        for b in epoch_batches(data, cfg.rate_mix, cfg.batch_size, epoch, cfg.seed)? {
            if out.len() == limit {
                return Ok(out);
            }
            out.push((epoch, b));
        }
    }
    Ok(out)
}

fn check_resolution(data: &Dataset, cfg: &UNetConfig) -> Result<()> {
    if cfg.resolution != data.canonical {
        return Err(Error::Config(format!(
            "network resolution {} differs from data size {}",
            cfg.resolution, data.canonical
        )));
    }
    Ok(())
}

/// One optimizer step of `net` on `(x, y)` under `1 - ssim`; returns the loss.
fn unet_step(
    net: &mut UNet<f32>,
    adam: &mut Adam<f32>,
    x: Tensor<f32>,
    y: Tensor<f32>,
    cfg: &TrainConfig,
    step: usize,
) -> Result<f64> {
    let tape = Tape::new();
    let w = net.params().bind(&tape);
    let mut rng = rng::stream(cfg.seed, step as u64);
    let mut mode = Mode {
        training: true,
        dropout: cfg.dropout,
        rng: &mut rng,
    };
    let pred = net.forward(tape.constant(x), &w, cfg.leaky_slope, &mut mode)?;
    let loss = loss_unet(pred, tape.constant(y))?;
    let value = loss.value().item() as f64;
    let grads = tape.backward(loss)?;
    let params = net.params_mut();
    params.zero_grad();
    params.accumulate(&grads, &w)?;
    adam.step(params)?;
    Ok(value)
}

fn fit(
    net: &mut UNet<f32>,
    data: &Dataset,
    cfg: &TrainConfig,
    max_steps: Option<usize>,
    input: impl Fn(&Example) -> &[f32],
) -> Result<Vec<LossRecord>> {
    let mut adam = Adam::new(cfg.learning_rate, net.params())?;
    schedule(data, cfg, max_steps)?
        .into_iter()
        .enumerate()
        .map(|(k, (epoch, batch))| {
            let x = data.batch(&batch, &input);
            let y = data.batch(&batch, |e| &e.depth);
            let loss = unet_step(net, &mut adam, x, y, cfg, k + 1)?;
            Ok(LossRecord {
                step: k + 1,
                epoch,
                loss,
                loss_d: None,
                loss_g: None,
            })
        })
        .collect()
}

/// Low-res fringe to depth in one network.
pub fn train_end_to_end(
    data: &Dataset,
    unet_cfg: &UNetConfig,
    cfg: &TrainConfig,
    opts: &TrainOptions,
) -> Result<EndToEnd> {
    check_resolution(data, unet_cfg)?;
    let mut unet = UNet::new(*unet_cfg, cfg.seed)?;
    let losses = fit(&mut unet, data, cfg, opts.max_steps, |e| &e.input)?;
    Ok(EndToEnd { unet, losses })
}

/// Adversarial fringe super-resolution, then fringe-to-depth retrieval
/// trained on ground-truth high-res fringes.
pub fn train_two_stage(
    data: &Dataset,
    gen_cfg: &UNetConfig,
    disc_cfg: &DiscriminatorConfig,
    unet_cfg: &UNetConfig,
    cfg: &TrainConfig,
    opts: &TrainOptions,
) -> Result<TwoStage> {
    check_resolution(data, gen_cfg)?;
    check_resolution(data, unet_cfg)?;
    if disc_cfg.resolution != data.canonical || disc_cfg.in_channels != 2 {
        return Err(Error::Config(
            "discriminator must take two channels at the data resolution".into(),
        ));
    }
    let mut gen = UNet::<f32>::new(*gen_cfg, cfg.seed)?;
    let mut disc = match &opts.discriminator {
        Some(d) => d.clone(),
        None => Discriminator::new(*disc_cfg, cfg.seed)?,
    };
    let mut adam_g = Adam::new(cfg.learning_rate, gen.params())?;
    let mut adam_d = Adam::new(cfg.learning_rate, disc.params())?;
    let slope = cfg.leaky_slope;

    let mut stage1 = Vec::new();
    for (k, (epoch, batch)) in schedule(data, cfg, opts.max_steps)?.into_iter().enumerate() {
        let step = k + 1;
        let z = data.batch(&batch, |e| &e.input);
        let real = data.batch(&batch, |e| &e.fringe);

        let loss_d = {
            let tape = Tape::new();
            let gw = gen.params().bind_frozen(&tape);
            let dw = if opts.freeze_discriminator {
                disc.params().bind_frozen(&tape)
            } else {
                disc.params().bind(&tape)
            };
            let mut rng = rng::stream(cfg.seed, step as u64);
            let mut mode = Mode {
                training: true,
                dropout: cfg.dropout,
                rng: &mut rng,
            };
            let zv = tape.constant(z.clone());
            let fake = gen.forward(zv, &gw, slope, &mut mode)?;
            let fake = tape.constant((*fake.value()).clone());
            let s_real = disc.forward(zv, tape.constant(real.clone()), &dw, slope)?;
            let s_fake = disc.forward(zv, fake, &dw, slope)?;
            let loss = loss_discriminator(&tape, s_real, s_fake)?;
            let value = loss.value().item() as f64;
            if !opts.freeze_discriminator {
                let grads = tape.backward(loss)?;
                let p = disc.params_mut();
                p.zero_grad();
                p.accumulate(&grads, &dw)?;
                adam_d.step(p)?;
            }
            value
        };

        let (loss_g, term) = {
            let tape = Tape::new();
            let gw = gen.params().bind(&tape);
            let dw = disc.params().bind_frozen(&tape);
            let mut rng = rng::stream(cfg.seed, step as u64);
            let mut mode = Mode {
                training: true,
                dropout: cfg.dropout,
                rng: &mut rng,
            };
            let zv = tape.constant(z);
            let realv = tape.constant(real);
            let fake = gen.forward(zv, &gw, slope, &mut mode)?;
            let score = disc.forward(zv, fake, &dw, slope)?;
            let term = loss_unet(fake, realv)?.value().item() as f64;
            let loss = loss_generator(&tape, score, fake, realv)?;
            let value = loss.value().item() as f64;
            let grads = tape.backward(loss)?;
            let p = gen.params_mut();
            p.zero_grad();
            p.accumulate(&grads, &gw)?;
            adam_g.step(p)?;
            (value, term)
        };

        stage1.push(LossRecord {
            step,
            epoch,
            loss: term,
            loss_d: Some(loss_d),
            loss_g: Some(loss_g),
        });
    }

    let mut depth_net = UNet::new(*unet_cfg, cfg.seed.wrapping_add(1))?;
    let stage2 = fit(&mut depth_net, data, cfg, opts.max_steps, |e| &e.fringe)?;
    Ok(TwoStage {
        generator: gen,
        discriminator: disc,
        depth_net,
        stage1,
        stage2,
    })
}

/// Mean loss of the last `window` records.
pub fn smoothed(records: &[LossRecord], window: usize) -> f64 {
    let tail = &records[records.len().saturating_sub(window)..];
    tail.iter().map(|r| r.loss).sum::<f64>() / tail.len().max(1) as f64
}

/// Mean loss of the first `window` records.
pub fn initial(records: &[LossRecord], window: usize) -> f64 {
    let head = &records[..window.min(records.len())];
    head.iter().map(|r| r.loss).sum::<f64>() / head.len().max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifest::build_manifest;
    use crate::pipeline::{synthesize, SynthConfig};
    use crate::scene::SceneSpec;

    fn small_data(n: usize, size: usize) -> Dataset {
        let specs: Vec<_> = (0..n as u64).map(|i| SceneSpec::random(i, size, size)).collect();
        let m = build_manifest(&specs, 0.5, 1).unwrap();
        let cfg = SynthConfig {
            size,
            ..SynthConfig::default()
        };
        let mut d = Dataset::new(size);
        for e in &m.entries {
            d.push_synthesized(e, &synthesize(e, &cfg, 1).unwrap()).unwrap();
        }
        d
    }

    fn small_unet() -> UNetConfig {
        UNetConfig {
            levels: 2,
            base_channels: 2,
            resolution: 16,
            dropout_blocks: 1,
            ..UNetConfig::desk()
        }
    }

    #[test]
    fn first_step_logs_initial_forward_loss() {
        let data = small_data(1, 16);
        let cfg = TrainConfig::default();
        let out = train_end_to_end(&data, &small_unet(), &cfg, &TrainOptions { max_steps: Some(1), ..Default::default() }).unwrap();
        assert_eq!(out.losses.len(), 1);

        let net = UNet::<f32>::new(small_unet(), cfg.seed).unwrap();
        let tape = Tape::new();
        let w = net.params().bind(&tape);
        let mut rng = rng::stream(cfg.seed, 1);
        let mut mode = Mode { training: true, dropout: cfg.dropout, rng: &mut rng };
        let idx = vec![0; 8];
        let pred = net.forward(tape.constant(data.batch(&idx, |e| &e.input)), &w, 0.2, &mut mode).unwrap();
        let loss = loss_unet(pred, tape.constant(data.batch(&idx, |e| &e.depth))).unwrap();
        assert_eq!(out.losses[0].loss, loss.value().item() as f64);
    }

    #[test]
    fn empty_data_is_data_error() {
        let err = train_end_to_end(&Dataset::new(16), &small_unet(), &TrainConfig::default(), &TrainOptions::default()).unwrap_err();
        assert_eq!(err.kind(), "data");
    }

    #[test]
    fn two_stage_logs_finite_losses() {
        let data = small_data(4, 16);
        let disc = DiscriminatorConfig { layers: 2, resolution: 16, ..DiscriminatorConfig::desk() };
        let out = train_two_stage(
            &data,
            &small_unet(),
            &disc,
            &small_unet(),
            &TrainConfig::default(),
            &TrainOptions { max_steps: Some(3), ..Default::default() },
        )
        .unwrap();
        assert_eq!(out.stage1.len(), 3);
        assert_eq!(out.stage2.len(), 3);
        for r in &out.stage1 {
            assert!(r.loss.is_finite() && r.loss_d.unwrap().is_finite() && r.loss_g.unwrap().is_finite());
        }
    }
}
