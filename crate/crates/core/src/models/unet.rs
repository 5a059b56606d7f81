//! Encoder-decoder with skip connections.
//!
//! Encoder block `i` halves the resolution with a 3x3 stride-2 convolution
//! and leaky ReLU. Decoder block `i` doubles it with nearest-neighbour
//! upsampling, a 3x3 convolution and ReLU, then concatenates the encoder
//! activation of the same scale (the input itself at full scale). A 1x1
//! convolution and sigmoid produce the output.

use rand::Rng;
use spi_tensor::{ParamSet, Scalar, Tensor, Var};

use super::config::UNetConfig;
use crate::error::Result;
use crate::rng;

#[derive(Debug, Clone)]
pub struct UNet<S: Scalar = f32> {
    cfg: UNetConfig,
    params: ParamSet<S>,
}

/// Weights uniform in `[-sqrt(6/fan_in), sqrt(6/fan_in)]`, biases zero.
pub(crate) fn push_conv<S: Scalar>(
    params: &mut ParamSet<S>,
    rng: &mut impl Rng,
    name: &str,
    out_ch: usize,
    in_ch: usize,
    k: usize,
) {
    let bound = (6.0 / (in_ch * k * k) as f64).sqrt();
    params.push(
        format!("{name}.weight"),
        Tensor::from_fn([out_ch, in_ch, k, k], |_| S::of(rng.random_range(-bound..bound))),
    );
    params.push(format!("{name}.bias"), Tensor::zeros([out_ch]));
}

/// Inference or training behaviour of stochastic layers.
pub struct Mode<'r, R> {
    pub training: bool,
    pub dropout: f64,
    pub rng: &'r mut R,
}

impl<S: Scalar> UNet<S> {
    pub fn new(cfg: UNetConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = rng::stream(seed, 0);
        let mut params = ParamSet::new();
        for i in 1..=cfg.levels {
            push_conv(&mut params, &mut rng, &format!("enc{i}"), cfg.channels(i), cfg.channels(i - 1), 3);
        }
        for i in (1..=cfg.levels).rev() {
            let (input, output) = Self::decoder_channels(&cfg, i);
            push_conv(&mut params, &mut rng, &format!("dec{i}"), output, input, 3);
        }
        push_conv(
            &mut params,
            &mut rng,
            "head",
            cfg.out_channels,
            cfg.base_channels + cfg.in_channels,
            1,
        );
        Ok(Self { cfg, params })
    }

    fn decoder_channels(cfg: &UNetConfig, i: usize) -> (usize, usize) {
        let input = if i == cfg.levels {
            cfg.channels(i)
        } else {
            2 * cfg.channels(i)
        };
        let output = if i == 1 { cfg.base_channels } else { cfg.channels(i - 1) };
        (input, output)
    }

    pub fn config(&self) -> &UNetConfig {
        &self.cfg
    }

    pub fn params(&self) -> &ParamSet<S> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet<S> {
        &mut self.params
    }

    /// Runs the network on `x` of shape `[batch, in_channels, res, res]` with
    /// weights `w` bound from [`UNet::params`] in order.
    pub fn forward<'t, R: Rng>(
        &self,
        x: Var<'t, S>,
        w: &[Var<'t, S>],
        slope: f64,
        mode: &mut Mode<'_, R>,
    ) -> Result<Var<'t, S>> {
        let l = self.cfg.levels;
        let slope = S::of(slope);
        let conv = |h: Var<'t, S>, k: usize, stride, pad| h.conv2d(w[2 * k], Some(w[2 * k + 1]), stride, pad);

        let mut skips = vec![x];
        let mut h = x;
        for i in 0..l {
            h = conv(h, i, 2, 1)?.leaky_relu(slope)?;
            skips.push(h);
        }
        for (j, i) in (1..=l).rev().enumerate() {
            h = conv(h.upsample_nearest(2, 2)?, l + j, 1, 1)?.relu()?;
            if j < self.cfg.dropout_blocks {
                h = h.dropout(mode.dropout, mode.training, mode.rng)?;
            }
            h = h.concat(skips[i - 1])?;
        }
        Ok(conv(h, 2 * l, 1, 0)?.sigmoid()?)
    }
}
