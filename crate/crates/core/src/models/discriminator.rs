//! Patch discriminator: stacked 4x4 stride-2 convolutions over the channel
//! concatenation of condition and candidate, ending in a one-channel score
//! map with no squashing.

use spi_tensor::{ParamSet, Scalar, Var};

use super::config::DiscriminatorConfig;
use super::unet::push_conv;
use crate::error::Result;
use crate::rng;

#[derive(Debug, Clone)]
pub struct Discriminator<S: Scalar = f32> {
    cfg: DiscriminatorConfig,
    params: ParamSet<S>,
}

impl<S: Scalar> Discriminator<S> {
    pub fn new(cfg: DiscriminatorConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = rng::stream(seed, 1);
        let mut params = ParamSet::new();
        for i in 0..cfg.layers {
            let input = if i == 0 { cfg.in_channels } else { cfg.channels(i - 1) };
            push_conv(&mut params, &mut rng, &format!("disc{i}"), cfg.channels(i), input, 4);
        }
        Ok(Self { cfg, params })
    }

    pub fn config(&self) -> &DiscriminatorConfig {
        &self.cfg
    }

    pub fn params(&self) -> &ParamSet<S> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet<S> {
        &mut self.params
    }

    /// Score map for `candidate` conditioned on `condition`.
    pub fn forward<'t>(
        &self,
        condition: Var<'t, S>,
        candidate: Var<'t, S>,
        w: &[Var<'t, S>],
        slope: f64,
    ) -> Result<Var<'t, S>> {
        let mut h = condition.concat(candidate)?;
        for i in 0..self.cfg.layers {
            h = h.conv2d(w[2 * i], Some(w[2 * i + 1]), 2, 1)?;
            if i + 1 < self.cfg.layers {
                h = h.leaky_relu(S::of(slope))?;
            }
        }
        Ok(h)
    }
}
