//! Deterministic inference from checkpoints.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use spi_tensor::{Checkpoint, Tape, Tensor};

use super::config::UNetConfig;
use super::data::{prepare_input, tensor_grid};
use super::unet::{Mode, UNet};
use crate::error::{Error, Result};
use crate::grid::{DepthMap, FringeImage, FringeKind, LowResFringe};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Approach {
    #[serde(rename = "e2e")]
    EndToEnd,
    TwoStage,
}

impl std::str::FromStr for Approach {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e2e" => Ok(Approach::EndToEnd),
            "two-stage" => Ok(Approach::TwoStage),
            _ => Err(Error::Parameter(format!("unknown approach `{s}`"))),
        }
    }
}

impl std::fmt::Display for Approach {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Approach::EndToEnd => "e2e",
            Approach::TwoStage => "two-stage",
        })
    }
}

/// Trained networks for one approach.
#[derive(Debug, Clone)]
pub enum Reconstructor {
    EndToEnd(UNet<f32>),
    TwoStage { generator: UNet<f32>, depth_net: UNet<f32> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub depth: DepthMap,
    /// Super-resolved fringe of the two-stage approach.
    pub fringe: Option<FringeImage>,
}

/// Builds a network of topology `cfg` holding the weights in `ckpt`.
pub fn unet_from_checkpoint(cfg: UNetConfig, ckpt: &Checkpoint) -> Result<UNet<f32>> {
    let mut net = UNet::new(cfg, 0)?;
    ckpt.restore(net.params_mut())?;
    Ok(net)
}

pub fn load_unet(cfg: UNetConfig, path: impl AsRef<Path>) -> Result<UNet<f32>> {
    unet_from_checkpoint(cfg, &Checkpoint::load(path)?)
}

/// Eval-mode forward pass clamped to `[0, 1]`, as a grid.
fn run(net: &UNet<f32>, x: Tensor<f32>, slope: f64) -> Result<crate::grid::Grid> {
    let tape = Tape::new();
    let w = net.params().bind_frozen(&tape);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut mode = Mode {
        training: false,
        dropout: 0.0,
        rng: &mut rng,
    };
    let y = net.forward(tape.constant(x), &w, slope, &mut mode)?;
    Ok(tensor_grid(&y.value(), 0)?.map(|v| v.clamp(0.0, 1.0)))
}

impl Reconstructor {
    pub fn approach(&self) -> Approach {
        match self {
            Reconstructor::EndToEnd(_) => Approach::EndToEnd,
            Reconstructor::TwoStage { .. } => Approach::TwoStage,
        }
    }

    fn resolution(&self) -> usize {
        match self {
            Reconstructor::EndToEnd(n) => n.config().resolution,
            Reconstructor::TwoStage { generator, .. } => generator.config().resolution,
        }
    }

    pub fn infer(&self, lowres: &LowResFringe, slope: f64) -> Result<Reconstruction> {
        let x = prepare_input::<f32>(lowres, self.resolution())?;
        match self {
            Reconstructor::EndToEnd(net) => Ok(Reconstruction {
                depth: DepthMap::new(run(net, x, slope)?)?,
                fringe: None,
            }),
            Reconstructor::TwoStage { generator, depth_net } => {
                let fringe = run(generator, x, slope)?;
                let depth = run(depth_net, super::data::grid_tensor(&fringe), slope)?;
                Ok(Reconstruction {
                    depth: DepthMap::new(depth)?,
                    fringe: Some(FringeImage::new(fringe, FringeKind::Continuous)?),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, LowResKind};

    fn cfg() -> UNetConfig {
        UNetConfig { levels: 2, base_channels: 2, resolution: 16, ..UNetConfig::desk() }
    }

    #[test]
    fn deterministic_and_canonical_size() {
        let lo = LowResFringe::new(Grid::from_fn(8, 8, |r, c| ((r + c) % 2) as f64), LowResKind::Binary).unwrap();
        let r = Reconstructor::TwoStage {
            generator: UNet::new(cfg(), 1).unwrap(),
            depth_net: UNet::new(cfg(), 2).unwrap(),
        };
        let a = r.infer(&lo, 0.2).unwrap();
        assert_eq!(a, r.infer(&lo, 0.2).unwrap());
        assert_eq!(a.depth.grid().dims(), (16, 16));
        assert!(a.fringe.is_some());
        let e = Reconstructor::EndToEnd(UNet::new(cfg(), 1).unwrap());
        assert!(e.infer(&lo, 0.2).unwrap().fringe.is_none());
    }

    #[test]
    fn checkpoint_topology_mismatch_is_load_error() {
        let net = UNet::<f32>::new(cfg(), 1).unwrap();
        let ckpt = Checkpoint::from_params(net.params());
        assert!(unet_from_checkpoint(cfg(), &ckpt).is_ok());
        let other = UNetConfig { base_channels: 4, ..cfg() };
        assert_eq!(unet_from_checkpoint(other, &ckpt).unwrap_err().kind(), "load");
    }

    #[test]
    fn approach_names() {
        assert_eq!("e2e".parse::<Approach>().unwrap(), Approach::EndToEnd);
        assert_eq!("two-stage".parse::<Approach>().unwrap().to_string(), "two-stage");
        assert!("gan".parse::<Approach>().is_err());
    }
}
