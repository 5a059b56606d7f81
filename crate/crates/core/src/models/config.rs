use crate::error::{Error, Result};
use crate::formats::KeyValues;
use crate::manifest::RateMix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UNetConfig {
    /// Number of stride-2 encoder blocks, mirrored by the decoder.
    pub levels: usize,
    pub base_channels: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    /// Square input side in pixels.
    pub resolution: usize,
    /// Innermost decoder blocks that apply dropout, capped at `levels`.
    pub dropout_blocks: usize,
}

impl UNetConfig {
    /// CPU-sized network used by default.
    pub fn desk() -> Self {
        Self {
            levels: 4,
            base_channels: 8,
            in_channels: 1,
            out_channels: 1,
            resolution: 64,
            dropout_blocks: 1,
        }
    }

    /// Six-level topology reaching a 1x1 bottleneck at 64x64.
    pub fn paper() -> Self {
        Self {
            levels: 6,
            base_channels: 64,
            dropout_blocks: 3,
            ..Self::desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.levels == 0 {
            return bad("U-Net needs at least one level".into());
        }
        if self.base_channels == 0 || self.in_channels == 0 || self.out_channels == 0 {
            return bad("channel counts must be positive".into());
        }
        if self.levels >= usize::BITS as usize || !self.resolution.is_multiple_of(1 << self.levels) || self.resolution == 0 {
            return bad(format!(
                "resolution {} not divisible by 2^{}",
                self.resolution, self.levels
            ));
        }
        Ok(())
    }

    /// Channels after encoder block `i` (1-based); index 0 is the input.
    pub fn channels(&self, i: usize) -> usize {
        if i == 0 {
            self.in_channels
        } else {
            (self.base_channels << (i - 1)).min(8 * self.base_channels)
        }
    }

    pub fn bottleneck(&self) -> usize {
        self.resolution >> self.levels
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiscriminatorConfig {
    pub layers: usize,
    pub base_channels: usize,
    /// Condition plus candidate image channels.
    pub in_channels: usize,
    pub resolution: usize,
}

impl DiscriminatorConfig {
    pub fn desk() -> Self {
        Self {
            layers: 3,
            base_channels: 8,
            in_channels: 2,
            resolution: 64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.base_channels == 0 || self.in_channels == 0 {
            return Err(Error::Config("discriminator needs positive layers and channels".into()));
        }
        if self.layers >= usize::BITS as usize || !self.resolution.is_multiple_of(1 << self.layers) || self.resolution >> self.layers == 0 {
            return Err(Error::Config(format!(
                "resolution {} does not survive {} stride-2 layers",
                self.resolution, self.layers
            )));
        }
        if self.patch_size() >= self.resolution {
            return Err(Error::Config(format!(
                "patch size {} not below resolution {}",
                self.patch_size(),
                self.resolution
            )));
        }
        Ok(())
    }

    /// Output channels of layer `i` (0-based); the last layer emits one score.
    pub fn channels(&self, i: usize) -> usize {
        if i + 1 == self.layers {
            1
        } else {
            (self.base_channels << i).min(8 * self.base_channels)
        }
    }

    /// Receptive field of one score in input pixels.
    pub fn patch_size(&self) -> usize {
        // each 4x4 stride-2 layer adds 3 * (product of earlier strides)
        1 + 3 * ((1 << self.layers) - 1)
    }

    pub fn score_side(&self) -> usize {
        self.resolution >> self.layers
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub dropout: f64,
    pub leaky_slope: f64,
    pub rate_mix: RateMix,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            batch_size: 8,
            epochs: 20,
            dropout: 0.5,
            leaky_slope: 0.2,
            rate_mix: RateMix::default(),
            seed: 0,
        }
    }
}

pub const TRAIN_KEYS: [&str; 7] = [
    "learning_rate",
    "batch_size",
    "epochs",
    "dropout",
    "leaky_slope",
    "rate_mix",
    "seed",
];

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate {} must be positive", self.learning_rate));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return bad("batch_size and epochs must be positive".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} outside [0, 1)", self.dropout));
        }
        if !(0.0..1.0).contains(&self.leaky_slope) {
            return bad(format!("leaky_slope {} outside [0, 1)", self.leaky_slope));
        }
        self.rate_mix.validate()
    }

    /// Overrides fields present in `kv`; unknown keys are rejected.
    pub fn apply(&mut self, kv: &KeyValues) -> Result<()> {
        kv.check_keys(&TRAIN_KEYS)?;
        if let Some(v) = kv.parsed("learning_rate")? {
            self.learning_rate = v;
        }
        if let Some(v) = kv.parsed("batch_size")? {
            self.batch_size = v;
        }
        if let Some(v) = kv.parsed("epochs")? {
            self.epochs = v;
        }
        if let Some(v) = kv.parsed("dropout")? {
            self.dropout = v;
        }
        if let Some(v) = kv.parsed("leaky_slope")? {
            self.leaky_slope = v;
        }
        if let Some(v) = kv.get("rate_mix") {
            self.rate_mix = v.parse()?;
        }
        if let Some(v) = kv.parsed("seed")? {
            self.seed = v;
        }
        self.validate()
    }

    pub fn to_key_values(&self) -> KeyValues {
        let mut kv = KeyValues::default();
        kv.set("learning_rate", self.learning_rate);
        kv.set("batch_size", self.batch_size);
        kv.set("epochs", self.epochs);
        kv.set("dropout", self.dropout);
        kv.set("leaky_slope", self.leaky_slope);
        kv.set("rate_mix", self.rate_mix);
        kv.set("seed", self.seed);
        kv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let t = TrainConfig::default();
        assert_eq!(t.learning_rate, 0.0001);
        assert_eq!(t.batch_size, 8);
        assert_eq!(t.epochs, 20);
        assert_eq!(t.dropout, 0.5);
        assert_eq!(t.leaky_slope, 0.2);
        assert_eq!(t.rate_mix, RateMix([1, 1, 2]));
        assert_eq!(UNetConfig::paper().bottleneck(), 1);
        assert_eq!(UNetConfig::desk().bottleneck(), 4);
    }

    #[test]
    fn key_value_round_trip() {
        let mut t = TrainConfig {
            learning_rate: 3e-4,
            seed: 9,
            rate_mix: RateMix([2, 1, 1]),
            ..TrainConfig::default()
        };
        let kv = t.to_key_values();
        let mut back = TrainConfig::default();
        back.apply(&kv).unwrap();
        assert_eq!(back, t);
        t.dropout = 1.0;
        assert!(t.validate().is_err());
        let mut kv = KeyValues::default();
        kv.set("momentum", 0.9);
        assert!(TrainConfig::default().apply(&kv).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(UNetConfig { resolution: 60, ..UNetConfig::desk() }.validate().is_err());
        assert!(UNetConfig { levels: 0, ..UNetConfig::desk() }.validate().is_err());
        assert!(UNetConfig::paper().validate().is_ok());
        let d = DiscriminatorConfig::desk();
        assert!(d.validate().is_ok());
        assert_eq!(d.score_side(), 8);
        assert_eq!(d.patch_size(), 22);
        assert!(DiscriminatorConfig { resolution: 16, ..d }.validate().is_err());
    }
}
