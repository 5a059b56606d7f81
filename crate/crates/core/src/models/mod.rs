//! Learned reconstruction: the encoder-decoder, the patch discriminator,
//! their objectives and training loops.

pub mod config;
pub mod data;
pub mod discriminator;
pub mod infer;
pub mod losses;
pub mod train;
pub mod unet;

pub use config::{DiscriminatorConfig, TrainConfig, UNetConfig};
pub use data::{prepare_input, Dataset};
pub use discriminator::Discriminator;
pub use infer::{Approach, Reconstruction, Reconstructor};
pub use losses::{loss_discriminator, loss_generator, loss_unet};
pub use train::{train_end_to_end, train_two_stage, TrainOptions};
pub use unet::{Mode, UNet};
