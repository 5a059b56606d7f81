//! Minimal CPU tensor engine with tape-based reverse-mode differentiation.
//!
//! Provides exactly the operations needed by small encoder-decoder and
//! patch-discriminator networks: strided 2-D convolution, leaky ReLU, sigmoid,
//! inverted dropout, nearest-neighbour upsampling, channel concatenation, MSE
//! and a differentiable whole-image SSIM, plus an ADAM optimizer and a compact
//! binary checkpoint format.
//!
//! ```
//! use spi_tensor::{Tape, Tensor};
//!
//! let tape = Tape::<f64>::new();
//! let x = tape.var(Tensor::new([2], vec![1.0, 2.0]).unwrap());
//! let target = tape.constant(Tensor::zeros([2]));
//! let loss = x.mse(target).unwrap();
//! let grads = tape.backward(loss).unwrap();
//! assert_eq!(grads.get(x).unwrap().data(), &[1.0, 2.0]);
//! ```

mod adam;
mod checkpoint;
mod error;
pub mod kernels;
mod param;
mod scalar;
mod tape;
mod tensor;

pub use adam::Adam;
pub use checkpoint::{Checkpoint, MAGIC, VERSION};
pub use error::{Result, TensorError};
pub use kernels::{global_ssim, pair_stats, PairStats, SSIM_C1, SSIM_C2};
pub use param::{Param, ParamSet};
pub use scalar::Scalar;
pub use tape::{Gradients, Tape, Var};
pub use tensor::Tensor;
