//! Reverse-mode differentiation and Adam: fits a 3x3 convolution to a known
//! kernel by minimizing mean squared error.
//!
//! `cargo run -p spi-tensor --example autodiff`

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spi_tensor::{Adam, ParamSet, Tape, Tensor};

fn main() -> spi_tensor::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let target = Tensor::<f64>::from_fn([1, 1, 3, 3], |i| [0.0, -1.0, 0.0, -1.0, 4.0, -1.0, 0.0, -1.0, 0.0][i]);
    let x = Tensor::<f64>::from_fn([4, 1, 12, 12], |_| rng.random());
    let y = {
        let tape = Tape::new();
        (*tape.constant(x.clone()).conv2d(tape.constant(target.clone()), None, 1, 1)?.value()).clone()
    };

    let mut params = ParamSet::new();
    params.push("kernel", Tensor::zeros([1, 1, 3, 3]));
    let mut adam = Adam::new(0.05, &params)?;
    for step in 0..=300 {
        let tape = Tape::new();
        let w = params.bind(&tape);
        let loss = tape.constant(x.clone()).conv2d(w[0], None, 1, 1)?.mse(tape.constant(y.clone()))?;
        if step % 50 == 0 {
            println!("step {step:>3}: mse {:.3e}", loss.value().item());
        }
        let grads = tape.backward(loss)?;
        params.zero_grad();
        params.accumulate(&grads, &w)?;
        adam.step(&mut params)?;
    }
    let fitted: Vec<String> = params.get(0).value.data().iter().map(|v| format!("{v:+.3}")).collect();
    println!("fitted kernel: {}", fitted.join(" "));
    Ok(())
}
