use spi_tensor::{Scalar, Tape, Tensor, Var};

use crate::error::Result;

/// Weight of the structural term in the generator objective.
pub const SSIM_WEIGHT: f64 = 100.0;

/// `1 - ssim(pred, real)`.
pub fn loss_unet<'t, S: Scalar>(pred: Var<'t, S>, real: Var<'t, S>) -> Result<Var<'t, S>> {
    Ok(pred.ssim(real)?.affine(-S::one(), S::one())?)
}

fn filled<'t, S: Scalar>(tape: &'t Tape<S>, like: Var<'t, S>, v: f64) -> Var<'t, S> {
    tape.constant(Tensor::full(like.shape(), S::of(v)))
}

/// `mse(disc_out, 1) + 100 (1 - ssim(gen_out, real))`.
pub fn loss_generator<'t, S: Scalar>(
    tape: &'t Tape<S>,
    disc_out: Var<'t, S>,
    gen_out: Var<'t, S>,
    real: Var<'t, S>,
) -> Result<Var<'t, S>> {
    let adversarial = disc_out.mse(filled(tape, disc_out, 1.0))?;
    let structure = loss_unet(gen_out, real)?.affine(S::of(SSIM_WEIGHT), S::zero())?;
    Ok(adversarial.add(structure)?)
}

/// Least-squares objective: `mse(real, 1) + mse(fake, 0)`.
pub fn loss_discriminator<'t, S: Scalar>(
    tape: &'t Tape<S>,
    score_real: Var<'t, S>,
    score_fake: Var<'t, S>,
) -> Result<Var<'t, S>> {
    let real = score_real.mse(filled(tape, score_real, 1.0))?;
    let fake = score_fake.mse(filled(tape, score_fake, 0.0))?;
    Ok(real.add(fake)?)
}
