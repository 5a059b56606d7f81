use crate::error::{shape_err, Result, TensorError};
use crate::{ParamSet, Scalar, Tensor};

/// Bias-corrected ADAM.
#[derive(Debug, Clone)]
pub struct Adam<S> {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    first: Vec<Tensor<S>>,
    second: Vec<Tensor<S>>,
}

impl<S: Scalar> Adam<S> {
    /// Moments sized for `params`; betas 0.9 / 0.999 and eps 1e-8.
    pub fn new(lr: f64, params: &ParamSet<S>) -> Result<Self> {
        Self::with_betas(lr, 0.9, 0.999, 1e-8, params)
    }

    pub fn with_betas(
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
        params: &ParamSet<S>,
    ) -> Result<Self> {
        if !(lr > 0.0) || !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) || !(eps > 0.0)
        {
            return Err(TensorError::Parameter(format!(
                "adam lr={lr} beta1={beta1} beta2={beta2} eps={eps}"
            )));
        }
        let zeros = || params.iter().map(|p| Tensor::zeros(p.value.shape().to_vec())).collect();
        Ok(Self {
            lr,
            beta1,
            beta2,
            eps,
            step: 0,
            first: zeros(),
            second: zeros(),
        })
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Applies one update from the gradients currently accumulated in `params`.
    pub fn step(&mut self, params: &mut ParamSet<S>) -> Result<()> {
        if params.len() != self.first.len() {
            return Err(shape_err(
                "adam",
                format!("{} params for {} moment slots", params.len(), self.first.len()),
            ));
        }
        self.step += 1;
        let t = self.step as i32;
        let (b1, b2) = (S::of(self.beta1), S::of(self.beta2));
        let c1 = S::of(1.0 - self.beta1.powi(t));
        let c2 = S::of(1.0 - self.beta2.powi(t));
        let (lr, eps) = (S::of(self.lr), S::of(self.eps));
        for ((p, m), v) in params.iter_mut().zip(&mut self.first).zip(&mut self.second) {
            if m.shape() != p.value.shape() {
                return Err(shape_err("adam", format!("moment shape for {}", p.name)));
            }
            let grad = p.grad.data();
            let value = p.value.data_mut();
            for (i, &g) in grad.iter().enumerate() {
                let mi = b1 * m.data()[i] + (S::one() - b1) * g;
                let vi = b2 * v.data()[i] + (S::one() - b2) * g * g;
                m.data_mut()[i] = mi;
                v.data_mut()[i] = vi;
                let m_hat = mi / c1;
                let v_hat = vi / c2;
                value[i] = value[i] - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}
