use crate::error::{shape_err, Result};
use crate::tape::{Gradients, Tape, Var};
use crate::{Scalar, Tensor};

/// A named trainable tensor with its gradient accumulator.
#[derive(Debug, Clone)]
pub struct Param<S> {
    pub name: String,
    pub value: Tensor<S>,
    pub grad: Tensor<S>,
}

impl<S: Scalar> Param<S> {
    pub fn new(name: impl Into<String>, value: Tensor<S>) -> Self {
        let grad = Tensor::zeros(value.shape().to_vec());
        Self {
            name: name.into(),
            value,
            grad,
        }
    }
}

/// Ordered collection of parameters. Order is significant: models address
/// their parameters by index and checkpoints store them in this order.
#[derive(Debug, Clone, Default)]
pub struct ParamSet<S> {
    params: Vec<Param<S>>,
}

impl<S: Scalar> ParamSet<S> {
    pub fn new() -> Self {
        Self { params: Vec::new() }
    }

    /// Appends a parameter and returns its index.
    pub fn push(&mut self, name: impl Into<String>, value: Tensor<S>) -> usize {
        self.params.push(Param::new(name, value));
        self.params.len() - 1
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Param<S>> {
        self.params.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Param<S>> {
        self.params.iter_mut()
    }

    pub fn get(&self, index: usize) -> &Param<S> {
        &self.params[index]
    }

    pub fn get_mut(&mut self, index: usize) -> &mut Param<S> {
        &mut self.params[index]
    }

    /// Total number of scalar weights.
    pub fn numel(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    /// Records every parameter on `tape` as a differentiable leaf.
    pub fn bind<'t>(&self, tape: &'t Tape<S>) -> Vec<Var<'t, S>> {
        self.params.iter().map(|p| tape.var(p.value.clone())).collect()
    }

    /// Records every parameter as a constant (no gradient), e.g. a frozen network.
    pub fn bind_frozen<'t>(&self, tape: &'t Tape<S>) -> Vec<Var<'t, S>> {
        self.params
            .iter()
            .map(|p| tape.constant(p.value.clone()))
            .collect()
    }

    /// Adds the gradients of `bound` (as returned by [`ParamSet::bind`]) into
    /// the accumulators. Repeated calls accumulate.
    pub fn accumulate(&mut self, grads: &Gradients<S>, bound: &[Var<'_, S>]) -> Result<()> {
        if bound.len() != self.params.len() {
            return Err(shape_err(
                "accumulate",
                format!("{} bound vars for {} params", bound.len(), self.params.len()),
            ));
        }
        for (p, v) in self.params.iter_mut().zip(bound) {
            if let Some(g) = grads.get(*v) {
                p.grad.add_assign(g);
            }
        }
        Ok(())
    }

    pub fn zero_grad(&mut self) {
        for p in &mut self.params {
            p.grad.data_mut().fill(S::zero());
        }
    }

    pub fn cast<T: Scalar>(&self) -> ParamSet<T> {
        ParamSet {
            params: self
                .params
                .iter()
                .map(|p| Param {
                    name: p.name.clone(),
                    value: p.value.cast(),
                    grad: p.grad.cast(),
                })
                .collect(),
        }
    }
}
